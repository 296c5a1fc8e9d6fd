"""Thin JSON HTTP surface over a running pipeline.

Handlers never touch counter state directly: reads come from the immutable
status snapshot the processing loop publishes, event pages come from a
lock-guarded copy, and writes travel through the control queue and wait for
the loop's acknowledgement. That keeps the loop the sole owner of mutable
state while requests run on ThreadingHTTPServer worker threads.

Every response is JSON except snapshot images, and every error body has the
shape {"error": {"code": ..., "message": ...}}. CORS is wide open so a
browser dashboard served from anywhere can poll the API.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from .service import CONTROL_ACTIONS, PipelineRunner
from .store import build_report

API_PREFIX = "/api/v1"
DEFAULT_BUCKET_US = 60_000_000


class ApiError(Exception):
    def __init__(self, http_status: int, code: str, message: str):
        super().__init__(message)
        self.http_status = http_status
        self.code = code
        self.message = message


def _bad_request(message: str) -> ApiError:
    return ApiError(400, "bad_request", message)


def _int_param(params: dict, name: str, default: int | None) -> int | None:
    if name not in params:
        return default
    raw = params[name][-1]
    try:
        return int(raw)
    except ValueError:
        raise _bad_request(f"query parameter {name!r} must be an integer, got {raw!r}")


class ApiHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    runner: PipelineRunner  # bound by make_server

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    # -- plumbing ----------------------------------------------------------

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _send_bytes(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, obj) -> None:
        body = json.dumps(obj, sort_keys=True).encode("utf-8")
        self._send_bytes(status, body, "application/json; charset=utf-8")

    def _send_api_error(self, err: ApiError) -> None:
        self._send_json(err.http_status, {"error": {"code": err.code, "message": err.message}})

    def _read_json_body(self) -> dict:
        length = self.headers.get("Content-Length")
        if length is None:
            raise _bad_request("missing request body")
        try:
            raw = self.rfile.read(int(length))
            obj = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            raise _bad_request("request body is not valid JSON")
        if not isinstance(obj, dict):
            raise _bad_request("request body must be a JSON object")
        return obj

    # -- verbs -------------------------------------------------------------

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def _dispatch(self, method: str) -> None:
        try:
            split = urlsplit(self.path)
            path = split.path.rstrip("/") or "/"
            params = parse_qs(split.query)
            route = self._route(method, path)
            if route is None:
                if self._route("POST" if method == "GET" else "GET", path) is not None:
                    raise ApiError(405, "method_not_allowed", f"{method} not allowed on {path}")
                raise ApiError(404, "not_found", f"no such endpoint: {path}")
            route(params)
        except ApiError as err:
            self._send_api_error(err)
        except BrokenPipeError:
            pass
        except Exception as exc:  # keep worker threads alive
            self._send_api_error(ApiError(500, "internal", f"{type(exc).__name__}: {exc}"))

    def _route(self, method: str, path: str):
        if method == "GET":
            if path == f"{API_PREFIX}/status":
                return self._get_status
            if path == f"{API_PREFIX}/counts":
                return self._get_counts
            if path == f"{API_PREFIX}/events":
                return self._get_events
            if path == f"{API_PREFIX}/report":
                return self._get_report
            if path.startswith(f"{API_PREFIX}/snapshots/"):
                snapshot_id = path.rsplit("/", 1)[1]
                return lambda params: self._get_snapshot(snapshot_id)
        elif method == "POST":
            if path == f"{API_PREFIX}/control":
                return self._post_control
        return None

    # -- endpoints ---------------------------------------------------------

    def _get_status(self, params) -> None:
        self._send_json(200, self.runner.status().to_dict())

    def _get_counts(self, params) -> None:
        status = self.runner.status()
        body = status.counts.to_dict()
        body["timestamp_us"] = status.last_timestamp_us
        self._send_json(200, body)

    def _get_events(self, params) -> None:
        since_seq = _int_param(params, "since_seq", 0)
        limit = _int_param(params, "limit", 100)
        if limit < 1 or limit > 1000:
            raise _bad_request("limit must be between 1 and 1000")
        events = self.runner.events_since(since_seq, limit)
        payload = [
            {
                "seq": e.seq,
                "kind": e.kind.value,
                "frame_index": e.frame_index,
                "timestamp_us": e.timestamp_us,
                "counts_after": e.counts_after.to_dict(),
                "snapshot_id": e.snapshot_id,
            }
            for e in events
        ]
        next_seq = events[-1].seq if events else since_seq
        self._send_json(200, {"events": payload, "next_seq": next_seq})

    def _get_report(self, params) -> None:
        status = self.runner.status()
        from_us = _int_param(params, "from", 0)
        to_us = _int_param(params, "to", status.last_timestamp_us + 1)
        bucket_us = _int_param(params, "bucket", DEFAULT_BUCKET_US)
        try:
            report = build_report(self.runner.all_events(), from_us, to_us, bucket_us)
        except ValueError as exc:
            raise _bad_request(str(exc))
        self._send_json(200, report)

    def _get_snapshot(self, snapshot_id: str) -> None:
        data = self.runner.snapshot_bytes(snapshot_id)
        if data is None:
            raise ApiError(404, "not_found", f"no snapshot {snapshot_id!r}")
        self._send_bytes(200, data, "image/x-portable-graymap")

    def _post_control(self, params) -> None:
        body = self._read_json_body()
        action = body.get("action")
        if action not in CONTROL_ACTIONS:
            raise _bad_request(
                f"action must be one of {', '.join(CONTROL_ACTIONS)}, got {action!r}"
            )
        try:
            result = self.runner.control(action)
        except TimeoutError:
            raise ApiError(503, "control_timeout", "processing loop did not acknowledge")
        if not result.get("ok"):
            raise ApiError(500, "control_failed", result.get("error", "control failed"))
        self._send_json(200, {"ok": True, "action": action, "status": self.runner.status().to_dict()})


def make_server(runner: PipelineRunner, host: str, port: int) -> ThreadingHTTPServer:
    handler = type("BoundApiHandler", (ApiHandler,), {"runner": runner})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


def serve_in_thread(runner: PipelineRunner, host: str, port: int):
    """Start the API server on a daemon thread; returns (server, thread)."""
    server = make_server(runner, host, port)
    thread = threading.Thread(target=server.serve_forever, name="depthgate-http", daemon=True)
    thread.start()
    return server, thread
