"""Command line entry points.

    depthgate serve   run the counting service with its HTTP API
    depthgate gen     render a synthetic scenario to a replay file
    depthgate count   count a replay file offline and print the totals
    depthgate report  summarize an event log into time buckets

Every long flag that also makes sense in a config file uses the same
spelling there (``--threshold-mm`` on the command line, ``threshold-mm=`` in
the file); flags win over the file. Usage mistakes exit 2, runtime failures
exit 1.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import fields

from . import synth
from .config import ConfigError, ServiceConfig, _parse_rect, load_config
from .http_api import serve_in_thread
from .service import CountingEngine, PipelineRunner, open_source, run_offline
from .store import ReplayFormatError, build_report, read_events, read_replay_header, write_replay


def _rect_flag(raw: str):
    return _parse_rect("roi", raw)


def _add_counting_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="key=value config file")
    p.add_argument("--threshold-mm", type=int, help="foreground depth ceiling (default 1000)")
    p.add_argument("--min-area-frac", type=float, help="ROI activation floor as area fraction")
    p.add_argument("--debounce-frames", type=int, help="frames before a state change publishes")
    p.add_argument("--idle-timeout-frames", type=int, help="idle frames before flags expire")
    p.add_argument("--initial-occupancy", type=int, help="occupancy before the first event")
    p.add_argument("--log-dir", metavar="DIR", help="where logs and snapshots go")
    p.add_argument("--frame-width", type=int, help="expected frame width in px")
    p.add_argument("--frame-height", type=int, help="expected frame height in px")
    p.add_argument("--crossing-axis", choices=("vertical", "horizontal"))
    p.add_argument("--roi1", type=_rect_flag, metavar="X,Y,W,H", help="inside band")
    p.add_argument("--roi2", type=_rect_flag, metavar="X,Y,W,H", help="middle band")
    p.add_argument("--roi3", type=_rect_flag, metavar="X,Y,W,H", help="outside band")
    p.add_argument("--fps", type=int, help="nominal frame rate")


def _overrides(args: argparse.Namespace) -> dict:
    out = {}
    for f in fields(ServiceConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            out[f.name] = value
    return out


def _load(args: argparse.Namespace, parser: argparse.ArgumentParser) -> ServiceConfig:
    try:
        return load_config(args.config, _overrides(args))
    except ConfigError as exc:
        parser.error(str(exc))


def _default_dims_from_replay(args: argparse.Namespace) -> None:
    """A replay file's own dimensions win unless dims were forced by flag."""
    if args.replay_file and args.frame_width is None and args.frame_height is None:
        w, h, _ = read_replay_header(args.replay_file)
        args.frame_width, args.frame_height = w, h


def cmd_serve(args, parser) -> int:
    if args.source == "synthetic" and args.replay_file:
        parser.error("--replay-file contradicts --source synthetic")
    if args.replay_file and args.source is None:
        args.source = "replay"
    try:
        _default_dims_from_replay(args)
        cfg = _load(args, parser)
        layout = cfg.layout()
        source = open_source(cfg, layout)
    except (ReplayFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    engine = CountingEngine(
        layout,
        cfg.segmentation(),
        idle_timeout_frames=cfg.idle_timeout_frames,
        initial_occupancy=cfg.initial_occupancy,
        log_dir=cfg.log_dir,
    )
    runner = PipelineRunner(source, engine, cfg)
    host, port = cfg.listen_addr()
    server, _ = serve_in_thread(runner, host, port)
    runner.start()
    bound = server.server_address
    print(f"serving http://{bound[0]}:{bound[1]}{'' if cfg.paced else ' (unpaced)'}", flush=True)
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        runner.shutdown()
    return 0


def cmd_gen(args, parser) -> int:
    try:
        spec = synth.ScenarioSpec(
            kind=synth.ScenarioKind(args.kind),
            frame_count=args.frames,
            camera_height_mm=args.camera_height_mm,
            person_height_mm=args.person_height_mm,
            head_radius_px=args.head_radius_px,
            speed_px_per_frame=args.speed_px_per_frame,
            start_offset_px=args.start_offset_px,
            noise_sigma_mm=args.noise_sigma_mm,
            dropout_prob=args.dropout_prob,
            rng_seed=args.rng_seed,
        )
    except ValueError as exc:
        parser.error(str(exc))
    from .pipeline import default_layout

    dims = (args.frame_width, args.frame_height)
    layout = default_layout(*dims, args.crossing_axis)
    try:
        if spec.kind in synth._MOVING_KINDS:
            spec = synth.auto_sized(spec, layout, dims)
        frames, expect = synth.generate(spec, layout, dims, fps=args.fps)
        write_replay(frames, args.out)
    except (synth.GenerationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {args.out}: {len(frames)} frames {dims[0]}x{dims[1]} "
        f"kind={spec.kind.value} expecting entries={expect.entries} exits={expect.exits}"
    )
    return 0


def cmd_count(args, parser) -> int:
    args.source = "replay"
    try:
        _default_dims_from_replay(args)
        cfg = _load(args, parser)
        layout = cfg.layout()
        engine = CountingEngine(
            layout,
            cfg.segmentation(),
            idle_timeout_frames=cfg.idle_timeout_frames,
            initial_occupancy=cfg.initial_occupancy,
            log_dir=cfg.log_dir if args.log_dir else None,
        )
        source = open_source(cfg, layout)
        counts = run_offline(iter(source), engine)
    except (ReplayFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"entries={counts.entries} exits={counts.exits} "
        f"regret_enter={counts.regret_enter} regret_exit={counts.regret_exit} "
        f"occupancy={counts.occupancy}"
    )
    return 0


def cmd_report(args, parser) -> int:
    try:
        events = read_events(args.events_file)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read {args.events_file}: {exc}", file=sys.stderr)
        return 1
    to_us = args.to_us
    if to_us is None:
        to_us = events[-1].timestamp_us + 1 if events else 1
    try:
        report = build_report(events, args.from_us, to_us, args.bucket_us)
    except ValueError as exc:
        parser.error(str(exc))
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depthgate",
        description="Bidirectional people counting over overhead depth-frame streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the counting service with its HTTP API")
    _add_counting_flags(p_serve)
    p_serve.add_argument("--listen", metavar="HOST:PORT", help="bind address (default 127.0.0.1:8787)")
    p_serve.add_argument("--source", choices=("synthetic", "replay"))
    p_serve.add_argument("--replay-file", metavar="FILE")
    p_serve.add_argument("--queue-size", type=int, help="frame queue capacity")
    pacing = p_serve.add_mutually_exclusive_group()
    pacing.add_argument(
        "--paced", dest="paced", action="store_true", default=None,
        help="pace frames to their timestamps, shedding backlog (default)",
    )
    pacing.add_argument(
        "--unpaced", dest="paced", action="store_false",
        help="process every frame as fast as possible, never dropping",
    )
    p_serve.set_defaults(func=cmd_serve)

    p_gen = sub.add_parser("gen", help="render a synthetic scenario to a replay file")
    p_gen.add_argument("--kind", required=True, choices=[k.value for k in synth.ScenarioKind])
    p_gen.add_argument("--out", required=True, metavar="FILE")
    p_gen.add_argument("--frames", type=int, default=120,
                       help="frame count for stationary kinds (moving kinds auto-size)")
    p_gen.add_argument("--frame-width", type=int, default=640)
    p_gen.add_argument("--frame-height", type=int, default=480)
    p_gen.add_argument("--crossing-axis", choices=("vertical", "horizontal"), default="vertical")
    p_gen.add_argument("--fps", type=int, default=30)
    p_gen.add_argument("--camera-height-mm", type=int, default=2200)
    p_gen.add_argument("--person-height-mm", type=int, default=1700)
    p_gen.add_argument("--head-radius-px", type=float, default=40.0)
    p_gen.add_argument("--speed-px-per-frame", type=float, default=8.0)
    p_gen.add_argument("--start-offset-px", type=float, default=0.0)
    p_gen.add_argument("--noise-sigma-mm", type=float, default=0.0)
    p_gen.add_argument("--dropout-prob", type=float, default=0.0)
    p_gen.add_argument("--rng-seed", type=int, default=0)
    p_gen.set_defaults(func=cmd_gen)

    p_count = sub.add_parser("count", help="count a replay file offline and print totals")
    _add_counting_flags(p_count)
    p_count.add_argument("--replay-file", required=True, metavar="FILE")
    p_count.set_defaults(func=cmd_count)

    p_report = sub.add_parser("report", help="summarize an event log into time buckets")
    p_report.add_argument("--events-file", required=True, metavar="FILE",
                          help="event log written by serve or count")
    p_report.add_argument("--from", dest="from_us", type=int, default=0, metavar="US")
    p_report.add_argument("--to", dest="to_us", type=int, default=None, metavar="US")
    p_report.add_argument("--bucket", dest="bucket_us", type=int, default=60_000_000, metavar="US")
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
