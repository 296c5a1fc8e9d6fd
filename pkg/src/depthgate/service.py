"""Runtime wiring: frame sources, the counting engine, and the threaded loop.

Two threads move frames: a producer reads the source and a consumer runs the
counting pipeline. They meet at a bounded queue. In paced mode the producer
sleeps to match frame timestamps and the queue drops its oldest entry when
full (drops are counted); in unpaced mode the producer blocks instead, so
every frame is processed and an offline run over the same frames produces a
byte-identical event log.

The consumer thread is the only writer of counter state and log files. It
publishes status for other threads as an immutable snapshot swapped into a
single attribute, and it applies control actions strictly between frames.
After the source ends it stays alive so control and status keep working.
"""

from __future__ import annotations

import dataclasses
import queue
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels, store, synth
from .config import ServiceConfig
from .fsm import CounterState, CountsSnapshot, CrossingEvent, fsm_step, reset as fsm_reset
from .pipeline import (
    DepthFrame,
    RoiLayout,
    SegmentationConfig,
    initial_activation,
    process_frame,
)

CONTROL_ACTIONS = ("start", "stop", "reset", "clear_logs")


class ReplaySource:
    """Frames from a DRF1 file, replayed in order."""

    def __init__(self, path, fps: int = 30):
        self.path = Path(path)
        self.fps = fps
        self.width, self.height, self.frame_count = store.read_replay_header(self.path)

    def __iter__(self):
        return store.iter_replay(self.path)

    def describe(self) -> str:
        return f"replay:{self.path.name}"


class SyntheticSource:
    """Endless demo stream cycling through every scenario kind.

    Each cycle renders one scenario per kind with speed and start offset
    varied from the seed, separated by idle gaps long enough to expire the
    counter's flags. Frame indices and timestamps are re-stamped so the
    stream is globally monotone.
    """

    def __init__(self, cfg: ServiceConfig, layout: RoiLayout, cycles: int | None = None):
        self.cfg = cfg
        self.layout = layout
        self.cycles = cycles
        self.width = cfg.frame_width
        self.height = cfg.frame_height
        self.fps = cfg.fps
        self.frame_count = None
        self._base = synth.ScenarioSpec(
            kind=synth.ScenarioKind.ENTRY,
            frame_count=1,
            camera_height_mm=cfg.synth_camera_height_mm,
            person_height_mm=cfg.synth_person_height_mm,
            head_radius_px=cfg.synth_head_radius_px,
            speed_px_per_frame=cfg.synth_speed_px_per_frame,
            noise_sigma_mm=cfg.synth_noise_sigma_mm,
            dropout_prob=cfg.synth_dropout_prob,
            rng_seed=cfg.synth_rng_seed,
        )

    def __iter__(self):
        dims = (self.width, self.height)
        gap = max(self.cfg.idle_timeout_frames, 1)
        background = np.full((self.height, self.width), self._base.camera_height_mm, np.uint16)
        g = 0
        cycle = 0
        while self.cycles is None or cycle < self.cycles:
            suite = synth.generate_suite(
                1,
                self._base,
                seed=self.cfg.synth_rng_seed + cycle,
                layout=self.layout,
                frame_dims=dims,
                fps=self.fps,
            )
            for _, frames, _ in suite:
                for f in frames:
                    yield dataclasses.replace(
                        f, frame_index=g, timestamp_us=g * 1_000_000 // self.fps
                    )
                    g += 1
                for _ in range(gap):
                    yield DepthFrame(
                        width=self.width,
                        height=self.height,
                        frame_index=g,
                        timestamp_us=g * 1_000_000 // self.fps,
                        depth=background,
                    )
                    g += 1
            cycle += 1

    def describe(self) -> str:
        return f"synthetic:seed={self.cfg.synth_rng_seed}"


def open_source(cfg: ServiceConfig, layout: RoiLayout, cycles: int | None = None):
    if cfg.source == "replay":
        src = ReplaySource(cfg.replay_file, fps=cfg.fps)
        if (src.width, src.height) != (cfg.frame_width, cfg.frame_height):
            raise store.DimensionMismatchError(
                f"{src.path}: frames are {src.width}x{src.height}, "
                f"configured for {cfg.frame_width}x{cfg.frame_height}"
            )
        layout.validate_bounds(src.width, src.height)
        return src
    return SyntheticSource(cfg, layout, cycles=cycles)


class BoundedFrameQueue:
    """Bounded handoff between producer and consumer.

    drop_oldest=True sheds the oldest queued frame when full (the count is
    kept); drop_oldest=False blocks the producer until space frees up.
    """

    def __init__(self, maxsize: int, drop_oldest: bool):
        if maxsize < 1:
            raise ValueError("maxsize must be >= 1")
        self._q: queue.Queue = queue.Queue(maxsize)
        self.drop_oldest = drop_oldest
        self._dropped = 0
        self._lock = threading.Lock()

    def put(self, item, should_abort=None) -> bool:
        if self.drop_oldest:
            while True:
                try:
                    self._q.put_nowait(item)
                    return True
                except queue.Full:
                    try:
                        self._q.get_nowait()
                        with self._lock:
                            self._dropped += 1
                    except queue.Empty:
                        pass
        while should_abort is None or not should_abort():
            try:
                self._q.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def get(self, timeout: float):
        return self._q.get(timeout=timeout)

    def qsize(self) -> int:
        return self._q.qsize()

    @property
    def dropped(self) -> int:
        with self._lock:
            return self._dropped


class CountingEngine:
    """Single-threaded counting core shared by offline runs and the service.

    Owns the counter state, the per-frame activation history, and (when a
    log directory is given) the analysis log, event log, and snapshot store.
    A sink write failure flips ``degraded`` and disables that sink; counting
    itself never stops for I/O.
    """

    def __init__(
        self,
        layout: RoiLayout,
        seg: SegmentationConfig,
        idle_timeout_frames: int = 30,
        initial_occupancy: int = 0,
        log_dir=None,
        snapshots: bool = True,
    ):
        self.layout = layout
        self.seg = seg
        self.state = CounterState(
            idle_timeout_frames=idle_timeout_frames,
            initial_occupancy=initial_occupancy,
        )
        self.prev = initial_activation()
        self.frames_processed = 0
        self.last_frame_index = -1
        self.last_timestamp_us = 0
        self.degraded = False
        self.last_error: str | None = None
        self._analysis = None
        self._events = None
        self._snapshots = None
        self._want_snapshots = snapshots
        self.log_dir = Path(log_dir) if log_dir is not None else None
        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            self._open_sinks()

    def _open_sinks(self) -> None:
        self._analysis = store.AnalysisLog(self.log_dir / "analysis.csv")
        self._events = store.EventLog(self.log_dir / "events.jsonl")
        if self._want_snapshots:
            self._snapshots = store.SnapshotStore(self.log_dir / "snapshots")

    def _sink(self, fn) -> None:
        try:
            fn()
        except OSError as exc:
            self.degraded = True
            self.last_error = f"{type(exc).__name__}: {exc}"

    def process(self, frame: DepthFrame) -> CrossingEvent | None:
        act = process_frame(frame, self.layout, self.seg, self.prev)
        self.prev = act
        self.state, emitted = fsm_step(
            self.state, act.dominant, frame.frame_index, frame.timestamp_us
        )
        event = emitted[0] if emitted else None
        self.frames_processed += 1
        self.last_frame_index = frame.frame_index
        self.last_timestamp_us = frame.timestamp_us
        if event is not None and self._snapshots is not None and not self.degraded:
            try:
                sid = self._snapshots.save(frame, self.seg, event.seq)
                event = dataclasses.replace(event, snapshot_id=sid)
            except OSError as exc:
                self.degraded = True
                self.last_error = f"{type(exc).__name__}: {exc}"
        if self._analysis is not None and not self.degraded:
            record = store.AnalysisRecord.from_activation(act)
            self._sink(lambda: self._analysis.append(record))
        if event is not None and self._events is not None and not self.degraded:
            ev = event
            self._sink(lambda: self._events.append(ev))
        return event

    def counts(self) -> CountsSnapshot:
        return self.state.counts()

    def reset(self) -> None:
        """Zero the counters and flags; logs and event numbering continue."""
        self.state = fsm_reset(self.state)
        self.prev = initial_activation()

    def clear_logs(self) -> None:
        if self.log_dir is None:
            return
        self.close()
        for name in ("analysis.csv", "events.jsonl"):
            p = self.log_dir / name
            if p.exists():
                p.unlink()
        if self._want_snapshots:
            store.SnapshotStore(self.log_dir / "snapshots").clear()
        self._open_sinks()
        self.degraded = False
        self.last_error = None

    def close(self) -> None:
        if self._analysis is not None:
            self._analysis.close()
        if self._events is not None:
            self._events.close()


def run_offline(frames, engine: CountingEngine, on_event=None) -> CountsSnapshot:
    """Drive the engine over an in-memory or generator frame stream."""
    for frame in frames:
        event = engine.process(frame)
        if event is not None and on_event is not None:
            on_event(event)
    engine.close()
    return engine.counts()


@dataclass(frozen=True)
class StatusSnapshot:
    running: bool
    paused: bool
    eos: bool
    degraded: bool
    source: str
    backend: str
    paced: bool
    frames_processed: int
    frames_dropped: int
    queue_depth: int
    last_frame_index: int
    last_timestamp_us: int
    last_event_seq: int
    counts: CountsSnapshot
    occupancy_consistent: bool
    uptime_s: float
    error: str | None = None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["counts"] = self.counts.to_dict()
        return d


class PipelineRunner:
    """Producer/consumer pair around a CountingEngine, plus control plumbing.

    ``control()`` hands an action to the consumer thread and waits for the
    acknowledgement; actions apply between frames, never mid-frame. ``stop``
    pauses both threads (status stays live), ``start`` resumes, ``reset``
    zeroes the counters, ``clear_logs`` truncates logs and snapshots.
    """

    _POLL_S = 0.02

    def __init__(self, source, engine: CountingEngine, cfg: ServiceConfig):
        self.source = source
        self.engine = engine
        self.cfg = cfg
        self.paced = cfg.paced
        self._queue = BoundedFrameQueue(cfg.queue_size, drop_oldest=cfg.paced)
        self._controls: queue.Queue = queue.Queue()
        self._paused = threading.Event()
        self._shutdown = threading.Event()
        self._eos = threading.Event()
        self._events_lock = threading.Lock()
        self._events: list[CrossingEvent] = []
        self._started_at = time.monotonic()
        self._status: StatusSnapshot = self._make_status()
        self._producer = threading.Thread(target=self._produce, name="depthgate-producer")
        self._consumer = threading.Thread(target=self._consume, name="depthgate-consumer")

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        self._producer.start()
        self._consumer.start()

    def shutdown(self, timeout: float = 5.0) -> None:
        self._shutdown.set()
        self._producer.join(timeout)
        self._consumer.join(timeout)
        self.engine.close()

    def wait_eos(self, timeout: float = 60.0) -> bool:
        """Block until the source is exhausted and every frame is processed."""
        return self._eos.wait(timeout)

    # -- thread bodies -----------------------------------------------------

    def _produce(self) -> None:
        anchor = None  # (wall, timestamp_us) pair for pacing
        try:
            for frame in self.source:
                while self._paused.is_set() and not self._shutdown.is_set():
                    time.sleep(self._POLL_S)
                    anchor = None  # re-anchor pacing after a pause
                if self._shutdown.is_set():
                    return
                if self.paced:
                    now = time.monotonic()
                    if anchor is None:
                        anchor = (now, frame.timestamp_us)
                    else:
                        due = anchor[0] + (frame.timestamp_us - anchor[1]) / 1e6
                        if due > now:
                            time.sleep(due - now)
                if not self._queue.put(frame, should_abort=self._shutdown.is_set):
                    return
        finally:
            self._queue.put(None, should_abort=self._shutdown.is_set)

    def _consume(self) -> None:
        source_done = False
        while not self._shutdown.is_set():
            self._apply_controls()
            if self._paused.is_set():
                time.sleep(self._POLL_S)
                continue
            try:
                item = self._queue.get(timeout=self._POLL_S)
            except queue.Empty:
                if source_done and not self._eos.is_set():
                    self._eos.set()
                    self._publish()
                continue
            if item is None:
                source_done = True
                self._eos.set()
                self._publish()
                continue
            event = self.engine.process(item)
            if event is not None:
                with self._events_lock:
                    self._events.append(event)
            self._publish()
        self._publish()

    def _apply_controls(self) -> None:
        while True:
            try:
                action, done, result = self._controls.get_nowait()
            except queue.Empty:
                return
            try:
                if action == "stop":
                    self._paused.set()
                elif action == "start":
                    self._paused.clear()
                elif action == "reset":
                    self.engine.reset()
                elif action == "clear_logs":
                    self.engine.clear_logs()
                    with self._events_lock:
                        self._events.clear()
                result["ok"] = True
            except Exception as exc:  # surface failures to the caller
                result["ok"] = False
                result["error"] = f"{type(exc).__name__}: {exc}"
            finally:
                self._publish()
                done.set()

    # -- cross-thread views --------------------------------------------------

    def _make_status(self) -> StatusSnapshot:
        eng = self.engine
        counts = eng.counts()
        return StatusSnapshot(
            running=not self._paused.is_set(),
            paused=self._paused.is_set(),
            eos=self._eos.is_set(),
            degraded=eng.degraded,
            source=self.source.describe(),
            backend=kernels.backend_name(),
            paced=self.paced,
            frames_processed=eng.frames_processed,
            frames_dropped=self._queue.dropped,
            queue_depth=self._queue.qsize(),
            last_frame_index=eng.last_frame_index,
            last_timestamp_us=eng.last_timestamp_us,
            last_event_seq=eng.state.event_seq,
            counts=counts,
            occupancy_consistent=counts.occupancy >= 0,
            uptime_s=round(time.monotonic() - self._started_at, 3),
            error=eng.last_error,
        )

    def _publish(self) -> None:
        self._status = self._make_status()  # atomic reference swap

    def status(self) -> StatusSnapshot:
        return self._status

    def counts(self) -> CountsSnapshot:
        return self._status.counts

    def events_since(self, since_seq: int, limit: int = 100) -> list[CrossingEvent]:
        limit = max(1, min(int(limit), 1000))
        with self._events_lock:
            return [e for e in self._events if e.seq > since_seq][:limit]

    def all_events(self) -> list[CrossingEvent]:
        with self._events_lock:
            return list(self._events)

    def snapshot_bytes(self, snapshot_id: str) -> bytes | None:
        snaps = self.engine._snapshots
        if snaps is None:
            return None
        return snaps.read(snapshot_id)

    def control(self, action: str, timeout: float = 5.0) -> dict:
        if action not in CONTROL_ACTIONS:
            raise ValueError(f"unknown control action {action!r}")
        done = threading.Event()
        result: dict = {"action": action}
        self._controls.put((action, done, result))
        if not done.wait(timeout):
            raise TimeoutError(f"control {action!r} not acknowledged")
        return result
