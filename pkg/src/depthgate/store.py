"""Bit-exact persistence: replay files, analysis/event logs, snapshots, reports.

Replay container (DRF1):
    magic   4 bytes  b"DRF1"
    header  little-endian u32 width, u32 height, u32 frame_count, u32 reserved=0
    frames  frame_count times:
              u64 timestamp_us, u64 frame_index,
              width*height u16 depth millimeters, row-major little-endian
    The file length is exactly 20 + frame_count * (16 + 2*width*height).

Analysis log: CSV, header "frame,roi1,roi2,roi3,state", one line per
processed frame. Event log: one JSON object per line (sorted keys, compact
separators), flushed per event. Snapshots: binary "P5" portable graymaps
named <seq:08d>.pgm.
"""

from __future__ import annotations

import json
import math
import os
import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fsm import CountsSnapshot, CrossingEvent, EventKind
from .pipeline import DepthFrame, RoiActivation, SegmentationConfig, render_grayscale

MAGIC = b"DRF1"
_HEADER = struct.Struct("<III I")
_FRAME_HEAD = struct.Struct("<QQ")


class ReplayFormatError(ValueError):
    """Replay file violates the DRF1 format."""


class CorruptHeaderError(ReplayFormatError):
    pass


class DimensionMismatchError(ReplayFormatError):
    pass


class TruncatedReplayError(ReplayFormatError):
    pass


class LogOrderError(ValueError):
    """Append would break the log's monotone ordering."""


def write_replay(frames: list[DepthFrame], path) -> None:
    if not frames:
        raise ValueError("cannot write an empty replay")
    w, h = frames[0].width, frames[0].height
    last_index = -1
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(_HEADER.pack(w, h, len(frames), 0))
        for fr in frames:
            if (fr.width, fr.height) != (w, h):
                raise DimensionMismatchError(
                    f"frame {fr.frame_index} is {fr.width}x{fr.height}, file is {w}x{h}"
                )
            if fr.frame_index <= last_index:
                raise ReplayFormatError(
                    f"frame_index {fr.frame_index} not strictly increasing after {last_index}"
                )
            last_index = fr.frame_index
            f.write(_FRAME_HEAD.pack(fr.timestamp_us, fr.frame_index))
            f.write(np.ascontiguousarray(fr.depth, dtype="<u2").tobytes())


def read_replay_header(path) -> tuple[int, int, int]:
    """(width, height, frame_count) from a DRF1 header, validated."""
    with open(path, "rb") as f:
        head = f.read(4 + _HEADER.size)
    if len(head) < 4 + _HEADER.size:
        raise CorruptHeaderError(f"{path}: too short for a DRF1 header")
    if head[:4] != MAGIC:
        raise CorruptHeaderError(f"{path}: bad magic {head[:4]!r}")
    w, h, count, reserved = _HEADER.unpack(head[4:])
    if reserved != 0:
        raise CorruptHeaderError(f"{path}: reserved header field is {reserved}, not 0")
    if w == 0 or h == 0:
        raise CorruptHeaderError(f"{path}: zero frame dimensions {w}x{h}")
    return w, h, count


def iter_replay(path):
    """Yield DepthFrames from a DRF1 file without loading it whole."""
    w, h, count = read_replay_header(path)
    frame_bytes = _FRAME_HEAD.size + 2 * w * h
    last_index = -1
    with open(path, "rb") as f:
        f.seek(4 + _HEADER.size)
        for i in range(count):
            buf = f.read(frame_bytes)
            if len(buf) < frame_bytes:
                raise TruncatedReplayError(
                    f"{path}: frame {i} truncated ({len(buf)} of {frame_bytes} bytes)"
                )
            ts, idx = _FRAME_HEAD.unpack_from(buf)
            if idx <= last_index:
                raise ReplayFormatError(
                    f"{path}: frame_index {idx} not strictly increasing after {last_index}"
                )
            last_index = idx
            depth = np.frombuffer(buf, dtype="<u2", offset=_FRAME_HEAD.size).reshape(h, w).copy()
            yield DepthFrame(width=w, height=h, frame_index=idx, timestamp_us=ts, depth=depth)
        if f.read(1):
            raise ReplayFormatError(f"{path}: trailing data after {count} declared frames")


def read_replay(path) -> list[DepthFrame]:
    return list(iter_replay(path))


@dataclass(frozen=True)
class AnalysisRecord:
    frame_index: int
    roi1_px: int
    roi2_px: int
    roi3_px: int
    dominant: int

    @classmethod
    def from_activation(cls, act: RoiActivation) -> "AnalysisRecord":
        return cls(act.frame_index, act.fg_px[0], act.fg_px[1], act.fg_px[2], act.dominant)


class AnalysisLog:
    """Append-only CSV of per-frame ROI activations."""

    HEADER = "frame,roi1,roi2,roi3,state"

    def __init__(self, path):
        self.path = Path(path)
        self._last_index = -1
        self._fh = None
        if self.path.exists() and self.path.stat().st_size > 0:
            with open(self.path, "r", encoding="ascii") as f:
                for line in f:
                    line = line.strip()
                    if line and not line.startswith("frame,"):
                        self._last_index = int(line.split(",", 1)[0])

    def append(self, record: AnalysisRecord) -> None:
        if record.frame_index <= self._last_index:
            raise LogOrderError(
                f"frame_index {record.frame_index} not after last written {self._last_index}"
            )
        if self._fh is None:
            fresh = not self.path.exists() or self.path.stat().st_size == 0
            self._fh = open(self.path, "a", encoding="ascii")
            if fresh:
                self._fh.write(self.HEADER + "\n")
        self._fh.write(
            f"{record.frame_index},{record.roi1_px},{record.roi2_px},"
            f"{record.roi3_px},{record.dominant}\n"
        )
        self._fh.flush()
        self._last_index = record.frame_index

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_analysis(path) -> list[AnalysisRecord]:
    out = []
    with open(path, "r", encoding="ascii") as f:
        header = f.readline().strip()
        if header != AnalysisLog.HEADER:
            raise ValueError(f"unexpected analysis header {header!r}")
        for line in f:
            if not line.endswith("\n"):
                break  # concurrent writer: skip the incomplete tail line
            parts = line.strip().split(",")
            out.append(AnalysisRecord(*(int(p) for p in parts)))
    return out


def event_to_json(event: CrossingEvent) -> str:
    return json.dumps(
        {
            "seq": event.seq,
            "kind": event.kind.value,
            "frame_index": event.frame_index,
            "timestamp_us": event.timestamp_us,
            "counts_after": event.counts_after.to_dict(),
            "snapshot_id": event.snapshot_id,
        },
        sort_keys=True,
        separators=(",", ":"),
    )


def event_from_json(line: str) -> CrossingEvent:
    obj = json.loads(line)
    c = obj["counts_after"]
    return CrossingEvent(
        seq=obj["seq"],
        kind=EventKind(obj["kind"]),
        frame_index=obj["frame_index"],
        timestamp_us=obj["timestamp_us"],
        counts_after=CountsSnapshot(
            entries=c["entries"],
            exits=c["exits"],
            regret_enter=c["regret_enter"],
            regret_exit=c["regret_exit"],
            occupancy=c["occupancy"],
        ),
        snapshot_id=obj.get("snapshot_id"),
    )


class EventLog:
    """Append-only JSON-lines log of crossing events, flushed per event."""

    def __init__(self, path):
        self.path = Path(path)
        self._last_seq = 0
        self._fh = None
        if self.path.exists() and self.path.stat().st_size > 0:
            for ev in read_events(self.path):
                self._last_seq = ev.seq

    def append(self, event: CrossingEvent) -> None:
        if event.seq <= self._last_seq:
            raise LogOrderError(f"event seq {event.seq} not after last written {self._last_seq}")
        if self._fh is None:
            self._fh = open(self.path, "a", encoding="ascii")
        self._fh.write(event_to_json(event) + "\n")
        self._fh.flush()
        self._last_seq = event.seq

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_events(path) -> list[CrossingEvent]:
    out = []
    with open(path, "r", encoding="ascii") as f:
        for line in f:
            if not line.endswith("\n"):
                break  # concurrent writer: only complete records
            line = line.strip()
            if line:
                out.append(event_from_json(line))
    return out


_SNAPSHOT_ID = re.compile(r"^[0-9]{8}$")


class SnapshotStore:
    """One P5 graymap per event, named by the event's sequence number."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def save(self, frame: DepthFrame, cfg: SegmentationConfig, event_seq: int) -> str:
        snapshot_id = f"{event_seq:08d}"
        gray = render_grayscale(frame, cfg)
        header = f"P5\n{frame.width} {frame.height}\n255\n".encode("ascii")
        with open(self.directory / f"{snapshot_id}.pgm", "wb") as f:
            f.write(header + gray.tobytes())
        return snapshot_id

    def read(self, snapshot_id: str) -> bytes | None:
        if not _SNAPSHOT_ID.match(snapshot_id):
            return None
        path = self.directory / f"{snapshot_id}.pgm"
        if not path.exists():
            return None
        return path.read_bytes()

    def clear(self) -> None:
        for p in self.directory.glob("*.pgm"):
            os.unlink(p)


_EVENT_DELTA = {
    EventKind.ENTRY: ("entries", +1),
    EventKind.EXIT: ("exits", -1),
    EventKind.REGRET_ENTER: ("regret_enter", 0),
    EventKind.REGRET_EXIT: ("regret_exit", 0),
}

MAX_REPORT_BUCKETS = 100_000


def build_report(events, from_us: int, to_us: int, bucket_us: int) -> dict:
    """Bucketed counts over [from_us, to_us) plus a running occupancy series.

    ``events`` is a CrossingEvent list or an event-log path. The totals row
    equals the per-kind event counts inside the window, which by construction
    equals the whole-window counter deltas.
    """
    if isinstance(events, (str, Path)):
        events = read_events(events) if Path(events).exists() else []
    if from_us > to_us:
        raise ValueError(f"report window reversed: from {from_us} > to {to_us}")
    if bucket_us <= 0:
        raise ValueError("bucket_us must be > 0")
    n_buckets = math.ceil((to_us - from_us) / bucket_us)
    if n_buckets > MAX_REPORT_BUCKETS:
        raise ValueError(f"{n_buckets} buckets exceed the {MAX_REPORT_BUCKETS} limit")

    # occupancy entering the window: last event before it, else rewind the
    # first event's own delta (counts_after is post-increment)
    occ = 0
    before = [e for e in events if e.timestamp_us < from_us]
    if before:
        occ = before[-1].counts_after.occupancy
    elif events:
        first = events[0]
        occ = first.counts_after.occupancy - _EVENT_DELTA[first.kind][1]
    occupancy_start = occ

    buckets = [
        {
            "start_us": from_us + b * bucket_us,
            "entries": 0,
            "exits": 0,
            "regret_enter": 0,
            "regret_exit": 0,
            "occupancy_end": None,
        }
        for b in range(n_buckets)
    ]
    totals = {"entries": 0, "exits": 0, "regret_enter": 0, "regret_exit": 0}
    for e in events:
        if not from_us <= e.timestamp_us < to_us:
            continue
        b = (e.timestamp_us - from_us) // bucket_us
        key = _EVENT_DELTA[e.kind][0]
        buckets[b][key] += 1
        totals[key] += 1
        buckets[b]["occupancy_end"] = e.counts_after.occupancy
    for row in buckets:  # events arrive ordered; carry occupancy forward
        if row["occupancy_end"] is None:
            row["occupancy_end"] = occ
        else:
            occ = row["occupancy_end"]

    return {
        "from_us": from_us,
        "to_us": to_us,
        "bucket_us": bucket_us,
        "buckets": buckets,
        "totals": totals,
        "occupancy_start": occupancy_start,
        "occupancy_end": occ,
    }
