"""Deterministic synthetic doorway-crossing scenes.

A person is modeled as a filled disc at head depth (camera height minus
person height) over a flat floor at camera height, moving along the crossing
axis. Scenario kinds map to trajectories whose clean dominant-state pattern
is the canonical one for the kind (entry: 3,2,1; regret-enter: 3,2,3; ...).

Randomness (depth noise, dropouts, suite variation) is bit-exact
reproducible: every stream is a numpy PCG64 generator seeded with
SeedSequence of the integers named at the call site, e.g. noise for frame i
of a scenario uses default_rng((rng_seed, i)) and draws, in order,
standard_normal(float32) when noise_sigma_mm > 0 and then random(float32)
when dropout_prob > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import kernels
from .pipeline import DepthFrame, RoiLayout


class GenerationError(ValueError):
    """Scenario geometry cannot produce the requested crossing."""


class ScenarioKind(str, Enum):
    ENTRY = "entry"
    EXIT = "exit"
    REGRET_ENTER = "regret_enter"
    REGRET_EXIT = "regret_exit"
    LOITER = "loiter"
    EMPTY_SCENE = "empty_scene"


_MOVING_KINDS = (
    ScenarioKind.ENTRY,
    ScenarioKind.EXIT,
    ScenarioKind.REGRET_ENTER,
    ScenarioKind.REGRET_EXIT,
)


@dataclass(frozen=True)
class ScenarioSpec:
    kind: ScenarioKind
    frame_count: int
    camera_height_mm: int = 2200
    person_height_mm: int = 1700
    head_radius_px: float = 40.0
    speed_px_per_frame: float = 8.0
    start_offset_px: float = 0.0
    noise_sigma_mm: float = 0.0
    dropout_prob: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise ValueError("dropout_prob must be in [0, 1]")
        if self.noise_sigma_mm < 0:
            raise ValueError("noise_sigma_mm must be >= 0")
        if self.camera_height_mm <= 0 or self.camera_height_mm > 65535:
            raise ValueError("camera_height_mm must be in 1..65535")
        if not 0 < self.person_height_mm < self.camera_height_mm:
            raise ValueError("person_height_mm must be in 1..camera_height_mm-1")
        if self.head_radius_px <= 0:
            raise ValueError("head_radius_px must be > 0")
        if self.speed_px_per_frame <= 0:
            raise ValueError("speed_px_per_frame must be > 0")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be >= 0")

    @property
    def head_depth_mm(self) -> int:
        return self.camera_height_mm - self.person_height_mm


@dataclass(frozen=True)
class ScenarioExpectation:
    entries: int = 0
    exits: int = 0
    regret_enter: int = 0
    regret_exit: int = 0

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.entries, self.exits, self.regret_enter, self.regret_exit)


EXPECTATIONS = {
    ScenarioKind.ENTRY: ScenarioExpectation(entries=1),
    ScenarioKind.EXIT: ScenarioExpectation(exits=1),
    ScenarioKind.REGRET_ENTER: ScenarioExpectation(regret_enter=1),
    ScenarioKind.REGRET_EXIT: ScenarioExpectation(regret_exit=1),
    ScenarioKind.LOITER: ScenarioExpectation(),
    ScenarioKind.EMPTY_SCENE: ScenarioExpectation(),
}


def _geometry(spec: ScenarioSpec, layout: RoiLayout, frame_dims: tuple[int, int]):
    """Trajectory anchors along the crossing axis; raises on infeasible setups."""
    width, height = frame_dims
    layout.validate_bounds(width, height)
    if 2 * spec.head_radius_px >= min(width, height):
        raise GenerationError(
            f"disc diameter {2 * spec.head_radius_px} does not fit in {width}x{height} frame"
        )
    if spec.start_offset_px < 0:
        raise GenerationError("start_offset_px must be >= 0 (endpoints must stay beyond the ROIs)")
    lo = layout.axis_span(layout.rois[0])[0]
    hi = layout.axis_span(layout.rois[2])[1]
    mid2 = sum(layout.axis_span(layout.rois[1])) / 2.0
    margin = spec.head_radius_px + 1.0
    off_center = (height if layout.crossing_axis == "horizontal" else width) / 2.0
    return float(lo), float(hi), mid2, margin, off_center


def _trajectory(spec: ScenarioSpec, lo: float, hi: float, mid2: float, margin: float):
    """Yield (position, homeward) pairs forever following the kind's motion.

    homeward turns True once a regret trajectory has reversed at the middle
    band (one-way trajectories are homeward from the start)."""
    kind = spec.kind
    speed = spec.speed_px_per_frame
    if kind in (ScenarioKind.ENTRY, ScenarioKind.REGRET_ENTER):
        a, d = hi + margin + spec.start_offset_px, -1.0
    else:
        a, d = lo - margin - spec.start_offset_px, +1.0
    turn = mid2 if kind in (ScenarioKind.REGRET_ENTER, ScenarioKind.REGRET_EXIT) else None
    while True:
        yield a, turn is None
        nxt = a + d * speed
        if turn is not None and ((d < 0 and nxt <= turn) or (d > 0 and nxt >= turn)):
            nxt = turn
            d = -d
            turn = None
        a = nxt


def _positions(spec: ScenarioSpec, layout: RoiLayout, frame_dims: tuple[int, int], n: int):
    """Disc center positions along the crossing axis, one per frame.

    None marks "no disc" (empty scene). Motion continues past the completion
    point, carrying the disc out of view.
    """
    lo, hi, mid2, margin, _ = _geometry(spec, layout, frame_dims)
    if spec.kind is ScenarioKind.EMPTY_SCENE:
        return [None] * n
    if spec.kind is ScenarioKind.LOITER:
        return [mid2] * n
    traj = _trajectory(spec, lo, hi, mid2, margin)
    return [next(traj)[0] for _ in range(n)]


def required_frames(spec: ScenarioSpec, layout: RoiLayout, frame_dims: tuple[int, int]) -> int:
    """Frames needed for the kind's trajectory to fully complete, plus a
    short idle tail. Stationary kinds just use spec.frame_count."""
    if spec.kind not in _MOVING_KINDS:
        return spec.frame_count
    lo, hi, mid2, margin, _ = _geometry(spec, layout, frame_dims)
    if spec.kind in (ScenarioKind.ENTRY, ScenarioKind.REGRET_EXIT):
        done = lambda a: a < lo - margin
    else:
        done = lambda a: a > hi + margin
    traj = _trajectory(spec, lo, hi, mid2, margin)
    for t in range(1_000_000):
        a, homeward = next(traj)
        if homeward and done(a):
            return t + 4
    raise GenerationError(f"trajectory for {spec.kind.value} never completes")


def _render(spec: ScenarioSpec, layout: RoiLayout, width: int, height: int, pos, frame_index: int):
    arr = np.full((height, width), spec.camera_height_mm, dtype=np.uint16)
    if pos is not None:
        if layout.crossing_axis == "vertical":
            cx, cy = width / 2.0, pos
        else:
            cx, cy = pos, height / 2.0
        kernels.fill_disc(arr, cx, cy, spec.head_radius_px, spec.head_depth_mm)
    if spec.noise_sigma_mm > 0 or spec.dropout_prob > 0:
        rng = np.random.default_rng((spec.rng_seed, frame_index))
        if spec.noise_sigma_mm > 0:
            noisy = arr.astype(np.float32)
            noisy += rng.standard_normal((height, width), dtype=np.float32) * spec.noise_sigma_mm
            arr = np.clip(np.rint(noisy), 0, 65535).astype(np.uint16)
        if spec.dropout_prob > 0:
            drop = rng.random((height, width), dtype=np.float32) < spec.dropout_prob
            arr[drop] = 0
    return arr


def generate(
    spec: ScenarioSpec,
    layout: RoiLayout,
    frame_dims: tuple[int, int],
    fps: int = 30,
) -> tuple[list[DepthFrame], ScenarioExpectation]:
    """Render a scenario as a depth-frame sequence with its expected counts."""
    width, height = frame_dims
    if fps < 1:
        raise GenerationError("fps must be >= 1")
    need = required_frames(spec, layout, frame_dims)
    if spec.kind in _MOVING_KINDS and spec.frame_count < need:
        raise GenerationError(
            f"frame_count {spec.frame_count} too small for {spec.kind.value} "
            f"at speed {spec.speed_px_per_frame}: needs {need}"
        )
    positions = _positions(spec, layout, frame_dims, spec.frame_count)
    frames = []
    for i, pos in enumerate(positions):
        arr = _render(spec, layout, width, height, pos, i)
        frames.append(
            DepthFrame(
                width=width,
                height=height,
                frame_index=i,
                timestamp_us=i * 1_000_000 // fps,
                depth=arr,
            )
        )
    return frames, EXPECTATIONS[spec.kind]


def auto_sized(spec: ScenarioSpec, layout: RoiLayout, frame_dims: tuple[int, int]) -> ScenarioSpec:
    """Copy of spec with frame_count set to exactly what the kind needs."""
    return replace(spec, frame_count=required_frames(spec, layout, frame_dims))


def generate_suite(
    n_per_kind: int,
    base_spec: ScenarioSpec,
    seed: int,
    layout: RoiLayout,
    frame_dims: tuple[int, int],
    fps: int = 30,
    kinds: tuple[ScenarioKind, ...] = tuple(ScenarioKind),
):
    """Yield n_per_kind (kind, frames, expectation) scenarios per kind.

    Variation for scenario i of kind k draws from default_rng((seed, k, i)):
    speed uniform in [5, 13) px/frame, start offset an integer in [0, 24),
    and a fresh 63-bit scenario seed for the noise streams. Lazy by design:
    a large suite at full frame size does not fit in memory all at once.
    """
    if n_per_kind < 1:
        raise ValueError("n_per_kind must be >= 1")
    for k_idx, kind in enumerate(ScenarioKind):
        if kind not in kinds:
            continue
        for i in range(n_per_kind):
            rng = np.random.default_rng((seed, k_idx, i))
            speed = 5.0 + 8.0 * float(rng.random())
            offset = float(rng.integers(0, 24))
            scen_seed = int(rng.integers(0, 2**63))
            spec = replace(
                base_spec,
                kind=kind,
                speed_px_per_frame=speed,
                start_offset_px=offset,
                rng_seed=scen_seed,
            )
            spec = auto_sized(spec, layout, frame_dims)
            frames, expect = generate(spec, layout, frame_dims, fps)
            yield kind, frames, expect


def concat_scenarios(
    frame_lists: list[list[DepthFrame]],
    frame_dims: tuple[int, int],
    fps: int = 30,
    gap_frames: int = 30,
    background_mm: int = 2200,
) -> list[DepthFrame]:
    """Splice scenario streams into one stream with idle gaps between them.

    Frame indices and timestamps are re-stamped to be globally monotone.
    gap_frames should be at least the counter's idle timeout so armed flags
    from one scenario can never leak into the next.
    """
    width, height = frame_dims
    out: list[DepthFrame] = []
    g = 0

    def push(depth):
        nonlocal g
        out.append(
            DepthFrame(
                width=width,
                height=height,
                frame_index=g,
                timestamp_us=g * 1_000_000 // fps,
                depth=depth,
            )
        )
        g += 1

    for n, frames in enumerate(frame_lists):
        if n > 0:
            for _ in range(gap_frames):
                push(np.full((height, width), background_mm, dtype=np.uint16))
        for f in frames:
            if (f.width, f.height) != (width, height):
                raise GenerationError("all scenarios must share frame dimensions")
            push(f.depth)
    return out
