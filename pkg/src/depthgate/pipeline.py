"""Depth-frame to dominant-ROI pipeline.

Per frame: threshold segmentation (foreground = 0 < depth <= threshold),
foreground pixel counts inside three doorway bands (ROIs 1..3), then a
dominant-state decision with a minimum-area floor, tie hysteresis and an
optional debounce. State 0 means "no ROI active".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels


class LayoutError(ValueError):
    """ROI layout rejected at configuration time."""


class Rect(NamedTuple):
    x: int
    y: int
    w: int
    h: int

    @property
    def area(self) -> int:
        return self.w * self.h

    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def intersects(self, other: "Rect") -> bool:
        return not (
            self.x + self.w <= other.x
            or other.x + other.w <= self.x
            or self.y + self.h <= other.y
            or other.y + other.h <= self.y
        )


@dataclass(frozen=True)
class DepthFrame:
    """One timestamped W x H grid of depth samples in millimeters.

    depth is a (height, width) uint16 array; 0 marks an invalid sample
    (no sensor return).
    """

    width: int
    height: int
    frame_index: int
    timestamp_us: int
    depth: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("frame dimensions must be positive")
        if self.frame_index < 0 or self.timestamp_us < 0:
            raise ValueError("frame_index and timestamp_us must be non-negative")
        if self.depth.dtype != np.uint16:
            raise ValueError(f"depth dtype must be uint16, got {self.depth.dtype}")
        if self.depth.shape != (self.height, self.width):
            raise ValueError(
                f"depth shape {self.depth.shape} != (height, width)=({self.height}, {self.width})"
            )


@dataclass(frozen=True)
class SegmentationConfig:
    threshold_mm: int = 1000
    min_area_frac: float = 0.01
    debounce_frames: int = 1

    def __post_init__(self):
        if self.threshold_mm <= 0:
            raise ValueError("threshold_mm must be > 0")
        if not 0.0 <= self.min_area_frac <= 1.0:
            raise ValueError("min_area_frac must be in [0, 1]")
        if self.debounce_frames < 1:
            raise ValueError("debounce_frames must be >= 1")


@dataclass(frozen=True)
class RoiLayout:
    """Three disjoint bands across the doorway, ids 1..3.

    ROI 1 faces the inside, ROI 3 the outside; centers must be strictly
    ordered 1 < 2 < 3 along the crossing axis (the axis people move along:
    "vertical" = rows, "horizontal" = columns).
    """

    rois: tuple[Rect, Rect, Rect]
    crossing_axis: str = "vertical"
    _rects_arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.crossing_axis not in ("vertical", "horizontal"):
            raise LayoutError(f"unknown crossing_axis {self.crossing_axis!r}")
        if len(self.rois) != 3:
            raise LayoutError("exactly three ROIs required")
        for r in self.rois:
            if r.w <= 0 or r.h <= 0 or r.x < 0 or r.y < 0:
                raise LayoutError(f"degenerate or negative ROI rect {r}")
        for i in range(3):
            for j in range(i + 1, 3):
                if self.rois[i].intersects(self.rois[j]):
                    raise LayoutError(f"ROIs {i + 1} and {j + 1} overlap")
        centers = [self.axis_coord(*r.center()) for r in self.rois]
        if not (centers[0] < centers[1] < centers[2]):
            raise LayoutError(
                f"ROI centers must be strictly ordered 1 < 2 < 3 along {self.crossing_axis}, got {centers}"
            )
        arr = np.array([[r.x, r.y, r.w, r.h] for r in self.rois], dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "_rects_arr", arr)

    def axis_coord(self, x: float, y: float) -> float:
        return y if self.crossing_axis == "vertical" else x

    def axis_span(self, rect: Rect) -> tuple[int, int]:
        """(min, max) extent of a rect along the crossing axis."""
        if self.crossing_axis == "vertical":
            return rect.y, rect.y + rect.h
        return rect.x, rect.x + rect.w

    def rects_array(self) -> np.ndarray:
        return self._rects_arr

    def validate_bounds(self, width: int, height: int) -> None:
        for i, r in enumerate(self.rois):
            if r.x + r.w > width or r.y + r.h > height:
                raise LayoutError(
                    f"ROI {i + 1} {r} exceeds frame bounds {width}x{height}"
                )


def default_layout(width: int, height: int, crossing_axis: str = "vertical") -> RoiLayout:
    """Three contiguous equal bands spanning the frame along the crossing axis."""
    if crossing_axis == "vertical":
        band = height // 3
        if band < 1:
            raise LayoutError(f"frame height {height} too small for three bands")
        rois = (
            Rect(0, 0, width, band),
            Rect(0, band, width, band),
            Rect(0, 2 * band, width, height - 2 * band),
        )
    else:
        band = width // 3
        if band < 1:
            raise LayoutError(f"frame width {width} too small for three bands")
        rois = (
            Rect(0, 0, band, height),
            Rect(band, 0, band, height),
            Rect(2 * band, 0, width - 2 * band, height),
        )
    return RoiLayout(rois=rois, crossing_axis=crossing_axis)


@dataclass(frozen=True)
class RoiActivation:
    """Per-frame ROI foreground counts and the dominant state.

    ``dominant`` is the published (debounced) state the counter consumes;
    ``raw_dominant``/``streak`` carry the pre-debounce decision and how many
    consecutive frames it has held. With debounce_frames=1 the published and
    raw states coincide.
    """

    frame_index: int
    fg_px: tuple[int, int, int]
    dominant: int
    raw_dominant: int = 0
    streak: int = 0


def initial_activation() -> RoiActivation:
    """Sentinel activation preceding the first frame of a stream."""
    return RoiActivation(frame_index=-1, fg_px=(0, 0, 0), dominant=0, raw_dominant=0, streak=0)


def segment_foreground(frame: DepthFrame, cfg: SegmentationConfig) -> np.ndarray:
    """Boolean mask: foreground iff 0 < depth <= threshold_mm (0 = no data)."""
    return (frame.depth > 0) & (frame.depth <= cfg.threshold_mm)


def render_grayscale(frame: DepthFrame, cfg: SegmentationConfig) -> np.ndarray:
    """8-bit view for snapshots/display: nearer foreground is brighter.

    g = floor(255 * (1 - depth/threshold) + 0.5) for foreground, 0 elsewhere.
    Never used for counting.
    """
    return kernels.grayscale(frame.depth, cfg.threshold_mm)


def roi_counts(mask: np.ndarray, layout: RoiLayout) -> tuple[int, int, int]:
    """Foreground pixel count of a boolean mask inside each ROI."""
    h, w = mask.shape
    layout.validate_bounds(w, h)
    out = []
    for r in layout.rois:
        out.append(int(np.count_nonzero(mask[r.y : r.y + r.h, r.x : r.x + r.w])))
    return (out[0], out[1], out[2])


def dominant_from_counts(
    counts: tuple[int, int, int],
    min_px: tuple[float, float, float],
    prev_dominant: int,
) -> int:
    """Largest eligible ROI id, 0 if none is eligible.

    Eligible means count >= its minimum-pixel floor. Ties keep prev_dominant
    when it is among the tied maxima (hysteresis), otherwise the smallest id.
    """
    eligible = [i + 1 for i in range(3) if counts[i] >= min_px[i]]
    if not eligible:
        return 0
    best = max(counts[i - 1] for i in eligible)
    tied = [i for i in eligible if counts[i - 1] == best]
    if prev_dominant in tied:
        return prev_dominant
    return tied[0]


def dominant_roi(
    counts: tuple[int, int, int],
    layout: RoiLayout,
    cfg: SegmentationConfig,
    prev_dominant: int,
) -> int:
    min_px = tuple(cfg.min_area_frac * r.area for r in layout.rois)
    return dominant_from_counts(counts, min_px, prev_dominant)


def process_frame(
    frame: DepthFrame,
    layout: RoiLayout,
    cfg: SegmentationConfig,
    prev: RoiActivation,
) -> RoiActivation:
    """One pipeline step: segment inside the ROIs, count, decide, debounce.

    Equivalent to segment_foreground -> roi_counts -> dominant_roi but only
    reads pixels inside the three ROIs. A change of published state requires
    the same raw dominant on cfg.debounce_frames consecutive frames
    (debounce_frames=1 publishes every raw decision immediately). Hysteresis
    ties are resolved against the previous raw dominant.
    """
    if frame.frame_index <= prev.frame_index:
        raise ValueError(
            f"frame_index {frame.frame_index} not after previous {prev.frame_index}"
        )
    counts_arr = kernels.roi_fg_counts(frame.depth, cfg.threshold_mm, layout.rects_array())
    counts = (int(counts_arr[0]), int(counts_arr[1]), int(counts_arr[2]))
    raw = dominant_roi(counts, layout, cfg, prev.raw_dominant)
    streak = prev.streak + 1 if raw == prev.raw_dominant else 1
    if raw == prev.dominant:
        published = prev.dominant
    elif streak >= cfg.debounce_frames:
        published = raw
    else:
        published = prev.dominant
    return RoiActivation(
        frame_index=frame.frame_index,
        fg_px=counts,
        dominant=published,
        raw_dominant=raw,
        streak=streak,
    )
