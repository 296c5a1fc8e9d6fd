import numpy as np
import pytest

from depthgate.pipeline import DepthFrame, RoiLayout, SegmentationConfig, default_layout

DIMS = (96, 72)  # small frames keep unit tests fast; bands of 24 rows


@pytest.fixture
def layout() -> RoiLayout:
    return default_layout(*DIMS)


@pytest.fixture
def seg() -> SegmentationConfig:
    return SegmentationConfig()


def make_frame(depth: np.ndarray, frame_index: int = 0, timestamp_us: int | None = None) -> DepthFrame:
    h, w = depth.shape
    return DepthFrame(
        width=w,
        height=h,
        frame_index=frame_index,
        timestamp_us=frame_index * 33_333 if timestamp_us is None else timestamp_us,
        depth=depth,
    )


def frame_in_state(
    layout: RoiLayout,
    state: int,
    frame_index: int,
    dims=DIMS,
    depth_mm: int = 500,
    background_mm: int = 2200,
) -> DepthFrame:
    """A frame whose dominant ROI is ``state`` (0 = empty scene)."""
    w, h = dims
    arr = np.full((h, w), background_mm, dtype=np.uint16)
    if state != 0:
        r = layout.rois[state - 1]
        arr[r.y : r.y + r.h, r.x : r.x + r.w] = depth_mm
    return make_frame(arr, frame_index)


def play_states(layout, seg, states, engine_cls=None, **engine_kw):
    """Run a dominant-state script through a fresh engine; return it."""
    from depthgate.service import CountingEngine

    cls = engine_cls or CountingEngine
    engine = cls(layout, seg, **engine_kw)
    for i, s in enumerate(states):
        engine.process(frame_in_state(layout, s, i))
    return engine
