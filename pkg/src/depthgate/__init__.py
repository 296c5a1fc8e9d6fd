"""Real-time bidirectional people counting over overhead depth-frame streams.

A fixed depth threshold separates people from the floor, three bands of the
frame vote on where the person is, and a small flag machine turns the band
sequence into entry/exit events and a running occupancy.
"""

from .config import ConfigError, ServiceConfig, load_config
from .fsm import (
    CounterState,
    CountsSnapshot,
    CrossingEvent,
    EventKind,
    fsm_step,
    occupancy,
    reset,
)
from .pipeline import (
    DepthFrame,
    LayoutError,
    Rect,
    RoiActivation,
    RoiLayout,
    SegmentationConfig,
    default_layout,
    dominant_roi,
    initial_activation,
    process_frame,
    render_grayscale,
    roi_counts,
    segment_foreground,
)
from .service import CountingEngine, PipelineRunner, open_source, run_offline
from .store import (
    CorruptHeaderError,
    DimensionMismatchError,
    ReplayFormatError,
    TruncatedReplayError,
    iter_replay,
    read_events,
    read_replay,
    write_replay,
)
from .synth import ScenarioKind, ScenarioSpec, generate, generate_suite

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ServiceConfig",
    "load_config",
    "CounterState",
    "CountsSnapshot",
    "CrossingEvent",
    "EventKind",
    "fsm_step",
    "occupancy",
    "reset",
    "DepthFrame",
    "LayoutError",
    "Rect",
    "RoiActivation",
    "RoiLayout",
    "SegmentationConfig",
    "default_layout",
    "dominant_roi",
    "initial_activation",
    "process_frame",
    "render_grayscale",
    "roi_counts",
    "segment_foreground",
    "CountingEngine",
    "PipelineRunner",
    "open_source",
    "run_offline",
    "CorruptHeaderError",
    "DimensionMismatchError",
    "ReplayFormatError",
    "TruncatedReplayError",
    "iter_replay",
    "read_events",
    "read_replay",
    "write_replay",
    "ScenarioKind",
    "ScenarioSpec",
    "generate",
    "generate_suite",
    "__version__",
]
