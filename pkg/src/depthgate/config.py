"""Service configuration from key=value files and CLI flags.

Config files are plain text: one ``key=value`` per line, ``#`` comments and
blank lines ignored. Keys are spelled exactly like the CLI long flags
(``threshold-mm=900``), so a line in the file and a flag on the command line
name the same setting; flags override the file.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .pipeline import Rect, RoiLayout, SegmentationConfig, default_layout


class ConfigError(ValueError):
    """Config file or option value is unusable."""


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_rect(key: str, raw: str) -> Rect:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 4:
        raise ConfigError(f"{key}: expected x,y,w,h, got {raw!r}")
    try:
        x, y, w, h = (int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"{key}: non-integer in {raw!r}") from exc
    return Rect(x, y, w, h)


@dataclass(frozen=True)
class ServiceConfig:
    listen: str = "127.0.0.1:8787"
    source: str = "synthetic"
    replay_file: str | None = None
    log_dir: str = "depthgate-logs"
    paced: bool = True

    threshold_mm: int = 1000
    min_area_frac: float = 0.01
    debounce_frames: int = 1
    idle_timeout_frames: int = 30
    initial_occupancy: int = 0

    frame_width: int = 640
    frame_height: int = 480
    fps: int = 30
    crossing_axis: str = "vertical"
    roi1: Rect | None = None
    roi2: Rect | None = None
    roi3: Rect | None = None

    queue_size: int = 8

    synth_camera_height_mm: int = 2200
    synth_person_height_mm: int = 1700
    synth_head_radius_px: float = 40.0
    synth_speed_px_per_frame: float = 8.0
    synth_noise_sigma_mm: float = 0.0
    synth_dropout_prob: float = 0.0
    synth_rng_seed: int = 0

    def __post_init__(self):
        if self.source not in ("synthetic", "replay"):
            raise ConfigError(f"source must be synthetic or replay, got {self.source!r}")
        if self.source == "replay" and not self.replay_file:
            raise ConfigError("source=replay needs replay-file")
        if self.source == "synthetic" and self.replay_file:
            raise ConfigError("replay-file only applies to source=replay")
        if self.crossing_axis not in ("vertical", "horizontal"):
            raise ConfigError(f"crossing-axis must be vertical or horizontal, got {self.crossing_axis!r}")
        if self.frame_width <= 0 or self.frame_height <= 0:
            raise ConfigError(f"frame dims must be positive, got {self.frame_width}x{self.frame_height}")
        if self.fps <= 0:
            raise ConfigError(f"fps must be positive, got {self.fps}")
        if self.idle_timeout_frames < 1:
            raise ConfigError(f"idle-timeout-frames must be >= 1, got {self.idle_timeout_frames}")
        if self.queue_size < 1:
            raise ConfigError(f"queue-size must be >= 1, got {self.queue_size}")
        rois = (self.roi1, self.roi2, self.roi3)
        if any(r is not None for r in rois) and not all(r is not None for r in rois):
            raise ConfigError("give all three of roi1/roi2/roi3 or none")
        try:
            self.segmentation()  # validate ranges up front
            self.layout()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def segmentation(self) -> SegmentationConfig:
        return SegmentationConfig(
            threshold_mm=self.threshold_mm,
            min_area_frac=self.min_area_frac,
            debounce_frames=self.debounce_frames,
        )

    def layout(self) -> RoiLayout:
        if self.roi1 is not None:
            layout = RoiLayout(
                rois=(self.roi1, self.roi2, self.roi3),
                crossing_axis=self.crossing_axis,
            )
            layout.validate_bounds(self.frame_width, self.frame_height)
            return layout
        return default_layout(self.frame_width, self.frame_height, self.crossing_axis)

    def listen_addr(self) -> tuple[str, int]:
        host, sep, port = self.listen.rpartition(":")
        if not sep or not host:
            raise ConfigError(f"listen must be host:port, got {self.listen!r}")
        try:
            return host, int(port)
        except ValueError as exc:
            raise ConfigError(f"listen port is not an integer in {self.listen!r}") from exc


def _flag_name(field_name: str) -> str:
    return field_name.replace("_", "-")


_FIELDS = {_flag_name(f.name): f for f in fields(ServiceConfig)}


def _coerce(key: str, raw: str):
    f = _FIELDS[key]
    raw = raw.strip()
    if f.type in ("Rect | None",):
        return _parse_rect(key, raw)
    if f.type == "bool":
        return _parse_bool(key, raw)
    if f.type == "int":
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc
    if f.type == "float":
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc
    return raw  # str and str | None pass through


def parse_config_text(text: str, origin: str = "<config>") -> dict:
    """key=value lines -> {field_name: typed value}, unknown keys rejected."""
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{origin}:{lineno}: expected key=value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        out[_FIELDS[key].name] = _coerce(key, raw)
    return out


def load_config(path=None, overrides: dict | None = None) -> ServiceConfig:
    """Defaults, then the config file, then explicit overrides."""
    values: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        values.update(parse_config_text(p.read_text(encoding="utf-8"), origin=str(p)))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ServiceConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
