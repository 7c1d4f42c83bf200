"""Pipeline configuration: every threshold in one place.

Defaults are the standard operating points; the invented values (halt
thresholds, linking tolerances, density peak parameters, the association
window) are marked in the field comments of their owning modules.  A JSON
config file may override any subset, e.g.::

    {"fusion": {"stop_sign_straight_exit_m": 25.0},
     "motion": {"noisy": true}}

Unknown keys are rejected so typos cannot silently revert to defaults.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .bounds import FusionConfig
from .headscan import ScanParams


@dataclass(frozen=True)
class StopLineConfig:
    min_peak_height: float = 0.5
    min_peak_prominence: float = 0.17
    min_line_width_px: float = 2.5
    max_line_width_px: float = 12.0
    min_track_frames: int = 5
    min_track_span_m: float = 1.0
    crossing_buffer_m: float = 1.0
    prescreen: bool = True


@dataclass(frozen=True)
class MotionConfig:
    noisy: bool = False          # use the wide smoothing window for all bundles
    min_peak_height: float = 0.25
    min_peak_prominence: float = 0.175
    peak_spacing_s: float = 3.0
    min_turn_span_m: float = 4.5
    min_turn_speed_mps: float = 2.2352
    min_turn_peak_abs: float = 0.5
    turn_extent_floor: float = 0.05
    halt_speed_mps: float = 0.5
    halt_m2_fraction: float = 0.1
    halt_min_duration_s: float = 1.0
    halt_merge_gap_s: float = 0.5


@dataclass(frozen=True)
class SceneConfig:
    min_signage_frames: int = 20
    density_smooth_frames: int = 15
    cluster_gap_s: float = 0.5
    cross_traffic_aspect: float = 1.4


@dataclass(frozen=True)
class HeadScanConfig:
    threshold_deg: float = 20.0
    min_frames: int = 5
    entry_window_s: float = 5.0

    def scan_params(self) -> ScanParams:
        return ScanParams(self.threshold_deg, self.min_frames)


@dataclass(frozen=True)
class PipelineConfig:
    stopline: StopLineConfig = field(default_factory=StopLineConfig)
    motion: MotionConfig = field(default_factory=MotionConfig)
    scene: SceneConfig = field(default_factory=SceneConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    headscan: HeadScanConfig = field(default_factory=HeadScanConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _merge_section(cls, defaults, overrides: dict, section: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown config keys in {section!r}: {sorted(unknown)}")
    return dataclasses.replace(defaults, **overrides)


def config_from_dict(data: dict) -> PipelineConfig:
    base = PipelineConfig()
    sections = {
        "stopline": (StopLineConfig, base.stopline),
        "motion": (MotionConfig, base.motion),
        "scene": (SceneConfig, base.scene),
        "fusion": (FusionConfig, base.fusion),
        "headscan": (HeadScanConfig, base.headscan),
    }
    unknown = set(data) - set(sections)
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    kwargs = {}
    for name, (cls, defaults) in sections.items():
        kwargs[name] = _merge_section(cls, defaults, data.get(name, {}), name)
    return PipelineConfig(**kwargs)


def load_config(path: str | Path | None) -> PipelineConfig:
    """Config from a JSON file; None gives the defaults."""
    if path is None:
        return PipelineConfig()
    return config_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
