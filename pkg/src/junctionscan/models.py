"""Core domain types shared by the pipeline modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Signage(str, Enum):
    STOP_SIGN = "stop_sign"
    TRAFFIC_LIGHT = "traffic_light"
    NONE = "none"


class Maneuver(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    STRAIGHT = "straight"


class Direction(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class Geometry(str, Enum):
    FOUR_WAY = "four_way"
    T = "t"
    Y = "y"


VEHICLE_CLASSES = frozenset({"car", "truck", "bus", "bicycle", "motorcycle"})
DETECTION_CLASSES = VEHICLE_CLASSES | {"stop_sign", "traffic_light", "person"}


@dataclass(frozen=True)
class RoiRect:
    """Placement of the stop-line strip within the scene frame, in pixels."""

    x: int
    y: int
    width: int = 500
    height: int = 100


@dataclass(frozen=True)
class Manifest:
    """Per-segment metadata; all streams are validated against it."""

    segment_id: str
    vehicle_id: str
    frame_rate: float
    frame_count: int
    scene_width: int
    scene_height: int
    roi_rect: RoiRect
    speed_unit: str  # "mps" or "mph"; speeds are converted to m/s on load
    created_at: str
    noisy_flow: bool = False
    prng: dict | None = None  # generator provenance for synthetic bundles


@dataclass(frozen=True)
class Waypoint:
    timestamp_ms: float
    latitude: float
    longitude: float


@dataclass(frozen=True)
class DetectionBox:
    """One object detection; `label` serializes as "class" in detections.jsonl."""

    frame_idx: int
    label: str
    confidence: float
    x: float
    y: float
    width: float
    height: float

    @property
    def center_x(self) -> float:
        return self.x + self.width / 2.0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def aspect_ratio(self) -> float:
        return self.width / self.height if self.height > 0 else 0.0


@dataclass(frozen=True)
class GroundTruth:
    """Manually annotated bounds and labels for one segment."""

    segment_id: str
    entry_frame: int
    exit_frame: int
    signage: Signage
    maneuver: Maneuver
    geometry: Geometry | None = None

    def __post_init__(self):
        if self.entry_frame >= self.exit_frame:
            raise ValueError(
                f"ground truth entry_frame {self.entry_frame} must precede "
                f"exit_frame {self.exit_frame}"
            )

    def to_dict(self) -> dict:
        out = {
            "segment_id": self.segment_id,
            "entry_frame": self.entry_frame,
            "exit_frame": self.exit_frame,
            "signage": self.signage.value,
            "maneuver": self.maneuver.value,
        }
        if self.geometry is not None:
            out["geometry"] = self.geometry.value
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(
            segment_id=d["segment_id"],
            entry_frame=int(d["entry_frame"]),
            exit_frame=int(d["exit_frame"]),
            signage=Signage(d["signage"]),
            maneuver=Maneuver(d["maneuver"]),
            geometry=Geometry(d["geometry"]) if d.get("geometry") else None,
        )
