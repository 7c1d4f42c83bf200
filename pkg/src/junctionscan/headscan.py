"""Driver head-scan detection from the yaw time series.

A scan is a maximal run of consecutive frames in which the head is turned
more than a threshold angle to one side (constant yaw sign, head detected
in every frame) lasting at least a minimum number of frames.  A compound
movement that dips and rises again without returning inside the threshold
is a single scan scored by its largest excursion.  Frames where the head
was not detected break runs rather than being interpolated; interpolation
would fabricate behavior.

Positive yaw is rotation toward the driver's left (see the bundle adapter
contract).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import IntersectionResult
from .bundle import HeadPose
from .models import Direction


@dataclass(frozen=True)
class ScanParams:
    threshold_deg: float = 20.0
    min_frames: int = 5

    def __post_init__(self):
        if self.threshold_deg <= 0:
            raise ValueError("threshold_deg must be positive")
        if self.min_frames < 1:
            raise ValueError("min_frames must be at least 1")


@dataclass(frozen=True)
class HeadScan:
    direction: Direction
    start_frame: int
    end_frame: int
    peak_frame: int
    magnitude: float  # max |yaw| over the episode, degrees


DEFAULT_SCAN_PARAMS = ScanParams()


def detect_scans(pose: HeadPose | None, frame_count: int,
                 params: ScanParams = DEFAULT_SCAN_PARAMS) -> list[HeadScan]:
    """All head scans in the clip, sorted by start frame."""
    if pose is None or len(pose) == 0:
        return []
    yaw, valid = pose.dense(frame_count)
    above = valid & (np.abs(yaw) > params.threshold_deg)
    sign = np.sign(yaw)

    scans = []
    start = None
    for f in range(frame_count + 1):
        in_run = f < frame_count and above[f]
        if in_run and start is not None and sign[f] != sign[f - 1]:
            _close_run(scans, yaw, start, f - 1, params)
            start = f
        elif in_run and start is None:
            start = f
        elif not in_run and start is not None:
            _close_run(scans, yaw, start, f - 1, params)
            start = None
    return scans


def _close_run(scans: list[HeadScan], yaw: np.ndarray, start: int, end: int,
               params: ScanParams) -> None:
    if end - start + 1 < params.min_frames:
        return
    segment = np.abs(yaw[start:end + 1])
    peak = start + int(np.argmax(segment))
    scans.append(HeadScan(
        direction=Direction.LEFT if yaw[peak] > 0 else Direction.RIGHT,
        start_frame=start,
        end_frame=end,
        peak_frame=peak,
        magnitude=float(segment.max()),
    ))


def scans_in_bounds(scans: list[HeadScan], result: IntersectionResult) -> list[HeadScan]:
    """Scans whose peak lies within the intersection bounds (inclusive)."""
    return scans_in_interval(scans, result.entry_frame, result.exit_frame)


def scans_in_interval(scans: list[HeadScan], start_frame: int, end_frame: int) -> list[HeadScan]:
    return [s for s in scans if start_frame <= s.peak_frame <= end_frame]


def scans_in_window(scans: list[HeadScan], anchor_frame: int, frame_rate: float,
                    half_width_s: float = 5.0, frame_count: int | None = None) -> int:
    """Number of scans peaking within +-half_width_s of the anchor frame
    (both window edges inclusive, clamped to the clip)."""
    half = half_width_s * frame_rate
    lo = max(0.0, anchor_frame - half)
    hi = anchor_frame + half
    if frame_count is not None:
        hi = min(hi, frame_count - 1)
    return sum(1 for s in scans if lo <= s.peak_frame <= hi)
