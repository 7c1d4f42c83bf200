"""Self-motion signals from the block flow grid: turn and halt detection.

The 12x4 grid holds mean horizontal image motion per block.  Two scalar
summaries are tracked per frame:

* M1 - median motion of the two central columns (8 values).  Vehicle
  rotation shifts the whole field sideways, so M1 peaks mid-turn;
  positive means a left turn.
* M2 - median of the five mirrored column sums (column 1 + column 12,
  column 2 + column 11, ...; 20 values).  Radial expansion cancels in the
  sums, so M2 tracks overall image motion and bottoms out when the
  vehicle is stopped.

Both are median-smoothed.  Turn candidates are peaks of the normalized M1
in either sign, pruned by the distance spanned during the turn and the
speed at the turn peak, plus an absolute M1 floor that guards clips with
no real turn (per-clip normalization would otherwise promote noise).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import DistanceProfile, Telemetry
from .errors import GridDimMismatch
from .models import Direction
from .signalkit import (
    PeakParams,
    extent_above,
    find_peaks,
    moving_median,
    normalize,
    suppress_close_peaks,
)

FLOW_COLS = 12
FLOW_ROWS = 4
SMOOTH_WINDOW = 15
# nominal noisy-signal window is one second (30 frames at 30 Hz); the
# centered median needs an odd width, so 31 is used
SMOOTH_WINDOW_NOISY = 31
TURN_PEAK_PARAMS = PeakParams(min_height=0.25, min_prominence=0.175)
TURN_SPACING_S = 3.0
MIN_TURN_SPAN_M = 4.5
MIN_TURN_SPEED_MPS = 2.2352  # 5 mph
MIN_TURN_PEAK_ABS = 0.5      # px/frame floor on |M1| at the peak
# floor on the extent baseline, as a fraction of peak height: zero-mean
# measurement noise puts (height - prominence) at the clip's single lowest
# excursion, which would absorb most of the clip into the turn extent
EXTENT_BASELINE_FLOOR = 0.05
HALT_SPEED_MPS = 0.5
HALT_M2_FRACTION = 0.1
HALT_MIN_DURATION_S = 1.0
HALT_MERGE_GAP_S = 0.5


@dataclass(frozen=True)
class MotionSignals:
    m1: np.ndarray
    m2: np.ndarray
    smoothing_window: int


@dataclass(frozen=True)
class TurnEvent:
    direction: Direction
    peak_frame: int
    start_frame: int
    end_frame: int
    peak_value: float      # signed, on the max-abs normalized M1
    distance_span: float
    speed_at_peak: float


@dataclass(frozen=True)
class HaltInterval:
    """Half-open [start_frame, end_frame): end_frame is the first frame
    with resumed motion (it may equal the frame count when the clip ends
    stopped)."""

    start_frame: int
    end_frame: int
    min_speed: float

    def duration_s(self, frame_rate: float) -> float:
        return (self.end_frame - self.start_frame) / frame_rate


def compute_signals(flow: np.ndarray, noisy: bool = False) -> MotionSignals:
    """M1/M2 time series from the (frames, rows, cols) flow stack."""
    if flow.ndim != 3 or flow.shape[1] != FLOW_ROWS or flow.shape[2] != FLOW_COLS:
        raise GridDimMismatch(
            f"expected (n, {FLOW_ROWS}, {FLOW_COLS}) flow grid, got {flow.shape}")
    grid = flow.astype(float)
    central = grid[:, :, FLOW_COLS // 2 - 1: FLOW_COLS // 2 + 1]
    m1 = np.median(central.reshape(grid.shape[0], -1), axis=1)
    npairs = (FLOW_COLS - 2) // 2  # columns 1..5 pair with 12..8 (1-based)
    mirrored = grid[:, :, :npairs] + grid[:, :, FLOW_COLS - 1: FLOW_COLS - 1 - npairs: -1]
    m2 = np.median(mirrored.reshape(grid.shape[0], -1), axis=1)
    window = SMOOTH_WINDOW_NOISY if noisy else SMOOTH_WINDOW
    return MotionSignals(moving_median(m1, window), moving_median(m2, window), window)


def detect_turns(signals: MotionSignals, telemetry: Telemetry, distance: DistanceProfile,
                 frame_rate: float,
                 params: PeakParams = TURN_PEAK_PARAMS,
                 spacing_s: float = TURN_SPACING_S,
                 min_span_m: float = MIN_TURN_SPAN_M,
                 min_speed_mps: float = MIN_TURN_SPEED_MPS,
                 min_peak_abs: float = MIN_TURN_PEAK_ABS,
                 extent_floor: float = EXTENT_BASELINE_FLOOR) -> list[TurnEvent]:
    """Turn maneuvers from the M1 signal.

    Peaks are found on the normalized signal and on its negation, merged
    with the spacing rule applied across signs (the stronger peak wins),
    then pruned by turn span and peak speed.  The turn extent is the run
    of samples above the peak's baseline (height minus prominence, floored
    at ``extent_floor`` of the height).  An empty list means the vehicle
    went straight.
    """
    m1 = signals.m1
    if m1.size < 3 or not np.any(m1):
        return []
    norm = normalize(m1, "max_abs")
    spacing = spacing_s * frame_rate
    sided = PeakParams(params.min_height, params.min_prominence,
                       params.min_width, params.max_width, min_spacing=spacing)
    signed = [(p, 1.0) for p in find_peaks(norm, sided)]
    signed += [(p, -1.0) for p in find_peaks(-norm, sided)]
    flat = [p for p, _ in signed]
    sign_of = {id(p): s for p, s in signed}
    kept = suppress_close_peaks(flat, spacing)
    turns = []
    for peak in kept:
        sided_signal = norm if sign_of[id(peak)] > 0 else -norm
        baseline = max(peak.height - peak.prominence, extent_floor * peak.height)
        start, end = extent_above(sided_signal, peak.index, baseline)
        span = distance.at(end) - distance.at(start)
        speed = float(telemetry.speed_mps[peak.index])
        if span < min_span_m or speed < min_speed_mps:
            continue
        if abs(float(m1[peak.index])) < min_peak_abs:
            continue
        sign = sign_of[id(peak)]
        turns.append(TurnEvent(
            direction=Direction.LEFT if sign > 0 else Direction.RIGHT,
            peak_frame=peak.index,
            start_frame=start,
            end_frame=end,
            peak_value=float(sign * peak.height),
            distance_span=float(span),
            speed_at_peak=speed,
        ))
    turns.sort(key=lambda t: t.peak_frame)
    return turns


def detect_halts(telemetry: Telemetry, signals: MotionSignals, frame_rate: float,
                 speed_threshold: float = HALT_SPEED_MPS,
                 m2_fraction: float = HALT_M2_FRACTION,
                 min_duration_s: float = HALT_MIN_DURATION_S,
                 merge_gap_s: float = HALT_MERGE_GAP_S) -> list[HaltInterval]:
    """Halts: spans where the vehicle is effectively stationary.

    A frame qualifies when speed is below ``speed_threshold`` and |M2| is
    within ``m2_fraction`` of the clip's peak |M2| (inclusive, so an
    all-zero M2 never vetoes).  Qualifying runs separated by less than
    ``merge_gap_s`` are merged, then runs shorter than ``min_duration_s``
    are dropped.
    """
    speed = telemetry.speed_mps
    m2_cap = float(np.max(np.abs(signals.m2))) if signals.m2.size else 0.0
    mask = (speed < speed_threshold) & (np.abs(signals.m2) <= m2_fraction * m2_cap)
    runs = _mask_runs(mask)
    merged: list[list[int]] = []
    max_gap = merge_gap_s * frame_rate
    for start, end in runs:
        if merged and start - merged[-1][1] < max_gap:
            merged[-1][1] = end
        else:
            merged.append([start, end])
    out = []
    for start, end in merged:
        if (end - start) / frame_rate >= min_duration_s:
            out.append(HaltInterval(start, end, float(np.min(speed[start:end]))))
    return out


def _mask_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Half-open [start, end) spans of consecutive True values."""
    if mask.size == 0:
        return []
    padded = np.concatenate(([False], mask, [False])).astype(int)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return list(zip(starts.tolist(), ends.tolist()))
