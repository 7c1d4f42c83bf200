"""Accuracy metrics against ground-truth annotations.

Per-case measures: entry time and distance errors (absolute, plus the
signed time error as a supplementary column since lateness has its own
failure modes), dice overlap of the bounds, label matches, and head-scan
count differences inside the bounds and inside +-5 s entry windows.
Aggregates report median [25th-75th percentile] per the linear
interpolation percentile method, RMSE, and threshold percentages.  Cases
where the pipeline failed outright are counted separately and excluded
from the numeric statistics.

Interval lengths for dice are continuous frame spans (exit - entry), the
same convention the bounds overlap is defined with; this also matches the
annotated frame-number arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInterval, EmptyCases, SegmentMismatch
from .models import GroundTruth, Maneuver, Signage

ENTRY_TIME_THRESHOLD_S = 1.0
ENTRY_DISTANCE_THRESHOLD_M = 10.0
DICE_THRESHOLDS = (0.75, 0.5)

GROUP_ORDERS = {
    "signage": [s.value for s in (Signage.NONE, Signage.STOP_SIGN, Signage.TRAFFIC_LIGHT)],
    "maneuver": [m.value for m in (Maneuver.LEFT, Maneuver.RIGHT, Maneuver.STRAIGHT)],
}
GROUP_VARIABLE_NAMES = {"none": "All", "signage": "Signage type", "maneuver": "Maneuver performed"}


@dataclass(frozen=True)
class CaseMetrics:
    segment_id: str
    signage_true: Signage
    maneuver_true: Maneuver
    failure: str | None = None
    signage_est: Signage | None = None
    maneuver_est: Maneuver | None = None
    entry_time_error_s: float | None = None
    entry_time_signed_s: float | None = None
    entry_distance_error_m: float | None = None
    dice: float | None = None
    signage_match: bool | None = None
    maneuver_match: bool | None = None
    scan_count_diff_bounds: int | None = None
    scan_count_diff_window: int | None = None

    @property
    def failed(self) -> bool:
        return self.failure is not None


@dataclass(frozen=True)
class GroupStats:
    label: str
    count: int
    failures: int
    entry_time_median_s: float
    entry_time_iqr_s: tuple[float, float]
    entry_time_rmse_s: float
    entry_distance_median_m: float
    entry_distance_iqr_m: tuple[float, float]
    entry_distance_rmse_m: float
    dice_median: float
    dice_iqr: tuple[float, float]
    pct_entry_time_within_1s: float
    pct_entry_distance_within_10m: float
    pct_dice_above_075: float
    pct_dice_above_05: float
    signage_accuracy_pct: float
    maneuver_accuracy_pct: float
    scan_diff_bounds_hist: dict = field(default_factory=dict)
    scan_diff_window_hist: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Report:
    group_by: str
    groups: tuple[GroupStats, ...]
    total_cases: int
    total_failures: int


def dice(a: tuple[int, int], b: tuple[int, int]) -> float:
    """Dice coefficient of two [entry, exit] intervals: 2|A&B|/(|A|+|B|)
    with continuous lengths (exit - entry)."""
    (a0, a1), (b0, b1) = a, b
    len_a, len_b = a1 - a0, b1 - b0
    if len_a <= 0 or len_b <= 0:
        raise DegenerateInterval(f"intervals must have positive length: {a}, {b}")
    overlap = max(0, min(a1, b1) - max(a0, b0))
    return 2.0 * overlap / (len_a + len_b)


def compare(output, truth: GroundTruth, frame_rate: float) -> CaseMetrics:
    """Score one pipeline output against its annotation.

    ``output`` is a PipelineOutput (see junctionscan.pipeline): it carries
    the per-frame times and distances plus detected scans, so evaluation
    does not need to re-read the bundle.
    """
    if output.segment_id != truth.segment_id:
        raise SegmentMismatch(
            f"result is for {output.segment_id!r}, truth for {truth.segment_id!r}")
    if output.failure is not None:
        return CaseMetrics(segment_id=truth.segment_id, signage_true=truth.signage,
                           maneuver_true=truth.maneuver, failure=output.failure)

    result = output.result
    time_s = output.time_s
    distance_m = output.distance_m
    signed = float(time_s[result.entry_frame] - time_s[truth.entry_frame])
    dist_err = abs(float(distance_m[result.entry_frame] - distance_m[truth.entry_frame]))
    overlap = dice((result.entry_frame, result.exit_frame),
                   (truth.entry_frame, truth.exit_frame))

    from .headscan import scans_in_interval, scans_in_window

    est_bounds = len(scans_in_interval(output.scans, result.entry_frame, result.exit_frame))
    true_bounds = len(scans_in_interval(output.scans, truth.entry_frame, truth.exit_frame))
    n = len(time_s)
    est_window = scans_in_window(output.scans, result.entry_frame, frame_rate, frame_count=n)
    true_window = scans_in_window(output.scans, truth.entry_frame, frame_rate, frame_count=n)

    return CaseMetrics(
        segment_id=truth.segment_id,
        signage_true=truth.signage,
        maneuver_true=truth.maneuver,
        signage_est=result.signage,
        maneuver_est=result.maneuver,
        entry_time_error_s=abs(signed),
        entry_time_signed_s=signed,
        entry_distance_error_m=dist_err,
        dice=overlap,
        signage_match=result.signage == truth.signage,
        maneuver_match=result.maneuver == truth.maneuver,
        scan_count_diff_bounds=abs(est_bounds - true_bounds),
        scan_count_diff_window=abs(est_window - true_window),
    )


def _percentiles(values: list[float]) -> tuple[float, float, float]:
    q25, q50, q75 = np.percentile(np.asarray(values, dtype=float), [25.0, 50.0, 75.0])
    return float(q50), float(q25), float(q75)


def _rmse(values: list[float]) -> float:
    arr = np.asarray(values, dtype=float)
    return float(np.sqrt(np.mean(arr * arr)))


def _pct(flags: list[bool]) -> float:
    return 100.0 * sum(flags) / len(flags) if flags else 0.0


def _hist(values: list[int]) -> dict:
    out: dict[str, int] = {}
    for v in sorted(values):
        out[str(v)] = out.get(str(v), 0) + 1
    return out


def _group_stats(label: str, cases: list[CaseMetrics]) -> GroupStats:
    ok = [c for c in cases if not c.failed]
    failures = len(cases) - len(ok)
    if not ok:
        zero3 = (0.0, (0.0, 0.0), 0.0)
        return GroupStats(label, len(cases), failures, *zero3, *zero3, 0.0, (0.0, 0.0),
                          0.0, 0.0, 0.0, 0.0, 0.0, 0.0, {}, {})
    times = [c.entry_time_error_s for c in ok]
    dists = [c.entry_distance_error_m for c in ok]
    dices = [c.dice for c in ok]
    t_med, t_lo, t_hi = _percentiles(times)
    d_med, d_lo, d_hi = _percentiles(dists)
    o_med, o_lo, o_hi = _percentiles(dices)
    return GroupStats(
        label=label,
        count=len(cases),
        failures=failures,
        entry_time_median_s=t_med, entry_time_iqr_s=(t_lo, t_hi), entry_time_rmse_s=_rmse(times),
        entry_distance_median_m=d_med, entry_distance_iqr_m=(d_lo, d_hi),
        entry_distance_rmse_m=_rmse(dists),
        dice_median=o_med, dice_iqr=(o_lo, o_hi),
        pct_entry_time_within_1s=_pct([t <= ENTRY_TIME_THRESHOLD_S for t in times]),
        pct_entry_distance_within_10m=_pct([d <= ENTRY_DISTANCE_THRESHOLD_M for d in dists]),
        pct_dice_above_075=_pct([d > DICE_THRESHOLDS[0] for d in dices]),
        pct_dice_above_05=_pct([d > DICE_THRESHOLDS[1] for d in dices]),
        signage_accuracy_pct=_pct([c.signage_match for c in ok]),
        maneuver_accuracy_pct=_pct([c.maneuver_match for c in ok]),
        scan_diff_bounds_hist=_hist([c.scan_count_diff_bounds for c in ok]),
        scan_diff_window_hist=_hist([c.scan_count_diff_window for c in ok]),
    )


def aggregate(cases: list[CaseMetrics], group_by: str = "none") -> Report:
    """Grouped accuracy statistics; groups appear in a fixed label order
    and empty groups are omitted, so output is deterministic."""
    if not cases:
        raise EmptyCases("no cases to aggregate")
    if group_by == "none":
        groups = [_group_stats("all", list(cases))]
    elif group_by in GROUP_ORDERS:
        attr = "signage_true" if group_by == "signage" else "maneuver_true"
        groups = []
        for label in GROUP_ORDERS[group_by]:
            members = [c for c in cases if getattr(c, attr).value == label]
            if members:
                groups.append(_group_stats(label, members))
    else:
        raise ValueError(f"unknown group_by {group_by!r}")
    failures = sum(1 for c in cases if c.failed)
    return Report(group_by, tuple(groups), len(cases), failures)
