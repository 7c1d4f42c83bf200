"""Shared 1-D signal utilities: smoothing, normalization, peak detection.

Peak prominence follows the standard topographic definition: the height of
the peak above the higher of the two lowest valleys that separate it from
strictly higher terrain (or from the signal edge).  Width is measured at
half-prominence height with linear interpolation between samples.  All
tie-breaking is deterministic so repeated runs produce identical output:

* plateau peaks report the floor of the plateau center index;
* when two surviving peaks are closer than ``min_spacing`` samples, the
  higher one is kept, and on equal heights the earlier index wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import EvenWindow


@dataclass(frozen=True)
class PeakParams:
    """Acceptance constraints for detected peaks.

    Heights and prominences are in signal units; widths and spacing are in
    samples (fractions allowed for widths since they are interpolated).
    """

    min_height: float = -math.inf
    min_prominence: float = 0.0
    min_width: float = 0.0
    max_width: float = math.inf
    min_spacing: float = 0.0

    def __post_init__(self):
        if self.min_prominence < 0 or self.min_width < 0 or self.min_spacing < 0:
            raise ValueError("peak constraints must be non-negative")
        if self.min_width > self.max_width:
            raise ValueError(f"min_width {self.min_width} exceeds max_width {self.max_width}")


@dataclass(frozen=True)
class Peak:
    """One detected peak.

    ``extent`` is the run of samples strictly above the peak's baseline
    (height minus prominence); the baseline crossings lie just outside it.
    """

    index: int
    height: float
    prominence: float
    width: float
    extent: tuple[int, int]


def moving_median(signal: Sequence[float] | np.ndarray, window: int) -> np.ndarray:
    """Centered moving median; the window is clipped at the signal edges.

    Even-count medians (which occur only at the edges) are the mean of the
    middle two values.  ``window`` must be odd.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if window % 2 == 0:
        raise EvenWindow(f"moving_median window must be odd, got {window}")
    x = np.asarray(signal, dtype=float)
    n = x.size
    if n == 0 or window == 1:
        return x.copy()
    half = window // 2
    out = np.empty(n, dtype=float)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        out[i] = np.median(x[lo:hi])
    return out


def moving_mean(signal: Sequence[float] | np.ndarray, window: int) -> np.ndarray:
    """Centered moving mean with edge clipping; even windows lean one
    sample to the right of center."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    x = np.asarray(signal, dtype=float)
    n = x.size
    if n == 0 or window == 1:
        return x.copy()
    left = window // 2
    right = window - 1 - left
    csum = np.concatenate(([0.0], np.cumsum(x)))
    lo = np.clip(np.arange(n) - left, 0, n)
    hi = np.clip(np.arange(n) + right + 1, 0, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def normalize(signal: Sequence[float] | np.ndarray, mode: str) -> np.ndarray:
    """Scale a signal: ``max_abs`` divides by the largest magnitude (all-zero
    input is returned unchanged); ``min_max`` maps affinely onto [0, 1]
    (constant input becomes all zeros)."""
    x = np.asarray(signal, dtype=float)
    if x.size == 0:
        raise ValueError("cannot normalize an empty signal")
    if mode == "max_abs":
        m = float(np.max(np.abs(x)))
        return x.copy() if m == 0.0 else x / m
    if mode == "min_max":
        lo = float(np.min(x))
        hi = float(np.max(x))
        if hi == lo:
            return np.zeros_like(x)
        return (x - lo) / (hi - lo)
    raise ValueError(f"unknown normalization mode {mode!r}")


def _local_maxima(x: np.ndarray) -> list[tuple[int, int, int]]:
    """Strict local maxima as (index, run_start, run_end); plateaus report
    their center index (floored).  Runs touching the signal edge are not
    maxima."""
    n = x.size
    out = []
    i = 1
    while i < n - 1:
        if x[i] > x[i - 1]:
            j = i
            while j < n - 1 and x[j + 1] == x[i]:
                j += 1
            if j < n - 1 and x[j + 1] < x[i]:
                out.append(((i + j) // 2, i, j))
            i = j + 1
        else:
            i += 1
    return out


def _prominence(x: np.ndarray, idx: int) -> tuple[float, int, int]:
    """Topographic prominence of the maximum at ``idx`` plus the valley
    (base) indices that bound it on either side."""
    h = x[idx]
    left_min = h
    left_base = idx
    j = idx - 1
    while j >= 0 and x[j] <= h:
        if x[j] < left_min:
            left_min = x[j]
            left_base = j
        j -= 1
    right_min = h
    right_base = idx
    j = idx + 1
    n = x.size
    while j < n and x[j] <= h:
        if x[j] < right_min:
            right_min = x[j]
            right_base = j
        j += 1
    return float(h - max(left_min, right_min)), left_base, right_base


def _width(x: np.ndarray, idx: int, height: float, prominence: float,
           left_base: int, right_base: int) -> float:
    """Width at half-prominence height, interpolated between samples."""
    eval_h = height - prominence / 2.0
    i = idx
    while i > left_base and x[i] > eval_h:
        i -= 1
    left_ip = float(i)
    if x[i] < eval_h and i < idx:
        left_ip += (eval_h - x[i]) / (x[i + 1] - x[i])
    i = idx
    while i < right_base and x[i] > eval_h:
        i += 1
    right_ip = float(i)
    if x[i] < eval_h and i > idx:
        right_ip -= (eval_h - x[i]) / (x[i - 1] - x[i])
    return right_ip - left_ip


def extent_above(signal: Sequence[float] | np.ndarray, index: int,
                 baseline: float) -> tuple[int, int]:
    """Maximal run of samples around ``index`` strictly above ``baseline``."""
    x = np.asarray(signal, dtype=float)
    start = index
    while start > 0 and x[start - 1] > baseline:
        start -= 1
    end = index
    n = x.size
    while end < n - 1 and x[end + 1] > baseline:
        end += 1
    return start, end


def _extent(x: np.ndarray, idx: int, baseline: float) -> tuple[int, int]:
    return extent_above(x, idx, baseline)


def suppress_close_peaks(peaks: list[Peak], min_spacing: float,
                         priority: Callable[[Peak], float] | None = None) -> list[Peak]:
    """Drop peaks closer than ``min_spacing`` samples to a stronger peak.

    Strength defaults to peak height; equal strengths keep the earlier
    index.  Output stays sorted by index.
    """
    if min_spacing <= 0 or len(peaks) < 2:
        return sorted(peaks, key=lambda p: p.index)
    key = priority if priority is not None else (lambda p: p.height)
    order = sorted(range(len(peaks)), key=lambda k: (-key(peaks[k]), peaks[k].index))
    keep = [True] * len(peaks)
    for k in order:
        if not keep[k]:
            continue
        for j in range(len(peaks)):
            if j != k and keep[j] and abs(peaks[j].index - peaks[k].index) < min_spacing:
                if (key(peaks[j]), -peaks[j].index) < (key(peaks[k]), -peaks[k].index):
                    keep[j] = False
    return sorted((p for k, p in zip(keep, peaks) if k), key=lambda p: p.index)


def find_peaks(signal: Sequence[float] | np.ndarray, params: PeakParams) -> list[Peak]:
    """Detect local maxima that satisfy every constraint in ``params``.

    Maxima must be strictly greater than their immediate neighbors (plateau
    centers count once).  Height, prominence, and width filters are applied
    first; spacing suppression runs over the survivors.  Returns peaks
    sorted by index; an empty list when nothing qualifies.
    """
    x = np.asarray(signal, dtype=float)
    if x.size < 3:
        return []
    candidates = []
    for idx, _, _ in _local_maxima(x):
        height = float(x[idx])
        if height < params.min_height:
            continue
        prom, left_base, right_base = _prominence(x, idx)
        if prom < params.min_prominence:
            continue
        width = _width(x, idx, height, prom, left_base, right_base)
        if width < params.min_width or width > params.max_width:
            continue
        extent = _extent(x, idx, height - prom)
        candidates.append(Peak(idx, height, prom, width, extent))
    return suppress_close_peaks(candidates, params.min_spacing)
