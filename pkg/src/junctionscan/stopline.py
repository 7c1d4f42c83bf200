"""Stop-line detection from the per-frame ROI intensity strips.

A painted transverse line shows up as a bright horizontal band in the
strip.  For each frame the strip is scanned over a small range of
rotations (the line is rarely perfectly horizontal in the image); the
rotation that concentrates the most intensity into a single row wins, and
peaks of that rotation's row profile become line candidates.  Candidates
are linked frame-to-frame into tracks; a track is accepted as a real stop
line only if it persists for several frames, spans at least a meter of
vehicle travel, starts in the top half of the strip, and ends in the
bottom half.  The vehicle is considered to have crossed the line one
meter past the end of the track.

Row profiles are scaled by the maximum possible intensity (mean sampled
value / 255) rather than min-max normalized: a min-max profile always has
a 1.0 maximum, which would both defeat the cross-rotation comparison and
promote noise maxima on line-free frames into candidates.

Rotation sign convention: positive rotation tilts the sampling line
counter-clockwise in the visual sense, i.e. image rows decrease toward
the right edge.  The asymmetric search range (4 deg clockwise to 8 deg
counter-clockwise) is deliberate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bundle import DistanceProfile
from .signalkit import PeakParams, find_peaks

ROTATIONS_DEG = tuple(range(-4, 9))
DEFAULT_PEAK_PARAMS = PeakParams(min_height=0.5, min_prominence=0.17,
                                 min_width=2.5, max_width=12.0)
LINK_FORWARD_ROWS = 8     # candidate may move down this many rows per frame
LINK_BACKTRACK_ROWS = 2   # ... and up this many (jitter tolerance)
MIN_TRACK_FRAMES = 5
MIN_TRACK_SPAN_M = 1.0
CROSSING_BUFFER_M = 1.0

_offset_cache: dict[tuple[int, int], np.ndarray] = {}
_table_cache: dict[tuple[int, int, int], tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


@dataclass(frozen=True)
class LineCandidate:
    frame_idx: int
    row: int
    strength: float     # profile peak height, fraction of full intensity
    rotation: int       # winning rotation, degrees


@dataclass(frozen=True)
class StopLineTrack:
    candidates: tuple[LineCandidate, ...]
    distance_span: float

    @property
    def first_frame(self) -> int:
        return self.candidates[0].frame_idx

    @property
    def last_frame(self) -> int:
        return self.candidates[-1].frame_idx


@dataclass(frozen=True)
class CrossingEvent:
    frame_idx: int
    distance: float
    clamped: bool = False


def _column_offsets(rotation_deg: int, width: int) -> np.ndarray:
    """Per-column row offsets of the tilted sampling line (nearest-neighbor)."""
    key = (rotation_deg, width)
    cached = _offset_cache.get(key)
    if cached is None:
        cols = np.arange(width, dtype=float)
        cx = (width - 1) / 2.0
        cached = np.rint(-(cols - cx) * math.tan(math.radians(rotation_deg))).astype(int)
        cached.setflags(write=False)
        _offset_cache[key] = cached
    return cached


def _rotation_table(rotation_deg: int, height: int, width: int):
    """(safe_rows, cols, counts): gather indices per output row with
    out-of-strip samples redirected to a sentinel zero row at ``height``."""
    key = (rotation_deg, height, width)
    cached = _table_cache.get(key)
    if cached is None:
        offsets = _column_offsets(rotation_deg, width)
        rows = np.arange(height)[:, None] + offsets[None, :]
        valid = (rows >= 0) & (rows < height)
        safe_rows = np.where(valid, rows, height)
        cols = np.broadcast_to(np.arange(width)[None, :], safe_rows.shape)
        counts = valid.sum(axis=1)
        for arr in (safe_rows, counts):
            arr.setflags(write=False)
        cached = (safe_rows, cols, counts)
        _table_cache[key] = cached
    return cached


def _pad_frame(roi_frame: np.ndarray) -> np.ndarray:
    padded = np.empty((roi_frame.shape[0] + 1, roi_frame.shape[1]), dtype=roi_frame.dtype)
    padded[:-1] = roi_frame
    padded[-1] = 0
    return padded


def _profile_from_padded(padded: np.ndarray, rotation_deg: int) -> np.ndarray:
    height, width = padded.shape[0] - 1, padded.shape[1]
    safe_rows, cols, counts = _rotation_table(rotation_deg, height, width)
    sums = padded[safe_rows, cols].sum(axis=1, dtype=np.int64)
    profile = np.zeros(height, dtype=float)
    nonzero = counts > 0
    profile[nonzero] = sums[nonzero] / counts[nonzero] / 255.0
    return profile


def row_profile(roi_frame: np.ndarray, rotation_deg: int) -> np.ndarray:
    """Mean intensity along the tilted line through each row, as a fraction
    of full scale.

    Samples that leave the strip are excluded, which is equivalent to
    scaling the partial sum by the fraction sampled.  Rows with no valid
    samples profile to 0.
    """
    return _profile_from_padded(_pad_frame(roi_frame), rotation_deg)


def detect_candidates(roi_frame: np.ndarray, frame_idx: int = 0,
                      params: PeakParams = DEFAULT_PEAK_PARAMS,
                      rotations: tuple[int, ...] = ROTATIONS_DEG) -> list[LineCandidate]:
    """Line candidates for one frame.

    Every rotation's profile is peak-searched; the rotation whose best
    qualifying peak is highest wins (ties go to the first rotation in scan
    order) and all of that rotation's qualifying peaks are returned.
    """
    padded = _pad_frame(roi_frame)
    best_rotation = None
    best_height = -math.inf
    best_peaks: list = []
    for rot in rotations:
        profile = _profile_from_padded(padded, rot)
        if float(profile.max()) < params.min_height:
            continue
        peaks = find_peaks(profile, params)
        if not peaks:
            continue
        top = max(p.height for p in peaks)
        if top > best_height:
            best_rotation, best_height, best_peaks = rot, top, peaks
    if best_rotation is None:
        return []
    return [LineCandidate(frame_idx, p.index, p.height, best_rotation) for p in best_peaks]


def detect_candidates_stack(roi: np.ndarray, params: PeakParams = DEFAULT_PEAK_PARAMS,
                            rotations: tuple[int, ...] = ROTATIONS_DEG,
                            prescreen: bool = True) -> list[list[LineCandidate]]:
    """Per-frame candidates for a whole clip.

    With ``prescreen`` enabled, frames whose rotation-0 row sums cannot
    possibly contain a qualifying line are skipped.  The screen is
    conservative: it assumes the worst-case smear of a minimal-energy
    qualifying band across the full rotation range, with a 2x margin on
    top of that, so it only ever drops frames the full search would reject
    anyway.  Disable it for strips with extreme tilts or unusual texture.
    """
    n, height, width = roi.shape
    run_full = np.ones(n, dtype=bool)
    if prescreen and n > 0:
        rowsums = roi.astype(np.float64).sum(axis=2)
        spread = max(abs(math.tan(math.radians(r))) for r in rotations) * width + 1.0
        energy_bound = params.min_prominence * 255.0 * max(params.min_width, 1.0) * width / spread
        peakiness = rowsums.max(axis=1) - np.median(rowsums, axis=1)
        run_full = peakiness > energy_bound * 0.5
    out: list[list[LineCandidate]] = []
    for f in range(n):
        if run_full[f]:
            out.append(detect_candidates(roi[f], f, params, rotations))
        else:
            out.append([])
    return out


def track_lines(candidates_per_frame: list[list[LineCandidate]],
                distance: DistanceProfile,
                roi_height: int = 100,
                min_frames: int = MIN_TRACK_FRAMES,
                min_span_m: float = MIN_TRACK_SPAN_M) -> list[StopLineTrack]:
    """Link per-frame candidates into tracks and keep the plausible ones.

    Linking is greedy over consecutive frames: a candidate continues a
    track when its row moved at most LINK_FORWARD_ROWS down or
    LINK_BACKTRACK_ROWS up relative to the track's last row; nearest row
    delta wins when there is a choice.  A track missing a frame closes.
    Valid tracks last >= ``min_frames`` frames, cover >= ``min_span_m`` of
    travel, start in the top half of the strip, and end in the bottom
    half.
    """
    open_tracks: list[list[LineCandidate]] = []
    finished: list[list[LineCandidate]] = []
    for frame, cands in enumerate(candidates_per_frame):
        still_open: list[list[LineCandidate]] = []
        unmatched = sorted(cands, key=lambda c: c.row)
        # tracks last extended on the previous frame can continue
        extendable = [t for t in open_tracks if t[-1].frame_idx == frame - 1]
        finished.extend(t for t in open_tracks if t[-1].frame_idx != frame - 1)
        pairs = []
        for ti, track in enumerate(extendable):
            for cand in unmatched:
                delta = cand.row - track[-1].row
                if -LINK_BACKTRACK_ROWS <= delta <= LINK_FORWARD_ROWS:
                    pairs.append((abs(delta), cand.row, ti, cand))
        used_tracks: set[int] = set()
        used_rows: set[int] = set()
        for _, row, ti, cand in sorted(pairs, key=lambda p: (p[0], p[1], p[2])):
            if ti in used_tracks or row in used_rows:
                continue
            extendable[ti].append(cand)
            used_tracks.add(ti)
            used_rows.add(row)
        still_open.extend(extendable)
        for cand in unmatched:
            if cand.row not in used_rows:
                still_open.append([cand])
        open_tracks = still_open
    finished.extend(open_tracks)

    tracks = []
    for cands in finished:
        if len(cands) < min_frames:
            continue
        span = distance.at(cands[-1].frame_idx) - distance.at(cands[0].frame_idx)
        if span < min_span_m:
            continue
        if cands[0].row >= roi_height / 2 or cands[-1].row < roi_height / 2:
            continue
        tracks.append(StopLineTrack(tuple(cands), float(span)))
    tracks.sort(key=lambda t: t.first_frame)
    return tracks


def crossing_event(track: StopLineTrack, distance: DistanceProfile,
                   buffer_m: float = CROSSING_BUFFER_M) -> CrossingEvent:
    """The frame and distance at which the vehicle crossed the tracked line.

    Crossing distance is the track-end distance plus a fixed buffer; the
    crossing frame is the first frame whose distance reaches it (clamped
    to the clip end with a flag when travel never gets there).
    """
    target = distance.at(track.last_frame) + buffer_m
    frame, clamped = distance.frame_at(target, start=track.last_frame)
    return CrossingEvent(frame_idx=frame, distance=float(target), clamped=clamped)
