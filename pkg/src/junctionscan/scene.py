"""Object-detection filtering, signage classification, and scene features.

Signage classification is evidence-count based: a class must appear in
more than ``MIN_SIGNAGE_FRAMES`` frames to qualify, and when both stop
sign and traffic light qualify the one seen in more frames wins (ties go
to the traffic light, the more structured evidence).  The density of a
signage class is the per-frame maximum bounding-box area, smoothed and
scaled, whose peaks correspond to sign or light-array passings.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptyStream
from .models import DetectionBox, Manifest, Signage, VEHICLE_CLASSES
from .signalkit import Peak, PeakParams, find_peaks, moving_mean, normalize

MIN_SIGNAGE_FRAMES = 20          # strictly more than this many frames
STOP_SIGN_MAX_HEIGHT_PX = 150
LIGHT_MAX_HEIGHT_PX = 85
LIGHT_CENTRAL_FRACTION = 0.70
DENSITY_SMOOTH_FRAMES = 15
DENSITY_PEAK_HEIGHT = 0.2
DENSITY_PEAK_PROMINENCE = 0.1
DENSITY_PEAK_MIN_WIDTH_S = 0.5
DENSITY_PEAK_SPACING_S = 2.0
CLUSTER_GAP_S = 0.5
CROSS_TRAFFIC_ASPECT = 1.4
TRAFFIC_WINDOW_S = 1.0


@dataclass(frozen=True)
class FilteredDetections:
    stop_signs: tuple[DetectionBox, ...]
    traffic_lights: tuple[DetectionBox, ...]
    vehicles: tuple[DetectionBox, ...]
    persons: tuple[DetectionBox, ...]

    def for_signage(self, signage: Signage) -> tuple[DetectionBox, ...]:
        if signage == Signage.STOP_SIGN:
            return self.stop_signs
        if signage == Signage.TRAFFIC_LIGHT:
            return self.traffic_lights
        raise ValueError(f"no detection stream for signage {signage}")


@dataclass(frozen=True)
class SignageEvidence:
    signage: Signage
    qualifying_frames: int
    frame_counts: dict = field(default_factory=dict)  # per-class frame counts
    density: np.ndarray | None = None
    array_peaks: tuple[Peak, ...] = ()
    passing_frame: int | None = None
    first_frame: int | None = None  # appearance span of the winning class
    last_frame: int | None = None


@dataclass(frozen=True)
class TrafficFeatures:
    density: np.ndarray                 # vehicles per frame, 1 s moving mean
    cross_traffic_fraction: np.ndarray  # wide-box fraction per frame


def filter_detections(raw: tuple[DetectionBox, ...] | list[DetectionBox],
                      manifest: Manifest) -> FilteredDetections:
    """Geometry gates on the raw detections.

    Stop signs must sit in the right half of the frame (the side the sign
    is posted on) and be at most 150 px tall; traffic lights must sit in
    the central 70% of the frame width and be at most 85 px tall.  Vehicle
    classes and pedestrians pass through untouched.  Idempotent.
    """
    half_w = manifest.scene_width / 2.0
    central = manifest.scene_width * LIGHT_CENTRAL_FRACTION / 2.0
    stop_signs, lights, vehicles, persons = [], [], [], []
    for box in raw:
        if box.label == "stop_sign":
            if box.center_x > half_w and box.height <= STOP_SIGN_MAX_HEIGHT_PX:
                stop_signs.append(box)
        elif box.label == "traffic_light":
            if abs(box.center_x - half_w) <= central and box.height <= LIGHT_MAX_HEIGHT_PX:
                lights.append(box)
        elif box.label in VEHICLE_CLASSES:
            vehicles.append(box)
        elif box.label == "person":
            persons.append(box)
    return FilteredDetections(tuple(stop_signs), tuple(lights), tuple(vehicles), tuple(persons))


def _frames_with_boxes(boxes: tuple[DetectionBox, ...]) -> np.ndarray:
    return np.unique([b.frame_idx for b in boxes]) if boxes else np.empty(0, dtype=int)


def classify_signage(filtered: FilteredDetections,
                     min_frames: int = MIN_SIGNAGE_FRAMES) -> SignageEvidence:
    """Intersection signage from filtered detection evidence."""
    counts = {
        Signage.STOP_SIGN: int(_frames_with_boxes(filtered.stop_signs).size),
        Signage.TRAFFIC_LIGHT: int(_frames_with_boxes(filtered.traffic_lights).size),
    }
    qualified = {s: c for s, c in counts.items() if c > min_frames}
    if not qualified:
        return SignageEvidence(Signage.NONE, 0, frame_counts={s.value: c for s, c in counts.items()})
    if len(qualified) == 2 and counts[Signage.STOP_SIGN] > counts[Signage.TRAFFIC_LIGHT]:
        winner = Signage.STOP_SIGN
    elif len(qualified) == 2:
        winner = Signage.TRAFFIC_LIGHT
    else:
        winner = next(iter(qualified))
    return SignageEvidence(winner, counts[winner],
                           frame_counts={s.value: c for s, c in counts.items()})


def density_and_passing(boxes: tuple[DetectionBox, ...], signage: Signage,
                        frame_count: int, frame_rate: float,
                        smooth_frames: int = DENSITY_SMOOTH_FRAMES,
                        cluster_gap_s: float = CLUSTER_GAP_S,
                        ) -> tuple[np.ndarray, tuple[Peak, ...], int]:
    """Density series, its peaks, and the passing frame for a signage class.

    The density is the per-frame maximum box area (0 where absent),
    mean-smoothed and min-max scaled.  The passing frame is the moment
    the relevant sign or array leaves the camera view:

    * stop sign - end of the longest appearance cluster (gaps up to
      ``cluster_gap_s`` are bridged);
    * traffic light, one density peak - last frame a light is visible;
    * traffic light, several peaks - the minimum of the raw density
      between the first two peaks, i.e. where the near array drops out of
      view while the far array is still small.  The raw series is used
      here because smoothing would drag the minimum several frames late.
    """
    if not boxes:
        raise EmptyStream(f"no {signage.value} boxes to build a density from")
    area = np.zeros(frame_count, dtype=float)
    for b in boxes:
        area[b.frame_idx] = max(area[b.frame_idx], b.area)
    smoothed = moving_mean(area, smooth_frames)
    density = normalize(smoothed, "min_max")
    params = PeakParams(min_height=DENSITY_PEAK_HEIGHT, min_prominence=DENSITY_PEAK_PROMINENCE,
                        min_width=DENSITY_PEAK_MIN_WIDTH_S * frame_rate,
                        min_spacing=DENSITY_PEAK_SPACING_S * frame_rate)
    peaks = tuple(find_peaks(density, params))

    frames = _frames_with_boxes(boxes)
    if signage == Signage.STOP_SIGN:
        max_gap = cluster_gap_s * frame_rate
        clusters = [[int(frames[0]), int(frames[0])]]
        for f in frames[1:]:
            if f - clusters[-1][1] <= max_gap:
                clusters[-1][1] = int(f)
            else:
                clusters.append([int(f), int(f)])
        best = max(clusters, key=lambda c: (c[1] - c[0], -c[0]))
        passing = best[1]
    elif len(peaks) >= 2:
        lo, hi = peaks[0].index, peaks[1].index
        passing = lo + 1 + int(np.argmin(area[lo + 1: hi]))
    else:
        passing = int(frames[-1])
    return density, peaks, passing


def build_signage_evidence(filtered: FilteredDetections, frame_count: int,
                           frame_rate: float,
                           min_frames: int = MIN_SIGNAGE_FRAMES) -> SignageEvidence:
    """classify_signage plus the density evidence for the winning class."""
    evidence = classify_signage(filtered, min_frames)
    if evidence.signage == Signage.NONE:
        return evidence
    boxes = filtered.for_signage(evidence.signage)
    density, peaks, passing = density_and_passing(
        boxes, evidence.signage, frame_count, frame_rate)
    frames = _frames_with_boxes(boxes)
    return replace(evidence, density=density, array_peaks=peaks, passing_frame=passing,
                   first_frame=int(frames[0]), last_frame=int(frames[-1]))


def traffic_features(vehicles: tuple[DetectionBox, ...], frame_count: int,
                     frame_rate: float,
                     aspect_threshold: float = CROSS_TRAFFIC_ASPECT) -> TrafficFeatures:
    """Traffic density (1 s moving mean of vehicle-box count) and the
    per-frame fraction of boxes wide enough to be cross-traffic."""
    counts = np.zeros(frame_count, dtype=float)
    wide = np.zeros(frame_count, dtype=float)
    for b in vehicles:
        counts[b.frame_idx] += 1
        if b.aspect_ratio >= aspect_threshold:
            wide[b.frame_idx] += 1
    window = max(1, round(TRAFFIC_WINDOW_S * frame_rate))
    density = moving_mean(counts, window)
    fraction = np.divide(wide, counts, out=np.zeros_like(wide), where=counts > 0)
    return TrafficFeatures(density, fraction)
