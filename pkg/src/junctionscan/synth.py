"""Deterministic scenario generator: bundles with exact ground truth.

Scenarios describe an intersection approach on a 1-D route; the generator
renders every input stream the pipeline consumes (telemetry, ROI strips,
flow grids, detections, head pose, waypoints) and derives the ground
truth analytically from the construction parameters, never from the
detectors.  Generation is a pure function of the scenario (the seed only
drives the noise draws), so bundles are byte-identical across runs.

Route layout (distances from clip start, default 200 m clip):

    stop line            at clip_length/2 - 12 m        (88 m)
    stop sign            passed 1 m past the line       (89 m)
    single light array   at clip_length/2 + 12 m        (112 m)
    two light arrays     at center - 4 m and center + 24 m
    turn                 starts at center - 6 m

The ROI band row advances linearly with the distance left to the line
over the final 8 m of approach; a linear map keeps the per-frame row
motion inside the tracker's linking window at urban speeds while
preserving the top-half to bottom-half ordering the validity rules need.
Flow grids superpose a radial component (antisymmetric about the grid
center, so M1 is exactly zero when driving straight), a forward bias on
the outer columns (so M2 scales with speed and vanishes at rest), and a
rectangular turn pulse (median smoothing preserves its edges, keeping
turn extents frame-exact).
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from .bundle import DistanceProfile, HeadPose, SegmentBundle, Telemetry, integrate_distance
from .errors import InvalidScenario
from .models import (
    DetectionBox,
    Direction,
    Geometry,
    GroundTruth,
    Maneuver,
    Manifest,
    RoiRect,
    Signage,
    Waypoint,
)

FRAME_RATE = 30.0
SCENE_W, SCENE_H = 1920, 1080
ROI_RECT = RoiRect(x=710, y=900, width=500, height=100)
CREATED_AT = "2025-01-01T00:00:00Z"

ROI_BACKGROUND = 30
BAND_VALUE = 230
BAND_HALF_THICKNESS = 1          # band is 3 px thick
ROI_VIEW_NEAR_M = 1.0            # line leaves the strip 1 m before the bumper
ROI_VIEW_FAR_M = 9.0
ROI_ROW_TOP = 8

STOP_LINE_BACKOFF_M = 12.0
SIGN_PASS_PAST_LINE_M = 1.0
SIGN_STANDOFF_M = 3.0
SIGN_VIEW_RANGE_M = 45.0
SIGN_HEIGHT_GAIN = 420.0         # height px = gain / gap; capped under the 150 px filter
LIGHT_STANDOFF_M = 4.0
LIGHT_VIEW_RANGE_M = 55.0
LIGHT_HEIGHT_GAIN = 300.0        # capped under the 85 px filter
LIGHT_SINGLE_OFFSET_M = 12.0     # from intersection center
LIGHT_NEAR_OFFSET_M = -4.0
LIGHT_FAR_OFFSET_M = 24.0

TURN_START_OFFSET_M = -6.0       # from center
TURN_ARC_M = 14.0
TURN_AMPLITUDE = 3.0             # px/frame pulse on every column
CURVE_AMPLITUDE_RATIO = 0.2
CURVE_ARC_M = 40.0
CURVE_CENTER_M = 55.0
WIGGLE_ARC_M = 3.0
WIGGLE_CENTER_M = 55.0
ARROW_CENTER_M = 55.0
CROSSWALK_CENTER_M = 35.0
CROSSWALK_GAP_M = 2.5

FLOW_RADIAL_GAIN = 0.05
FLOW_FORWARD_BIAS = 0.02
FLOW_COLS, FLOW_ROWS = 12, 4

DECEL_MPS2 = 2.5
ACCEL_MPS2 = 2.0
MAX_FRAMES = 40000


@dataclass(frozen=True)
class HaltSpec:
    """Stop ``before_line_m`` meters short of the stop line (negative =
    past the line) for ``duration_s`` seconds."""

    before_line_m: float
    duration_s: float


@dataclass(frozen=True)
class ScanSpec:
    at_distance_m: float
    direction: Direction
    magnitude_deg: float
    duration_frames: int
    compound: bool = False


@dataclass(frozen=True)
class NoiseSpec:
    flow_sigma: float = 0.0
    roi_sigma: float = 0.0
    detection_dropout_rate: float = 0.0
    detection_jitter_px: float = 0.0

    @property
    def any(self) -> bool:
        return (self.flow_sigma > 0 or self.roi_sigma > 0
                or self.detection_dropout_rate > 0 or self.detection_jitter_px > 0)


@dataclass(frozen=True)
class DistractorSpec:
    crosswalk_lines: int = 0
    road_arrows: int = 0
    curve_instead_of_turn: bool = False


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    signage: Signage
    maneuver: Maneuver
    approach_speed_mps: float
    halt: HaltSpec | None = None
    stop_line_present: bool = True
    light_arrays: int = 1
    clip_length_m: float = 200.0
    line_tilt_deg: int = 0
    turn_arc_m: float = TURN_ARC_M
    turn_amplitude: float = TURN_AMPLITUDE
    distractors: DistractorSpec = field(default_factory=DistractorSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    scans: tuple[ScanSpec, ...] = ()
    ambient_vehicles: int = 0
    cross_traffic: bool = False
    geometry: Geometry = Geometry.FOUR_WAY
    group: str = "clean"

    def __post_init__(self):
        if self.signage == Signage.NONE and self.maneuver == Maneuver.STRAIGHT:
            raise InvalidScenario("unsigned straight-through clips are excluded by design")
        if self.approach_speed_mps <= 0:
            raise InvalidScenario("approach speed must be positive")
        if self.light_arrays not in (1, 2):
            raise InvalidScenario("light_arrays must be 1 or 2")
        if not -3 <= self.line_tilt_deg <= 3:
            raise InvalidScenario("line tilt must stay within the rotation search range")
        for scan in self.scans:
            if not 20.0 < scan.magnitude_deg <= 135.0:
                raise InvalidScenario("scan magnitudes must be in (20, 135] degrees")
            if not 0 < scan.at_distance_m < self.clip_length_m:
                raise InvalidScenario("scan placement outside the clip")
        if self.halt is not None and self.halt.duration_s < 1.5:
            raise InvalidScenario("halts shorter than 1.5 s are not reliably detectable")

    # route geometry -------------------------------------------------------
    @property
    def center_d(self) -> float:
        return self.clip_length_m / 2.0

    @property
    def stop_line_d(self) -> float:
        return self.center_d - STOP_LINE_BACKOFF_M

    @property
    def sign_pass_d(self) -> float:
        return self.stop_line_d + SIGN_PASS_PAST_LINE_M

    @property
    def light_positions(self) -> tuple[float, ...]:
        if self.light_arrays == 1:
            return (self.center_d + LIGHT_SINGLE_OFFSET_M,)
        return (self.center_d + LIGHT_NEAR_OFFSET_M, self.center_d + LIGHT_FAR_OFFSET_M)

    @property
    def turn_start_d(self) -> float:
        return self.center_d + TURN_START_OFFSET_M

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "seed": self.seed,
            "signage": self.signage.value,
            "maneuver": self.maneuver.value,
            "approach_speed_mps": self.approach_speed_mps,
            "halt": None if self.halt is None else {
                "before_line_m": self.halt.before_line_m, "duration_s": self.halt.duration_s},
            "stop_line_present": self.stop_line_present,
            "light_arrays": self.light_arrays,
            "clip_length_m": self.clip_length_m,
            "line_tilt_deg": self.line_tilt_deg,
            "turn_arc_m": self.turn_arc_m,
            "turn_amplitude": self.turn_amplitude,
            "distractors": {
                "crosswalk_lines": self.distractors.crosswalk_lines,
                "road_arrows": self.distractors.road_arrows,
                "curve_instead_of_turn": self.distractors.curve_instead_of_turn},
            "noise": {
                "flow_sigma": self.noise.flow_sigma,
                "roi_sigma": self.noise.roi_sigma,
                "detection_dropout_rate": self.noise.detection_dropout_rate,
                "detection_jitter_px": self.noise.detection_jitter_px},
            "scans": [{
                "at_distance_m": s.at_distance_m, "direction": s.direction.value,
                "magnitude_deg": s.magnitude_deg, "duration_frames": s.duration_frames,
                "compound": s.compound} for s in self.scans],
            "ambient_vehicles": self.ambient_vehicles,
            "cross_traffic": self.cross_traffic,
            "geometry": self.geometry.value,
            "group": self.group,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        halt = d.get("halt")
        dis = d.get("distractors", {})
        noi = d.get("noise", {})
        return cls(
            name=d["name"],
            seed=int(d["seed"]),
            signage=Signage(d["signage"]),
            maneuver=Maneuver(d["maneuver"]),
            approach_speed_mps=float(d["approach_speed_mps"]),
            halt=None if halt is None else HaltSpec(float(halt["before_line_m"]),
                                                    float(halt["duration_s"])),
            stop_line_present=bool(d.get("stop_line_present", True)),
            light_arrays=int(d.get("light_arrays", 1)),
            clip_length_m=float(d.get("clip_length_m", 200.0)),
            line_tilt_deg=int(d.get("line_tilt_deg", 0)),
            turn_arc_m=float(d.get("turn_arc_m", TURN_ARC_M)),
            turn_amplitude=float(d.get("turn_amplitude", TURN_AMPLITUDE)),
            distractors=DistractorSpec(
                int(dis.get("crosswalk_lines", 0)), int(dis.get("road_arrows", 0)),
                bool(dis.get("curve_instead_of_turn", False))),
            noise=NoiseSpec(float(noi.get("flow_sigma", 0.0)), float(noi.get("roi_sigma", 0.0)),
                            float(noi.get("detection_dropout_rate", 0.0)),
                            float(noi.get("detection_jitter_px", 0.0))),
            scans=tuple(ScanSpec(float(s["at_distance_m"]), Direction(s["direction"]),
                                 float(s["magnitude_deg"]), int(s["duration_frames"]),
                                 bool(s.get("compound", False))) for s in d.get("scans", [])),
            ambient_vehicles=int(d.get("ambient_vehicles", 0)),
            cross_traffic=bool(d.get("cross_traffic", False)),
            geometry=Geometry(d.get("geometry", "four_way")),
            group=d.get("group", "clean"),
        )


@dataclass(frozen=True)
class GeneratedCase:
    bundle: SegmentBundle
    truth: GroundTruth
    construction_log: dict


def scenario_seed(name: str) -> int:
    """Stable cross-platform seed from a scenario name."""
    return zlib.crc32(name.encode("utf-8")) & 0xFFFF


# ---------------------------------------------------------------------------
# kinematics


def _speed_profile(scenario: Scenario) -> np.ndarray:
    """Per-frame speeds (m/s, rounded to 4 decimals) for the approach,
    optional halt, and exit segments."""
    dt = 1.0 / FRAME_RATE
    v_target = scenario.approach_speed_mps
    halt_d = None
    if scenario.halt is not None:
        halt_d = scenario.stop_line_d - scenario.halt.before_line_m
    dwell_total = 0 if scenario.halt is None else round(scenario.halt.duration_s * FRAME_RATE)

    speeds = []
    s = 0.0
    v = v_target
    phase = "cruise"
    dwell_left = dwell_total
    while s < scenario.clip_length_m and len(speeds) < MAX_FRAMES:
        speeds.append(v)
        if phase == "cruise" and halt_d is not None:
            if s + v * v / (2.0 * DECEL_MPS2) >= halt_d:
                phase = "brake"
        v_next = v
        if phase == "brake":
            v_next = max(0.0, v - DECEL_MPS2 * dt)
            if v_next <= 1e-9:
                v_next = 0.0
                phase = "dwell"
        elif phase == "dwell":
            if dwell_left > 0:
                dwell_left -= 1
                v_next = 0.0
            else:
                phase = "accel"
                v_next = min(v_target, ACCEL_MPS2 * dt)
        elif phase == "accel":
            v_next = min(v_target, v + ACCEL_MPS2 * dt)
            if v_next >= v_target:
                phase = "done"
        s += 0.5 * (v + v_next) * dt
        v = v_next
    return np.round(np.asarray(speeds, dtype=float), 4)


def _timestamps_ms(n: int) -> np.ndarray:
    return np.round(np.arange(n, dtype=float) * (1000.0 / FRAME_RATE), 3)


# ---------------------------------------------------------------------------
# stream renderers


def _band_row(gap_m: float) -> int:
    # bottom row stays 2 px inside the strip: a band touching the edge has
    # no lower neighbor there, so its profile peak would be undetectable
    bottom = ROI_RECT.height - 2 - BAND_HALF_THICKNESS
    frac = (ROI_VIEW_FAR_M - gap_m) / (ROI_VIEW_FAR_M - ROI_VIEW_NEAR_M)
    return int(round(ROI_ROW_TOP + (bottom - ROI_ROW_TOP) * frac))


def _paint_band(roi: np.ndarray, frame: int, row: int, tilt_deg: int) -> None:
    width = roi.shape[2]
    cols = np.arange(width)
    cx = (width - 1) / 2.0
    centers = np.rint(row - (cols - cx) * math.tan(math.radians(tilt_deg))).astype(int)
    for off in range(-BAND_HALF_THICKNESS, BAND_HALF_THICKNESS + 1):
        rr = centers + off
        ok = (rr >= 0) & (rr < roi.shape[1])
        roi[frame, rr[ok], cols[ok]] = BAND_VALUE


def _paint_line_marking(roi: np.ndarray, distance: np.ndarray, line_d: float,
                        tilt_deg: int) -> np.ndarray:
    """Paint a transverse line sweeping the strip; returns the boolean
    frame mask where it is visible."""
    gap = line_d - distance
    mask = (gap >= ROI_VIEW_NEAR_M) & (gap <= ROI_VIEW_FAR_M)
    for f in np.flatnonzero(mask):
        _paint_band(roi, int(f), _band_row(float(gap[f])), tilt_deg)
    return mask


def _paint_arrow(roi: np.ndarray, distance: np.ndarray, arrow_d: float) -> None:
    """A tall bright blob (turn arrow / road text); its row profile is far
    wider than any stop line, which is what the width filter rejects."""
    gap = arrow_d - distance
    mask = (gap >= ROI_VIEW_NEAR_M) & (gap <= ROI_VIEW_FAR_M)
    for f in np.flatnonzero(mask):
        row = _band_row(float(gap[f]))
        lo = max(0, row - 15)
        hi = min(roi.shape[1], row + 15)
        roi[int(f), lo:hi, 50:450] = BAND_VALUE


def _render_roi(scenario: Scenario, distance: np.ndarray,
                rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n = distance.size
    roi = np.full((n, ROI_RECT.height, ROI_RECT.width), ROI_BACKGROUND, dtype=np.uint8)
    band_mask = np.zeros(n, dtype=bool)
    if scenario.stop_line_present:
        band_mask = _paint_line_marking(roi, distance, scenario.stop_line_d,
                                        scenario.line_tilt_deg)
    for k in range(scenario.distractors.crosswalk_lines):
        _paint_line_marking(roi, distance, CROSSWALK_CENTER_M + k * CROSSWALK_GAP_M, 0)
    for k in range(scenario.distractors.road_arrows):
        _paint_arrow(roi, distance, ARROW_CENTER_M + k * 6.0)
    if scenario.noise.roi_sigma > 0:
        noisy = roi.astype(float) + rng.normal(0.0, scenario.noise.roi_sigma, roi.shape)
        roi = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)
    return roi, band_mask


def _turn_sign(maneuver: Maneuver) -> float:
    return 1.0 if maneuver == Maneuver.LEFT else -1.0


def _render_flow(scenario: Scenario, speeds: np.ndarray, distance: np.ndarray,
                 rng: np.random.Generator) -> np.ndarray:
    n = speeds.size
    cols = np.arange(FLOW_COLS, dtype=float)
    radial = FLOW_RADIAL_GAIN * (cols - (FLOW_COLS - 1) / 2.0)
    bias = np.full(FLOW_COLS, FLOW_FORWARD_BIAS)
    bias[FLOW_COLS // 2 - 1: FLOW_COLS // 2 + 1] = 0.0  # keep M1 clean of forward motion

    pulse = np.zeros(n)
    if scenario.maneuver in (Maneuver.LEFT, Maneuver.RIGHT):
        start, end = scenario.turn_start_d, scenario.turn_start_d + scenario.turn_arc_m
        active = (distance >= start) & (distance < end)
        pulse[active] = _turn_sign(scenario.maneuver) * scenario.turn_amplitude
    if scenario.distractors.curve_instead_of_turn:
        if scenario.maneuver == Maneuver.STRAIGHT:
            # short wiggle: full strength but spanning too little road
            lo = WIGGLE_CENTER_M - WIGGLE_ARC_M / 2.0
            active = (distance >= lo) & (distance < lo + WIGGLE_ARC_M)
            pulse[active] += TURN_AMPLITUDE
        else:
            # long gentle curve well before the intersection
            lo = CURVE_CENTER_M - CURVE_ARC_M / 2.0
            active = (distance >= lo) & (distance < lo + CURVE_ARC_M)
            pulse[active] += CURVE_AMPLITUDE_RATIO * TURN_AMPLITUDE

    flow = (speeds[:, None, None] * (radial + bias)[None, None, :]
            + pulse[:, None, None]) * np.ones((1, FLOW_ROWS, 1))
    if scenario.noise.flow_sigma > 0:
        flow = flow + rng.normal(0.0, scenario.noise.flow_sigma, flow.shape)
    return flow.astype("<f4")


def _visibility(distance: np.ndarray, pass_d: float, view_range: float) -> np.ndarray:
    return (distance >= pass_d - view_range) & (distance <= pass_d)


def _jittered_box(rng: np.random.Generator, noise: NoiseSpec, frame: int, label: str,
                  conf: float, x: float, y: float, w: float, h: float) -> DetectionBox | None:
    if noise.detection_dropout_rate > 0 and rng.random() < noise.detection_dropout_rate:
        return None
    if noise.detection_jitter_px > 0:
        j = noise.detection_jitter_px
        x += rng.uniform(-j, j)
        y += rng.uniform(-j, j)
        w = max(4.0, w + rng.uniform(-j, j))
        h = max(4.0, h + rng.uniform(-j, j))
    x = min(max(x, 0.0), SCENE_W - w)
    y = min(max(y, 0.0), SCENE_H - h)
    return DetectionBox(frame, label, conf, round(x, 2), round(y, 2), round(w, 2), round(h, 2))


def _render_detections(scenario: Scenario, distance: np.ndarray,
                       rng: np.random.Generator) -> tuple[DetectionBox, ...]:
    n = distance.size
    boxes: list[DetectionBox] = []
    noise = scenario.noise

    for f in range(n):
        d = distance[f]
        if scenario.signage == Signage.STOP_SIGN:
            if scenario.sign_pass_d - SIGN_VIEW_RANGE_M <= d <= scenario.sign_pass_d:
                gap = scenario.sign_pass_d + SIGN_STANDOFF_M - d
                h = min(140.0, SIGN_HEIGHT_GAIN / gap)
                w = 0.9 * h
                box = _jittered_box(rng, noise, f, "stop_sign", 0.9,
                                    1440.0 - w / 2.0, 420.0 - h, w, h)
                if box:
                    boxes.append(box)
        elif scenario.signage == Signage.TRAFFIC_LIGHT:
            for pos in scenario.light_positions:
                pass_d = pos - LIGHT_STANDOFF_M
                if pass_d - LIGHT_VIEW_RANGE_M <= d <= pass_d:
                    gap = pos - d
                    h = min(75.0, LIGHT_HEIGHT_GAIN / gap)
                    w = 2.5 * h
                    box = _jittered_box(rng, noise, f, "traffic_light", 0.9,
                                        960.0 - w / 2.0, 260.0 - h, w, h)
                    if box:
                        boxes.append(box)
        for k in range(scenario.ambient_vehicles):
            box = _jittered_box(rng, noise, f, "car", 0.85,
                                180.0 + 220.0 * k, 600.0, 96.0, 80.0)
            if box:
                boxes.append(box)
        if scenario.cross_traffic and abs(d - scenario.center_d) <= 20.0:
            box = _jittered_box(rng, noise, f, "truck", 0.85, 1100.0, 560.0, 170.0, 85.0)
            if box:
                boxes.append(box)
    return tuple(boxes)


def _render_headpose(scenario: Scenario, profile: DistanceProfile, n: int) -> HeadPose:
    yaw = np.zeros(n)
    for spec in scenario.scans:
        f0, _ = profile.frame_at(spec.at_distance_m)
        dur = spec.duration_frames
        if f0 + dur > n:
            dur = max(0, n - f0)
        if dur < 1:
            continue
        def hump(frames: int, peak: float) -> np.ndarray:
            wave = 21.0 + (peak - 21.0) * np.sin(math.pi * (np.arange(frames) + 0.5) / frames)
            wave[frames // 2] = peak
            return wave

        if spec.compound and dur >= 9:
            third = dur // 3
            # dips to 22 deg between two humps: one episode, scored by its max
            base = np.concatenate([hump(third, spec.magnitude_deg),
                                   np.full(dur - 2 * third, 22.0),
                                   hump(third, spec.magnitude_deg - 6.0)])
        else:
            base = hump(dur, spec.magnitude_deg)
        sign = 1.0 if spec.direction == Direction.LEFT else -1.0
        yaw[f0:f0 + dur] = sign * base
    yaw = np.round(yaw, 3)
    return HeadPose(
        frame_idx=np.arange(n, dtype=int),
        yaw=yaw,
        pitch=np.full(n, 4.0),
        roll=np.full(n, -2.0),
        valid=np.ones(n, dtype=bool),
    )


def _render_waypoints(timestamps_ms: np.ndarray, distance: np.ndarray) -> tuple[Waypoint, ...]:
    lat0, lon0 = 42.3, -71.08
    out = []
    t = 0.0
    while t <= timestamps_ms[-1]:
        f = int(np.searchsorted(timestamps_ms, t))
        f = min(f, distance.size - 1)
        out.append(Waypoint(round(t, 3), round(lat0 + distance[f] / 111194.9, 7), lon0))
        t += 2000.0
    return tuple(out)


# ---------------------------------------------------------------------------
# ground truth


def _speed_runs_below(speeds: np.ndarray, threshold: float) -> list[tuple[int, int]]:
    mask = speeds < threshold
    padded = np.concatenate(([False], mask, [False])).astype(int)
    edges = np.diff(padded)
    return list(zip(np.flatnonzero(edges == 1).tolist(), np.flatnonzero(edges == -1).tolist()))


def _derive_truth(scenario: Scenario, speeds: np.ndarray, profile: DistanceProfile,
                  band_mask: np.ndarray, n: int) -> tuple[GroundTruth, dict]:
    distance = profile.meters
    log: dict = {"expected_failure": None}

    turn_frames = None
    turn_detectable = False
    if scenario.maneuver in (Maneuver.LEFT, Maneuver.RIGHT):
        start, end = scenario.turn_start_d, scenario.turn_start_d + scenario.turn_arc_m
        active = np.flatnonzero((distance >= start) & (distance < end))
        turn_frames = (int(active[0]), int(active[-1]))
        log["turn_frames"] = list(turn_frames)
        turn_detectable = (scenario.turn_arc_m >= 4.5 and scenario.turn_amplitude >= 0.5
                           and scenario.approach_speed_mps >= 2.2352)
        log["turn_detectable"] = turn_detectable

    crossing_frame = None
    crossing_d = None
    if scenario.stop_line_present and np.any(band_mask):
        last_band = int(np.flatnonzero(band_mask)[-1])
        crossing_d = float(distance[last_band]) + 1.0
        crossing_frame, _ = profile.frame_at(crossing_d, start=last_band)
        log["crossing_frame"] = crossing_frame
        log["crossing_distance_m"] = round(crossing_d, 6)

    halt_release = None
    if scenario.halt is not None:
        runs = [r for r in _speed_runs_below(speeds, 0.5)
                if (r[1] - r[0]) / FRAME_RATE >= 1.0]
        if runs:
            dwell = max(runs, key=lambda r: r[1] - r[0])
            halt_release = min(dwell[1], n - 1)
            log["halt_release_frame"] = halt_release

    if scenario.signage == Signage.STOP_SIGN:
        visible = np.flatnonzero(distance <= scenario.sign_pass_d)
        leave = int(visible[-1])
        entry = min(leave + 1, n - 1)
        log["sign_leave_frame"] = leave
        log["expected_entry_rule"] = "stop_sign_leave_view"
        if turn_frames is not None:
            exit_f = turn_frames[1]
            log["expected_exit_rule"] = "turn_end" if turn_detectable else "stop_sign_straight_30m"
        else:
            exit_f, _ = profile.frame_at(distance[entry] + 30.0, start=entry)
            log["expected_exit_rule"] = "stop_sign_straight_30m"
    elif scenario.signage == Signage.TRAFFIC_LIGHT:
        passes = [pos - LIGHT_STANDOFF_M for pos in scenario.light_positions]
        last_any = int(np.flatnonzero(distance <= max(passes))[-1])
        if crossing_frame is not None:
            entry = crossing_frame
            log["expected_entry_rule"] = "stop_line_crossing"
            if halt_release is not None and abs(distance[halt_release] - crossing_d) <= 5.0:
                if halt_release > entry:
                    entry = halt_release
                    log["expected_entry_rule"] = "halt_release_after_crossing"
        elif scenario.light_arrays >= 2:
            near_visible = np.flatnonzero(distance <= passes[0])
            entry = min(int(near_visible[-1]) + 1, n - 1)
            log["expected_entry_rule"] = "light_multi_array_interpeak"
        else:
            pass_frame = int(np.flatnonzero(distance <= passes[0])[-1])
            entry, _ = profile.frame_at(max(distance[pass_frame] - 15.0, 0.0))
            log["expected_entry_rule"] = "light_single_array_backoff"
        straight_exit = ("light_multi_array_2_5m" if scenario.light_arrays >= 2
                         else "light_single_array_15m")
        if turn_frames is not None:
            exit_f = turn_frames[1]
            log["expected_exit_rule"] = "turn_end" if turn_detectable else straight_exit
        else:
            offset = 2.5 if scenario.light_arrays >= 2 else 15.0
            exit_f, _ = profile.frame_at(distance[last_any] + offset, start=last_any)
            log["expected_exit_rule"] = straight_exit
    else:  # Signage.NONE: bounded by the turn
        entry, exit_f = turn_frames
        log["expected_entry_rule"] = "turn_start"
        log["expected_exit_rule"] = "turn_end"
        if not turn_detectable:
            # constructed complete-failure case: unsigned clip with a turn
            # too weak or short to pass the pruning criteria
            log["expected_failure"] = "Unsupported"

    truth = GroundTruth(
        segment_id=scenario.name,
        entry_frame=int(entry),
        exit_frame=int(exit_f),
        signage=scenario.signage,
        maneuver=scenario.maneuver,
        geometry=scenario.geometry,
    )
    return truth, log


# ---------------------------------------------------------------------------
# entry point


def generate(scenario: Scenario) -> GeneratedCase:
    """Render one scenario into a bundle plus its analytic ground truth."""
    rng = np.random.Generator(np.random.PCG64(scenario.seed))
    speeds = _speed_profile(scenario)
    n = speeds.size
    timestamps = _timestamps_ms(n)
    telemetry = Telemetry(timestamps, speeds)
    profile = integrate_distance(telemetry)
    distance = profile.meters

    roi, band_mask = _render_roi(scenario, distance, rng)
    flow = _render_flow(scenario, speeds, distance, rng)
    detections = _render_detections(scenario, distance, rng)
    headpose = _render_headpose(scenario, profile, n)
    waypoints = _render_waypoints(timestamps, distance)
    truth, log = _derive_truth(scenario, speeds, profile, band_mask, n)

    manifest = Manifest(
        segment_id=scenario.name,
        vehicle_id="SIM-1",
        frame_rate=FRAME_RATE,
        frame_count=n,
        scene_width=SCENE_W,
        scene_height=SCENE_H,
        roi_rect=ROI_RECT,
        speed_unit="mps",
        created_at=CREATED_AT,
        prng={"algorithm": "numpy-pcg64", "seed": scenario.seed},
    )
    bundle = SegmentBundle(manifest, telemetry, waypoints, detections, roi, flow,
                           headpose=headpose, groundtruth=truth)
    log["scenario"] = scenario.name
    log["group"] = scenario.group
    return GeneratedCase(bundle, truth, log)


def load_catalog(path=None) -> list[Scenario]:
    """Scenario catalog from a JSON file (the packaged default when no
    path is given)."""
    if path is None:
        from importlib.resources import files
        text = files("junctionscan").joinpath("data/catalog.json").read_text(encoding="utf-8")
    else:
        from pathlib import Path
        text = Path(path).read_text(encoding="utf-8")
    data = json.loads(text)
    return [Scenario.from_dict(d) for d in data["scenarios"]]


def standard_catalog(group: str | None = None, path=None) -> list[Scenario]:
    scenarios = load_catalog(path)
    if group is None:
        return scenarios
    return [s for s in scenarios if s.group == group]


def standard_suite(group: str | None = None, path=None):
    """Generate the catalog lazily (bundles are tens of MB each)."""
    for scenario in standard_catalog(group, path):
        yield generate(scenario)
