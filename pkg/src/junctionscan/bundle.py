"""Segment-bundle data model, serialization, and stream operations.

A bundle directory holds one intersection approach clip as synchronized
per-frame feature streams:

    manifest.json      segment metadata (see Manifest)
    telemetry.jsonl    {"frame_idx", "timestamp_ms", "speed"}; speed in the
                       manifest's speed_unit, converted to m/s on load
    waypoints.jsonl    {"timestamp_ms", "lat", "lon"} at roughly 0.5 Hz
    detections.jsonl   {"frame_idx", "class", "conf", "x", "y", "w", "h"}
    headpose.jsonl     {"frame_idx", "yaw", "pitch", "roll", "valid"} (optional)
    roi.bin            packed grayscale strips (see ROI_MAGIC header)
    flow.bin           packed per-block horizontal flow (see FLOW_MAGIC header)
    groundtruth.json   manual annotation (optional)

Adapter contract for angles and flow signs: positive head yaw is rotation
toward the driver's left; flow block values are mean horizontal image
motion in pixels/frame, signed so that leftward vehicle rotation produces
positive values.

All records are immutable after load, so bundles can be shared freely
across threads.
"""

from __future__ import annotations

import json
import logging
import math
import struct
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import (
    EmptyTelemetry,
    FrameCountMismatch,
    MarkOutsideTrip,
    MissingStream,
    NonMonotonicTimestamps,
    SchemaViolation,
)
from .models import DETECTION_CLASSES, DetectionBox, GroundTruth, Manifest, RoiRect, Waypoint

logger = logging.getLogger(__name__)

MPH_TO_MPS = 0.44704  # exact by definition
ROI_MAGIC = b"ROI1"
FLOW_MAGIC = b"FLW1"
DEFAULT_MAX_SKEW_MS = 17.0  # half a 30 Hz frame period
MARK_RADIUS_LIMIT_M = 200.0
EARTH_RADIUS_M = 6371000.0

_MANIFEST_KEYS = {
    "segment_id", "vehicle_id", "frame_rate", "frame_count", "scene_width",
    "scene_height", "roi_rect", "speed_unit", "created_at", "noisy_flow", "prng",
}


@dataclass(frozen=True)
class Telemetry:
    """Per-frame vehicle state; speeds are meters/second after ingest."""

    timestamp_ms: np.ndarray
    speed_mps: np.ndarray

    def __len__(self) -> int:
        return int(self.timestamp_ms.size)

    def time_s(self, frame: int) -> float:
        return float(self.timestamp_ms[frame]) / 1000.0


@dataclass(frozen=True)
class HeadPose:
    """Sparse head-pose records aligned to scene frames by frame_idx."""

    frame_idx: np.ndarray
    yaw: np.ndarray
    pitch: np.ndarray
    roll: np.ndarray
    valid: np.ndarray

    def __len__(self) -> int:
        return int(self.frame_idx.size)

    def dense(self, frame_count: int) -> tuple[np.ndarray, np.ndarray]:
        """(yaw, valid) arrays over all scene frames; frames without a
        record are invalid."""
        yaw = np.zeros(frame_count, dtype=float)
        valid = np.zeros(frame_count, dtype=bool)
        idx = self.frame_idx
        yaw[idx] = self.yaw
        valid[idx] = self.valid
        return yaw, valid


@dataclass(frozen=True)
class DistanceProfile:
    """Cumulative distance from clip start, one value per frame."""

    meters: np.ndarray

    def __len__(self) -> int:
        return int(self.meters.size)

    def at(self, frame: int) -> float:
        return float(self.meters[frame])

    def frame_at(self, distance: float, start: int = 0) -> tuple[int, bool]:
        """First frame at or after ``start`` whose distance reaches
        ``distance``; returns (frame, clamped)."""
        n = self.meters.size
        idx = int(np.searchsorted(self.meters[start:], distance, side="left")) + start
        if idx >= n:
            return n - 1, True
        return idx, False


@dataclass(frozen=True)
class SegmentBundle:
    manifest: Manifest
    telemetry: Telemetry
    waypoints: tuple[Waypoint, ...]
    detections: tuple[DetectionBox, ...]
    roi: np.ndarray   # (frames, roi_height, roi_width) uint8
    flow: np.ndarray  # (frames, rows, cols) float32
    headpose: HeadPose | None = None
    groundtruth: GroundTruth | None = None
    truncated: bool = False

    @property
    def frame_count(self) -> int:
        return self.manifest.frame_count

    @property
    def frame_rate(self) -> float:
        return self.manifest.frame_rate


# ---------------------------------------------------------------------------
# parsing helpers


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"invalid JSON: {exc}", file=path.name, index=i) from exc
    return records


def _require(record: dict, key: str, file: str, index: int):
    if key not in record:
        raise SchemaViolation(f"missing field {key!r}", file=file, index=index)
    return record[key]


def parse_manifest(data: dict, file: str = "manifest.json") -> Manifest:
    unknown = set(data) - _MANIFEST_KEYS
    if unknown:
        raise SchemaViolation(f"unknown manifest keys {sorted(unknown)}", file=file)
    for key in _MANIFEST_KEYS - {"noisy_flow", "prng"}:
        if key not in data:
            raise SchemaViolation(f"missing field {key!r}", file=file)
    rect = data["roi_rect"]
    roi_rect = RoiRect(int(rect["x"]), int(rect["y"]), int(rect["width"]), int(rect["height"]))
    manifest = Manifest(
        segment_id=str(data["segment_id"]),
        vehicle_id=str(data["vehicle_id"]),
        frame_rate=float(data["frame_rate"]),
        frame_count=int(data["frame_count"]),
        scene_width=int(data["scene_width"]),
        scene_height=int(data["scene_height"]),
        roi_rect=roi_rect,
        speed_unit=str(data["speed_unit"]),
        created_at=str(data["created_at"]),
        noisy_flow=bool(data.get("noisy_flow", False)),
        prng=data.get("prng"),
    )
    if manifest.frame_count <= 0:
        raise SchemaViolation("frame_count must be positive", file=file)
    if manifest.frame_rate <= 0:
        raise SchemaViolation("frame_rate must be positive", file=file)
    if manifest.speed_unit not in ("mps", "mph"):
        raise SchemaViolation(f"speed_unit must be mps or mph, got {manifest.speed_unit!r}", file=file)
    if (roi_rect.x < 0 or roi_rect.y < 0
            or roi_rect.x + roi_rect.width > manifest.scene_width
            or roi_rect.y + roi_rect.height > manifest.scene_height
            or roi_rect.width <= 0 or roi_rect.height <= 0):
        raise SchemaViolation("roi_rect does not fit inside the scene frame", file=file)
    try:
        datetime.fromisoformat(manifest.created_at.replace("Z", "+00:00"))
    except ValueError:
        raise SchemaViolation(f"created_at is not ISO-8601: {manifest.created_at!r}", file=file)
    return manifest


def _parse_telemetry(records: list[dict], manifest: Manifest, file: str) -> Telemetry:
    if len(records) != manifest.frame_count:
        raise FrameCountMismatch(
            f"expected {manifest.frame_count} telemetry records, got {len(records)}", file=file)
    ts = np.empty(len(records), dtype=float)
    speed = np.empty(len(records), dtype=float)
    for i, rec in enumerate(records):
        if int(_require(rec, "frame_idx", file, i)) != i:
            raise SchemaViolation(f"frame_idx must equal record position {i}", file=file, index=i)
        ts[i] = float(_require(rec, "timestamp_ms", file, i))
        speed[i] = float(_require(rec, "speed", file, i))
        if speed[i] < 0:
            raise SchemaViolation("speed must be non-negative", file=file, index=i)
        if i > 0 and ts[i] <= ts[i - 1]:
            raise NonMonotonicTimestamps(
                f"timestamp_ms {ts[i]} does not increase past {ts[i - 1]}", file=file, index=i)
    if manifest.speed_unit == "mph":
        speed = speed * MPH_TO_MPS
    ts.setflags(write=False)
    speed.setflags(write=False)
    return Telemetry(ts, speed)


def _parse_waypoints(records: list[dict], file: str) -> tuple[Waypoint, ...]:
    out = []
    last_ts = -math.inf
    for i, rec in enumerate(records):
        ts = float(_require(rec, "timestamp_ms", file, i))
        lat = float(_require(rec, "lat", file, i))
        lon = float(_require(rec, "lon", file, i))
        if not -90.0 <= lat <= 90.0:
            raise SchemaViolation(f"latitude {lat} out of range", file=file, index=i)
        if not -180.0 <= lon <= 180.0:
            raise SchemaViolation(f"longitude {lon} out of range", file=file, index=i)
        if ts <= last_ts:
            raise NonMonotonicTimestamps(
                f"timestamp_ms {ts} does not increase past {last_ts}", file=file, index=i)
        last_ts = ts
        out.append(Waypoint(ts, lat, lon))
    if len(out) >= 2:
        gaps = np.diff([w.timestamp_ms for w in out])
        median_gap = float(np.median(gaps))
        if not 1000.0 <= median_gap <= 4000.0:
            logger.warning("%s: waypoint cadence %.0f ms is far from the nominal 2 s", file, median_gap)
    return tuple(out)


def _parse_detections(records: list[dict], manifest: Manifest, file: str) -> tuple[DetectionBox, ...]:
    out = []
    for i, rec in enumerate(records):
        frame = int(_require(rec, "frame_idx", file, i))
        if not 0 <= frame < manifest.frame_count:
            raise SchemaViolation(f"frame_idx {frame} outside clip", file=file, index=i)
        label = str(_require(rec, "class", file, i))
        if label not in DETECTION_CLASSES:
            raise SchemaViolation(f"unknown class {label!r}", file=file, index=i)
        conf = float(_require(rec, "conf", file, i))
        if not 0.0 <= conf <= 1.0:
            raise SchemaViolation(f"conf {conf} outside [0, 1]", file=file, index=i)
        x = float(_require(rec, "x", file, i))
        y = float(_require(rec, "y", file, i))
        w = float(_require(rec, "w", file, i))
        h = float(_require(rec, "h", file, i))
        if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > manifest.scene_width or y + h > manifest.scene_height:
            raise SchemaViolation("bounding box outside frame bounds", file=file, index=i)
        out.append(DetectionBox(frame, label, conf, x, y, w, h))
    return tuple(out)


def _parse_headpose(records: list[dict], manifest: Manifest, file: str) -> HeadPose:
    n = len(records)
    frame_idx = np.empty(n, dtype=int)
    yaw = np.empty(n, dtype=float)
    pitch = np.empty(n, dtype=float)
    roll = np.empty(n, dtype=float)
    valid = np.empty(n, dtype=bool)
    last = -1
    for i, rec in enumerate(records):
        frame = int(_require(rec, "frame_idx", file, i))
        if not 0 <= frame < manifest.frame_count:
            raise SchemaViolation(f"frame_idx {frame} outside clip", file=file, index=i)
        if frame <= last:
            raise NonMonotonicTimestamps(f"frame_idx {frame} repeats or decreases", file=file, index=i)
        last = frame
        angles = [float(_require(rec, k, file, i)) for k in ("yaw", "pitch", "roll")]
        if any(abs(a) > 180.0 for a in angles):
            raise SchemaViolation("angles must lie within [-180, 180]", file=file, index=i)
        frame_idx[i] = frame
        yaw[i], pitch[i], roll[i] = angles
        valid[i] = bool(_require(rec, "valid", file, i))
    for arr in (frame_idx, yaw, pitch, roll, valid):
        arr.setflags(write=False)
    return HeadPose(frame_idx, yaw, pitch, roll, valid)


def _read_roi(path: Path, manifest: Manifest) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < 16 or raw[:4] != ROI_MAGIC:
        raise SchemaViolation("bad ROI header magic", file=path.name)
    frames, height, width = struct.unpack("<III", raw[4:16])
    if frames != manifest.frame_count:
        raise FrameCountMismatch(
            f"roi.bin holds {frames} frames, manifest says {manifest.frame_count}", file=path.name)
    if (height, width) != (manifest.roi_rect.height, manifest.roi_rect.width):
        raise SchemaViolation(
            f"roi.bin is {width}x{height}, manifest roi_rect is "
            f"{manifest.roi_rect.width}x{manifest.roi_rect.height}", file=path.name)
    expected = 16 + frames * height * width
    if len(raw) != expected:
        raise SchemaViolation(f"roi.bin is {len(raw)} bytes, expected {expected}", file=path.name)
    arr = np.frombuffer(raw, dtype=np.uint8, offset=16).reshape(frames, height, width)
    arr.setflags(write=False)
    return arr


def _read_flow(path: Path, manifest: Manifest) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < 16 or raw[:4] != FLOW_MAGIC:
        raise SchemaViolation("bad flow header magic", file=path.name)
    frames, cols, rows = struct.unpack("<III", raw[4:16])
    if frames != manifest.frame_count:
        raise FrameCountMismatch(
            f"flow.bin holds {frames} frames, manifest says {manifest.frame_count}", file=path.name)
    expected = 16 + frames * rows * cols * 4
    if len(raw) != expected:
        raise SchemaViolation(f"flow.bin is {len(raw)} bytes, expected {expected}", file=path.name)
    arr = np.frombuffer(raw, dtype="<f4", offset=16).reshape(frames, rows, cols)
    arr.setflags(write=False)
    return arr


def load_bundle(path: str | Path) -> SegmentBundle:
    """Load and validate one bundle directory into memory.

    Raises MissingStream / FrameCountMismatch / NonMonotonicTimestamps /
    SchemaViolation naming the offending file and record index.
    """
    root = Path(path)
    if not (root / "manifest.json").exists():
        raise MissingStream("manifest not found", file=str(root / "manifest.json"))
    manifest = parse_manifest(json.loads((root / "manifest.json").read_text(encoding="utf-8")))

    required = ["telemetry.jsonl", "waypoints.jsonl", "detections.jsonl", "roi.bin", "flow.bin"]
    for name in required:
        if not (root / name).exists():
            raise MissingStream(f"required stream {name} not found", file=name)

    telemetry = _parse_telemetry(_read_jsonl(root / "telemetry.jsonl"), manifest, "telemetry.jsonl")
    waypoints = _parse_waypoints(_read_jsonl(root / "waypoints.jsonl"), "waypoints.jsonl")
    detections = _parse_detections(_read_jsonl(root / "detections.jsonl"), manifest, "detections.jsonl")
    roi = _read_roi(root / "roi.bin", manifest)
    flow = _read_flow(root / "flow.bin", manifest)

    headpose = None
    if (root / "headpose.jsonl").exists():
        headpose = _parse_headpose(_read_jsonl(root / "headpose.jsonl"), manifest, "headpose.jsonl")

    groundtruth = None
    if (root / "groundtruth.json").exists():
        groundtruth = GroundTruth.from_dict(
            json.loads((root / "groundtruth.json").read_text(encoding="utf-8")))

    return SegmentBundle(manifest, telemetry, waypoints, detections, roi, flow,
                         headpose=headpose, groundtruth=groundtruth)


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_bundle(bundle: SegmentBundle, path: str | Path) -> Path:
    """Serialize a bundle to a directory; speeds are written in m/s.

    write(load(write(b))) is byte-identical to write(b).
    """
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    manifest = replace(bundle.manifest, speed_unit="mps")
    mdict = {
        "segment_id": manifest.segment_id,
        "vehicle_id": manifest.vehicle_id,
        "frame_rate": manifest.frame_rate,
        "frame_count": manifest.frame_count,
        "scene_width": manifest.scene_width,
        "scene_height": manifest.scene_height,
        "roi_rect": {"x": manifest.roi_rect.x, "y": manifest.roi_rect.y,
                     "width": manifest.roi_rect.width, "height": manifest.roi_rect.height},
        "speed_unit": manifest.speed_unit,
        "created_at": manifest.created_at,
        "noisy_flow": manifest.noisy_flow,
    }
    if manifest.prng is not None:
        mdict["prng"] = manifest.prng
    (root / "manifest.json").write_text(_dump_json(mdict) + "\n", encoding="utf-8")

    with (root / "telemetry.jsonl").open("w", encoding="utf-8") as fh:
        for i in range(len(bundle.telemetry)):
            fh.write(_dump_json({"frame_idx": i,
                                 "timestamp_ms": float(bundle.telemetry.timestamp_ms[i]),
                                 "speed": float(bundle.telemetry.speed_mps[i])}) + "\n")
    with (root / "waypoints.jsonl").open("w", encoding="utf-8") as fh:
        for w in bundle.waypoints:
            fh.write(_dump_json({"timestamp_ms": w.timestamp_ms, "lat": w.latitude,
                                 "lon": w.longitude}) + "\n")
    with (root / "detections.jsonl").open("w", encoding="utf-8") as fh:
        for d in bundle.detections:
            fh.write(_dump_json({"frame_idx": d.frame_idx, "class": d.label, "conf": d.confidence,
                                 "x": d.x, "y": d.y, "w": d.width, "h": d.height}) + "\n")
    if bundle.headpose is not None:
        with (root / "headpose.jsonl").open("w", encoding="utf-8") as fh:
            hp = bundle.headpose
            for i in range(len(hp)):
                fh.write(_dump_json({"frame_idx": int(hp.frame_idx[i]), "yaw": float(hp.yaw[i]),
                                     "pitch": float(hp.pitch[i]), "roll": float(hp.roll[i]),
                                     "valid": bool(hp.valid[i])}) + "\n")

    header = ROI_MAGIC + struct.pack("<III", bundle.frame_count,
                                     manifest.roi_rect.height, manifest.roi_rect.width)
    (root / "roi.bin").write_bytes(header + np.ascontiguousarray(bundle.roi, dtype=np.uint8).tobytes())
    rows, cols = bundle.flow.shape[1], bundle.flow.shape[2]
    header = FLOW_MAGIC + struct.pack("<III", bundle.frame_count, cols, rows)
    (root / "flow.bin").write_bytes(header + np.ascontiguousarray(bundle.flow, dtype="<f4").tobytes())

    if bundle.groundtruth is not None:
        (root / "groundtruth.json").write_text(
            _dump_json(bundle.groundtruth.to_dict()) + "\n", encoding="utf-8")
    return root


# ---------------------------------------------------------------------------
# stream operations


def integrate_distance(telemetry: Telemetry) -> DistanceProfile:
    """Trapezoidal integration of speed over the inter-frame intervals.

    Trapezoids behave better than rectangles under laggy OBD2 speed
    updates; distance[0] is always 0.
    """
    n = len(telemetry)
    if n == 0:
        raise EmptyTelemetry("telemetry stream is empty")
    dt_s = np.diff(telemetry.timestamp_ms) / 1000.0
    mids = 0.5 * (telemetry.speed_mps[1:] + telemetry.speed_mps[:-1])
    meters = np.concatenate(([0.0], np.cumsum(mids * dt_s)))
    meters.setflags(write=False)
    return DistanceProfile(meters)


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters; error is negligible at the 200 m
    scales used for mark matching."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(a))


def align_streams(reference_ts: np.ndarray, other_ts: np.ndarray,
                  max_skew_ms: float = DEFAULT_MAX_SKEW_MS) -> list[int | None]:
    """Nearest-in-time index into ``other_ts`` for each reference frame;
    pairs farther apart than ``max_skew_ms`` map to None."""
    ref = np.asarray(reference_ts, dtype=float)
    other = np.asarray(other_ts, dtype=float)
    if ref.size == 0 or other.size == 0:
        return [None] * ref.size
    pos = np.searchsorted(other, ref)
    out: list[int | None] = []
    for i, p in enumerate(pos):
        best = None
        best_skew = math.inf
        for j in (p - 1, p):
            if 0 <= j < other.size:
                skew = abs(other[j] - ref[i])
                if skew < best_skew:
                    best, best_skew = int(j), skew
        out.append(best if best_skew <= max_skew_ms else None)
    return out


def clip_segment(trip: SegmentBundle, lat: float, lon: float,
                 radius_m: float = 100.0, segment_id: str | None = None) -> SegmentBundle:
    """Cut the +-radius window around the closest approach to a marked
    location out of a full-trip bundle.

    The closest waypoint is found by haversine distance, mapped to the
    nearest telemetry frame by timestamp, and the window is taken over the
    integrated distance profile.  Frames, timestamps, and distances are
    re-based to the slice start.  Raises MarkOutsideTrip when the closest
    approach exceeds 200 m.
    """
    if not trip.waypoints:
        raise MarkOutsideTrip("trip has no waypoints")
    dists = [haversine_m(w.latitude, w.longitude, lat, lon) for w in trip.waypoints]
    best = int(np.argmin(dists))
    if dists[best] > MARK_RADIUS_LIMIT_M:
        raise MarkOutsideTrip(
            f"closest approach is {dists[best]:.0f} m from the mark (limit {MARK_RADIUS_LIMIT_M:.0f} m)")
    mark_ts = trip.waypoints[best].timestamp_ms
    center = int(np.argmin(np.abs(trip.telemetry.timestamp_ms - mark_ts)))

    profile = integrate_distance(trip.telemetry)
    d_center = profile.at(center)
    lo_d, hi_d = d_center - radius_m, d_center + radius_m
    meters = profile.meters
    lo = int(np.searchsorted(meters, lo_d, side="left"))
    hi = int(np.searchsorted(meters, hi_d, side="right")) - 1
    truncated = bool(lo_d < meters[0] or hi_d > meters[-1])
    hi = max(hi, lo)

    ts0 = float(trip.telemetry.timestamp_ms[lo])
    new_ts = trip.telemetry.timestamp_ms[lo:hi + 1] - ts0
    telemetry = Telemetry(new_ts, trip.telemetry.speed_mps[lo:hi + 1].copy())

    waypoints = tuple(
        Waypoint(w.timestamp_ms - ts0, w.latitude, w.longitude)
        for w in trip.waypoints
        if trip.telemetry.timestamp_ms[lo] <= w.timestamp_ms <= trip.telemetry.timestamp_ms[hi])
    detections = tuple(
        DetectionBox(d.frame_idx - lo, d.label, d.confidence, d.x, d.y, d.width, d.height)
        for d in trip.detections if lo <= d.frame_idx <= hi)

    headpose = None
    if trip.headpose is not None:
        mask = (trip.headpose.frame_idx >= lo) & (trip.headpose.frame_idx <= hi)
        headpose = HeadPose(trip.headpose.frame_idx[mask] - lo, trip.headpose.yaw[mask],
                            trip.headpose.pitch[mask], trip.headpose.roll[mask],
                            trip.headpose.valid[mask])

    sid = segment_id or f"{trip.manifest.segment_id}-clip{center}"
    manifest = replace(trip.manifest, segment_id=sid, frame_count=hi - lo + 1)
    return SegmentBundle(manifest, telemetry, waypoints, detections,
                         trip.roi[lo:hi + 1], trip.flow[lo:hi + 1],
                         headpose=headpose, groundtruth=None, truncated=truncated)
