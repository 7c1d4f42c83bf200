"""End-to-end per-bundle processing and the results.json schema.

The pipeline is a pure function of (bundle, config): integrate distance,
detect stop lines, compute motion signals, detect turns and halts,
classify signage, associate evidence, infer bounds, and extract head
scans.  Everything intermediate is serialized next to the final result so
the decision can be audited, re-scored, and rendered without re-running
the detectors.  Floats are rounded before writing, which makes repeated
runs byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import headscan as headscan_mod
from . import motion as motion_mod
from . import scene as scene_mod
from . import stopline as stopline_mod
from .bundle import SegmentBundle, integrate_distance
from .config import PipelineConfig
from .errors import MissingEvidence, Unsupported
from .models import Maneuver, Signage
from .signalkit import Peak, PeakParams

SCHEMA_VERSION = "1"
ROUND_DECIMALS = 6

FAILURE_UNSUPPORTED = "Unsupported"
FAILURE_MISSING_EVIDENCE = "MissingEvidence"
FAILURE_NO_DETECTION = "NoDetection"


@dataclass(frozen=True)
class PipelineOutput:
    segment_id: str
    vehicle_id: str
    frame_rate: float
    frame_count: int
    time_s: np.ndarray
    distance_m: np.ndarray
    speed_mps: np.ndarray
    signals: motion_mod.MotionSignals
    tracks: list
    crossings: list
    turns: list
    halts: list
    evidence: scene_mod.SignageEvidence
    traffic: scene_mod.TrafficFeatures
    scans: list
    result: bounds_mod.IntersectionResult | None
    failure: str | None
    failure_message: str | None
    scene_context: bounds_mod.SceneContext | None
    scans_in_bounds: int | None
    scans_in_entry_window: int | None


def run_pipeline(bundle: SegmentBundle, config: PipelineConfig | None = None) -> PipelineOutput:
    """Process one bundle; detector failures surface as the ``failure``
    field rather than exceptions so batch runs keep going."""
    cfg = config or PipelineConfig()
    manifest = bundle.manifest
    distance = integrate_distance(bundle.telemetry)
    time_s = bundle.telemetry.timestamp_ms / 1000.0

    sl = cfg.stopline
    candidates = stopline_mod.detect_candidates_stack(
        bundle.roi,
        params=PeakParams(sl.min_peak_height, sl.min_peak_prominence,
                          sl.min_line_width_px, sl.max_line_width_px),
        prescreen=sl.prescreen)
    tracks = stopline_mod.track_lines(candidates, distance, roi_height=manifest.roi_rect.height,
                                      min_frames=sl.min_track_frames, min_span_m=sl.min_track_span_m)
    crossings = [stopline_mod.crossing_event(t, distance, sl.crossing_buffer_m) for t in tracks]

    mo = cfg.motion
    signals = motion_mod.compute_signals(bundle.flow, noisy=mo.noisy or manifest.noisy_flow)
    turns = motion_mod.detect_turns(
        signals, bundle.telemetry, distance, manifest.frame_rate,
        params=PeakParams(mo.min_peak_height, mo.min_peak_prominence),
        spacing_s=mo.peak_spacing_s, min_span_m=mo.min_turn_span_m,
        min_speed_mps=mo.min_turn_speed_mps, min_peak_abs=mo.min_turn_peak_abs,
        extent_floor=mo.turn_extent_floor)
    halts = motion_mod.detect_halts(
        bundle.telemetry, signals, manifest.frame_rate,
        speed_threshold=mo.halt_speed_mps, m2_fraction=mo.halt_m2_fraction,
        min_duration_s=mo.halt_min_duration_s, merge_gap_s=mo.halt_merge_gap_s)

    sc = cfg.scene
    filtered = scene_mod.filter_detections(bundle.detections, manifest)
    evidence = scene_mod.build_signage_evidence(filtered, manifest.frame_count,
                                                manifest.frame_rate, sc.min_signage_frames)
    traffic = scene_mod.traffic_features(filtered.vehicles, manifest.frame_count,
                                         manifest.frame_rate, sc.cross_traffic_aspect)

    scans = headscan_mod.detect_scans(bundle.headpose, manifest.frame_count,
                                      cfg.headscan.scan_params())

    association = bounds_mod.associate(crossings, turns, evidence, manifest.frame_count,
                                       manifest.frame_rate, cfg.fusion,
                                       telemetry=bundle.telemetry)
    result = None
    failure = None
    failure_message = None
    context = None
    n_in_bounds = None
    n_in_window = None
    try:
        result = bounds_mod.infer_bounds(evidence, association, halts, distance,
                                         bundle.telemetry, manifest.frame_count, cfg.fusion)
    except Unsupported as exc:
        failure, failure_message = FAILURE_UNSUPPORTED, str(exc)
    except MissingEvidence as exc:
        failure, failure_message = FAILURE_MISSING_EVIDENCE, str(exc)

    if result is not None:
        context = bounds_mod.select_scene_context(result, traffic, manifest.frame_rate,
                                                  cfg.fusion.association_window_s)
        n_in_bounds = len(headscan_mod.scans_in_bounds(scans, result))
        n_in_window = headscan_mod.scans_in_window(
            scans, result.entry_frame, manifest.frame_rate,
            cfg.headscan.entry_window_s, manifest.frame_count)

    return PipelineOutput(
        segment_id=manifest.segment_id,
        vehicle_id=manifest.vehicle_id,
        frame_rate=manifest.frame_rate,
        frame_count=manifest.frame_count,
        time_s=time_s,
        distance_m=distance.meters,
        speed_mps=bundle.telemetry.speed_mps,
        signals=signals,
        tracks=tracks,
        crossings=crossings,
        turns=turns,
        halts=halts,
        evidence=evidence,
        traffic=traffic,
        scans=scans,
        result=result,
        failure=failure,
        failure_message=failure_message,
        scene_context=context,
        scans_in_bounds=n_in_bounds,
        scans_in_entry_window=n_in_window,
    )


# ---------------------------------------------------------------------------
# serialization


def _round_list(arr, nd: int = ROUND_DECIMALS) -> list[float]:
    return [round(float(v), nd) for v in np.asarray(arr).ravel()]


def _peak_dict(p: Peak) -> dict:
    return {"index": int(p.index), "height": round(p.height, ROUND_DECIMALS),
            "prominence": round(p.prominence, ROUND_DECIMALS),
            "width": round(p.width, ROUND_DECIMALS),
            "extent": [int(p.extent[0]), int(p.extent[1])]}


def _crossing_dict(c) -> dict:
    return {"frame_idx": int(c.frame_idx), "distance_m": round(c.distance, ROUND_DECIMALS),
            "clamped": bool(c.clamped)}


def _turn_dict(t) -> dict:
    return {"direction": t.direction.value, "peak_frame": int(t.peak_frame),
            "start_frame": int(t.start_frame), "end_frame": int(t.end_frame),
            "peak_value": round(t.peak_value, ROUND_DECIMALS),
            "distance_span_m": round(t.distance_span, ROUND_DECIMALS),
            "speed_at_peak_mps": round(t.speed_at_peak, ROUND_DECIMALS)}


def _halt_dict(h) -> dict:
    return {"start_frame": int(h.start_frame), "end_frame": int(h.end_frame),
            "min_speed_mps": round(h.min_speed, ROUND_DECIMALS)}


def _scan_dict(s) -> dict:
    return {"direction": s.direction.value, "start_frame": int(s.start_frame),
            "end_frame": int(s.end_frame), "peak_frame": int(s.peak_frame),
            "magnitude_deg": round(s.magnitude, ROUND_DECIMALS)}


def _result_dict(r: bounds_mod.IntersectionResult) -> dict:
    return {
        "signage": r.signage.value,
        "maneuver": r.maneuver.value,
        "entry_frame": int(r.entry_frame),
        "exit_frame": int(r.exit_frame),
        "entry_distance_m": round(r.entry_distance, ROUND_DECIMALS),
        "exit_distance_m": round(r.exit_distance, ROUND_DECIMALS),
        "entry_rule": r.entry_rule.value,
        "exit_rule": r.exit_rule.value,
        "associated_crossing": _crossing_dict(r.associated_crossing) if r.associated_crossing else None,
        "associated_turn": _turn_dict(r.associated_turn) if r.associated_turn else None,
        "halts": [_halt_dict(h) for h in r.halts],
        "truncated": bool(r.truncated),
    }


def output_to_dict(out: PipelineOutput) -> dict:
    ev = out.evidence
    return {
        "schema_version": SCHEMA_VERSION,
        "segment_id": out.segment_id,
        "vehicle_id": out.vehicle_id,
        "frame_rate": out.frame_rate,
        "frame_count": out.frame_count,
        "time_s": _round_list(out.time_s),
        "distance_m": _round_list(out.distance_m),
        "speed_mps": _round_list(out.speed_mps),
        "signals": {"m1": _round_list(out.signals.m1), "m2": _round_list(out.signals.m2),
                    "smoothing_window": out.signals.smoothing_window},
        "stop_lines": {
            "tracks": [{"first_frame": t.first_frame, "last_frame": t.last_frame,
                        "first_row": t.candidates[0].row, "last_row": t.candidates[-1].row,
                        "rotation": t.candidates[0].rotation,
                        "distance_span_m": round(t.distance_span, ROUND_DECIMALS),
                        "n_frames": len(t.candidates)} for t in out.tracks],
            "crossings": [_crossing_dict(c) for c in out.crossings],
        },
        "motion": {"turns": [_turn_dict(t) for t in out.turns],
                   "halts": [_halt_dict(h) for h in out.halts]},
        "scene": {
            "signage": ev.signage.value,
            "qualifying_frames": ev.qualifying_frames,
            "frame_counts": dict(sorted(ev.frame_counts.items())),
            "density": _round_list(ev.density) if ev.density is not None else None,
            "array_peaks": [_peak_dict(p) for p in ev.array_peaks],
            "passing_frame": None if ev.passing_frame is None else int(ev.passing_frame),
            "first_frame": None if ev.first_frame is None else int(ev.first_frame),
            "last_frame": None if ev.last_frame is None else int(ev.last_frame),
            "traffic_density": _round_list(out.traffic.density),
            "cross_traffic_fraction": _round_list(out.traffic.cross_traffic_fraction),
        },
        "scans": [_scan_dict(s) for s in out.scans],
        "result": _result_dict(out.result) if out.result is not None else None,
        "failure": out.failure,
        "failure_message": out.failure_message,
        "scene_context": None if out.scene_context is None else {
            "mean_density": round(out.scene_context.mean_density, ROUND_DECIMALS),
            "max_density": round(out.scene_context.max_density, ROUND_DECIMALS),
            "mean_cross_fraction": round(out.scene_context.mean_cross_fraction, ROUND_DECIMALS),
            "max_cross_fraction": round(out.scene_context.max_cross_fraction, ROUND_DECIMALS),
        },
        "scans_in_bounds": out.scans_in_bounds,
        "scans_in_entry_window": out.scans_in_entry_window,
    }


def output_to_json(out: PipelineOutput) -> str:
    return json.dumps(output_to_dict(out), sort_keys=True, separators=(",", ":")) + "\n"


@dataclass(frozen=True)
class LoadedOutput:
    """The slice of results.json the evaluator needs; mirrors the
    PipelineOutput fields compare() touches."""

    segment_id: str
    frame_rate: float
    frame_count: int
    time_s: np.ndarray
    distance_m: np.ndarray
    scans: list
    result: bounds_mod.IntersectionResult | None
    failure: str | None


def output_from_dict(data: dict) -> LoadedOutput:
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(
            f"results schema_version {data.get('schema_version')!r} is not {SCHEMA_VERSION!r}")
    from .models import Direction
    scans = [headscan_mod.HeadScan(Direction(s["direction"]), s["start_frame"], s["end_frame"],
                                   s["peak_frame"], s["magnitude_deg"])
             for s in data["scans"]]
    result = None
    if data["result"] is not None:
        r = data["result"]
        crossing = None
        if r["associated_crossing"] is not None:
            c = r["associated_crossing"]
            crossing = stopline_mod.CrossingEvent(c["frame_idx"], c["distance_m"], c["clamped"])
        turn = None
        if r["associated_turn"] is not None:
            t = r["associated_turn"]
            from .models import Direction as Dir
            turn = motion_mod.TurnEvent(Dir(t["direction"]), t["peak_frame"], t["start_frame"],
                                        t["end_frame"], t["peak_value"], t["distance_span_m"],
                                        t["speed_at_peak_mps"])
        result = bounds_mod.IntersectionResult(
            signage=Signage(r["signage"]),
            maneuver=Maneuver(r["maneuver"]),
            entry_frame=r["entry_frame"],
            exit_frame=r["exit_frame"],
            entry_distance=r["entry_distance_m"],
            exit_distance=r["exit_distance_m"],
            entry_rule=bounds_mod.EntryRule(r["entry_rule"]),
            exit_rule=bounds_mod.ExitRule(r["exit_rule"]),
            associated_crossing=crossing,
            associated_turn=turn,
            halts=tuple(motion_mod.HaltInterval(h["start_frame"], h["end_frame"],
                                                h["min_speed_mps"]) for h in r["halts"]),
            truncated=r["truncated"],
        )
    return LoadedOutput(
        segment_id=data["segment_id"],
        frame_rate=data["frame_rate"],
        frame_count=data["frame_count"],
        time_s=np.asarray(data["time_s"], dtype=float),
        distance_m=np.asarray(data["distance_m"], dtype=float),
        scans=scans,
        result=result,
        failure=data["failure"],
    )


def write_results(out: PipelineOutput, results_dir: str | Path) -> Path:
    root = Path(results_dir) / out.segment_id
    root.mkdir(parents=True, exist_ok=True)
    path = root / "results.json"
    path.write_text(output_to_json(out), encoding="utf-8")
    return path


def load_results(path: str | Path) -> LoadedOutput:
    return output_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
