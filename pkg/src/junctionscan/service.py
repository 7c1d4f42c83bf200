"""Local HTTP service backing the annotation workbench.

Data layout under the service root:

    trips/<trip_id>/          full-trip bundles (mark sources)
    segments/<segment_id>/    clipped intersection bundles
    groundtruth/<id>.json     annotations (kept out of the bundle inputs)
    results/<id>/results.json pipeline output (derived artifacts only)

The service never mutates bundle inputs; everything derived lands under
``results/``.  Processing one segment is serialized by a per-segment
lock: a concurrent request gets 409.  Both the CLI and the service call
the same library functions, so their outputs are byte-identical.
"""

from __future__ import annotations

import io
import json
import struct
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .bundle import ROI_MAGIC, clip_segment, load_bundle, write_bundle
from .config import PipelineConfig
from .errors import JunctionScanError, MarkOutsideTrip, NoPairsFound
from .evaluate import compare
from .models import Geometry, GroundTruth, Maneuver, Signage
from .pipeline import SCHEMA_VERSION, load_results, output_to_dict, run_pipeline, write_results
from .report import report_to_dict
from .evaluate import aggregate


class MarkRequest(BaseModel):
    lat: float = Field(ge=-90.0, le=90.0)
    lon: float = Field(ge=-180.0, le=180.0)
    note: str = ""


class GroundTruthRequest(BaseModel):
    entry_frame: int = Field(ge=0)
    exit_frame: int = Field(ge=0)
    signage: str
    maneuver: str
    geometry: str | None = None


@dataclass
class JobRecord:
    segment_id: str
    state: str = "pending"  # pending -> running -> done | failed
    started_at: str | None = None
    finished_at: str | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {"segment_id": self.segment_id, "state": self.state,
                "started_at": self.started_at, "finished_at": self.finished_at,
                "error": self.error}


@dataclass
class _State:
    root: Path
    config: PipelineConfig
    jobs: dict = field(default_factory=dict)
    locks: dict = field(default_factory=dict)
    registry_lock: threading.Lock = field(default_factory=threading.Lock)

    def segment_lock(self, segment_id: str) -> threading.Lock:
        with self.registry_lock:
            return self.locks.setdefault(segment_id, threading.Lock())

    def job(self, segment_id: str) -> JobRecord:
        with self.registry_lock:
            return self.jobs.setdefault(segment_id, JobRecord(segment_id))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _versioned(payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, **payload}


def create_app(data_root: str | Path, config: PipelineConfig | None = None,
               workers: int | None = None) -> FastAPI:
    root = Path(data_root)
    for sub in ("trips", "segments", "groundtruth", "results"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    state = _State(root, config or PipelineConfig())

    app = FastAPI(title="junctionscan service", version=SCHEMA_VERSION)
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    app.state.junctionscan = state

    def _trip_dir(trip_id: str) -> Path:
        path = root / "trips" / trip_id
        if not (path / "manifest.json").exists():
            raise HTTPException(404, f"trip {trip_id!r} not found")
        return path

    def _segment_dir(segment_id: str) -> Path:
        path = root / "segments" / segment_id
        if not (path / "manifest.json").exists():
            raise HTTPException(404, f"segment {segment_id!r} not found")
        return path

    @app.get("/trips")
    def list_trips():
        trips = []
        for manifest_path in sorted((root / "trips").glob("*/manifest.json")):
            data = json.loads(manifest_path.read_text(encoding="utf-8"))
            trips.append({"trip_id": manifest_path.parent.name,
                          "vehicle_id": data.get("vehicle_id"),
                          "frame_count": data.get("frame_count")})
        return _versioned({"trips": trips})

    @app.get("/trips/{trip_id}/waypoints")
    def trip_waypoints(trip_id: str):
        path = _trip_dir(trip_id) / "waypoints.jsonl"
        waypoints = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()
                     if line.strip()]
        return _versioned({"trip_id": trip_id, "waypoints": waypoints})

    @app.post("/trips/{trip_id}/marks", status_code=201)
    def create_mark(trip_id: str, mark: MarkRequest):
        trip = load_bundle(_trip_dir(trip_id))
        existing = sorted((root / "segments").glob(f"{trip_id}-m*"))
        segment_id = f"{trip_id}-m{len(existing) + 1:03d}"
        try:
            segment = clip_segment(trip, mark.lat, mark.lon, segment_id=segment_id)
        except MarkOutsideTrip as exc:
            raise HTTPException(422, str(exc))
        write_bundle(segment, root / "segments" / segment_id)
        return _versioned({"segment_id": segment_id, "trip_id": trip_id,
                           "frame_count": segment.frame_count,
                           "truncated": segment.truncated, "note": mark.note})

    @app.get("/segments")
    def list_segments():
        segments = []
        for manifest_path in sorted((root / "segments").glob("*/manifest.json")):
            sid = manifest_path.parent.name
            has_results = (root / "results" / sid / "results.json").exists()
            has_truth = (root / "groundtruth" / f"{sid}.json").exists()
            segments.append({"segment_id": sid, "processed": has_results,
                             "annotated": has_truth, "job": state.job(sid).to_dict()})
        return _versioned({"segments": segments})

    @app.post("/segments/{segment_id}/process")
    def process_segment(segment_id: str):
        path = _segment_dir(segment_id)
        lock = state.segment_lock(segment_id)
        if not lock.acquire(blocking=False):
            raise HTTPException(409, f"segment {segment_id!r} is already processing")
        job = state.job(segment_id)
        try:
            job.state, job.started_at, job.error = "running", _now(), None
            bundle = load_bundle(path)
            output = run_pipeline(bundle, state.config)
            write_results(output, root / "results")
            job.state, job.finished_at = "done", _now()
            return _versioned({"segment_id": segment_id, "job": job.to_dict(),
                               "failure": output.failure})
        except JunctionScanError as exc:
            job.state, job.finished_at, job.error = "failed", _now(), str(exc)
            raise HTTPException(500, f"processing failed: {exc}")
        finally:
            lock.release()

    @app.get("/segments/{segment_id}/results")
    def segment_results(segment_id: str):
        path = root / "results" / segment_id / "results.json"
        if not path.exists():
            raise HTTPException(404, f"no results for segment {segment_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    @app.put("/segments/{segment_id}/groundtruth")
    def put_groundtruth(segment_id: str, payload: GroundTruthRequest):
        _segment_dir(segment_id)
        try:
            truth = GroundTruth(
                segment_id=segment_id,
                entry_frame=payload.entry_frame,
                exit_frame=payload.exit_frame,
                signage=Signage(payload.signage),
                maneuver=Maneuver(payload.maneuver),
                geometry=Geometry(payload.geometry) if payload.geometry else None,
            )
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        out = root / "groundtruth" / f"{segment_id}.json"
        out.write_text(json.dumps(truth.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
        return _versioned({"segment_id": segment_id, "groundtruth": truth.to_dict()})

    @app.get("/evaluation")
    def evaluation(group_by: str = "none"):
        if group_by not in ("none", "signage", "maneuver"):
            raise HTTPException(422, f"unknown group_by {group_by!r}")
        cases = []
        for results_path in sorted((root / "results").glob("*/results.json")):
            output = load_results(results_path)
            truth_path = root / "groundtruth" / f"{output.segment_id}.json"
            if not truth_path.exists():
                continue
            truth = GroundTruth.from_dict(json.loads(truth_path.read_text(encoding="utf-8")))
            cases.append(compare(output, truth, output.frame_rate))
        if not cases:
            raise HTTPException(404, "no result/ground-truth pairs to evaluate")
        reports = [aggregate(cases, g) for g in ("none", "signage", "maneuver")]
        payload = report_to_dict([r for r in reports if group_by == "none"
                                  or r.group_by in ("none", group_by)])
        return _versioned(payload)

    @app.get("/segments/{segment_id}/frames/{frame}/roi")
    def roi_frame(segment_id: str, frame: int):
        path = _segment_dir(segment_id) / "roi.bin"
        with path.open("rb") as fh:
            header = fh.read(16)
            if header[:4] != ROI_MAGIC:
                raise HTTPException(500, "corrupt roi.bin")
            count, height, width = struct.unpack("<III", header[4:16])
            if not 0 <= frame < count:
                raise HTTPException(404, f"frame {frame} outside clip of {count}")
            fh.seek(16 + frame * height * width)
            raw = fh.read(height * width)
        from PIL import Image

        image = Image.frombytes("L", (width, height), raw)
        buf = io.BytesIO()
        image.save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    return app
