"""Command-line interface.

Subcommands:

    process       run the pipeline over a bundle (or directory of bundles)
    evaluate      score results against ground truth, write report + figures
    generate      render synthetic scenario bundles with ground truth
    serve         start the local HTTP service for the workbench
    export-scans  dump detected head scans from a results file as CSV

Exit codes: 0 success, 1 any per-bundle or evaluation failure, 2 bad
invocation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .bundle import load_bundle, write_bundle
from .config import PipelineConfig, load_config
from .errors import JunctionScanError, NoPairsFound
from .evaluate import compare
from .models import GroundTruth
from .pipeline import (
    FAILURE_NO_DETECTION,
    SCHEMA_VERSION,
    load_results,
    run_pipeline,
    write_results,
)
from .report import write_report
from .synth import generate, standard_catalog

logger = logging.getLogger("junctionscan")


def _bundle_dirs(input_dir: Path) -> list[Path]:
    if (input_dir / "manifest.json").exists():
        return [input_dir]
    return sorted(p.parent for p in input_dir.glob("*/manifest.json"))


def _apply_flags(config: PipelineConfig, noisy_flow: bool) -> PipelineConfig:
    if not noisy_flow:
        return config
    import dataclasses
    return dataclasses.replace(config, motion=dataclasses.replace(config.motion, noisy=True))


def _process_one(bundle_dir: Path, out_dir: Path, config: PipelineConfig) -> tuple[str, str | None]:
    try:
        bundle = load_bundle(bundle_dir)
        output = run_pipeline(bundle, config)
        write_results(output, out_dir)
        return bundle_dir.name, output.failure
    except Exception as exc:  # noqa: BLE001 - per-bundle isolation
        logger.error("bundle %s failed: %s", bundle_dir.name, exc)
        payload = {"schema_version": SCHEMA_VERSION, "segment_id": bundle_dir.name,
                   "failure": FAILURE_NO_DETECTION, "failure_message": str(exc)}
        seg_out = out_dir / bundle_dir.name
        seg_out.mkdir(parents=True, exist_ok=True)
        (seg_out / "error.json").write_text(
            json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")
        return bundle_dir.name, FAILURE_NO_DETECTION


def cmd_process(args) -> int:
    config = _apply_flags(load_config(args.config), args.noisy_flow)
    input_dir = Path(args.input)
    out_dir = Path(args.out)
    bundles = _bundle_dirs(input_dir)
    if not bundles:
        logger.error("no bundles found under %s", input_dir)
        return 2
    out_dir.mkdir(parents=True, exist_ok=True)
    hard_failures = 0
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        for name, failure in pool.map(lambda b: _process_one(b, out_dir, config), bundles):
            if failure == FAILURE_NO_DETECTION:
                hard_failures += 1
                print(f"{name}: FAILED")
            elif failure:
                print(f"{name}: {failure}")
            else:
                print(f"{name}: ok")
    return 1 if hard_failures else 0


def _find_truth(truth_dir: Path, segment_id: str) -> Path | None:
    flat = truth_dir / f"{segment_id}.json"
    if flat.exists():
        return flat
    nested = truth_dir / segment_id / "groundtruth.json"
    if nested.exists():
        return nested
    return None


def collect_cases(results_dir: Path, truth_dir: Path):
    cases = []
    for results_path in sorted(results_dir.glob("*/results.json")):
        output = load_results(results_path)
        truth_path = _find_truth(truth_dir, output.segment_id)
        if truth_path is None:
            logger.warning("no ground truth for %s; skipping", output.segment_id)
            continue
        truth = GroundTruth.from_dict(json.loads(truth_path.read_text(encoding="utf-8")))
        cases.append(compare(output, truth, output.frame_rate))
    if not cases:
        raise NoPairsFound(f"no result/ground-truth pairs under {results_dir} + {truth_dir}")
    return cases


def cmd_evaluate(args) -> int:
    try:
        cases = collect_cases(Path(args.results), Path(args.truth))
    except NoPairsFound as exc:
        logger.error("%s", exc)
        return 1
    payload = write_report(cases, args.out, group_by=args.group_by)
    print(f"evaluated {payload['total_cases']} cases "
          f"({payload['total_failures']} failures) -> {args.out}")
    return 0


def cmd_generate(args) -> int:
    scenarios = standard_catalog(path=args.catalog)
    if args.group:
        scenarios = [s for s in scenarios if s.group == args.group]
    if args.scenario:
        wanted = set(args.scenario)
        scenarios = [s for s in scenarios if s.name in wanted]
        missing = wanted - {s.name for s in scenarios}
        if missing:
            logger.error("unknown scenarios: %s", sorted(missing))
            return 2
    if args.list:
        for s in scenarios:
            print(f"{s.name}\t{s.group}\t{s.signage.value}\t{s.maneuver.value}")
        return 0
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for scenario in scenarios:
        if args.seed is not None:
            import dataclasses
            scenario = dataclasses.replace(scenario, seed=args.seed)
        case = generate(scenario)
        write_bundle(case.bundle, out_dir / scenario.name)
        print(f"{scenario.name}: {case.bundle.frame_count} frames")
    return 0


def cmd_export_scans(args) -> int:
    source = Path(args.source)
    if source.is_dir():
        candidate = source / "results.json"
        if candidate.exists():
            source = candidate
        else:
            bundle = load_bundle(source)
            output = run_pipeline(bundle, load_config(args.config))
            return _write_scan_csv(output.scans, output.frame_rate, Path(args.out))
    output = load_results(source)
    return _write_scan_csv(output.scans, output.frame_rate, Path(args.out))


def _write_scan_csv(scans, frame_rate: float, out_path: Path) -> int:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "time_s", "direction", "magnitude_deg"])
        for s in scans:
            writer.writerow([s.peak_frame, f"{s.peak_frame / frame_rate:.3f}",
                             s.direction.value, f"{s.magnitude:.3f}"])
    print(f"wrote {len(scans)} scans -> {out_path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(Path(args.data_root), load_config(args.config), workers=args.workers)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="junctionscan", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="run the pipeline over bundles")
    p.add_argument("input", help="bundle directory or directory of bundles")
    p.add_argument("--out", required=True, help="results root")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--noisy-flow", action="store_true",
                   help="use the wide median window for all bundles")
    p.add_argument("--workers", type=int, default=None, help="parallel bundles (default: cores)")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("evaluate", help="score results against ground truth")
    p.add_argument("--results", required=True, help="results root from `process`")
    p.add_argument("--truth", required=True,
                   help="ground-truth directory (<id>.json or <id>/groundtruth.json)")
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--group-by", choices=["none", "signage", "maneuver"], default="none")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("generate", help="render synthetic scenario bundles")
    p.add_argument("--out", default="generated", help="output directory")
    p.add_argument("--catalog", default=None, help="scenario catalog JSON (default: packaged)")
    p.add_argument("--group", choices=["clean", "noise"], default=None)
    p.add_argument("--scenario", action="append", default=None, help="generate only these names")
    p.add_argument("--seed", type=int, default=None, help="override every scenario seed")
    p.add_argument("--list", action="store_true", help="list scenarios instead of generating")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("serve", help="start the workbench HTTP service")
    p.add_argument("--data-root", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8477)
    p.add_argument("--config", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export-scans", help="dump head scans as CSV")
    p.add_argument("source", help="results.json, results dir, or bundle dir")
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_export_scans)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except JunctionScanError as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
