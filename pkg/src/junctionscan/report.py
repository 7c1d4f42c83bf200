"""Evaluation report writers: JSON, delimited tables, and figures.

``write_report`` produces, in one output directory:

    report.json   full grouped statistics (overall + by signage + by maneuver)
    report.csv    the standard summary table (variable/category breakdown)
    cases.csv     one row per evaluated segment
    figures/      error and overlap histograms (PNG)

Figure files carry pinned metadata so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluate import CaseMetrics, GroupStats, Report, aggregate  # noqa: E402
from .evaluate import GROUP_VARIABLE_NAMES  # noqa: E402

TABLE_COLUMNS = [
    "Variable",
    "Categories",
    "Count",
    "Entry point time error (seconds)",
    "Entry point distance error (meters)",
    "Intersection segment overlap",
]
_CATEGORY_LABELS = {
    "all": "All",
    "none": "None",
    "stop_sign": "Stop sign",
    "traffic_light": "Traffic light",
    "left": "Left",
    "right": "Right",
    "straight": "Straight",
}
_PNG_METADATA = {"Software": "junctionscan"}


def _fmt(median: float, iqr: tuple[float, float], digits: int = 2) -> str:
    return f"{median:.{digits}f} [{iqr[0]:.{digits}f}-{iqr[1]:.{digits}f}]"


def _table_rows(report: Report) -> list[list[str]]:
    variable = GROUP_VARIABLE_NAMES[report.group_by]
    rows = []
    for g in report.groups:
        rows.append([
            variable,
            _CATEGORY_LABELS.get(g.label, g.label),
            str(g.count),
            _fmt(g.entry_time_median_s, g.entry_time_iqr_s),
            _fmt(g.entry_distance_median_m, g.entry_distance_iqr_m, 1),
            _fmt(g.dice_median, g.dice_iqr),
        ])
    return rows


def write_table_csv(reports: list[Report], path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_COLUMNS)
        for report in reports:
            writer.writerows(_table_rows(report))


def write_cases_csv(cases: list[CaseMetrics], path: Path) -> None:
    columns = ["segment_id", "signage_true", "maneuver_true", "signage_est", "maneuver_est",
               "entry_time_error_s", "entry_time_signed_s", "entry_distance_error_m", "dice",
               "signage_match", "maneuver_match", "scan_count_diff_bounds",
               "scan_count_diff_window", "failure"]
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for c in sorted(cases, key=lambda c: c.segment_id):
            writer.writerow([
                c.segment_id, c.signage_true.value, c.maneuver_true.value,
                c.signage_est.value if c.signage_est else "",
                c.maneuver_est.value if c.maneuver_est else "",
                _num(c.entry_time_error_s), _num(c.entry_time_signed_s),
                _num(c.entry_distance_error_m), _num(c.dice),
                _flag(c.signage_match), _flag(c.maneuver_match),
                _num(c.scan_count_diff_bounds), _num(c.scan_count_diff_window),
                c.failure or "",
            ])


def _num(v) -> str:
    if v is None:
        return ""
    return f"{v:.6f}" if isinstance(v, float) else str(v)


def _flag(v) -> str:
    return "" if v is None else str(int(v))


def _group_dict(g: GroupStats) -> dict:
    d = dataclasses.asdict(g)
    d["entry_time_iqr_s"] = list(g.entry_time_iqr_s)
    d["entry_distance_iqr_m"] = list(g.entry_distance_iqr_m)
    d["dice_iqr"] = list(g.dice_iqr)
    return d


def report_to_dict(reports: list[Report]) -> dict:
    return {
        "total_cases": reports[0].total_cases if reports else 0,
        "total_failures": reports[0].total_failures if reports else 0,
        "groupings": {
            r.group_by: [_group_dict(g) for g in r.groups] for r in reports
        },
    }


def _histogram(values: list[float], title: str, xlabel: str, marker: float | None,
               path: Path, bins: int = 24) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 3.6), dpi=120)
    ax.hist(values, bins=bins, color="#3a6ea5", edgecolor="white")
    if marker is not None:
        ax.axvline(marker, color="#b0413e", linestyle="--", linewidth=1.2)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("intersections")
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_METADATA)
    plt.close(fig)


def write_figures(cases: list[CaseMetrics], fig_dir: Path) -> list[Path]:
    fig_dir.mkdir(parents=True, exist_ok=True)
    ok = [c for c in cases if not c.failed]
    made = []
    specs = [
        ("entry_time_error", "Entry time error", "seconds", 1.0,
         [c.entry_time_error_s for c in ok]),
        ("entry_distance_error", "Entry distance error", "meters", 10.0,
         [c.entry_distance_error_m for c in ok]),
        ("bounds_overlap", "Intersection bounds overlap", "dice coefficient", 0.75,
         [c.dice for c in ok]),
    ]
    for stem, title, xlabel, marker, values in specs:
        path = fig_dir / f"{stem}.png"
        _histogram(values, title, xlabel, marker, path)
        made.append(path)
    return made


def write_report(cases: list[CaseMetrics], out_dir: str | Path,
                 group_by: str = "none") -> dict:
    """All report artifacts for a case list; returns the report dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    groupings = ["none", "signage", "maneuver"]
    reports = [aggregate(cases, g) for g in groupings]
    payload = report_to_dict(reports)
    (out / "report.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if group_by == "none":
        table = reports[1:]  # the full summary table carries both groupings
    else:
        table = [r for r in reports if r.group_by == group_by]
    write_table_csv(table, out / "report.csv")
    write_cases_csv(cases, out / "cases.csv")
    write_figures(cases, out / "figures")
    return payload
