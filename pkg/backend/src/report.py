"""
Report Module
Emits correlation reports (CSV / JSON / plot data) and reads and writes
the per-trace summary and predictor result tables
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import pandas as pd

from src.models import (BwsetSummary, CorrelationReport, PredictorKind, PredictorResult,
                        ProfileConfig)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

REPORT_FORMATS = ("csv", "json", "plotdata")
REPORT_BASE_COLUMNS = ["section", "bin", "trace_count", "mean_projection", "median_projection"]
RESULT_COLUMNS = ["trace_id", "predictor", "kind", "branches", "mispredicts", "mpkb", "accuracy_pct"]
FLOAT_FORMAT = "%.6f"


def report_stem(config: ProfileConfig) -> str:
    return f"report_{config.label}"


def _report_rows(report: CorrelationReport) -> pd.DataFrame:
    """Populated bins only: size section first, then predictability section"""
    columns = list(REPORT_BASE_COLUMNS)
    for label in report.predictors:
        columns += [f"mpkb:{label}", f"accuracy:{label}"]

    rows = []
    for row in report.per_size_bin:
        if not row.trace_count:
            continue
        record = {"section": "size", "bin": row.size_bin.value, "trace_count": row.trace_count}
        for label in report.predictors:
            mpkb = row.mean_mpkb.get(label)
            record[f"mpkb:{label}"] = mpkb
            record[f"accuracy:{label}"] = None if mpkb is None else 100.0 - mpkb / 10.0
        rows.append(record)
    for row in report.per_pred_bin:
        if not row.trace_count:
            continue
        record = {
            "section": "predictability",
            "bin": row.pred_bin.value,
            "trace_count": row.trace_count,
            "mean_projection": row.mean_projection,
            "median_projection": row.median_projection,
        }
        for label in report.predictors:
            accuracy = row.mean_accuracy_pct.get(label)
            record[f"accuracy:{label}"] = accuracy
            record[f"mpkb:{label}"] = None if accuracy is None else (100.0 - accuracy) * 10.0
        rows.append(record)
    return pd.DataFrame(rows, columns=columns)


def _plot_series(report: CorrelationReport) -> str:
    lines = [f"# {report.config.label}: mean MPKB per bin, one series per predictor"]
    for label in report.predictors:
        lines.append(f"# series size {label}")
        for row in report.per_size_bin:
            mpkb = row.mean_mpkb.get(label)
            if row.trace_count and mpkb is not None:
                lines.append(f"{row.size_bin.value}\t{mpkb:.6f}")
        lines += ["", ""]
        lines.append(f"# series predictability {label}")
        for row in report.per_pred_bin:
            accuracy = row.mean_accuracy_pct.get(label)
            if row.trace_count and accuracy is not None:
                lines.append(f"{row.pred_bin.value}\t{(100.0 - accuracy) * 10.0:.6f}")
        lines += ["", ""]
    return "\n".join(lines) + "\n"


def emit_report(report: CorrelationReport, fmt: str, out_dir: PathLike) -> List[Path]:
    """
    Write one report in the given format.

    Args:
        report: Aggregated report of one configuration
        fmt: "csv", "json" or "plotdata"
        out_dir: Destination directory (created when missing)

    Returns:
        Paths of the files written
    """
    if fmt not in REPORT_FORMATS:
        raise ValueError(f"unknown report format {fmt!r}, expected one of {REPORT_FORMATS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = report_stem(report.config)

    if fmt == "csv":
        path = out_dir / f"{stem}.csv"
        _report_rows(report).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    elif fmt == "json":
        path = out_dir / f"{stem}.json"
        path.write_text(json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
    else:
        path = out_dir / f"plot_{report.config.label}.dat"
        path.write_text(_plot_series(report))
    return [path]


def emit_all(report: CorrelationReport, out_dir: PathLike) -> List[Path]:
    paths = []
    for fmt in REPORT_FORMATS:
        paths += emit_report(report, fmt, out_dir)
    return paths


def write_summaries(summaries: Sequence[BwsetSummary], results: Sequence[PredictorResult],
                    path: PathLike) -> Path:
    """Per-trace summary rows with every predictor's MPKB appended"""
    mpkb: Dict[str, Dict[str, float]] = {}
    labels = list(dict.fromkeys(result.predictor for result in results))
    for result in results:
        mpkb.setdefault(result.trace_id, {})[result.predictor] = result.mpkb
    rows = []
    for summary in summaries:
        row = summary.to_row()
        for label in labels:
            row[f"mpkb_{label}"] = mpkb.get(summary.trace_id, {}).get(label)
        rows.append(row)
    path = Path(path)
    pd.DataFrame(rows, columns=_summary_columns(labels)).to_csv(path, index=False, lineterminator="\n")
    return path


def _summary_columns(labels: Sequence[str]) -> List[str]:
    columns = [
        "trace_id", "source_tag", "mode", "N", "M", "theta", "bwset_size", "coverage",
        "predictability", "size_bin", "pred_bin", "taken_rate", "transition_rate",
        "shannon_entropy", "linear_entropy", "static_count", "dynamic_count",
        "distinct_tuples", "total_occurrences", "reference_predictor", "bwset_mpkb",
    ]
    return columns + [f"mpkb_{label}" for label in labels]


def read_summaries(path: PathLike) -> List[BwsetSummary]:
    frame = pd.read_csv(path, dtype={"trace_id": str, "source_tag": str, "reference_predictor": str},
                        float_precision="round_trip")
    return [BwsetSummary.from_row(row) for row in frame.to_dict(orient="records")]


def write_results(results: Sequence[PredictorResult], path: PathLike) -> Path:
    rows = [result.model_dump(mode="json") for result in results]
    path = Path(path)
    pd.DataFrame(rows, columns=RESULT_COLUMNS).to_csv(path, index=False, lineterminator="\n")
    return path


def read_results(path: PathLike) -> List[PredictorResult]:
    frame = pd.read_csv(path, dtype={"trace_id": str, "predictor": str, "kind": str})
    return [
        PredictorResult.from_counts(row["trace_id"], row["predictor"], PredictorKind(row["kind"]),
                                    int(row["branches"]), int(row["mispredicts"]))
        for row in frame.to_dict(orient="records")
    ]
