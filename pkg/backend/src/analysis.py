"""
Analysis Module
Corpus-level aggregation: per-bin MPKB, predictability projection vs.
predictor accuracy, application-group breakdown and rank correlations
"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats as scipy_stats

from src.errors import ContractViolation, JoinError
from src.models import (BwsetSummary, CategoryRow, CorrelationReport, PredBin, PredBinRow,
                        PredictorResult, ProfileConfig, SizeBin, SizeBinRow, SourceTagRow)

logger = logging.getLogger(__name__)


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Spearman rank correlation with average ranks for ties.

    Constant input has no rank association and yields 0.0.
    """
    if len(xs) != len(ys):
        raise ContractViolation(f"spearman needs equal lengths, got {len(xs)} and {len(ys)}")
    if len(xs) < 2:
        raise ContractViolation("spearman needs at least two points")
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        return 0.0
    rho, _ = scipy_stats.spearmanr(xs, ys)
    return float(np.clip(rho, -1.0, 1.0))


def _mean(series: pd.Series) -> Optional[float]:
    value = series.mean()
    return None if pd.isna(value) else float(value)


def _median(series: pd.Series) -> Optional[float]:
    value = series.median()
    return None if pd.isna(value) else float(value)


def _corpus_frame(summaries: Sequence[BwsetSummary], results: Sequence[PredictorResult],
                  predictors: List[str]) -> pd.DataFrame:
    by_trace: Dict[str, Dict[str, PredictorResult]] = {}
    for result in results:
        by_trace.setdefault(result.trace_id, {})[result.predictor] = result

    rows = []
    for summary in summaries:
        row = {
            "trace_id": summary.trace_id,
            "source_tag": summary.source_tag,
            "bwset_size": summary.bwset_size,
            "predictability": summary.predictability,
            "size_bin": summary.size_bin.value,
            "pred_bin": summary.pred_bin.value,
        }
        for label in predictors:
            result = by_trace[summary.trace_id].get(label)
            row[f"mpkb:{label}"] = result.mpkb if result else np.nan
            row[f"accuracy:{label}"] = result.accuracy_pct if result else np.nan
        rows.append(row)
    columns = ["trace_id", "source_tag", "bwset_size", "predictability", "size_bin", "pred_bin"]
    for label in predictors:
        columns += [f"mpkb:{label}", f"accuracy:{label}"]
    return pd.DataFrame(rows, columns=columns)


def bin_aggregate(summaries: Sequence[BwsetSummary], results: Sequence[PredictorResult],
                  config: Optional[ProfileConfig] = None) -> CorrelationReport:
    """
    Join per-trace summaries of one configuration with predictor results and
    reduce them into a CorrelationReport.

    Args:
        summaries: BwsetSummary rows, all for the same ProfileConfig
        results: PredictorResult rows for the same traces
        config: Configuration of the report; required when summaries is empty

    Returns:
        CorrelationReport with every bin listed (empty bins have count 0 and no mean)
    """
    if config is None:
        if not summaries:
            raise ContractViolation("an empty corpus needs an explicit config")
        config = summaries[0].config
    mixed = {summary.config for summary in summaries} - {config}
    if mixed:
        raise ContractViolation(f"summaries mix configurations: {sorted(c.label for c in mixed)}")

    summary_ids = {summary.trace_id for summary in summaries}
    result_ids = {result.trace_id for result in results}
    orphans = (summary_ids - result_ids) | (result_ids - summary_ids)
    if orphans:
        raise JoinError(orphans)

    predictors = list(dict.fromkeys(result.predictor for result in results))
    frame = _corpus_frame(summaries, results, predictors)

    per_size_bin = []
    for size_bin in SizeBin:
        members = frame[frame["size_bin"] == size_bin.value]
        per_size_bin.append(SizeBinRow(
            size_bin=size_bin,
            trace_count=len(members),
            mean_mpkb={label: _mean(members[f"mpkb:{label}"]) for label in predictors},
        ))

    per_pred_bin = []
    for pred_bin in PredBin:
        members = frame[frame["pred_bin"] == pred_bin.value]
        per_pred_bin.append(PredBinRow(
            pred_bin=pred_bin,
            trace_count=len(members),
            mean_projection=_mean(members["predictability"]),
            median_projection=_median(members["predictability"]),
            mean_accuracy_pct={label: _mean(members[f"accuracy:{label}"]) for label in predictors},
        ))

    per_source_tag = [
        SourceTagRow(
            source_tag=tag,
            trace_count=len(members),
            mean_bwset_size=float(members["bwset_size"].mean()),
            mean_predictability=float(members["predictability"].mean()),
            mean_mpkb={label: _mean(members[f"mpkb:{label}"]) for label in predictors},
        )
        for tag, members in frame.groupby("source_tag", sort=True)
    ]

    counts = frame.groupby(["size_bin", "pred_bin"]).size()
    categories = [
        CategoryRow(size_bin=size_bin, pred_bin=pred_bin, trace_count=int(counts[(size_bin.value, pred_bin.value)]))
        for size_bin in SizeBin
        for pred_bin in PredBin
        if (size_bin.value, pred_bin.value) in counts.index
    ]

    spearman_size, spearman_pred = {}, {}
    for label in predictors:
        scored = frame.dropna(subset=[f"mpkb:{label}"])
        if len(scored) < 2:
            spearman_size[label] = spearman_pred[label] = None
            continue
        spearman_size[label] = spearman(scored["bwset_size"], scored[f"mpkb:{label}"])
        spearman_pred[label] = spearman(scored["predictability"], scored[f"mpkb:{label}"])

    logger.info("Aggregated %d traces for %s", len(frame), config.label)
    return CorrelationReport(
        config=config,
        predictors=predictors,
        trace_count=len(frame),
        per_size_bin=per_size_bin,
        per_pred_bin=per_pred_bin,
        per_source_tag=per_source_tag,
        categories=categories,
        spearman_size_mpkb=spearman_size,
        spearman_pred_mpkb=spearman_pred,
    )


def select_best_config(reports: Sequence[CorrelationReport], predictor: str) -> Optional[ProfileConfig]:
    """
    Configuration whose predictability ranks most strongly (negatively) against
    the predictor's MPKB; earlier reports win ties.
    """
    best, best_rho = None, None
    for report in reports:
        rho = report.spearman_pred_mpkb.get(predictor)
        if rho is None:
            continue
        if best_rho is None or rho < best_rho:
            best, best_rho = report.config, rho
    return best
