"""
Characterization Module
Post-processing of a ProfileRun: branch working set extraction, weighted
predictability, entropy baselines and size/predictability binning
"""
from bisect import bisect_right
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
from scipy import stats as scipy_stats

from src.bwset.profiler import ProfileRun, dynamic_static_split, ranked_tuples
from src.errors import ContractViolation, EmptyTraceError
from src.models import (Baselines, BwsetSummary, PredBin, SizeBin, TraceMeta,
                        TupleKey, TupleStats)

Bwset = List[Tuple[TupleKey, TupleStats]]

# Lower edges, half-open upward: [1, 100) is LOW1 ... >= 10M is HIGH3
SIZE_BIN_EDGES = [100, 1_000, 10_000, 100_000, 1_000_000, 10_000_000]
SIZE_BINS = list(SizeBin)

# Lower edges inclusive, so 100% lands in HIGH3
PRED_BIN_EDGES = [0.75, 0.80, 0.85, 0.90, 0.925, 0.95, 0.975, 0.99]
PRED_BINS = list(PredBin)


def extract_bwset(run: ProfileRun, theta: Optional[float] = None) -> Bwset:
    """
    Minimal prefix of the ranked tuple table whose cumulative occurrence
    strictly exceeds theta x total.

    Args:
        run: Profiled tuple table
        theta: Override for run.config.theta

    Returns:
        Ordered (TupleKey, TupleStats) list; its length is the BWSET size
    """
    if run.total_occurrences <= 0:
        raise EmptyTraceError("cannot extract a branch working set from an empty trace")
    theta = run.config.theta if theta is None else theta
    # Decimal reading of theta keeps 0.95 x 100 from landing below 95
    bound = Fraction(str(theta)) * run.total_occurrences
    ranked = ranked_tuples(run)
    cumulative = 0
    for size, (_, stats) in enumerate(ranked, start=1):
        cumulative += stats.occurrence_count
        if cumulative > bound:
            return ranked[:size]
    # theta = 1.0: nothing strictly exceeds the total
    return ranked


def bwset_coverage(bwset: Bwset, total_occurrences: int) -> float:
    return sum(stats.occurrence_count for _, stats in bwset) / total_occurrences


def tuple_predictability(stats: TupleStats) -> float:
    """max(taken, not-taken) / occurrence, in [0.5, 1.0]"""
    if stats.occurrence_count < 1:
        raise ContractViolation("predictability of a tuple with zero occurrences")
    taken = stats.taken_count
    return max(taken, stats.occurrence_count - taken) / stats.occurrence_count


def trace_predictability(bwset: Bwset) -> float:
    """Occurrence-weighted mean of tuple predictability over the BWSET"""
    if not bwset:
        raise ContractViolation("predictability of an empty branch working set")
    majority = sum(max(stats.taken_count, stats.occurrence_count - stats.taken_count) for _, stats in bwset)
    occurrences = sum(stats.occurrence_count for _, stats in bwset)
    return majority / occurrences


def linear_entropy(p):
    """E_L(p) = 2 min(p, 1 - p); 0 for a biased context, 1 for a random one"""
    p = np.asarray(p, dtype=np.float64)
    return 2.0 * np.minimum(p, 1.0 - p)


def shannon_entropy(p):
    """Binary outcome entropy in bits"""
    p = np.asarray(p, dtype=np.float64)
    return scipy_stats.entropy(np.stack([p, 1.0 - p]), base=2, axis=0)


def baseline_metrics(run: ProfileRun, bwset: Optional[Bwset] = None) -> Baselines:
    """
    Prior-art metrics: trace taken rate, per-pc transition rate and the
    occurrence-weighted binary Shannon / linear entropy over the BWSET.
    """
    if run.total_occurrences <= 0:
        raise EmptyTraceError("baseline metrics need a non-empty trace")
    if bwset is None:
        bwset = extract_bwset(run)
    occurrences = np.fromiter((stats.occurrence_count for _, stats in bwset), dtype=np.float64, count=len(bwset))
    taken = np.fromiter((stats.taken_count for _, stats in bwset), dtype=np.float64, count=len(bwset))
    p = taken / occurrences
    transition_rate = run.transition_count / run.transition_pairs if run.transition_pairs else 0.0
    return Baselines(
        taken_rate=run.taken_total / run.total_occurrences,
        transition_rate=transition_rate,
        shannon_entropy=float(np.average(shannon_entropy(p), weights=occurrences)),
        linear_entropy=float(np.average(linear_entropy(p), weights=occurrences)),
    )


def assign_size_bin(bwset_size: int) -> SizeBin:
    if bwset_size < 1:
        raise ContractViolation(f"BWSET size must be >= 1, got {bwset_size}")
    return SIZE_BINS[bisect_right(SIZE_BIN_EDGES, bwset_size)]


def assign_pred_bin(predictability: float) -> PredBin:
    if not 0.5 <= predictability <= 1.0:
        raise ContractViolation(f"predictability {predictability} outside [0.5, 1.0]")
    return PRED_BINS[bisect_right(PRED_BIN_EDGES, predictability)]


def bwset_mpkb(bwset: Bwset) -> float:
    """Attached predictor's mispredictions per 1000 BWSET occurrences"""
    occurrences = sum(stats.occurrence_count for _, stats in bwset)
    mispredicts = sum(stats.mispredict_count for _, stats in bwset)
    return mispredicts * 1000.0 / occurrences


def summarize(run: ProfileRun, meta: TraceMeta) -> BwsetSummary:
    """Full per-trace characterization of one ProfileRun"""
    bwset = extract_bwset(run)
    predictability = trace_predictability(bwset)
    static_count, dynamic_count = dynamic_static_split(run)
    return BwsetSummary(
        trace_id=meta.trace_id,
        source_tag=meta.source_tag,
        config=run.config,
        bwset_size=len(bwset),
        bwset_coverage=bwset_coverage(bwset, run.total_occurrences),
        predictability=predictability,
        size_bin=assign_size_bin(len(bwset)),
        pred_bin=assign_pred_bin(predictability),
        baselines=baseline_metrics(run, bwset),
        static_count=static_count,
        dynamic_count=dynamic_count,
        distinct_tuples=run.distinct_tuples,
        total_occurrences=run.total_occurrences,
        reference_predictor=run.predictor,
        bwset_mpkb=bwset_mpkb(bwset) if run.predictor else None,
    )
