"""Corpus-level trends on the standard synthetic sweep corpus"""
import pytest

from src.analysis import bin_aggregate, spearman
from src.app import characterize_records
from src.models import ProfileConfig, SizeBin, TageConfig, TraceMeta
from src.trace_io import generate_synthetic, standard_synthetic_corpus

pytestmark = pytest.mark.slow

PC_ONLY = ProfileConfig.pc_only()
TAGE = TageConfig()


def _characterize_family(source_tag):
    summaries, results = [], []
    for entry in standard_synthetic_corpus(seed=0, records_per_trace=30_000):
        if entry.source_tag != source_tag:
            continue
        records = generate_synthetic(entry.spec)
        meta = TraceMeta(trace_id=entry.trace_id, record_count=len(records), source_tag=entry.source_tag)
        _, trace_summaries, trace_results = characterize_records(meta, records, [PC_ONLY], [TAGE], TAGE.label)
        summaries += trace_summaries
        results += trace_results
    return summaries, results


@pytest.fixture(scope="module")
def size_sweep():
    return _characterize_family("size-sweep")


@pytest.fixture(scope="module")
def pred_sweep():
    return _characterize_family("pred-sweep")


def test_larger_working_sets_mispredict_more(size_sweep):
    summaries, results = size_sweep
    assert len(summaries) >= 30
    mpkb = {result.trace_id: result.mpkb for result in results}
    sizes = [summary.bwset_size for summary in summaries]
    rho = spearman(sizes, [mpkb[summary.trace_id] for summary in summaries])
    assert rho >= 0.6

    report = bin_aggregate(summaries, results, PC_ONLY)
    span = [SizeBin.LOW1, SizeBin.LOW2, SizeBin.MEDIUM1, SizeBin.MEDIUM2]
    rows = {row.size_bin: row for row in report.per_size_bin}
    assert all(rows[size_bin].trace_count for size_bin in span)
    means = [rows[size_bin].mean_mpkb["tage"] for size_bin in span]
    assert means == sorted(means)


def test_more_predictable_traces_mispredict_less(pred_sweep):
    summaries, results = pred_sweep
    assert len(summaries) >= 35
    by_trace = {result.trace_id: result for result in results}
    predictability = [summary.predictability for summary in summaries]
    rho = spearman(predictability, [by_trace[summary.trace_id].mpkb for summary in summaries])
    assert rho <= -0.8


def test_accuracy_tracks_projection_on_highly_predictable_traces(pred_sweep):
    summaries, results = pred_sweep
    by_trace = {result.trace_id: result for result in results}
    high = [summary for summary in summaries if summary.predictability >= 0.975]
    assert high
    for summary in high:
        assert by_trace[summary.trace_id].accuracy_pct >= summary.predictability * 100 - 1.0
