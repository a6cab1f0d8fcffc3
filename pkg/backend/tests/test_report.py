import json

import pandas as pd
import pytest

from src.analysis import bin_aggregate
from src.models import (Baselines, BwsetSummary, PredBin, PredictorKind, PredictorResult,
                        ProfileConfig, SizeBin)
from src.report import (emit_all, emit_report, read_results, read_summaries, report_stem,
                        write_results, write_summaries)

GL_16_8 = ProfileConfig.global_local_tuple(16, 8)


def _summary(trace_id, predictability, pred_bin, config=GL_16_8, bwset_mpkb=None):
    return BwsetSummary(
        trace_id=trace_id,
        source_tag="web",
        config=config,
        bwset_size=42,
        bwset_coverage=0.9512345678901,
        predictability=predictability,
        size_bin=SizeBin.LOW1,
        pred_bin=pred_bin,
        baselines=Baselines(taken_rate=0.61, transition_rate=0.12, shannon_entropy=0.3, linear_entropy=0.2),
        static_count=3,
        dynamic_count=9,
        distinct_tuples=120,
        total_occurrences=5000,
        reference_predictor="tage" if bwset_mpkb is not None else None,
        bwset_mpkb=bwset_mpkb,
    )


@pytest.fixture
def report():
    summaries = [_summary("a", 0.99, PredBin.HIGH3), _summary("b", 0.93, PredBin.MEDIUM2)]
    results = [
        PredictorResult.from_counts("a", "tage", PredictorKind.TAGE, 5000, 5),
        PredictorResult.from_counts("a", "perceptron", PredictorKind.PERCEPTRON, 5000, 9),
        PredictorResult.from_counts("b", "tage", PredictorKind.TAGE, 5000, 200),
        PredictorResult.from_counts("b", "perceptron", PredictorKind.PERCEPTRON, 5000, 240),
    ]
    return bin_aggregate(summaries, results)


@pytest.mark.parametrize("config, stem", [
    (ProfileConfig.pc_only(), "report_pc"),
    (ProfileConfig.global_tuple(32), "report_global_32g"),
    (GL_16_8, "report_global_local_16g_8l"),
])
def test_report_stem(config, stem):
    assert report_stem(config) == stem


def test_csv_shape(tmp_path, report):
    [path] = emit_report(report, "csv", tmp_path)
    assert path.name == "report_global_local_16g_8l.csv"
    frame = pd.read_csv(path)
    assert list(frame.columns[:5]) == ["section", "bin", "trace_count", "mean_projection", "median_projection"]
    assert {"mpkb:tage", "accuracy:tage", "mpkb:perceptron", "accuracy:perceptron"} <= set(frame.columns)
    predictability = frame[frame["section"] == "predictability"]
    assert set(predictability["bin"]) == {"Pred-HIGH3", "Pred-MEDIUM2"}
    high3 = predictability[predictability["bin"] == "Pred-HIGH3"].iloc[0]
    assert high3["mean_projection"] == pytest.approx(0.99)
    assert high3["accuracy:tage"] == pytest.approx(99.9)
    size = frame[frame["section"] == "size"]
    assert list(size["bin"]) == ["BWSET-LOW1"]
    assert size.iloc[0]["mpkb:tage"] == pytest.approx(20.5)


def test_json_round_trips_model(tmp_path, report):
    [path] = emit_report(report, "json", tmp_path)
    payload = json.loads(path.read_text())
    assert payload["config"]["mode"] == "global_local"
    assert payload["trace_count"] == 2
    assert len(payload["per_size_bin"]) == len(SizeBin)


def test_plotdata_series_per_predictor(tmp_path, report):
    [path] = emit_report(report, "plotdata", tmp_path)
    text = path.read_text()
    assert path.name == "plot_global_local_16g_8l.dat"
    assert "# series size tage" in text
    assert "# series predictability perceptron" in text
    assert "BWSET-LOW1\t20.500000" in text


def test_emission_is_deterministic(tmp_path, report):
    first = [p.read_bytes() for p in emit_all(report, tmp_path / "one")]
    second = [p.read_bytes() for p in emit_all(report, tmp_path / "two")]
    assert first == second


def test_empty_corpus_emits_header_only(tmp_path):
    empty = bin_aggregate([], [], ProfileConfig.pc_only())
    [path] = emit_report(empty, "csv", tmp_path)
    lines = path.read_text().splitlines()
    assert lines == ["section,bin,trace_count,mean_projection,median_projection"]


def test_unknown_format(tmp_path, report):
    with pytest.raises(ValueError):
        emit_report(report, "svg", tmp_path)


def test_summaries_round_trip(tmp_path):
    summaries = [_summary("007", 0.99, PredBin.HIGH3, bwset_mpkb=1.25),
                 _summary("b", 0.93, PredBin.MEDIUM2, config=ProfileConfig.pc_only(0.9))]
    results = [PredictorResult.from_counts("007", "tage", PredictorKind.TAGE, 5000, 5)]
    path = write_summaries(summaries, results, tmp_path / "summaries.csv")
    frame = pd.read_csv(path, dtype={"trace_id": str})
    assert frame.loc[0, "mpkb_tage"] == pytest.approx(1.0)
    assert read_summaries(path) == summaries


def test_results_round_trip(tmp_path):
    results = [PredictorResult.from_counts("t", "tage", PredictorKind.TAGE, 3000, 7),
               PredictorResult.from_counts("t", "gs", PredictorKind.GSHARE, 3000, 70)]
    path = write_results(results, tmp_path / "results.csv")
    assert read_results(path) == results
