import gc
import warnings

import pytest
from pydantic import ValidationError

from src import config
from src.errors import TraceFormatError, TraceTruncatedError
from src.models import BranchRecord, PatternBranch, SyntheticSpec, SyntheticTraceEntry, TraceMeta
from src.trace_io import (generate_synthetic, load_records, read_csv_trace, read_meta_sidecar,
                          read_trace, read_trace_array, standard_synthetic_corpus, synthetic_pc,
                          write_synthetic, write_trace)


def _write(records, path, trace_id="t"):
    write_trace(records, TraceMeta(trace_id=trace_id, record_count=len(records)), path)
    return path


def test_round_trip_is_byte_exact(tmp_path):
    spec = SyntheticSpec.uniform(50, 0.7, 5000, rng_seed=3)
    records = generate_synthetic(spec)
    first = _write(records, tmp_path / "a.bwt")

    meta, stream = read_trace(first)
    reread = list(stream)
    assert meta.record_count == len(records)
    assert reread == records

    second = _write(reread, tmp_path / "b.bwt")
    assert first.read_bytes() == second.read_bytes()


def test_file_layout(tmp_path):
    path = _write([BranchRecord(0x400, True), BranchRecord(0x1_0000_0000, False)], tmp_path / "t.bwt")
    raw = path.read_bytes()
    assert raw[:8] == b"BWTRACE1"
    assert int.from_bytes(raw[8:16], "little") == 2
    assert len(raw) == config.TRACE_HEADER_SIZE + 2 * config.TRACE_RECORD_SIZE
    assert int.from_bytes(raw[16:24], "little") == 0x400
    assert raw[24] == 1
    assert raw[33] == 0


def test_empty_trace(tmp_path):
    path = _write([], tmp_path / "empty.bwt")
    meta, stream = read_trace(path)
    assert meta.record_count == 0
    assert list(stream) == []


@pytest.mark.parametrize("magic, offset", [(b"XWTRACE1", 0), (b"BWTRACE2", 7)])
def test_bad_magic_reports_offset(tmp_path, magic, offset):
    path = tmp_path / "bad.bwt"
    path.write_bytes(magic + (0).to_bytes(8, "little"))
    with pytest.raises(TraceFormatError) as exc:
        read_trace(path)
    assert exc.value.offset == offset


def test_truncated_body(tmp_path):
    path = _write([BranchRecord(0x400 + 4 * i, True) for i in range(10)], tmp_path / "t.bwt")
    path.write_bytes(path.read_bytes()[:-5])
    meta, stream = read_trace(path)
    assert meta.record_count == 10
    with pytest.raises(TraceTruncatedError) as exc:
        list(stream)
    assert exc.value.records_read == 9
    assert exc.value.expected == 10


@pytest.mark.parametrize("extra", [1, config.TRACE_RECORD_SIZE])
def test_trailing_bytes_are_rejected(tmp_path, extra):
    path = _write([BranchRecord(0x400 + 4 * i, True) for i in range(3)], tmp_path / "t.bwt")
    path.write_bytes(path.read_bytes() + bytes(extra))
    meta, stream = read_trace(path)
    assert meta.record_count == 3
    with pytest.raises(TraceFormatError) as exc:
        list(stream)
    assert exc.value.offset == config.TRACE_HEADER_SIZE + 3 * config.TRACE_RECORD_SIZE
    with pytest.raises(TraceFormatError):
        read_trace_array(path)


def test_header_count_below_body_is_rejected(tmp_path):
    path = _write([BranchRecord(0x400 + 4 * i, True) for i in range(3)], tmp_path / "t.bwt")
    raw = bytearray(path.read_bytes())
    raw[8:16] = (2).to_bytes(8, "little")
    path.write_bytes(bytes(raw))
    with pytest.raises(TraceFormatError):
        load_records(path)


def test_unconsumed_stream_holds_no_file(tmp_path):
    path = _write([BranchRecord(0x400, True)], tmp_path / "t.bwt")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        meta, stream = read_trace(path)
        del stream
        gc.collect()
    assert meta.record_count == 1
    assert not [w for w in caught if issubclass(w.category, ResourceWarning)]


def test_outcome_byte_must_be_binary(tmp_path):
    path = _write([BranchRecord(0x400, True)], tmp_path / "t.bwt")
    raw = bytearray(path.read_bytes())
    raw[-1] = 2
    path.write_bytes(bytes(raw))
    with pytest.raises(TraceFormatError):
        load_records(path)


def test_csv_import(tmp_path):
    path = tmp_path / "hand.csv"
    path.write_text("pc,taken\n0x400,1\n0x404, 0\n0X408,1\n")
    assert read_csv_trace(path) == [
        BranchRecord(0x400, True), BranchRecord(0x404, False), BranchRecord(0x408, True)
    ]


@pytest.mark.parametrize("body", ["address,taken\n0x400,1\n", "pc,taken\n400,1\n", "pc,taken\n0x400,2\n", ""])
def test_csv_malformed(tmp_path, body):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(TraceFormatError):
        read_csv_trace(path)


def test_synthetic_is_deterministic():
    spec = SyntheticSpec.uniform(20, 0.8, 2000, rng_seed=11)
    assert generate_synthetic(spec) == generate_synthetic(spec)
    other = spec.model_copy(update={"rng_seed": 12})
    assert generate_synthetic(spec) != generate_synthetic(other)


def test_synthetic_pcs_and_bias_extremes():
    records = generate_synthetic(SyntheticSpec(num_static_branches=3, bias_per_branch=[1.0, 0.0, 1.0],
                                               total_records=3000, rng_seed=1))
    assert {record.pc for record in records} == {synthetic_pc(0), synthetic_pc(1), synthetic_pc(2)}
    for record in records:
        assert record.taken == (record.pc != synthetic_pc(1))


def test_round_robin_and_pattern_branch():
    spec = SyntheticSpec(num_static_branches=2, bias_per_branch=[1.0, 0.5], total_records=12,
                         round_robin=True, pattern_branches=[PatternBranch(index=1, pattern="TTN")])
    records = generate_synthetic(spec)
    assert [record.pc for record in records] == [synthetic_pc(i % 2) for i in range(12)]
    assert [record.taken for record in records[1::2]] == [True, True, False, True, True, False]


def test_bias_length_mismatch_names_field():
    with pytest.raises(ValidationError) as exc:
        SyntheticSpec(num_static_branches=3, bias_per_branch=[0.5, 0.5], total_records=10)
    assert "bias_per_branch" in str(exc.value)


def test_write_synthetic_writes_sidecar(tmp_path):
    entry = SyntheticTraceEntry(trace_id="s1", source_tag="web", spec=SyntheticSpec.uniform(4, 0.9, 100))
    path = write_synthetic(entry, tmp_path)
    assert path.name == "s1.bwt"
    assert read_meta_sidecar(path) == TraceMeta(trace_id="s1", record_count=100, source_tag="web")
    meta, records = load_records(path)
    assert meta.record_count == len(records) == 100


def test_standard_corpus_shape():
    corpus = standard_synthetic_corpus(seed=0, records_per_trace=1000)
    size_sweep = [entry for entry in corpus if entry.source_tag == "size-sweep"]
    pred_sweep = [entry for entry in corpus if entry.source_tag == "pred-sweep"]
    assert len(size_sweep) >= 30
    assert len(pred_sweep) >= 35
    assert all(entry.spec.bias_per_branch[0] == 0.98 for entry in size_sweep)
    counts = [entry.spec.num_static_branches for entry in size_sweep]
    assert counts == sorted(counts)
    biases = [entry.spec.bias_per_branch[0] for entry in pred_sweep]
    assert biases[0] == pytest.approx(0.55)
    assert biases[-1] == pytest.approx(1.0)
    assert len({entry.trace_id for entry in corpus}) == len(corpus)
