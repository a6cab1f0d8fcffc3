"""
Trace I/O Module
Reads and writes the fixed-width BWT1 branch trace format, imports CSV traces,
and generates synthetic traces with controllable branch population and bias
"""
import json
import logging
import os
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src import config
from src.errors import TraceFormatError, TraceTruncatedError
from src.models import BranchRecord, SyntheticSpec, SyntheticTraceEntry, TraceMeta

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

# Packed little-endian record: 8-byte pc + 1-byte outcome
RECORD_DTYPE = np.dtype([("pc", "<u8"), ("taken", "u1")])
COUNT_DTYPE = np.dtype("<u8")


def _read_header(handle, path: PathLike) -> int:
    """Validate the magic and return the declared record count"""
    magic = handle.read(len(config.TRACE_MAGIC))
    if len(magic) < len(config.TRACE_MAGIC) or magic != config.TRACE_MAGIC:
        offset = next((i for i, (a, b) in enumerate(zip(magic, config.TRACE_MAGIC)) if a != b), len(magic))
        raise TraceFormatError(f"{path}: missing BWTRACE1 magic", offset=offset)
    raw_count = handle.read(COUNT_DTYPE.itemsize)
    if len(raw_count) < COUNT_DTYPE.itemsize:
        raise TraceFormatError(f"{path}: header ends before record count", offset=len(magic) + len(raw_count))
    return int(np.frombuffer(raw_count, dtype=COUNT_DTYPE)[0])


def _iter_chunks(handle, declared: int, path: PathLike) -> Iterator[np.ndarray]:
    remaining = declared
    records_read = 0
    while remaining:
        want = min(remaining, config.READ_CHUNK_RECORDS)
        raw = handle.read(want * RECORD_DTYPE.itemsize)
        complete = len(raw) // RECORD_DTYPE.itemsize
        if complete:
            chunk = np.frombuffer(raw[: complete * RECORD_DTYPE.itemsize], dtype=RECORD_DTYPE)
            if chunk["taken"].max() > 1:
                bad = int(np.flatnonzero(chunk["taken"] > 1)[0])
                offset = config.TRACE_HEADER_SIZE + (records_read + bad) * RECORD_DTYPE.itemsize + 8
                raise TraceFormatError(f"{path}: outcome byte must be 0 or 1", offset=offset)
            records_read += complete
            remaining -= complete
            yield chunk
        if complete < want:
            raise TraceTruncatedError(records_read=records_read, expected=declared)
    if handle.read(1):
        raise TraceFormatError(f"{path}: trailing bytes after the {declared} declared records",
                               offset=config.TRACE_HEADER_SIZE + declared * RECORD_DTYPE.itemsize)


def read_trace(path: PathLike, trace_id: Optional[str] = None,
               source_tag: str = "") -> Tuple[TraceMeta, Iterator[BranchRecord]]:
    """
    Open a BWT1 trace and stream its records in file order.

    The header is validated eagerly; truncation and trailing bytes are
    reported when the stream reaches them. The file is held open only while
    the stream is being consumed.

    Returns:
        Tuple of (TraceMeta, iterator of BranchRecord)
    """
    path = Path(path)
    with open(path, "rb") as handle:
        declared = _read_header(handle, path)
    meta = TraceMeta(trace_id=trace_id or path.stem, record_count=declared, source_tag=source_tag)

    def records() -> Iterator[BranchRecord]:
        with open(path, "rb") as body:
            body.seek(config.TRACE_HEADER_SIZE)
            for chunk in _iter_chunks(body, declared, path):
                for pc, taken in zip(chunk["pc"].tolist(), chunk["taken"].tolist()):
                    yield BranchRecord(pc, bool(taken))

    return meta, records()


def read_trace_array(path: PathLike) -> np.ndarray:
    """Load a whole BWT1 trace as a structured (pc, taken) array"""
    with open(path, "rb") as handle:
        declared = _read_header(handle, path)
        chunks = list(_iter_chunks(handle, declared, path))
    if not chunks:
        return np.zeros(0, dtype=RECORD_DTYPE)
    return np.concatenate(chunks)


def load_records(path: PathLike, trace_id: Optional[str] = None,
                 source_tag: str = "") -> Tuple[TraceMeta, List[BranchRecord]]:
    """Read a .bwt or .csv trace fully into memory"""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        records = read_csv_trace(path)
        meta = TraceMeta(trace_id=trace_id or path.stem, record_count=len(records), source_tag=source_tag)
        return meta, records
    array = read_trace_array(path)
    records = records_from_arrays(array["pc"], array["taken"])
    meta = TraceMeta(trace_id=trace_id or path.stem, record_count=len(records), source_tag=source_tag)
    return meta, records


def records_from_arrays(pcs: np.ndarray, outcomes: np.ndarray) -> List[BranchRecord]:
    return [BranchRecord(pc, bool(taken)) for pc, taken in zip(pcs.tolist(), outcomes.tolist())]


def write_trace(records: Sequence[BranchRecord], meta: TraceMeta, path: PathLike) -> None:
    """
    Write records in the BWT1 format.

    Args:
        records: Branch records in trace order
        meta: Trace metadata; record_count must match len(records)
        path: Destination file
    """
    if meta.record_count != len(records):
        raise ValueError(f"meta.record_count={meta.record_count} but {len(records)} records given")
    body = np.zeros(len(records), dtype=RECORD_DTYPE)
    if len(records):
        body["pc"] = np.fromiter((record.pc for record in records), dtype=np.uint64, count=len(records))
        body["taken"] = np.fromiter((record.taken for record in records), dtype=np.uint8, count=len(records))
    write_trace_array(body, path)


def write_trace_array(body: np.ndarray, path: PathLike) -> None:
    with open(path, "wb") as handle:
        handle.write(config.TRACE_MAGIC)
        handle.write(np.array([len(body)], dtype=COUNT_DTYPE).tobytes())
        handle.write(body.astype(RECORD_DTYPE, copy=False).tobytes())


def write_meta_sidecar(meta: TraceMeta, trace_path: PathLike) -> Path:
    """Store trace_id and source_tag next to the trace (the binary header only holds the count)"""
    sidecar = Path(trace_path).with_suffix(".json")
    sidecar.write_text(json.dumps(meta.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
    return sidecar


def read_meta_sidecar(trace_path: PathLike) -> Optional[TraceMeta]:
    sidecar = Path(trace_path).with_suffix(".json")
    if not sidecar.exists():
        return None
    return TraceMeta.model_validate_json(sidecar.read_text())


def read_csv_trace(path: PathLike) -> List[BranchRecord]:
    """
    Import a hand-written trace: header `pc,taken`, pc in hex with 0x prefix, taken in {0, 1}.
    """
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise TraceFormatError(f"{path}: unreadable CSV trace: {e}") from e
    if list(frame.columns) != ["pc", "taken"]:
        raise TraceFormatError(f"{path}: CSV header must be 'pc,taken', got {','.join(frame.columns)}")
    records = []
    for row_number, (pc_text, taken_text) in enumerate(zip(frame["pc"], frame["taken"]), start=2):
        pc_text, taken_text = str(pc_text).strip(), str(taken_text).strip()
        if not pc_text.lower().startswith("0x") or taken_text not in ("0", "1"):
            raise TraceFormatError(f"{path}: malformed row {row_number}: {pc_text},{taken_text}")
        records.append(BranchRecord(int(pc_text, 16), taken_text == "1"))
    return records


def synthetic_pc(index: int) -> int:
    return config.SYNTHETIC_PC_BASE + config.SYNTHETIC_PC_STRIDE * index


def generate_synthetic_arrays(spec: SyntheticSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised generation: returns (pcs as uint64, outcomes as uint8)"""
    rng = np.random.default_rng(spec.rng_seed)
    total = spec.total_records
    if spec.round_robin:
        choices = np.arange(total, dtype=np.int64) % spec.num_static_branches
    else:
        choices = rng.integers(0, spec.num_static_branches, size=total)
    draws = rng.random(total)
    bias = np.asarray(spec.bias_per_branch, dtype=np.float64)
    outcomes = (draws < bias[choices]).astype(np.uint8)
    for branch in spec.pattern_branches:
        positions = np.flatnonzero(choices == branch.index)
        pattern = np.asarray(branch.outcomes(), dtype=np.uint8)
        outcomes[positions] = pattern[np.arange(len(positions)) % len(pattern)]
    pcs = (config.SYNTHETIC_PC_BASE + config.SYNTHETIC_PC_STRIDE * choices).astype(np.uint64)
    return pcs, outcomes


def generate_synthetic(spec: SyntheticSpec) -> List[BranchRecord]:
    """
    Generate a synthetic trace.

    Each record picks its static branch uniformly at random (or round-robin),
    biased branches draw independent Bernoulli(bias) outcomes and pattern
    branches replay their pattern cyclically. Deterministic for a fixed rng_seed.
    """
    pcs, outcomes = generate_synthetic_arrays(spec)
    return records_from_arrays(pcs, outcomes)


def write_synthetic(entry: SyntheticTraceEntry, out_dir: PathLike) -> Path:
    """Generate one synthetic entry into <out_dir>/<trace_id>.bwt plus its sidecar"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pcs, outcomes = generate_synthetic_arrays(entry.spec)
    body = np.zeros(len(pcs), dtype=RECORD_DTYPE)
    body["pc"], body["taken"] = pcs, outcomes
    path = out_dir / f"{entry.trace_id}{config.TRACE_SUFFIX}"
    write_trace_array(body, path)
    write_meta_sidecar(TraceMeta(trace_id=entry.trace_id, record_count=len(body),
                                 source_tag=entry.source_tag), path)
    logger.info("Generated %s (%d records)", path, len(body))
    return path


def standard_synthetic_corpus(seed: int = 0,
                              records_per_trace: int = config.STANDARD_CORPUS_RECORDS) -> List[SyntheticTraceEntry]:
    """
    Standard sweep corpus.

    size-sweep: static branch counts spaced geometrically from 2 to records_per_trace,
    every branch biased at 0.98.
    pred-sweep: a fixed branch population with bias swept from 0.55 to 1.0.
    """
    corpus = []
    counts = np.geomspace(2, records_per_trace, config.STANDARD_SIZE_SWEEP_TRACES)
    for i, count in enumerate(counts):
        corpus.append(SyntheticTraceEntry(
            trace_id=f"size_{i:02d}",
            source_tag="size-sweep",
            spec=SyntheticSpec.uniform(int(round(count)), config.STANDARD_SIZE_SWEEP_BIAS,
                                       records_per_trace, rng_seed=seed + i),
        ))
    biases = np.linspace(0.55, 1.0, config.STANDARD_PRED_SWEEP_TRACES)
    for i, bias in enumerate(biases):
        corpus.append(SyntheticTraceEntry(
            trace_id=f"pred_{i:02d}",
            source_tag="pred-sweep",
            spec=SyntheticSpec.uniform(config.STANDARD_PRED_SWEEP_BRANCHES, round(float(bias), 6),
                                       records_per_trace, rng_seed=seed + 1000 + i),
        ))
    return corpus
