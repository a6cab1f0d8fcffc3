"""
Trace Store Module
Directory-backed persistent storage of branch traces for the HTTP service
"""
import logging
import os
import re
import tempfile
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from src import config
from src.errors import ConfigurationError
from src.models import BranchRecord, TraceMeta
from src.trace_io import (load_records, read_csv_trace, read_meta_sidecar, read_trace_array,
                          write_meta_sidecar, write_trace, write_trace_array)

logger = logging.getLogger(__name__)

TRACES_SUBDIR = "traces"
_TRACE_ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")


def setup_store(store_path: Optional[str] = None) -> Path:
    """
    Initialize the on-disk trace store.

    Args:
        store_path: Root directory; defaults to BWSET_STORE_PATH or backend/trace_store

    Returns:
        Path of the traces directory
    """
    root = Path(store_path or config.get_store_path())
    traces_dir = root / TRACES_SUBDIR
    traces_dir.mkdir(parents=True, exist_ok=True)
    return traces_dir


class TraceStore:
    def __init__(self, store_path: Optional[str] = None):
        self.traces_dir = setup_store(store_path)

    def _trace_path(self, trace_id: str) -> Path:
        if not _TRACE_ID_PATTERN.match(trace_id):
            raise ConfigurationError(f"invalid trace id {trace_id!r}")
        return self.traces_dir / f"{trace_id}{config.TRACE_SUFFIX}"

    def _claim(self, trace_id: str) -> Path:
        path = self._trace_path(trace_id)
        if path.exists():
            raise ConfigurationError(f"trace {trace_id!r} already stored")
        return path

    def add_records(self, records: Sequence[BranchRecord], meta: TraceMeta) -> TraceMeta:
        """Store an in-memory trace under meta.trace_id"""
        path = self._claim(meta.trace_id)
        meta = meta.model_copy(update={"record_count": len(records)})
        write_trace(records, meta, path)
        write_meta_sidecar(meta, path)
        logger.info("Stored trace %s (%d records)", meta.trace_id, meta.record_count)
        return meta

    def add_file(self, filename: str, content: bytes, source_tag: str = "") -> TraceMeta:
        """
        Store an uploaded .bwt or .csv trace.

        The content is parsed before anything is kept, so malformed uploads leave
        the store untouched. The trace id is the file stem.
        """
        suffix = Path(filename).suffix.lower()
        if suffix not in (config.TRACE_SUFFIX, ".csv"):
            raise ConfigurationError(f"unsupported trace file type {suffix!r}, use .bwt or .csv")
        trace_id = Path(filename).stem
        path = self._claim(trace_id)

        fd, tmp_name = tempfile.mkstemp(suffix=".part", dir=self.traces_dir)
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(content)
            if suffix == ".csv":
                records = read_csv_trace(tmp_name)
                meta = TraceMeta(trace_id=trace_id, record_count=len(records), source_tag=source_tag)
                write_trace(records, meta, path)
            else:
                body = read_trace_array(tmp_name)
                meta = TraceMeta(trace_id=trace_id, record_count=len(body), source_tag=source_tag)
                write_trace_array(body, path)
        finally:
            os.unlink(tmp_name)
        write_meta_sidecar(meta, path)
        logger.info("Stored uploaded trace %s from %s (%d records)", trace_id, filename, meta.record_count)
        return meta

    def get(self, trace_id: str) -> Tuple[TraceMeta, List[BranchRecord]]:
        path = self._trace_path(trace_id)
        if not path.exists():
            raise KeyError(trace_id)
        sidecar = read_meta_sidecar(path)
        return load_records(path, trace_id=trace_id, source_tag=sidecar.source_tag if sidecar else "")

    def list_traces(self) -> List[Dict]:
        traces = []
        for path in sorted(self.traces_dir.glob(f"*{config.TRACE_SUFFIX}")):
            meta = read_meta_sidecar(path) or TraceMeta(trace_id=path.stem)
            traces.append(meta.model_dump(mode="json"))
        return traces

    def delete(self, trace_id: str) -> None:
        path = self._trace_path(trace_id)
        if not path.exists():
            raise KeyError(trace_id)
        path.unlink()
        path.with_suffix(".json").unlink(missing_ok=True)
        logger.info("Deleted trace %s", trace_id)

    def clear(self) -> int:
        """Remove every stored trace; returns how many were removed"""
        removed = 0
        for path in self.traces_dir.glob(f"*{config.TRACE_SUFFIX}"):
            path.unlink()
            path.with_suffix(".json").unlink(missing_ok=True)
            removed += 1
        logger.info("Cleared %d traces", removed)
        return removed
