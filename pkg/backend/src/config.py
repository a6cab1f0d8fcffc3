"""
Configuration Module
Central configuration settings for the branch working set toolkit
"""
import logging
import os
from typing import Optional

from src.errors import ConfigurationError

# Working set threshold and history grids
DEFAULT_THETA = 0.95  # Cumulative occurrence fraction covered by the BWSET
GLOBAL_HISTORY_LENGTHS = (8, 16, 24, 32, 48, 64)  # Global tuple sweep
GLOBAL_LOCAL_HISTORY_LENGTHS = (8, 16, 24, 32)    # Global part of global-local tuples
LOCAL_HISTORY_LENGTHS = (4, 8, 16, 24)

GLOBAL_HISTORY_MAX = 64
LOCAL_HISTORY_MAX = 24

# Trace format
TRACE_MAGIC = b"BWTRACE1"
TRACE_HEADER_SIZE = 16  # magic + little-endian record count
TRACE_RECORD_SIZE = 9   # little-endian pc + outcome byte
TRACE_SUFFIX = ".bwt"
READ_CHUNK_RECORDS = 1 << 16

# Synthetic workloads
SYNTHETIC_PC_BASE = 0x10000
SYNTHETIC_PC_STRIDE = 4
STANDARD_CORPUS_RECORDS = 30_000
STANDARD_SIZE_SWEEP_TRACES = 30
STANDARD_SIZE_SWEEP_BIAS = 0.98
STANDARD_PRED_SWEEP_TRACES = 35
STANDARD_PRED_SWEEP_BRANCHES = 16

# Predictor defaults (desk scale)
PC_SHIFT = 2  # Word-aligned PCs carry no information in the two low bits
SMITH_INDEX_BITS = 12
GSHARE_INDEX_BITS = 14
GSHARE_HISTORY_BITS = 14
PERCEPTRON_INDEX_BITS = 10
PERCEPTRON_GLOBAL_HISTORY = 32
PERCEPTRON_LOCAL_HISTORY = 8
PERCEPTRON_WEIGHT_BITS = 8
PERCEPTRON_FEATURE_TABLES = 4
TAGE_BASE_INDEX_BITS = 13
TAGE_TAGGED_TABLES = 6
TAGE_TAGGED_INDEX_BITS = 10
TAGE_MIN_HISTORY = 8
TAGE_MAX_HISTORY = 64
TAGE_TAG_BITS = 10
TAGE_COUNTER_BITS = 3
TAGE_USEFUL_BITS = 2
TAGE_U_RESET_PERIOD = 1 << 18

# Service
DEFAULT_STORE_PATH = os.path.join(os.path.dirname(os.path.dirname(__file__)), "trace_store")

LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"


def get_thread_count(requested: Optional[int] = None) -> int:
    """Parallelism degree: BWSET_THREADS wins, then the request, then the core count"""
    env_value = os.environ.get("BWSET_THREADS", "").strip()
    if env_value:
        try:
            threads = int(env_value)
        except ValueError:
            threads = 0
        if threads < 1:
            raise ConfigurationError(f"BWSET_THREADS must be a positive integer, got {env_value!r}")
        return threads
    if requested:
        return max(1, requested)
    return os.cpu_count() or 1


def get_store_path() -> str:
    """Root directory of the service trace store"""
    return os.environ.get("BWSET_STORE_PATH", DEFAULT_STORE_PATH)


def configure_logging() -> None:
    """Configure root logging once for CLI and service entry points"""
    level = os.environ.get("BWSET_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)
