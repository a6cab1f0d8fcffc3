"""
Predictors Module

Reference branch predictors (Smith, gshare, hashed perceptron, TAGE) and
the trace replay loop producing MPKB plus a per-record prediction stream.
"""
import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Iterable, List, Tuple, Union

from src.history import GlobalHistory, LocalHistoryTable, update
from src.models import (PREDICTOR_CONFIG_ADAPTER, BranchRecord, PredictorConfig,
                        PredictorKind, PredictorResult)

from .base import BranchPredictor
from .gshare import GsharePredictor
from .perceptron import PerceptronPredictor
from .smith import SmithPredictor
from .tage import TagePredictor

logger = logging.getLogger(__name__)

PREDICTOR_CLASSES = {
    PredictorKind.SMITH: SmithPredictor,
    PredictorKind.GSHARE: GsharePredictor,
    PredictorKind.PERCEPTRON: PerceptronPredictor,
    PredictorKind.TAGE: TagePredictor,
}


def build_predictor(config: PredictorConfig) -> BranchPredictor:
    """Instantiate a freshly initialised predictor for a config"""
    return PREDICTOR_CLASSES[PredictorKind(config.kind)](config)


def load_predictor_config(path: Union[str, Path]) -> PredictorConfig:
    """Read a predictor config from a .json or .toml key-value file"""
    path = Path(path)
    if path.suffix.lower() == ".toml":
        data = tomllib.loads(path.read_text())
    else:
        data = json.loads(path.read_text())
    return PREDICTOR_CONFIG_ADAPTER.validate_python(data)


def run_predictor(records: Iterable[BranchRecord], config: PredictorConfig,
                  trace_id: str = "") -> Tuple[PredictorResult, List[bool]]:
    """
    Replay a trace through one predictor.

    Args:
        records: Branch records in trace order
        config: Predictor configuration
        trace_id: Identifier copied into the result

    Returns:
        Tuple of (PredictorResult, per-record predictions aligned with records)
    """
    predictor = build_predictor(config)
    gh, lht = GlobalHistory(), LocalHistoryTable()
    predictions: List[bool] = []
    mispredicts = 0
    for pc, taken in records:
        taken = bool(taken)
        prediction = predictor.predict(pc, gh, lht)
        predictor.train(pc, gh, lht, taken, prediction)
        update(gh, lht, pc, taken)
        predictions.append(prediction)
        if prediction != taken:
            mispredicts += 1
    result = PredictorResult.from_counts(trace_id, config.label, config.kind, len(predictions), mispredicts)
    logger.debug("%s on %s: %.3f MPKB", config.label, trace_id, result.mpkb)
    return result, predictions


__all__ = [
    "BranchPredictor",
    "GsharePredictor",
    "PerceptronPredictor",
    "SmithPredictor",
    "TagePredictor",
    "build_predictor",
    "load_predictor_config",
    "run_predictor",
]
