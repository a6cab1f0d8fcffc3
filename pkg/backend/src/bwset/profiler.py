"""
Profiler Module
Single-pass tuple profiling: per branch context occurrence, taken and misprediction counters
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from src.errors import AlignmentError
from src.history import GlobalHistory, LocalHistoryTable, snapshot, update
from src.models import BranchRecord, ProfileConfig, TupleKey, TupleStats

logger = logging.getLogger(__name__)

_MISSING = object()

PROFILE_DUMP_COLUMNS = ["pc", "global_bits", "local_bits", "occurrence", "taken", "mispredict"]


@dataclass
class ProfileRun:
    """Profiled tuple table of one (trace, config) pair"""
    config: ProfileConfig
    table: Dict[TupleKey, TupleStats] = field(default_factory=dict)
    total_occurrences: int = 0
    taken_total: int = 0
    # pc -> True once the pc has produced both outcomes
    dynamic_flags: Dict[int, bool] = field(default_factory=dict)
    transition_count: int = 0
    transition_pairs: int = 0
    predictor: Optional[str] = None

    @property
    def static_branch_count(self) -> int:
        return len(self.dynamic_flags)

    @property
    def distinct_tuples(self) -> int:
        return len(self.table)


class ProfileBuilder:
    """Accumulates one ProfileRun; owns its own history state"""

    def __init__(self, config: ProfileConfig, predictor: Optional[str] = None):
        self.run = ProfileRun(config=config, predictor=predictor)
        self._gh = GlobalHistory()
        self._lht = LocalHistoryTable()
        self._last_outcome: Dict[int, bool] = {}
        self._global_length = config.global_history
        self._local_length = config.local_history

    def observe(self, record: BranchRecord, prediction: Optional[bool] = None) -> None:
        pc, taken = record
        taken = bool(taken)
        run = self.run

        global_bits, local_bits = snapshot(self._gh, self._lht, pc, self._global_length, self._local_length)
        key = TupleKey(pc, global_bits, local_bits)
        stats = run.table.get(key)
        if stats is None:
            stats = run.table[key] = TupleStats()
        stats.occurrence_count += 1
        if taken:
            stats.taken_count += 1
            run.taken_total += 1
        if prediction is not None and bool(prediction) != taken:
            stats.mispredict_count += 1
        run.total_occurrences += 1

        previous = self._last_outcome.get(pc)
        if previous is None:
            run.dynamic_flags[pc] = False
        else:
            run.transition_pairs += 1
            if previous != taken:
                run.transition_count += 1
                run.dynamic_flags[pc] = True
        self._last_outcome[pc] = taken

        update(self._gh, self._lht, pc, taken)


def profile_many(records: Iterable[BranchRecord], configs: Sequence[ProfileConfig],
                 attached_predictions: Optional[Iterable[bool]] = None,
                 predictor: Optional[str] = None) -> List[ProfileRun]:
    """
    Profile several configurations over one shared pass of the record stream.

    Args:
        records: Branch records in trace order
        configs: Profile configurations; each gets independent history state
        attached_predictions: Optional prediction per record, made before its outcome
        predictor: Label of the predictor that produced attached_predictions

    Returns:
        One ProfileRun per config, in config order
    """
    builders = [ProfileBuilder(profile_config, predictor if attached_predictions is not None else None)
                for profile_config in configs]
    predictions = iter(attached_predictions) if attached_predictions is not None else None
    count = 0
    for index, record in enumerate(records):
        prediction = None
        if predictions is not None:
            prediction = next(predictions, _MISSING)
            if prediction is _MISSING:
                raise AlignmentError(index)
        for builder in builders:
            builder.observe(record, prediction)
        count += 1
    if predictions is not None and next(predictions, _MISSING) is not _MISSING:
        raise AlignmentError(count)
    logger.debug("Profiled %d records across %d configs", count, len(builders))
    return [builder.run for builder in builders]


def profile_trace(records: Iterable[BranchRecord], config: ProfileConfig,
                  attached_predictions: Optional[Iterable[bool]] = None,
                  predictor: Optional[str] = None) -> ProfileRun:
    """Build the tuple table of one trace under one configuration"""
    return profile_many(records, [config], attached_predictions, predictor)[0]


def dynamic_static_split(run: ProfileRun) -> Tuple[int, int]:
    """(static_count, dynamic_count): pcs that never change direction vs. pcs that do"""
    dynamic = sum(1 for flag in run.dynamic_flags.values() if flag)
    return run.static_branch_count - dynamic, dynamic


def ranked_tuples(run: ProfileRun) -> List[Tuple[TupleKey, TupleStats]]:
    """Descending occurrence, ties broken by ascending key"""
    return sorted(run.table.items(), key=lambda item: (-item[1].occurrence_count, item[0]))


def dump_profile(run: ProfileRun, path: Union[str, Path]) -> Path:
    """Write the tuple table as CSV (hex pc and history fields)"""
    rows = [
        {
            "pc": f"0x{key.pc:x}",
            "global_bits": f"0x{key.global_bits:x}",
            "local_bits": f"0x{key.local_bits:x}",
            "occurrence": stats.occurrence_count,
            "taken": stats.taken_count,
            "mispredict": stats.mispredict_count,
        }
        for key, stats in ranked_tuples(run)
    ]
    path = Path(path)
    pd.DataFrame(rows, columns=PROFILE_DUMP_COLUMNS).to_csv(path, index=False, lineterminator="\n")
    return path
