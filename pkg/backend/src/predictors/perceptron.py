"""
Hashed Perceptron Predictor Module

Features: a per-PC bias weight, per-PC weights over the local history, and
one feature table per global history segment. A segment's weight row is
selected by hashing the PC with that segment's bits; inside the row each
history bit has its own weight (inputs are +1 for taken, -1 for not taken).
The prediction is taken when the weight sum is positive.
"""
from typing import List, Optional, Tuple

from src.history import GlobalHistory, LocalHistoryTable
from src.models import PerceptronConfig

from .base import BranchPredictor, fold_history, pc_bits, saturate

# Odd multiplier keeping segment tables from sharing row layouts
_SEGMENT_SALT = 0x9E3779B1


def _segments(global_history: int, feature_tables: int) -> List[Tuple[int, int]]:
    """(start bit, length) of each global history segment, newest segment first"""
    if global_history == 0:
        return []
    edges = [round(i * global_history / feature_tables) for i in range(feature_tables + 1)]
    return [(start, end - start) for start, end in zip(edges, edges[1:]) if end > start]


class PerceptronPredictor(BranchPredictor):

    def __init__(self, config: PerceptronConfig):
        super().__init__(config)
        rows = 1 << config.index_bits
        self._index_bits = config.index_bits
        self._mask = rows - 1
        self._local_length = config.local_history
        self._segments = _segments(config.global_history, config.feature_tables)
        self._weight_max = (1 << (config.weight_bits - 1)) - 1
        self._weight_min = -(1 << (config.weight_bits - 1))
        self.threshold = config.training_threshold

        self.bias = [0] * rows
        self.local_weights = [[0] * config.local_history for _ in range(rows)]
        self.segment_weights = [[[0] * length for _ in range(rows)] for _, length in self._segments]
        self._cached: Optional[tuple] = None

    def _rows(self, pc: int, gh: GlobalHistory) -> Tuple[int, List[int]]:
        base = pc_bits(pc)
        segment_rows = []
        for number, (start, length) in enumerate(self._segments):
            bits = (gh.bits >> start) & ((1 << length) - 1)
            salt = (number * _SEGMENT_SALT) & self._mask
            segment_rows.append((base ^ fold_history(bits, length, self._index_bits) ^ salt) & self._mask)
        return base & self._mask, segment_rows

    def _evaluate(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable):
        key = (pc, gh.bits, lht.registers.get(pc, 0))
        if self._cached is not None and self._cached[0] == key:
            return self._cached[1]

        row, segment_rows = self._rows(pc, gh)
        local = lht.extract(pc, self._local_length)
        total = self.bias[row]
        for bit, weight in enumerate(self.local_weights[row]):
            total += weight if (local >> bit) & 1 else -weight
        for (start, length), table, segment_row in zip(self._segments, self.segment_weights, segment_rows):
            bits = gh.bits >> start
            for bit, weight in enumerate(table[segment_row]):
                total += weight if (bits >> bit) & 1 else -weight

        result = (total, row, segment_rows, local)
        self._cached = (key, result)
        return result

    def output(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable) -> int:
        return self._evaluate(pc, gh, lht)[0]

    def predict(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable) -> bool:
        return self.output(pc, gh, lht) > 0

    def train(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable,
              taken: bool, prediction: bool) -> None:
        total, row, segment_rows, local = self._evaluate(pc, gh, lht)
        if (total > 0) == taken and abs(total) > self.threshold:
            return
        self._cached = None
        direction = 1 if taken else -1
        low, high = self._weight_min, self._weight_max

        self.bias[row] = saturate(self.bias[row] + direction, low, high)
        weights = self.local_weights[row]
        for bit in range(len(weights)):
            agree = direction if (local >> bit) & 1 else -direction
            weights[bit] = saturate(weights[bit] + agree, low, high)
        for (start, _), table, segment_row in zip(self._segments, self.segment_weights, segment_rows):
            bits = gh.bits >> start
            weights = table[segment_row]
            for bit in range(len(weights)):
                agree = direction if (bits >> bit) & 1 else -direction
                weights[bit] = saturate(weights[bit] + agree, low, high)
