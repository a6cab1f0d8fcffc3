"""
Smith Predictor Module
Table of 2-bit saturating counters indexed by PC
"""
from src.history import GlobalHistory, LocalHistoryTable
from src.models import SmithConfig

from .base import (STRONGLY_NOT_TAKEN, STRONGLY_TAKEN, WEAKLY_NOT_TAKEN, WEAKLY_TAKEN,
                   BranchPredictor, pc_bits, step_counter)


class SmithPredictor(BranchPredictor):

    def __init__(self, config: SmithConfig):
        super().__init__(config)
        self._mask = (1 << config.index_bits) - 1
        self.counters = [WEAKLY_NOT_TAKEN] * (1 << config.index_bits)

    def index(self, pc: int) -> int:
        return pc_bits(pc) & self._mask

    def predict(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable) -> bool:
        return self.counters[self.index(pc)] >= WEAKLY_TAKEN

    def train(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable,
              taken: bool, prediction: bool) -> None:
        idx = self.index(pc)
        self.counters[idx] = step_counter(self.counters[idx], taken, STRONGLY_NOT_TAKEN, STRONGLY_TAKEN)
