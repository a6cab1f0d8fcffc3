"""
Gshare Predictor Module
2-bit counters indexed by PC XOR global history
"""
from src.history import GlobalHistory, LocalHistoryTable
from src.models import GshareConfig

from .base import (STRONGLY_NOT_TAKEN, STRONGLY_TAKEN, WEAKLY_NOT_TAKEN, WEAKLY_TAKEN,
                   BranchPredictor, fold_history, pc_bits, step_counter)


class GsharePredictor(BranchPredictor):

    def __init__(self, config: GshareConfig):
        super().__init__(config)
        self._index_bits = config.index_bits
        self._history_bits = config.history_bits
        self._mask = (1 << config.index_bits) - 1
        self.counters = [WEAKLY_NOT_TAKEN] * (1 << config.index_bits)

    def index(self, pc: int, gh: GlobalHistory) -> int:
        # Histories longer than the index are folded down to index width
        history = fold_history(gh.bits, self._history_bits, self._index_bits)
        return (pc_bits(pc) ^ history) & self._mask

    def predict(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable) -> bool:
        return self.counters[self.index(pc, gh)] >= WEAKLY_TAKEN

    def train(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable,
              taken: bool, prediction: bool) -> None:
        idx = self.index(pc, gh)
        self.counters[idx] = step_counter(self.counters[idx], taken, STRONGLY_NOT_TAKEN, STRONGLY_TAKEN)
