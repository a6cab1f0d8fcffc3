"""
TAGE Predictor Module

Bimodal base predictor plus tagged tables indexed with geometrically
increasing global history lengths. The longest matching tagged table
provides the prediction; without a match the base prediction is used.
"""
from typing import List, NamedTuple, Optional

from src.history import GlobalHistory, LocalHistoryTable
from src.models import TageConfig

from .base import (STRONGLY_NOT_TAKEN, STRONGLY_TAKEN, WEAKLY_NOT_TAKEN, WEAKLY_TAKEN,
                   BranchPredictor, fold_history, pc_bits, saturate, step_counter)

_INVALID_TAG = -1


class TageLookup(NamedTuple):
    base_index: int
    indices: List[int]
    tags: List[int]
    provider: Optional[int]   # tagged table number, None for the base predictor
    alternate: Optional[int]  # next shorter matching table, None for the base predictor
    provider_prediction: bool
    alternate_prediction: bool
    prediction: bool
    used_alternate: bool


class TagePredictor(BranchPredictor):

    def __init__(self, config: TageConfig):
        super().__init__(config)
        self.history_lengths = config.history_lengths
        self._base_mask = (1 << config.base_index_bits) - 1
        self._index_bits = config.tagged_index_bits
        self._index_mask = (1 << config.tagged_index_bits) - 1
        self._tag_bits = config.tag_bits
        self._tag_mask = (1 << config.tag_bits) - 1
        self._ctr_max = (1 << (config.counter_bits - 1)) - 1
        self._ctr_min = -(1 << (config.counter_bits - 1))
        self._u_max = (1 << config.useful_bits) - 1
        self._u_reset_period = config.u_reset_period

        entries = 1 << config.tagged_index_bits
        self.base = [WEAKLY_NOT_TAKEN] * (1 << config.base_index_bits)
        self.counters = [[0] * entries for _ in self.history_lengths]
        self.tags = [[_INVALID_TAG] * entries for _ in self.history_lengths]
        self.useful = [[0] * entries for _ in self.history_lengths]

        self.allocations = 0
        self.trained = 0
        self._cached: Optional[tuple] = None

    def _table_hashes(self, pc: int, history: int):
        word = pc_bits(pc)
        indices, tags = [], []
        for length in self.history_lengths:
            indices.append((word ^ (word >> self._index_bits)
                            ^ fold_history(history, length, self._index_bits)) & self._index_mask)
            tags.append((word ^ fold_history(history, length, self._tag_bits)
                         ^ (fold_history(history, length, self._tag_bits - 1) << 1)) & self._tag_mask)
        return indices, tags

    def lookup(self, pc: int, gh: GlobalHistory) -> TageLookup:
        key = (pc, gh.bits)
        if self._cached is not None and self._cached[0] == key:
            return self._cached[1]

        base_index = pc_bits(pc) & self._base_mask
        base_prediction = self.base[base_index] >= WEAKLY_TAKEN
        indices, tags = self._table_hashes(pc, gh.bits)

        matches = [table for table in range(len(self.history_lengths) - 1, -1, -1)
                   if self.tags[table][indices[table]] == tags[table]]
        provider = matches[0] if matches else None
        alternate = matches[1] if len(matches) > 1 else None

        alternate_prediction = (base_prediction if alternate is None
                                else self.counters[alternate][indices[alternate]] >= 0)
        if provider is None:
            provider_prediction = base_prediction
            used_alternate = False
        else:
            counter = self.counters[provider][indices[provider]]
            provider_prediction = counter >= 0
            # Newly allocated entries (weak, not yet useful) defer to the alternate
            used_alternate = counter in (0, -1) and self.useful[provider][indices[provider]] == 0

        result = TageLookup(
            base_index=base_index,
            indices=indices,
            tags=tags,
            provider=provider,
            alternate=alternate,
            provider_prediction=provider_prediction,
            alternate_prediction=alternate_prediction,
            prediction=alternate_prediction if used_alternate else provider_prediction,
            used_alternate=used_alternate,
        )
        self._cached = (key, result)
        return result

    def predict(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable) -> bool:
        return self.lookup(pc, gh).prediction

    def _update_counter(self, table: int, index: int, taken: bool) -> None:
        self.counters[table][index] = step_counter(self.counters[table][index], taken,
                                                   self._ctr_min, self._ctr_max)

    def _update_base(self, index: int, taken: bool) -> None:
        self.base[index] = step_counter(self.base[index], taken, STRONGLY_NOT_TAKEN, STRONGLY_TAKEN)

    def train(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable,
              taken: bool, prediction: bool) -> None:
        look = self.lookup(pc, gh)
        self._cached = None

        if look.provider is None:
            self._update_base(look.base_index, taken)
        else:
            provider_index = look.indices[look.provider]
            if look.used_alternate:
                if look.alternate is None:
                    self._update_base(look.base_index, taken)
                else:
                    self._update_counter(look.alternate, look.indices[look.alternate], taken)
            if look.provider_prediction != look.alternate_prediction:
                usefulness = self.useful[look.provider][provider_index]
                usefulness += 1 if look.provider_prediction == taken else -1
                self.useful[look.provider][provider_index] = saturate(usefulness, 0, self._u_max)
            self._update_counter(look.provider, provider_index, taken)

        if prediction != taken:
            self._allocate(look, taken)

        self.trained += 1
        if self.trained % self._u_reset_period == 0:
            self._age_usefulness()

    def _allocate(self, look: TageLookup, taken: bool) -> None:
        """Claim an entry in a longer-history table, or age the candidates"""
        first = 0 if look.provider is None else look.provider + 1
        candidates = range(first, len(self.history_lengths))
        for table in candidates:
            index = look.indices[table]
            if self.useful[table][index] == 0:
                self.tags[table][index] = look.tags[table]
                self.counters[table][index] = 0 if taken else -1
                self.allocations += 1
                return
        for table in candidates:
            index = look.indices[table]
            self.useful[table][index] = max(0, self.useful[table][index] - 1)

    def _age_usefulness(self) -> None:
        for table in self.useful:
            for index, usefulness in enumerate(table):
                if usefulness:
                    table[index] = usefulness >> 1
