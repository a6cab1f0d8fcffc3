"""
Predictor Base Module
Common interface and counter helpers for the reference branch predictors
"""
from abc import ABC, abstractmethod

from src.config import PC_SHIFT
from src.history import GlobalHistory, LocalHistoryTable

# 2-bit saturating counter states
STRONGLY_NOT_TAKEN = 0
WEAKLY_NOT_TAKEN = 1
WEAKLY_TAKEN = 2
STRONGLY_TAKEN = 3


def saturate(value: int, low: int, high: int) -> int:
    return low if value < low else high if value > high else value


def step_counter(value: int, taken: bool, low: int, high: int) -> int:
    """Move a saturating counter one step toward the outcome"""
    return saturate(value + (1 if taken else -1), low, high)


def pc_bits(pc: int) -> int:
    return pc >> PC_SHIFT


def fold_history(bits: int, length: int, width: int) -> int:
    """XOR-fold the low `length` bits of a history into `width` bits"""
    if width <= 0:
        return 0
    bits &= (1 << length) - 1
    mask = (1 << width) - 1
    folded = 0
    while bits:
        folded ^= bits & mask
        bits >>= width
    return folded


class BranchPredictor(ABC):
    """
    Conditional branch direction predictor.

    Histories are owned by the caller and advanced after `train`; the
    predictor only reads them.
    """

    def __init__(self, config):
        self.config = config

    @property
    def label(self) -> str:
        return self.config.label

    @abstractmethod
    def predict(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable) -> bool:
        """Direction prediction; must not change predictor state"""

    @abstractmethod
    def train(self, pc: int, gh: GlobalHistory, lht: LocalHistoryTable,
              taken: bool, prediction: bool) -> None:
        """Update with the resolved outcome of the branch just predicted"""
