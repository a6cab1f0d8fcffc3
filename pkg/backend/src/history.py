"""
History Module
Non-speculative global and per-PC local branch history registers

Bit order: the newest outcome sits in the least-significant bit. Both
registers start all-zero (not-taken).
"""
from typing import Dict, Tuple

from src.config import GLOBAL_HISTORY_MAX, LOCAL_HISTORY_MAX
from src.errors import ConfigurationError

_GLOBAL_MASK = (1 << GLOBAL_HISTORY_MAX) - 1
_LOCAL_MASK = (1 << LOCAL_HISTORY_MAX) - 1


def _check_length(length: int, maximum: int, name: str) -> None:
    if not 0 <= length <= maximum:
        raise ConfigurationError(f"{name} history length {length} outside [0, {maximum}]")


class GlobalHistory:
    """Shift register of the last 64 outcomes, regardless of PC"""

    __slots__ = ("bits",)

    def __init__(self):
        self.bits = 0

    def extract(self, length: int) -> int:
        _check_length(length, GLOBAL_HISTORY_MAX, "global")
        return self.bits & ((1 << length) - 1)

    def push(self, taken: bool) -> None:
        self.bits = ((self.bits << 1) | (1 if taken else 0)) & _GLOBAL_MASK


class LocalHistoryTable:
    """Unbounded per-PC table of 24-bit local history registers"""

    __slots__ = ("registers",)

    def __init__(self):
        self.registers: Dict[int, int] = {}

    def extract(self, pc: int, length: int) -> int:
        _check_length(length, LOCAL_HISTORY_MAX, "local")
        return self.registers.get(pc, 0) & ((1 << length) - 1)

    def push(self, pc: int, taken: bool) -> None:
        self.registers[pc] = ((self.registers.get(pc, 0) << 1) | (1 if taken else 0)) & _LOCAL_MASK

    def __len__(self) -> int:
        return len(self.registers)


def snapshot(gh: GlobalHistory, lht: LocalHistoryTable, pc: int,
             global_length: int, local_length: int) -> Tuple[int, int]:
    """
    History bits forming the tuple key of the current branch.

    Must be taken before `update` for the same record: the current
    branch's own outcome is never part of its context.
    """
    return gh.extract(global_length), lht.extract(pc, local_length)


def update(gh: GlobalHistory, lht: LocalHistoryTable, pc: int, taken: bool) -> None:
    """Shift the resolved outcome into the global register and the PC's local register"""
    gh.push(taken)
    lht.push(pc, taken)
