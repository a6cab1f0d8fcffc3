import random

import pytest

from src.config import GLOBAL_HISTORY_LENGTHS, LOCAL_HISTORY_LENGTHS
from src.errors import ConfigurationError
from src.history import GlobalHistory, LocalHistoryTable, snapshot, update


def _tail_value(outcomes, length):
    """Integer of the last `length` outcomes, newest outcome as the lowest bit"""
    if length == 0:
        return 0
    return int("".join(outcomes[-length:]) or "0", 2)


def test_newest_outcome_is_lowest_bit():
    gh = GlobalHistory()
    gh.push(True)
    gh.push(False)
    assert gh.bits == 0b10
    assert gh.extract(1) == 0
    assert gh.extract(2) == 0b10


def test_initial_state_is_all_not_taken():
    gh, lht = GlobalHistory(), LocalHistoryTable()
    assert snapshot(gh, lht, 0x400, 64, 24) == (0, 0)
    assert len(lht) == 0


def test_global_register_keeps_64_outcomes():
    gh = GlobalHistory()
    for _ in range(100):
        gh.push(True)
    assert gh.bits == (1 << 64) - 1


def test_local_register_keeps_24_outcomes():
    lht = LocalHistoryTable()
    for _ in range(40):
        lht.push(0x400, True)
    assert lht.registers[0x400] == (1 << 24) - 1
    assert lht.extract(0x404, 24) == 0


def test_zero_length_extract_is_zero():
    gh, lht = GlobalHistory(), LocalHistoryTable()
    update(gh, lht, 0x400, True)
    assert gh.extract(0) == 0
    assert lht.extract(0x400, 0) == 0


@pytest.mark.parametrize("length", [-1, 65])
def test_global_length_out_of_range(length):
    with pytest.raises(ConfigurationError):
        GlobalHistory().extract(length)


@pytest.mark.parametrize("length", [-1, 25])
def test_local_length_out_of_range(length):
    with pytest.raises(ConfigurationError):
        LocalHistoryTable().extract(0x400, length)


def test_snapshot_excludes_current_outcome():
    gh, lht = GlobalHistory(), LocalHistoryTable()
    before = snapshot(gh, lht, 0x400, 8, 4)
    update(gh, lht, 0x400, True)
    assert before == (0, 0)
    assert snapshot(gh, lht, 0x400, 8, 4) == (1, 1)


def test_snapshot_matches_outcome_list_slices():
    rng = random.Random(7)
    pcs = [0x1000 + 4 * i for i in range(10)]
    gh, lht = GlobalHistory(), LocalHistoryTable()
    global_outcomes = []
    local_outcomes = {pc: [] for pc in pcs}

    for _ in range(100_000):
        pc = rng.choice(pcs)
        taken = rng.random() < 0.6
        for n in GLOBAL_HISTORY_LENGTHS:
            assert gh.extract(n) == _tail_value(global_outcomes, n)
        for m in LOCAL_HISTORY_LENGTHS:
            assert lht.extract(pc, m) == _tail_value(local_outcomes[pc], m)
        update(gh, lht, pc, taken)
        bit = "1" if taken else "0"
        global_outcomes.append(bit)
        local_outcomes[pc].append(bit)
        if len(global_outcomes) > 128:
            del global_outcomes[:64]
