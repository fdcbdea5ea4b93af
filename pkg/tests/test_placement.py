import pytest
from hypothesis import given, settings, strategies as st

from hetmem.config import GB, TierKind
from hetmem.placement import (
    CapacityError,
    MemoryState,
    OutOfMemory,
    Structure,
    isolate_writes,
    spill_alloc,
    split_alloc,
    structures_from_doc,
    traffic_split,
)

D, P = TierKind.DRAM, TierKind.PMM


def hand_spill(size, sockets, dram, pmm, block):
    """Independent spill: per-socket counters, home DRAM > home PMM > neighbours."""
    free = {(s, t): (dram if t is D else pmm) for s in range(sockets) for t in (D, P)}
    out = []
    i = 0
    while size > 0:
        blk = min(block, size)
        order = [((i % sockets + k) % sockets, t) for k in range(sockets) for t in (D, P)]
        key = next(k for k in order if free[k] >= blk)
        free[key] -= blk
        out.append((blk,) + key)
        size -= blk
        i += 1
    return out


@st.composite
def cases(draw):
    sockets = draw(st.integers(1, 3))
    block = draw(st.integers(1, 16))
    dram = draw(st.integers(0, 100))
    pmm = draw(st.integers(block, 200))
    size = draw(st.integers(1, sockets * (dram + pmm)))
    return sockets, block, dram, pmm, size


@settings(max_examples=300, deadline=None)
@given(c=cases())
def test_spill_matches_hand_simulation(c):
    sockets, block, dram, pmm, size = c
    try:
        expected = hand_spill(size, sockets, dram, pmm, block)
    except StopIteration:
        with pytest.raises(OutOfMemory):
            spill_alloc(size, MemoryState.uniform(sockets, dram, pmm), block)
        return
    pm = spill_alloc(size, MemoryState.uniform(sockets, dram, pmm), block)
    assert [(b.size, b.socket, b.tier) for b in pm.blocks] == expected


def test_spill_example():
    pm = spill_alloc(5, MemoryState.uniform(2, 2, 10), 1)
    assert [(b.socket, b.tier) for b in pm.blocks] == [(0, D), (1, D), (0, D), (1, D), (0, P)]


def test_spill_out_of_memory_reports_shortfall():
    with pytest.raises(OutOfMemory) as exc:
        spill_alloc(100, MemoryState.uniform(2, 10, 10), 5)
    assert exc.value.shortfall == 60


def test_spill_default_machine(config):
    pm = spill_alloc(1000 * GB, MemoryState.from_config(config), GB)
    assert traffic_split(pm).fraction_to_dram == pytest.approx(0.168)
    assert pm.bytes_on_socket(0) == pm.bytes_on_socket(1)


@settings(max_examples=200, deadline=None)
@given(size=st.integers(1, 400), parts=st.integers(1, 8), sockets=st.integers(1, 4))
def test_split_conserves_and_balances(size, parts, sockets):
    state = MemoryState.uniform(sockets, 0, 400)
    pm = split_alloc(size, state, parts)
    assert pm.total_size == size
    assert pm.bytes_in(D) == 0
    assert state.free_in(P) == sockets * 400 - size
    if size <= 400:
        on = [pm.bytes_on_socket(s) for s in range(sockets)]
        expected = [sum(size // parts + (i < size % parts) for i in range(parts) if i % sockets == s)
                    for s in range(sockets)]
        assert on == expected


def test_split_overflows_to_next_socket():
    pm = split_alloc(30, MemoryState.uniform(2, 0, 20), 1)
    assert [(b.size, b.socket) for b in pm.blocks] == [(20, 0), (10, 1)]


def test_isolate_writes_routes_by_intensity():
    state = MemoryState.uniform(2, 10, 100)
    structs = [Structure("a", 20, 0.1), Structure("b", 8, 0.9), Structure("c", 6, 0.5)]
    a, b, c = isolate_writes(structs, state, block_size=2)
    assert a.bytes_in(D) == 0 and a.bytes_on_socket(0) == a.bytes_on_socket(1) == 10
    assert b.bytes_in(P) == 0 and c.bytes_in(P) == 0


def test_isolate_writes_names_the_offender():
    state = MemoryState.uniform(2, 10, 100)
    with pytest.raises(CapacityError, match="'big'"):
        isolate_writes([Structure("ok", 5, 1.0), Structure("big", 30, 1.0)], state)


def test_structures_doc():
    s = structures_from_doc('[{"name": "x", "size_bytes": 10, "write_intensity": 0.2}]')
    assert s == [Structure("x", 10, 0.2)]
    with pytest.raises(ValueError):
        Structure("y", 1, 1.5)
