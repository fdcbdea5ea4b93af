import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hetmem.config import GB
from hetmem.dramcache import CacheConfig, CacheStats, analytic_hit_rate, blended_bandwidth, memory_mode_perf, trace_sim
from hetmem.workload import READ, WRITE, AccessTrace, WorkloadSpec, generate_trace, preset


def reference_sim(trace, sets):
    """Plain state-machine replay of a direct-mapped write-back cache."""
    tags = [None] * sets
    dirty = [False] * sets
    hits = misses = evictions = 0
    for addr, kind in zip(trace.addresses.tolist(), trace.kinds.tolist()):
        s = addr % sets
        if tags[s] == addr:
            hits += 1
        else:
            misses += 1
            if tags[s] is not None and dirty[s]:
                evictions += 1
            tags[s] = addr
            dirty[s] = False
        if kind == WRITE:
            dirty[s] = True
    return CacheStats(hits + misses, hits, misses, evictions)


traces = st.integers(1, 300).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 63), min_size=n, max_size=n),
        st.lists(st.sampled_from([READ, WRITE]), min_size=n, max_size=n),
    )
)


@settings(max_examples=300, deadline=None)
@given(tr=traces, sets=st.integers(1, 40))
def test_trace_sim_matches_reference(tr, sets):
    trace = AccessTrace(np.array(tr[0], dtype=np.int64), np.array(tr[1], dtype=np.int8))
    assert trace_sim(trace, CacheConfig.with_sets(sets)) == reference_sim(trace, sets)


def test_trace_sim_small_example():
    # sets=2: 0 and 2 collide, 1 sits alone
    trace = AccessTrace.from_events([(0, "W"), (1, "R"), (2, "R"), (0, "R"), (1, "R")])
    stats = trace_sim(trace, CacheConfig.with_sets(2))
    assert (stats.hits, stats.misses, stats.dirty_evictions) == (1, 4, 1)


def test_cold_fitting_trace_misses_once_per_line():
    spec = WorkloadSpec(pattern="random", threads=1, data_size=512 * 64)
    stats = trace_sim(generate_trace(spec, 3, 50_000), CacheConfig.with_sets(1024))
    assert stats.misses == len(np.unique(generate_trace(spec, 3, 50_000).addresses))


def test_cache_config_validation():
    with pytest.raises(ValueError):
        CacheConfig(32, line_bytes=64)
    assert CacheConfig.with_sets(8).capacity == 512


def test_analytic_hit_rate_cases():
    cache = CacheConfig(96 * GB)
    fits = preset("accumulate").replace(data_size=48 * GB, threads=24)
    assert analytic_hit_rate(fits, cache, 0.1) == pytest.approx(1 - 0.1 * 23 / 24 * 0.5)
    assert analytic_hit_rate(fits.replace(threads=1), cache, 0.1) == 1.0
    big = fits.replace(data_size=192 * GB)
    assert analytic_hit_rate(big, cache) == 0.0
    assert analytic_hit_rate(big.replace(pattern="random", threads=1), cache) == pytest.approx(0.5)


@given(h=st.floats(0, 1), d1=st.floats(0, 1), d2=st.floats(0, 1))
def test_blended_bandwidth_monotone_in_dirty_fraction(h, d1, d2):
    lo, hi = sorted((d1, d2))
    args = (100.0, 39.0, 12.1, 45.2, 0.3)
    a = blended_bandwidth(h, lo, args[0], *args[1:])
    b = blended_bandwidth(h, hi, args[0], *args[1:])
    assert b <= a * (1 + 1e-12)


def test_blended_bandwidth_endpoints():
    assert blended_bandwidth(1.0, 0.7, 100.0, 39.0, 12.1, 45.2, 0.3) == pytest.approx(100.0)
    assert blended_bandwidth(0.0, 0.0, 100.0, 39.0, 12.1, 45.2, 0.0) == pytest.approx(39.0)


def test_memory_mode_small_data_tracks_dram(config):
    r = memory_mode_perf(preset("accumulate").replace(data_size=16 * GB), config)
    assert r.latency == pytest.approx(79.0)
    assert 0.85 * 104 <= r.bandwidth <= 104


def test_memory_mode_two_socket_accumulate(config):
    r = memory_mode_perf(preset("accumulate"), config, sockets=2)
    assert 180 <= r.bandwidth <= 210
    assert r.latency == pytest.approx(79.0)


def test_memory_mode_large_caps(config):
    spec = preset("read_only").replace(data_size=1000 * GB)
    assert memory_mode_perf(spec, config, sockets=2).bandwidth == pytest.approx(40.0)
    assert memory_mode_perf(spec, config, sockets=1).bandwidth == pytest.approx(20.0)


def test_memory_mode_nt_penalty(config):
    spec = preset("nt_write_only").replace(data_size=16 * GB)
    r = memory_mode_perf(spec, config)
    assert r.limiting_factor == "nt_write_penalty"
    assert r.bandwidth < memory_mode_perf(preset("write_only").replace(data_size=16 * GB), config).bandwidth


def test_memory_mode_remote_is_worse(config):
    spec = preset("read_only").replace(data_size=16 * GB)
    local, remote = memory_mode_perf(spec, config), memory_mode_perf(spec, config, "remote")
    assert remote.bandwidth < local.bandwidth and remote.latency > local.latency


def test_memory_mode_rejects_bad_overrides(config):
    with pytest.raises(ValueError):
        memory_mode_perf(preset("read_only"), config, hit_rate=1.5)
