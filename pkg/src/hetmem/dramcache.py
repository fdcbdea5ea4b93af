"""DRAM as a direct-mapped write-back cache in front of PMM (Memory mode).

Two routes: :func:`trace_sim` replays an explicit trace exactly, while
:func:`analytic_hit_rate` and :func:`memory_mode_perf` give closed-form
steady-state estimates for a workload descriptor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import MachineConfig, TierKind
from .tierperf import pattern_bandwidth
from .workload import WRITE, AccessTrace, WorkloadSpec


@dataclass(frozen=True)
class CacheConfig:
    capacity: int
    line_bytes: int = 64
    socket_local_only: bool = True

    def __post_init__(self):
        if self.line_bytes <= 0:
            raise ValueError("line_bytes must be > 0")
        if self.capacity // self.line_bytes < 1:
            raise ValueError("cache must hold at least one line")

    @property
    def sets(self) -> int:
        return self.capacity // self.line_bytes

    @classmethod
    def with_sets(cls, sets: int, line_bytes: int = 64) -> "CacheConfig":
        return cls(capacity=sets * line_bytes, line_bytes=line_bytes)


@dataclass(frozen=True)
class CacheStats:
    accesses: int
    hits: int
    misses: int
    dirty_evictions: int

    @property
    def hit_rate(self) -> float:
        return self.hits / self.accesses if self.accesses else 0.0


def trace_sim(trace: AccessTrace, cache: CacheConfig) -> CacheStats:
    """Exact cold-start simulation of a direct-mapped write-back cache.

    In a direct-mapped cache an access hits iff the previous access to the
    same set touched the same line, so the replay reduces to a stable sort
    by set index followed by neighbour comparisons.
    """
    addrs = trace.addresses
    n = len(addrs)
    sets = addrs % cache.sets
    order = np.argsort(sets, kind="stable")
    sa = addrs[order]
    ss = sets[order]
    sk = trace.kinds[order]

    same_set = np.empty(n, dtype=bool)
    same_set[0] = False
    same_set[1:] = ss[1:] == ss[:-1]
    hit = np.empty(n, dtype=bool)
    hit[0] = False
    hit[1:] = same_set[1:] & (sa[1:] == sa[:-1])

    # every miss installs a line; the residency lasts until the next miss in the set
    miss = ~hit
    residency = np.cumsum(miss) - 1
    dirty = np.bincount(residency, weights=(sk == WRITE)) > 0
    evicting = miss & same_set  # a miss with a valid victim
    victims = residency[np.flatnonzero(evicting) - 1]
    hits = int(hit.sum())
    return CacheStats(
        accesses=n,
        hits=hits,
        misses=n - hits,
        dirty_evictions=int(dirty[victims].sum()),
    )


def analytic_hit_rate(spec: WorkloadSpec, cache: CacheConfig, conflict_coefficient: float = 0.1,
                      threads: int | None = None) -> float:
    """Steady-state hit rate of ``spec`` against a direct-mapped cache.

    Working sets that fit lose hits only to inter-thread set conflicts, which
    grow with thread count and with how full the cache is.  Uniform random
    access over a larger footprint keeps ``capacity / data_size`` of its
    lines resident; a sequential stream larger than the cache gets no
    cross-pass reuse.
    """
    t = spec.threads if threads is None else threads
    conflict = conflict_coefficient * (t - 1) / t
    capacity = cache.capacity
    size = spec.data_size
    if size <= capacity:
        return 1.0 - conflict * size / capacity
    if spec.pattern == "random":
        return (capacity / size) * (1.0 - conflict)
    return 0.0


@dataclass(frozen=True)
class MemoryModeReport:
    latency: float
    bandwidth: float
    hit_rate: float
    dirty_fraction: float
    dram_traffic: float
    pmm_traffic: float
    limiting_factor: str


def blended_bandwidth(hit_rate: float, dirty_fraction: float, hit_bw: float, pmm_read_bw: float,
                      pmm_write_bw: float, fill_bw: float, fill_factor: float) -> float:
    """Throughput of a hit/miss stream where a dirty victim is written back
    to PMM before the missing line can be read (the throttling effect)."""
    miss_cost = 1.0 / pmm_read_bw + dirty_fraction / pmm_write_bw + fill_factor / fill_bw
    return 1.0 / (hit_rate / hit_bw + (1.0 - hit_rate) * miss_cost)


def memory_mode_perf(spec: WorkloadSpec, config: MachineConfig, locality: str = "local", sockets: int = 1,
                     hit_rate: float | None = None, dirty_fraction: float | None = None) -> MemoryModeReport:
    """Latency and bandwidth of ``spec`` in Memory mode on ``sockets`` sockets.

    Data and threads are spread evenly over the sockets; each socket's DRAM
    caches only its own PMM.  ``hit_rate`` and ``dirty_fraction`` override the
    analytic values (the dirty fraction defaults to the write share).
    """
    topo = config.topology
    opts = config.mode_options
    per_socket_data = max(1, spec.data_size // sockets)
    threads = min(topo.cores_per_socket, max(1, math.ceil(spec.threads / sockets)))
    cache = CacheConfig(topo.dram_per_socket, config.tiers.cache_line_bytes)
    local = spec.replace(data_size=per_socket_data)

    h = analytic_hit_rate(local, cache, opts.conflict_coefficient, threads) if hit_rate is None else hit_rate
    d = spec.write_fraction if dirty_fraction is None else dirty_fraction
    if not 0.0 <= h <= 1.0 or not 0.0 <= d <= 1.0:
        raise ValueError("hit_rate and dirty_fraction must lie in [0, 1]")

    eff = config.tiers.two_socket_efficiency[TierKind.DRAM] if sockets > 1 else 1.0
    reads = spec.replace(read_fraction=1.0, nt_store=False)
    writes = spec.replace(read_fraction=0.0, nt_store=False)
    hit_bw = pattern_bandwidth(config, TierKind.DRAM, spec, "local", threads).value * eff
    per_socket = blended_bandwidth(
        h,
        d,
        hit_bw,
        pattern_bandwidth(config, TierKind.PMM, reads, "local", threads).value,
        pattern_bandwidth(config, TierKind.PMM, writes, "local", threads).value,
        pattern_bandwidth(config, TierKind.DRAM, writes, "local", threads).value,
        opts.fill_factor,
    )
    bandwidth = per_socket * sockets
    limiting = "tier_peak"
    if spec.nt_store:
        cap = opts.nt_memory_mode_factor * hit_bw * sockets
        if bandwidth > cap:
            bandwidth, limiting = cap, "nt_write_penalty"
    if per_socket_data > cache.capacity:
        large = config.memory_mode_large_size_bandwidth
        per_platform = large.bandwidth_opt if opts.memory_mode_optimization == "bandwidth" else large.latency_opt
        bandwidth = min(bandwidth, per_platform * sockets / topo.sockets)

    h_lat = analytic_hit_rate(local, cache, opts.conflict_coefficient, threads=1)
    l_dram = config.latency(TierKind.DRAM, "local", spec.pattern)
    l_pmm = config.latency(TierKind.PMM, "local", spec.pattern)
    latency = h_lat * l_dram + (1.0 - h_lat) * (l_pmm + opts.fill_factor * l_dram)
    if locality == "remote":
        bandwidth *= config.tiers.numa_bandwidth_factor
        latency += config.tiers.numa_latency_adder

    # every access touches DRAM, misses add a fill; NT stores also pay a tag read
    dram_traffic = bandwidth * (1.0 + (1.0 - h) + (spec.write_fraction if spec.nt_store else 0.0))
    pmm_traffic = bandwidth * (1.0 - h) * (1.0 + d)
    return MemoryModeReport(latency, bandwidth, h, d, dram_traffic, pmm_traffic, limiting)
