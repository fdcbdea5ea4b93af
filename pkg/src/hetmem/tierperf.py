"""Analytic latency/bandwidth model for a single memory tier.

Bandwidth comes from the per-mix tables in the machine config, interpolated
on write fraction, scaled with thread count, and penalised for remote PMM
writes (the link-contention collapse).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .config import MIXES, MachineConfig, TierKind
from .workload import WorkloadSpec, effective_write_fraction

LIMITING_FACTORS = ("tier_peak", "thread_scaling", "remote_collapse", "nt_write_penalty")

# interpolation knots ordered by write fraction
_KNOTS = ("read_only", "3:1", "2:1", "1:1", "write_only")


@dataclass(frozen=True)
class TrafficSplit:
    """Share of memory traffic served by DRAM (``fraction_to_dram``) and PMM."""

    fraction_to_dram: float
    fraction_to_pmm: float

    def __post_init__(self):
        for f in (self.fraction_to_dram, self.fraction_to_pmm):
            if not 0.0 <= f <= 1.0:
                raise ValueError("traffic fractions must lie in [0, 1]")
        if abs(self.fraction_to_dram + self.fraction_to_pmm - 1.0) > 1e-12:
            raise ValueError("traffic fractions must sum to 1")

    @classmethod
    def from_dram_fraction(cls, m0: float) -> "TrafficSplit":
        return cls(m0, 1.0 - m0)


@dataclass(frozen=True)
class BandwidthEstimate:
    value: float
    limiting_factor: str

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("bandwidth must be > 0")
        if self.limiting_factor not in LIMITING_FACTORS:
            raise ValueError(f"unknown limiting factor {self.limiting_factor!r}")


def composite_bandwidth(split: TrafficSplit | float, bw_dram: float, bw_pmm: float) -> float:
    """Weighted harmonic composition of two tiers' bandwidths."""
    if bw_dram <= 0 or bw_pmm <= 0:
        raise ValueError("bandwidths must be > 0")
    m0 = split.fraction_to_dram if isinstance(split, TrafficSplit) else float(split)
    return 1.0 / (m0 / bw_dram + (1.0 - m0) / bw_pmm)


def spill_fraction(data_size: int, dram_capacity: int) -> TrafficSplit:
    """DRAM share of traffic when the first ``dram_capacity`` bytes land in DRAM."""
    if data_size <= 0:
        raise ValueError("data_size must be > 0")
    if dram_capacity < 0:
        raise ValueError("dram_capacity must be >= 0")
    return TrafficSplit.from_dram_fraction(min(1.0, dram_capacity / data_size))


def write_amplification(touched_bytes: int, media_line_bytes: int = 256) -> float:
    if not 1 <= touched_bytes <= media_line_bytes:
        raise ValueError(f"touched_bytes must be in [1, {media_line_bytes}], got {touched_bytes}")
    return media_line_bytes / touched_bytes


def access_latency(config: MachineConfig, tier: TierKind, pattern: str, locality: str) -> float:
    return config.latency(tier, locality, pattern)


def mix_weights(write_fraction: float, nt_store: bool = False) -> list[tuple[str, float]]:
    """Piecewise-linear weights over the enumerated mixes for a write fraction."""
    w = min(1.0, max(0.0, write_fraction))
    knots = list(_KNOTS)
    if nt_store:
        knots[-1] = "nt_write_only"
    for lo, hi in zip(knots, knots[1:]):
        w_lo, w_hi = MIXES[lo], MIXES[hi]
        if w <= w_hi:
            t = (w - w_lo) / (w_hi - w_lo)
            if t <= 0.0:
                return [(lo, 1.0)]
            if t >= 1.0:
                return [(hi, 1.0)]
            return [(lo, 1.0 - t), (hi, t)]
    return [(knots[-1], 1.0)]


def tier_write_fraction(config: MachineConfig, tier: TierKind, spec: WorkloadSpec) -> float:
    # partial-line amplification only exists behind the PMM media buffer
    if TierKind(tier) is TierKind.PMM:
        return effective_write_fraction(spec, config.tiers.media_line_bytes)
    return spec.write_fraction


def mix_bandwidth(config: MachineConfig, tier: TierKind, locality: str, write_fraction: float,
                  nt_store: bool = False) -> tuple[float, float]:
    """(peak, single-thread) bandwidth interpolated at ``write_fraction``."""
    peak = single = 0.0
    for mix, weight in mix_weights(write_fraction, nt_store):
        entry = config.tiers.bandwidth_of(tier, locality, mix)
        peak += weight * entry.peak
        single += weight * entry.single_thread
    return peak, single


def pattern_bandwidth(config: MachineConfig, tier: TierKind, spec: WorkloadSpec, locality: str = "local",
                      threads: int | None = None) -> BandwidthEstimate:
    """Bandwidth one socket's ``tier`` sustains for ``spec``.

    ``threads`` defaults to the workload's thread count, capped at the socket's
    core count.  For PMM the value counts media traffic, so partial-line
    writes are already amplified in it.
    """
    tier = TierKind(tier)
    t = min(threads if threads is not None else spec.threads, config.topology.cores_per_socket)
    if t < 1:
        raise ValueError("threads must be >= 1")
    w = tier_write_fraction(config, tier, spec)
    peak, single = mix_bandwidth(config, tier, locality, w, spec.nt_store)

    def scaled(n: int) -> tuple[float, str]:
        if n * single >= peak:
            return peak, "tier_peak"
        return n * single, "thread_scaling"

    value, limit = scaled(t)
    collapse = config.remote_collapse
    if tier is TierKind.PMM and locality == "remote" and w > 0 and t > collapse.onset_threads:
        start, _ = scaled(collapse.onset_threads)
        end_t = config.topology.cores_per_socket
        floor = min(collapse.floor_bandwidth, start)
        if end_t <= collapse.onset_threads:
            value = floor
        else:
            frac = min(1.0, (t - collapse.onset_threads) / (end_t - collapse.onset_threads))
            value = start + (floor - start) * frac
        limit = "remote_collapse"
    return BandwidthEstimate(value, limit)


def two_socket_bandwidth(config: MachineConfig, tier: TierKind, spec: WorkloadSpec,
                         write_fraction: float | None = None) -> float:
    """Aggregate bandwidth of ``tier`` on all sockets, threads split evenly.

    ``write_fraction`` overrides the workload's mix (used when a policy routes
    only reads or only writes to the tier).
    """
    tier = TierKind(tier)
    sockets = config.topology.sockets
    per_socket = min(config.topology.cores_per_socket, max(1, math.ceil(spec.threads / sockets)))
    if write_fraction is not None:
        spec = spec.replace(
            read_fraction=1.0 - write_fraction,
            nt_store=spec.nt_store and write_fraction > 0,
            touched_bytes_per_media_line=256,
        )
    bw = pattern_bandwidth(config, tier, spec, "local", threads=per_socket).value
    return bw * sockets * config.tiers.two_socket_efficiency[tier]
