"""Machine description for a two-socket DRAM + persistent-memory server.

All bandwidths are GB/s (10**9 bytes/s), latencies ns, powers W and
capacities bytes.  The embedded default reproduces the measured Optane
platform (2 sockets, 2 iMCs x 3 channels per socket, one 16 GB DIMM and one
128 GB NVDIMM per channel).
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Mapping

GB = 10**9
PAGE_SIZE = 4096
METADATA_BYTES_PER_PAGE = 64


class ConfigError(ValueError):
    """Raised for schema violations or broken invariants in a machine config."""

    def __init__(self, field_path: str, message: str):
        self.field = field_path
        super().__init__(f"{field_path}: {message}")


class TierKind(str, Enum):
    DRAM = "DRAM"
    PMM = "PMM"


LOCALITIES = ("local", "remote")
PATTERNS = ("sequential", "random")
# write fraction of each enumerated mix; nt_write_only shares the write-only point
MIXES = {
    "read_only": 0.0,
    "3:1": 0.25,
    "2:1": 1.0 / 3.0,
    "1:1": 0.5,
    "write_only": 1.0,
    "nt_write_only": 1.0,
}


def metadata_overhead(pmm_bytes: int) -> int:
    """Bytes of namespace page metadata needed for ``pmm_bytes`` of PMM."""
    if pmm_bytes < 0:
        raise ValueError("pmm_bytes must be >= 0")
    return pmm_bytes * METADATA_BYTES_PER_PAGE // PAGE_SIZE


@dataclass(frozen=True)
class SocketTopology:
    sockets: int = 2
    controllers_per_socket: int = 2
    channels_per_controller: int = 3
    channel_transfer_rate: float = 2.4  # GT/s
    dram_dimm_capacity: int = 16 * GB
    nvdimm_capacity: int = 128 * GB
    cores_per_socket: int = 24
    core_frequency: float = 2.4e9

    @property
    def channels_per_socket(self) -> int:
        return self.controllers_per_socket * self.channels_per_controller

    @property
    def channel_peak_bandwidth(self) -> float:
        # 64-bit data bus
        return self.channel_transfer_rate * 8

    @property
    def platform_peak_bandwidth(self) -> float:
        return self.channel_peak_bandwidth * self.channels_per_socket * self.sockets

    @property
    def dram_per_socket(self) -> int:
        return self.dram_dimm_capacity * self.channels_per_socket

    @property
    def pmm_per_socket(self) -> int:
        return self.nvdimm_capacity * self.channels_per_socket


@dataclass(frozen=True)
class BandwidthEntry:
    peak: float
    single_thread: float


@dataclass(frozen=True)
class TierParams:
    """Latency and bandwidth tables.

    ``latency`` is keyed by ``(tier, locality, pattern)``, ``bandwidth`` by
    ``(tier, locality, mix)``.  Both are read-only mappings.
    """

    latency: Mapping[tuple[TierKind, str, str], float]
    bandwidth: Mapping[tuple[TierKind, str, str], BandwidthEntry]
    media_line_bytes: int = 256
    cache_line_bytes: int = 64
    numa_latency_adder: float = 75.0
    numa_bandwidth_factor: float = 0.36
    two_socket_efficiency: Mapping[TierKind, float] = field(
        default_factory=lambda: MappingProxyType({TierKind.DRAM: 204 / 208, TierKind.PMM: 1.0})
    )

    def latency_of(self, tier: TierKind, locality: str, pattern: str) -> float:
        return self.latency[(TierKind(tier), locality, pattern)]

    def bandwidth_of(self, tier: TierKind, locality: str, mix: str) -> BandwidthEntry:
        return self.bandwidth[(TierKind(tier), locality, mix)]


@dataclass(frozen=True)
class PowerParams:
    static_memory_power_per_socket: float = 38.0
    dram_dynamic_coefficient: Mapping[str, float] = field(default_factory=dict)
    pmm_dynamic_coefficient: Mapping[str, float] = field(default_factory=dict)
    nt_write_cache_power_surcharge: float = 0.13
    cpu_static_power_per_socket: float = 2.0
    cpu_dynamic_peak_power_per_socket: float = 28.5
    platform_power_cap: float = 480.0


@dataclass(frozen=True)
class RemoteCollapse:
    onset_threads: int = 3
    floor_bandwidth: float = 1.0


@dataclass(frozen=True)
class LargeSizeBandwidth:
    bandwidth_opt: float = 40.0
    latency_opt: float = 5.0


@dataclass(frozen=True)
class ModeOptions:
    memory_mode_optimization: str = "bandwidth"
    remote_collapse: RemoteCollapse = RemoteCollapse()
    memory_mode_large_size_bandwidth: LargeSizeBandwidth = LargeSizeBandwidth()
    peak_compute: float = 208.0  # Gflop/s, whole platform
    conflict_coefficient: float = 0.1
    fill_factor: float = 0.3
    nt_memory_mode_factor: float = 0.55
    memory_mode_reserve_fraction: float = 1 / 6
    block_size: int = 1 * GB


@dataclass(frozen=True)
class MachineConfig:
    topology: SocketTopology
    tiers: TierParams
    power: PowerParams
    mode_options: ModeOptions = ModeOptions()

    @property
    def dram_capacity_total(self) -> int:
        return self.topology.dram_per_socket * self.topology.sockets

    @property
    def pmm_capacity_total(self) -> int:
        return self.topology.pmm_per_socket * self.topology.sockets

    @property
    def usable_dram(self) -> int:
        return self.dram_capacity_total - metadata_overhead(self.pmm_capacity_total)

    @property
    def memory_mode_optimization(self) -> str:
        return self.mode_options.memory_mode_optimization

    @property
    def remote_collapse(self) -> RemoteCollapse:
        return self.mode_options.remote_collapse

    @property
    def memory_mode_large_size_bandwidth(self) -> LargeSizeBandwidth:
        return self.mode_options.memory_mode_large_size_bandwidth

    def latency(self, tier, locality: str, pattern: str) -> float:
        return self.tiers.latency_of(tier, locality, pattern)

    def bandwidth(self, tier, locality: str, mix: str) -> float:
        return self.tiers.bandwidth_of(tier, locality, mix).peak


# ---------------------------------------------------------------------------
# defaults

_LOCAL_LATENCY = {
    TierKind.DRAM: {"sequential": 79.0, "random": 87.0},
    TierKind.PMM: {"sequential": 174.0, "random": 302.0},
}

_LOCAL_PEAK = {
    TierKind.DRAM: {
        "read_only": 104.0,
        "write_only": 45.2,
        "nt_write_only": 45.2,
        "1:1": 84.9,
        "2:1": 91.0,
        "3:1": 98.7,
    },
    TierKind.PMM: {
        "read_only": 39.0,
        "write_only": 12.1,
        "nt_write_only": 12.1,
        "1:1": 7.6,
        "2:1": 13.0,
        "3:1": 21.6,
    },
}


# threads at which one socket saturates; PMM reads keep scaling to ~15
# threads while anything with writes saturates after a handful
def _saturation_threads(tier: TierKind, mix: str) -> int:
    if tier is TierKind.DRAM:
        return 12
    return 15 if mix == "read_only" else 4


# dynamic W per GB/s; DRAM sits at ~60 W for every mix, PMM follows its
# measured power (2 W at 1:1 up to 8 W at 3:1)
_DRAM_COEFF = {mix: round(60.0 / bw, 6) for mix, bw in _LOCAL_PEAK[TierKind.DRAM].items()}
_PMM_COEFF = {
    "read_only": 0.34,
    "write_only": round(60.0 / (0.8 * 45.2), 6),
    "nt_write_only": round(60.0 / (0.8 * 45.2), 6),
    "1:1": round(2.0 / 7.6, 6),
    "2:1": round(4.5 / 13.0, 6),
    "3:1": round(8.0 / 21.6, 6),
}


def _default_tiers() -> TierParams:
    adder, factor = 75.0, 0.36
    latency = {}
    bandwidth = {}
    for tier in TierKind:
        for pattern, ns in _LOCAL_LATENCY[tier].items():
            latency[(tier, "local", pattern)] = ns
            latency[(tier, "remote", pattern)] = ns + adder
        for mix, peak in _LOCAL_PEAK[tier].items():
            single = round(peak / _saturation_threads(tier, mix), 6)
            bandwidth[(tier, "local", mix)] = BandwidthEntry(peak, single)
            bandwidth[(tier, "remote", mix)] = BandwidthEntry(
                round(peak * factor, 6), round(single * factor, 6)
            )
    return TierParams(
        latency=MappingProxyType(latency),
        bandwidth=MappingProxyType(bandwidth),
        numa_latency_adder=adder,
        numa_bandwidth_factor=factor,
    )


def default_paper_config() -> MachineConfig:
    """The calibrated two-socket Optane platform."""
    return MachineConfig(
        topology=SocketTopology(),
        tiers=_default_tiers(),
        power=PowerParams(
            dram_dynamic_coefficient=MappingProxyType(dict(_DRAM_COEFF)),
            pmm_dynamic_coefficient=MappingProxyType(dict(_PMM_COEFF)),
        ),
    )


# ---------------------------------------------------------------------------
# (de)serialization


def to_dict(config: MachineConfig) -> dict[str, Any]:
    topo = config.topology
    tiers = config.tiers
    lat: dict = {}
    bw: dict = {}
    for tier in TierKind:
        lat[tier.value] = {
            loc: {p: tiers.latency[(tier, loc, p)] for p in PATTERNS} for loc in LOCALITIES
        }
        bw[tier.value] = {
            loc: {
                mix: {
                    "peak": tiers.bandwidth[(tier, loc, mix)].peak,
                    "single_thread": tiers.bandwidth[(tier, loc, mix)].single_thread,
                }
                for mix in MIXES
            }
            for loc in LOCALITIES
        }
    opts = config.mode_options
    return {
        "topology": {
            "sockets": topo.sockets,
            "controllers_per_socket": topo.controllers_per_socket,
            "channels_per_controller": topo.channels_per_controller,
            "channel_transfer_rate": topo.channel_transfer_rate,
            "dram_dimm_capacity": topo.dram_dimm_capacity,
            "nvdimm_capacity": topo.nvdimm_capacity,
            "cores_per_socket": topo.cores_per_socket,
            "core_frequency": topo.core_frequency,
        },
        "tiers": {
            "latency": lat,
            "bandwidth": bw,
            "media_line_bytes": tiers.media_line_bytes,
            "cache_line_bytes": tiers.cache_line_bytes,
            "numa_latency_adder": tiers.numa_latency_adder,
            "numa_bandwidth_factor": tiers.numa_bandwidth_factor,
            "two_socket_efficiency": {t.value: tiers.two_socket_efficiency[t] for t in TierKind},
        },
        "power": {
            "static_memory_power_per_socket": config.power.static_memory_power_per_socket,
            "dram_dynamic_coefficient": {m: config.power.dram_dynamic_coefficient[m] for m in MIXES},
            "pmm_dynamic_coefficient": {m: config.power.pmm_dynamic_coefficient[m] for m in MIXES},
            "nt_write_cache_power_surcharge": config.power.nt_write_cache_power_surcharge,
            "cpu_static_power_per_socket": config.power.cpu_static_power_per_socket,
            "cpu_dynamic_peak_power_per_socket": config.power.cpu_dynamic_peak_power_per_socket,
            "platform_power_cap": config.power.platform_power_cap,
        },
        "mode_options": {
            "memory_mode_optimization": opts.memory_mode_optimization,
            "remote_collapse": {
                "onset_threads": opts.remote_collapse.onset_threads,
                "floor_bandwidth": opts.remote_collapse.floor_bandwidth,
            },
            "memory_mode_large_size_bandwidth": {
                "bandwidth_opt": opts.memory_mode_large_size_bandwidth.bandwidth_opt,
                "latency_opt": opts.memory_mode_large_size_bandwidth.latency_opt,
            },
            "peak_compute": opts.peak_compute,
            "conflict_coefficient": opts.conflict_coefficient,
            "fill_factor": opts.fill_factor,
            "nt_memory_mode_factor": opts.nt_memory_mode_factor,
            "memory_mode_reserve_fraction": opts.memory_mode_reserve_fraction,
            "block_size": opts.block_size,
        },
    }


def dumps(config: MachineConfig) -> str:
    """Stable-ordered JSON text for ``config``."""
    return json.dumps(to_dict(config), indent=2)


def _merge(base: Any, override: Any, path: str) -> Any:
    if isinstance(base, dict):
        if not isinstance(override, dict):
            raise ConfigError(path or "<root>", "expected an object")
        out = dict(base)
        for key, value in override.items():
            sub = f"{path}.{key}" if path else key
            if key not in base:
                raise ConfigError(sub, "unknown field")
            out[key] = _merge(base[key], value, sub)
        return out
    if isinstance(base, bool) or isinstance(override, bool):
        if type(base) is not type(override):
            raise ConfigError(path, f"expected {type(base).__name__}")
        return override
    if isinstance(base, (int, float)):
        if not isinstance(override, (int, float)):
            raise ConfigError(path, "expected a number")
        if isinstance(base, int) and not isinstance(override, int):
            if float(override).is_integer():
                return int(override)
            raise ConfigError(path, "expected an integer")
        return override
    if isinstance(base, str):
        if not isinstance(override, str):
            raise ConfigError(path, "expected a string")
        return override
    raise ConfigError(path, "unsupported value")


def _from_dict(doc: dict[str, Any]) -> MachineConfig:
    t = doc["tiers"]
    latency = {}
    bandwidth = {}
    for tier in TierKind:
        for loc in LOCALITIES:
            for p in PATTERNS:
                latency[(tier, loc, p)] = float(t["latency"][tier.value][loc][p])
            for mix in MIXES:
                e = t["bandwidth"][tier.value][loc][mix]
                bandwidth[(tier, loc, mix)] = BandwidthEntry(float(e["peak"]), float(e["single_thread"]))
    tiers = TierParams(
        latency=MappingProxyType(latency),
        bandwidth=MappingProxyType(bandwidth),
        media_line_bytes=t["media_line_bytes"],
        cache_line_bytes=t["cache_line_bytes"],
        numa_latency_adder=float(t["numa_latency_adder"]),
        numa_bandwidth_factor=float(t["numa_bandwidth_factor"]),
        two_socket_efficiency=MappingProxyType(
            {tier: float(t["two_socket_efficiency"][tier.value]) for tier in TierKind}
        ),
    )
    p = doc["power"]
    power = PowerParams(
        static_memory_power_per_socket=float(p["static_memory_power_per_socket"]),
        dram_dynamic_coefficient=MappingProxyType(dict(p["dram_dynamic_coefficient"])),
        pmm_dynamic_coefficient=MappingProxyType(dict(p["pmm_dynamic_coefficient"])),
        nt_write_cache_power_surcharge=float(p["nt_write_cache_power_surcharge"]),
        cpu_static_power_per_socket=float(p["cpu_static_power_per_socket"]),
        cpu_dynamic_peak_power_per_socket=float(p["cpu_dynamic_peak_power_per_socket"]),
        platform_power_cap=float(p["platform_power_cap"]),
    )
    m = doc["mode_options"]
    opts = ModeOptions(
        memory_mode_optimization=m["memory_mode_optimization"],
        remote_collapse=RemoteCollapse(**m["remote_collapse"]),
        memory_mode_large_size_bandwidth=LargeSizeBandwidth(**m["memory_mode_large_size_bandwidth"]),
        peak_compute=float(m["peak_compute"]),
        conflict_coefficient=float(m["conflict_coefficient"]),
        fill_factor=float(m["fill_factor"]),
        nt_memory_mode_factor=float(m["nt_memory_mode_factor"]),
        memory_mode_reserve_fraction=float(m["memory_mode_reserve_fraction"]),
        block_size=m["block_size"],
    )
    return MachineConfig(topology=SocketTopology(**doc["topology"]), tiers=tiers, power=power, mode_options=opts)


def validate(config: MachineConfig) -> MachineConfig:
    """Check every invariant; raise :class:`ConfigError` naming the broken one."""
    topo = config.topology
    for name in ("sockets", "controllers_per_socket", "channels_per_controller", "cores_per_socket"):
        if getattr(topo, name) < 1:
            raise ConfigError(f"topology.{name}", "must be >= 1")
    for name in ("channel_transfer_rate", "dram_dimm_capacity", "nvdimm_capacity", "core_frequency"):
        if getattr(topo, name) <= 0:
            raise ConfigError(f"topology.{name}", "must be > 0")

    tiers = config.tiers
    for key, ns in tiers.latency.items():
        if ns <= 0:
            raise ConfigError(_lat_path(key), "latency must be > 0")
    for tier in TierKind:
        for p in PATTERNS:
            if tiers.latency[(tier, "remote", p)] < tiers.latency[(tier, "local", p)]:
                raise ConfigError(_lat_path((tier, "remote", p)), "remote latency below local latency")
    for loc in LOCALITIES:
        for p in PATTERNS:
            if tiers.latency[(TierKind.PMM, loc, p)] < tiers.latency[(TierKind.DRAM, loc, p)]:
                raise ConfigError(_lat_path((TierKind.PMM, loc, p)), "PMM latency below DRAM latency")
        if tiers.latency[(TierKind.PMM, loc, "random")] < tiers.latency[(TierKind.PMM, loc, "sequential")]:
            raise ConfigError(_lat_path((TierKind.PMM, loc, "random")), "PMM random latency below sequential")
    for (tier, loc, mix), entry in tiers.bandwidth.items():
        path = f"tiers.bandwidth.{tier.value}.{loc}.{mix}"
        if entry.peak <= 0 or entry.single_thread <= 0:
            raise ConfigError(path, "bandwidth must be > 0")
    if tiers.cache_line_bytes <= 0 or tiers.media_line_bytes <= 0 or tiers.media_line_bytes % tiers.cache_line_bytes:
        raise ConfigError("tiers.media_line_bytes", "must be a positive multiple of cache_line_bytes")
    if not 0 < tiers.numa_bandwidth_factor <= 1:
        raise ConfigError("tiers.numa_bandwidth_factor", "must be in (0, 1]")

    power = config.power
    for name in (
        "static_memory_power_per_socket",
        "nt_write_cache_power_surcharge",
        "cpu_static_power_per_socket",
        "cpu_dynamic_peak_power_per_socket",
        "platform_power_cap",
    ):
        if getattr(power, name) < 0:
            raise ConfigError(f"power.{name}", "must be >= 0")
    for table in ("dram_dynamic_coefficient", "pmm_dynamic_coefficient"):
        coeffs = getattr(power, table)
        for mix in MIXES:
            if mix not in coeffs:
                raise ConfigError(f"power.{table}.{mix}", "missing coefficient")
            if coeffs[mix] < 0:
                raise ConfigError(f"power.{table}.{mix}", "must be >= 0")

    opts = config.mode_options
    if opts.memory_mode_optimization not in ("bandwidth", "latency"):
        raise ConfigError("mode_options.memory_mode_optimization", "must be 'bandwidth' or 'latency'")
    if opts.remote_collapse.onset_threads < 1 or opts.remote_collapse.floor_bandwidth <= 0:
        raise ConfigError("mode_options.remote_collapse", "onset >= 1 and floor > 0 required")
    if opts.peak_compute <= 0:
        raise ConfigError("mode_options.peak_compute", "must be > 0")
    if not 0 <= opts.conflict_coefficient <= 1:
        raise ConfigError("mode_options.conflict_coefficient", "must be in [0, 1]")
    if not 0 <= opts.memory_mode_reserve_fraction < 1:
        raise ConfigError("mode_options.memory_mode_reserve_fraction", "must be in [0, 1)")
    if opts.block_size <= 0:
        raise ConfigError("mode_options.block_size", "must be > 0")
    if config.usable_dram <= 0:
        raise ConfigError("topology.dram_dimm_capacity", "namespace metadata leaves no usable DRAM")
    return config


def _lat_path(key) -> str:
    tier, loc, p = key
    return f"tiers.latency.{TierKind(tier).value}.{loc}.{p}"


def load_config(document: str | Mapping[str, Any] | None = None) -> MachineConfig:
    """Build a validated config from JSON text (or an already parsed mapping).

    Any field left out keeps its calibrated default.
    """
    if document is None:
        doc: Any = {}
    elif isinstance(document, str):
        doc = json.loads(document) if document.strip() else {}
    else:
        doc = copy.deepcopy(dict(document))
    merged = _merge(to_dict(default_paper_config()), doc, "")
    try:
        config = _from_dict(merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError("<document>", str(exc)) from exc
    return validate(config)
