"""Named memory configurations and policies evaluated end to end.

A :class:`Scenario` pairs a workload with one of the platform
configurations; :func:`evaluate` turns it into bandwidth, latency, runtime,
power and energy, and :func:`compare` tabulates several scenarios against
the first one.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .config import MachineConfig, TierKind
from .dramcache import memory_mode_perf
from .placement import (
    BlockDescriptor,
    CapacityError,
    MemoryState,
    PlacementMap,
    Structure,
    isolate_writes,
    spill_alloc,
    structures_from_doc,
    traffic_split,
)
from .power import EnergyReport, PowerReport, cpu_power, dynamic_memory_power, energy_accounting, static_memory_power
from .tierperf import composite_bandwidth, pattern_bandwidth, two_socket_bandwidth, write_amplification
from .workload import WorkloadSpec, workload_from_doc, workload_to_doc

SINGLE_TIER_MODES = {
    "dram_local": (TierKind.DRAM, "local"),
    "dram_remote": (TierKind.DRAM, "remote"),
    "pmm_numa_local": (TierKind.PMM, "local"),
    "pmm_numa_remote": (TierKind.PMM, "remote"),
    # fsdax maps file I/O to loads and stores: same performance as the NUMA node
    "pmm_fsdax_local": (TierKind.PMM, "local"),
    "pmm_fsdax_remote": (TierKind.PMM, "remote"),
}
MEMORY_MODES = {
    "memory_mode_local": ("local", 1),
    "memory_mode_remote": ("remote", 1),
    "memory_mode_two_socket": ("local", 2),
}
TWO_SOCKET_MODES = {"dram_two_socket": TierKind.DRAM, "pmm_two_socket": TierKind.PMM}
POLICY_MODES = ("policy_spill", "policy_write_isolation")
MODES = (
    tuple(SINGLE_TIER_MODES) + tuple(MEMORY_MODES) + tuple(TWO_SOCKET_MODES)
    + ("dram_pmm_interleave",) + POLICY_MODES
)

REPORT_COLUMNS = (
    "scenario", "bandwidth_gbps", "latency_ns", "runtime_s", "mem_static_w", "mem_dyn_w", "cpu_w",
    "energy_j", "energy_per_gb",
)
RATIO_COLUMNS = ("bandwidth_ratio", "runtime_ratio", "energy_ratio")


@dataclass(frozen=True)
class Scenario:
    name: str
    mode: str
    workload: WorkloadSpec
    placement: PlacementMap | None = None
    structures: tuple[Structure, ...] | None = None
    passes: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; known modes: {', '.join(MODES)}")
        if self.passes < 1:
            raise ValueError("passes must be >= 1")
        if self.placement is not None and self.mode != "policy_spill":
            raise ValueError("an explicit placement only applies to policy_spill")
        if self.structures is not None:
            if self.mode != "policy_write_isolation":
                raise ValueError("a structure list only applies to policy_write_isolation")
            object.__setattr__(self, "structures", tuple(self.structures))
            if not self.structures:
                raise ValueError("structure list must be non-empty")

    @property
    def data_size(self) -> int:
        if self.placement is not None:
            return self.placement.total_size
        if self.structures is not None:
            return sum(s.size for s in self.structures)
        return self.workload.data_size

    def default_structures(self) -> tuple[Structure, ...]:
        """Read and write streams of the workload as two structures."""
        spec = self.workload
        out = []
        reads = round(spec.data_size * spec.read_fraction)
        if reads:
            out.append(Structure("reads", reads, 0.0))
        if spec.data_size - reads:
            out.append(Structure("writes", spec.data_size - reads, 1.0))
        return tuple(out)


def scenario_from_doc(doc: str | Mapping[str, Any]) -> Scenario:
    d = json.loads(doc) if isinstance(doc, str) else dict(doc)
    allowed = {"name", "mode", "workload", "placement", "structures", "passes"}
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown scenario field(s): {', '.join(sorted(unknown))}")
    if "mode" not in d:
        raise ValueError("scenario needs a 'mode'")
    placement = None
    if d.get("placement") is not None:
        blocks = tuple(
            BlockDescriptor(int(b["index"]), int(b["size"]), int(b["socket"]), TierKind(b["tier"]), int(b["offset"]))
            for b in d["placement"]
        )
        placement = PlacementMap(blocks, sum(b.size for b in blocks))
    structures = structures_from_doc(d["structures"]) if d.get("structures") is not None else None
    return Scenario(
        name=str(d.get("name", d["mode"])),
        mode=d["mode"],
        workload=workload_from_doc(d.get("workload", "read_only")),
        placement=placement,
        structures=structures,
        passes=int(d.get("passes", 1)),
    )


def scenario_to_doc(s: Scenario) -> dict[str, Any]:
    doc: dict[str, Any] = {"name": s.name, "mode": s.mode, "workload": workload_to_doc(s.workload),
                           "passes": s.passes}
    if s.placement is not None:
        doc["placement"] = s.placement.to_doc()
    if s.structures is not None:
        doc["structures"] = [
            {"name": x.name, "size_bytes": x.size, "write_intensity": x.write_intensity} for x in s.structures
        ]
    return doc


@dataclass(frozen=True)
class EvalReport:
    bandwidth: float
    latency: float
    runtime: float
    hit_rate: float | None
    power: PowerReport
    energy: EnergyReport
    capacity_limit: int
    bytes_moved: float

    def row(self, name: str) -> dict[str, float | str]:
        return {
            "scenario": name,
            "bandwidth_gbps": self.bandwidth,
            "latency_ns": self.latency,
            "runtime_s": self.runtime,
            "mem_static_w": self.power.memory_static,
            "mem_dyn_w": self.power.memory_dynamic,
            "cpu_w": self.power.cpu,
            "energy_j": self.energy.total,
            "energy_per_gb": self.energy.per_gigabyte,
        }


def capacity_limit(mode: str, config: MachineConfig) -> int:
    """Largest data size ``mode`` can hold on ``config``."""
    topo = config.topology
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode in MEMORY_MODES:
        _, sockets = MEMORY_MODES[mode]
        reserve = config.mode_options.memory_mode_reserve_fraction
        return int(round(topo.pmm_per_socket * sockets * (1.0 - reserve)))
    if mode in SINGLE_TIER_MODES:
        tier, _ = SINGLE_TIER_MODES[mode]
        return topo.dram_per_socket if tier is TierKind.DRAM else topo.pmm_per_socket
    if mode == "dram_two_socket":
        return config.usable_dram
    if mode == "pmm_two_socket":
        return config.pmm_capacity_total
    return config.usable_dram + config.pmm_capacity_total


def _two_socket_latency(config: MachineConfig, tier: TierKind, pattern: str) -> float:
    # threads on both sockets: half of the accesses cross the interconnect
    return config.latency(tier, "local", pattern) + 0.5 * config.tiers.numa_latency_adder


def _tier_spec(spec: WorkloadSpec, write_fraction: float) -> WorkloadSpec:
    if write_fraction <= 0.0:
        return spec.replace(read_fraction=1.0, nt_store=False)
    return spec.replace(read_fraction=1.0 - write_fraction)


@dataclass
class _Perf:
    bandwidth: float
    latency: float
    hit_rate: float | None = None
    # {tier: (traffic GB/s, spec describing that traffic)}
    traffic: dict = field(default_factory=dict)
    through_cache: bool = False
    sockets: int = 1
    pmm_writes: bool = False


def _composite_perf(config: MachineConfig, spec: WorkloadSpec, m0: float, bw_dram: float, bw_pmm: float,
                    dram_spec: WorkloadSpec, pmm_spec: WorkloadSpec) -> _Perf:
    bw = composite_bandwidth(m0, bw_dram, bw_pmm)
    lat = (m0 * _two_socket_latency(config, TierKind.DRAM, spec.pattern)
           + (1.0 - m0) * _two_socket_latency(config, TierKind.PMM, spec.pattern))
    traffic = {TierKind.DRAM: (m0 * bw, dram_spec), TierKind.PMM: ((1.0 - m0) * bw, pmm_spec)}
    return _Perf(bw, lat, traffic=traffic, sockets=config.topology.sockets,
                 pmm_writes=(1.0 - m0) > 0 and pmm_spec.write_fraction > 0)


def _performance(s: Scenario, config: MachineConfig) -> _Perf:
    spec = s.workload
    mode = s.mode
    sockets = config.topology.sockets
    if mode in SINGLE_TIER_MODES:
        tier, loc = SINGLE_TIER_MODES[mode]
        bw = pattern_bandwidth(config, tier, spec, loc).value
        return _Perf(bw, config.latency(tier, loc, spec.pattern), traffic={tier: (bw, spec)},
                     pmm_writes=tier is TierKind.PMM and spec.write_fraction > 0)
    if mode in MEMORY_MODES:
        loc, n = MEMORY_MODES[mode]
        r = memory_mode_perf(spec, config, loc, sockets=n)
        traffic = {TierKind.DRAM: (r.dram_traffic, spec), TierKind.PMM: (r.pmm_traffic, spec)}
        return _Perf(r.bandwidth, r.latency, r.hit_rate, traffic, through_cache=True, sockets=n)
    if mode in TWO_SOCKET_MODES:
        tier = TWO_SOCKET_MODES[mode]
        bw = two_socket_bandwidth(config, tier, spec)
        return _Perf(bw, _two_socket_latency(config, tier, spec.pattern), traffic={tier: (bw, spec)},
                     sockets=sockets, pmm_writes=tier is TierKind.PMM and spec.write_fraction > 0)

    bw_dram = two_socket_bandwidth(config, TierKind.DRAM, spec)
    bw_pmm = two_socket_bandwidth(config, TierKind.PMM, spec)
    size = s.data_size
    if mode == "dram_pmm_interleave":
        # pages alternate between the tiers until DRAM is exhausted
        dram_bytes = min(size / 2, config.usable_dram)
        return _composite_perf(config, spec, dram_bytes / size, bw_dram, bw_pmm, spec, spec)
    if mode == "policy_spill":
        placement = s.placement
        if placement is None:
            placement = spill_alloc(size, MemoryState.from_config(config), config.mode_options.block_size)
        m0 = traffic_split(placement).fraction_to_dram
        return _composite_perf(config, spec, m0, bw_dram, bw_pmm, spec, spec)

    structures = list(s.structures if s.structures is not None else s.default_structures())
    maps = isolate_writes(structures, MemoryState.from_config(config),
                          block_size=config.mode_options.block_size)
    dram = {"bytes": 0, "writes": 0.0}
    pmm = {"bytes": 0, "writes": 0.0}
    for st, pm in zip(structures, maps):
        for tier, acc in ((TierKind.DRAM, dram), (TierKind.PMM, pmm)):
            b = pm.bytes_in(tier)
            acc["bytes"] += b
            acc["writes"] += b * st.write_intensity
    w_dram = dram["writes"] / dram["bytes"] if dram["bytes"] else 0.0
    w_pmm = pmm["writes"] / pmm["bytes"] if pmm["bytes"] else 0.0
    m0 = dram["bytes"] / (dram["bytes"] + pmm["bytes"])
    return _composite_perf(
        config, spec, m0,
        two_socket_bandwidth(config, TierKind.DRAM, spec, w_dram),
        two_socket_bandwidth(config, TierKind.PMM, spec, w_pmm),
        _tier_spec(spec, w_dram), _tier_spec(spec.replace(touched_bytes_per_media_line=256), w_pmm),
    )


def evaluate(scenario: Scenario, config: MachineConfig) -> EvalReport:
    limit = capacity_limit(scenario.mode, config)
    size = scenario.data_size
    if size > limit:
        raise CapacityError(
            f"{scenario.name}: data size {size} bytes exceeds the {scenario.mode} limit of {limit} bytes "
            f"({limit / 1e12:.3g} TB)",
            size - limit,
        )
    perf = _performance(scenario, config)
    spec = scenario.workload

    bytes_moved = float(size * scenario.passes)
    if perf.pmm_writes:
        amp = write_amplification(spec.touched_bytes_per_media_line, config.tiers.media_line_bytes)
        bytes_moved *= 1.0 + spec.write_fraction * (amp - 1.0)
    runtime = bytes_moved / (perf.bandwidth * 1e9)

    dynamic = 0.0
    for tier, (gbps, tspec) in perf.traffic.items():
        dynamic += dynamic_memory_power({tier: gbps}, tspec, config, through_dram_cache=perf.through_cache)
    static = static_memory_power(perf.sockets, config)
    flops = spec.arithmetic_intensity * perf.bandwidth
    cpu = cpu_power(flops, config, sockets=perf.sockets, other_power=static + dynamic)
    power = PowerReport(static, dynamic, cpu)
    return EvalReport(
        bandwidth=perf.bandwidth,
        latency=perf.latency,
        runtime=runtime,
        hit_rate=perf.hit_rate,
        power=power,
        energy=energy_accounting(runtime, power, bytes_moved),
        capacity_limit=limit,
        bytes_moved=bytes_moved,
    )


@dataclass(frozen=True)
class ComparisonRow:
    scenario: str
    report: EvalReport | None
    error: str | None
    ratios: Mapping[str, float] | None


@dataclass(frozen=True)
class Comparison:
    rows: tuple[ComparisonRow, ...]

    def records(self) -> list[dict[str, Any]]:
        out = []
        for r in self.rows:
            rec: dict[str, Any] = dict.fromkeys(REPORT_COLUMNS + RATIO_COLUMNS)
            rec["scenario"] = r.scenario
            if r.report is not None:
                rec.update(r.report.row(r.scenario))
                if r.report.hit_rate is not None:
                    rec["hit_rate"] = r.report.hit_rate
            if r.ratios is not None:
                rec.update(r.ratios)
            rec["error"] = r.error
            out.append(rec)
        return out

    def to_json(self) -> str:
        return json.dumps(self.records(), indent=2)

    def to_csv(self) -> str:
        return records_to_csv(self.records(), REPORT_COLUMNS + RATIO_COLUMNS + ("error",))


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def records_to_csv(records: Iterable[Mapping[str, Any]], columns: tuple[str, ...]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([_fmt(rec.get(c)) for c in columns])
    return buf.getvalue()


def _ratio(a: float, b: float) -> float:
    return a / b if b else math.nan


def compare(scenarios: list[Scenario], config: MachineConfig) -> Comparison:
    """Evaluate every scenario; failures become error rows, not exceptions."""
    if not scenarios:
        raise ValueError("scenarios must be non-empty")
    evaluated: list[tuple[str, EvalReport | None, str | None]] = []
    for s in scenarios:
        try:
            evaluated.append((s.name, evaluate(s, config), None))
        except (ValueError, CapacityError, ZeroDivisionError) as exc:
            evaluated.append((s.name, None, f"{type(exc).__name__}: {exc}"))
    base = evaluated[0][1]
    rows = []
    for name, rep, err in evaluated:
        ratios = None
        if rep is not None and base is not None:
            ratios = {
                "bandwidth_ratio": _ratio(rep.bandwidth, base.bandwidth),
                "runtime_ratio": _ratio(rep.runtime, base.runtime),
                "energy_ratio": _ratio(rep.energy.total, base.energy.total),
            }
        rows.append(ComparisonRow(name, rep, err, ratios))
    return Comparison(tuple(rows))
