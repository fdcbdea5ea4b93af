"""Memory and CPU power, energy accounting and efficiency metrics."""
from __future__ import annotations

from dataclasses import dataclass

from .config import MachineConfig, TierKind
from .tierperf import mix_weights, tier_write_fraction
from .workload import WorkloadSpec


class UndefinedEfficiency(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class PowerReport:
    memory_static: float
    memory_dynamic: float
    cpu: float

    def __post_init__(self):
        if min(self.memory_static, self.memory_dynamic, self.cpu) < 0:
            raise ValueError("power components must be >= 0")

    @property
    def total(self) -> float:
        return self.memory_static + self.memory_dynamic + self.cpu


@dataclass(frozen=True)
class EnergyReport:
    static_energy: float
    dynamic_energy: float
    cpu_energy: float
    per_gigabyte: float

    @property
    def total(self) -> float:
        return self.static_energy + self.dynamic_energy + self.cpu_energy

    @property
    def static_fraction(self) -> float:
        return self.static_energy / self.total if self.total else 0.0


def dynamic_coefficient(config: MachineConfig, tier: TierKind, spec: WorkloadSpec) -> float:
    """W per GB/s for ``spec``'s mix on ``tier`` (interpolated like bandwidth)."""
    table = (
        config.power.dram_dynamic_coefficient
        if TierKind(tier) is TierKind.DRAM
        else config.power.pmm_dynamic_coefficient
    )
    w = tier_write_fraction(config, tier, spec)
    return sum(weight * table[mix] for mix, weight in mix_weights(w, spec.nt_store))


def dynamic_memory_power(traffic: dict, spec: WorkloadSpec, config: MachineConfig,
                         through_dram_cache: bool = False) -> float:
    """Dynamic memory power for per-tier traffic ``{TierKind: GB/s}``.

    NT-store traffic going through the Memory-mode DRAM cache pays the
    configured surcharge on the DRAM term.
    """
    dram = traffic.get(TierKind.DRAM, 0.0)
    pmm = traffic.get(TierKind.PMM, 0.0)
    if dram < 0 or pmm < 0:
        raise ValueError("traffic must be >= 0")
    dram_term = dynamic_coefficient(config, TierKind.DRAM, spec) * dram
    if through_dram_cache and spec.nt_store:
        dram_term *= 1.0 + config.power.nt_write_cache_power_surcharge
    return dram_term + dynamic_coefficient(config, TierKind.PMM, spec) * pmm


def static_memory_power(sockets_active: int, config: MachineConfig | None = None) -> float:
    if sockets_active < 0:
        raise ValueError("sockets_active must be >= 0")
    per_socket = 38.0 if config is None else config.power.static_memory_power_per_socket
    return per_socket * sockets_active


def power_efficiency(bandwidth: float, dynamic_power: float) -> float:
    """GB/s delivered per W of dynamic memory power."""
    if dynamic_power == 0:
        raise UndefinedEfficiency("efficiency undefined at zero dynamic power")
    if dynamic_power < 0:
        raise ValueError("dynamic_power must be > 0")
    return bandwidth / dynamic_power


def cpu_power(achieved_flops: float, config: MachineConfig, sockets: int | None = None,
              other_power: float = 0.0) -> float:
    """Affine CPU power in achieved Gflop/s over ``sockets`` active sockets.

    The result is clamped so that ``cpu + other_power`` stays under the
    platform power cap.
    """
    if achieved_flops < 0:
        raise ValueError("achieved_flops must be >= 0")
    n = config.topology.sockets if sockets is None else sockets
    peak = config.mode_options.peak_compute * n / config.topology.sockets
    p = config.power
    watts = n * (p.cpu_static_power_per_socket + p.cpu_dynamic_peak_power_per_socket * min(1.0, achieved_flops / peak))
    return max(0.0, min(watts, p.platform_power_cap - other_power))


def energy_accounting(runtime: float, power: PowerReport, bytes_moved: float) -> EnergyReport:
    if runtime <= 0:
        raise ValueError("runtime must be > 0")
    static = power.memory_static * runtime
    dynamic = power.memory_dynamic * runtime
    cpu = power.cpu * runtime
    total = static + dynamic + cpu
    per_gb = total / (bytes_moved / 1e9) if bytes_moved > 0 else float("inf")
    return EnergyReport(static, dynamic, cpu, per_gb)
