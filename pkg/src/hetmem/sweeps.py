"""Roofline, power-line and arch-line sweeps over arithmetic intensity and
the share of (read) traffic sent to PMM."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from .config import MachineConfig, TierKind
from .power import cpu_power, dynamic_memory_power, static_memory_power
from .tierperf import composite_bandwidth, two_socket_bandwidth
from .workload import preset

CSV_COLUMNS = ("ai", "distribution_pmm", "perf_gflops", "power_w", "eff_gflops_per_j")


def _default_ai() -> tuple[float, ...]:
    return tuple(2.0**k for k in range(-3, 7))


def _default_distributions() -> tuple[float, ...]:
    return tuple(i / 10 for i in range(11))


@dataclass(frozen=True)
class SweepGrid:
    ai_values: tuple[float, ...] = field(default_factory=_default_ai)
    distributions: tuple[float, ...] = field(default_factory=_default_distributions)

    def __post_init__(self):
        for name in ("ai_values", "distributions"):
            values = tuple(float(v) for v in getattr(self, name))
            if not values:
                raise ValueError(f"{name} must be non-empty")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ValueError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, values)
        if self.ai_values[0] <= 0:
            raise ValueError("arithmetic intensities must be > 0")
        if self.distributions[0] < 0 or self.distributions[-1] > 1:
            raise ValueError("distributions must lie in [0, 1]")

    @classmethod
    def from_doc(cls, doc: str | Mapping[str, Any]) -> "SweepGrid":
        d = json.loads(doc) if isinstance(doc, str) else dict(doc)
        unknown = set(d) - {"ai_values", "distributions"}
        if unknown:
            raise ValueError(f"unknown grid field(s): {', '.join(sorted(unknown))}")
        return cls(**{k: tuple(v) for k, v in d.items()})


@dataclass(frozen=True)
class SweepPoint:
    ai: float
    distribution: float
    bandwidth: float
    attainable_perf: float
    memory_power: float
    cpu_power: float
    total_power: float
    energy_efficiency: float


@dataclass(frozen=True)
class SweepResult:
    kind: str
    peak_compute: float
    points: tuple[SweepPoint, ...]
    ridge: Mapping[float, float]
    bandwidth: Mapping[float, float]

    def curve(self, distribution: float, attr: str = "attainable_perf") -> list[tuple[float, float]]:
        return [(p.ai, getattr(p, attr)) for p in self.points if p.distribution == distribution]

    def at(self, ai: float, distribution: float) -> SweepPoint:
        for p in self.points:
            if p.ai == ai and p.distribution == distribution:
                return p
        raise KeyError((ai, distribution))

    def power_peak(self, distribution: float) -> float:
        """AI at which total power peaks for one distribution."""
        return max(self.curve(distribution, "total_power"), key=lambda c: c[1])[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for p in sorted(self.points, key=lambda p: (p.distribution, p.ai)):
            writer.writerow(
                [_fmt(p.ai), _fmt(p.distribution), _fmt(p.attainable_perf), _fmt(p.total_power),
                 _fmt(p.energy_efficiency)]
            )
        return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def distribution_bandwidth(config: MachineConfig, distribution: float) -> float:
    """Two-socket read bandwidth with ``distribution`` of traffic on PMM."""
    spec = preset("read_only")
    bw_dram = two_socket_bandwidth(config, TierKind.DRAM, spec)
    bw_pmm = two_socket_bandwidth(config, TierKind.PMM, spec)
    return composite_bandwidth(1.0 - distribution, bw_dram, bw_pmm)


def _sweep(config: MachineConfig, grid: SweepGrid, kind: str) -> SweepResult:
    peak = config.mode_options.peak_compute
    spec = preset("read_only")
    sockets = config.topology.sockets
    static = static_memory_power(sockets, config)
    points = []
    ridge = {}
    bws = {}
    for d in grid.distributions:
        bw = distribution_bandwidth(config, d)
        bws[d] = bw
        ridge[d] = peak / bw
        for ai in grid.ai_values:
            perf = min(peak, ai * bw)
            traffic = perf / ai
            mem = static + dynamic_memory_power(
                {TierKind.DRAM: (1.0 - d) * traffic, TierKind.PMM: d * traffic}, spec, config
            )
            cpu = cpu_power(perf, config, sockets, other_power=mem)
            total = mem + cpu
            points.append(SweepPoint(ai, d, bw, perf, mem, cpu, total, perf / total))
    return SweepResult(kind, peak, tuple(points), ridge, bws)


def roofline(config: MachineConfig, grid: SweepGrid | None = None) -> SweepResult:
    """Attainable Gflop/s = min(peak, AI x bandwidth(distribution))."""
    return _sweep(config, grid or SweepGrid(), "roofline")


def powerline(config: MachineConfig, grid: SweepGrid | None = None) -> SweepResult:
    """Platform power (CPU + memory on all sockets) at every grid point."""
    return _sweep(config, grid or SweepGrid(), "powerline")


def archline(config: MachineConfig, grid: SweepGrid | None = None) -> SweepResult:
    """Energy efficiency (Gflop/J) = attainable perf / platform power."""
    return _sweep(config, grid or SweepGrid(), "archline")


SWEEPS = {"roofline": roofline, "powerline": powerline, "archline": archline}

_PLOTTED = {
    "roofline": ("attainable_perf", "Gflop/s"),
    "powerline": ("total_power", "W"),
    "archline": ("energy_efficiency", "Gflop/J"),
}


def write_svg(result: SweepResult, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    attr, unit = _PLOTTED[result.kind]
    fig, ax = plt.subplots(figsize=(6, 4))
    for d in sorted(result.ridge):
        xs, ys = zip(*result.curve(d, attr))
        ax.plot(xs, ys, marker="o", markersize=3, label=f"{d:.0%} PMM")
    ax.set_xscale("log", base=2)
    if result.kind == "roofline":
        ax.set_yscale("log", base=2)
    ax.set_xlabel("arithmetic intensity (flop/byte)")
    ax.set_ylabel(unit)
    ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
