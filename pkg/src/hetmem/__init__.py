"""Performance, power and capacity model of a two-tier DRAM + persistent-memory server."""
from .config import GB, ConfigError, MachineConfig, TierKind, default_paper_config, load_config
from .dramcache import CacheConfig, CacheStats, analytic_hit_rate, memory_mode_perf, trace_sim
from .engine import EvalReport, Scenario, capacity_limit, compare, evaluate
from .placement import CapacityError, MemoryState, OutOfMemory, isolate_writes, spill_alloc, split_alloc, traffic_split
from .power import cpu_power, dynamic_memory_power, energy_accounting, power_efficiency, static_memory_power
from .sweeps import SweepGrid, archline, powerline, roofline
from .tierperf import composite_bandwidth, pattern_bandwidth, spill_fraction, two_socket_bandwidth, write_amplification
from .workload import AccessTrace, WorkloadSpec, generate_trace, preset

__all__ = [
    "GB", "ConfigError", "MachineConfig", "TierKind", "default_paper_config", "load_config",
    "CacheConfig", "CacheStats", "analytic_hit_rate", "memory_mode_perf", "trace_sim",
    "EvalReport", "Scenario", "capacity_limit", "compare", "evaluate",
    "CapacityError", "MemoryState", "OutOfMemory", "isolate_writes", "spill_alloc", "split_alloc", "traffic_split",
    "cpu_power", "dynamic_memory_power", "energy_accounting", "power_efficiency", "static_memory_power",
    "SweepGrid", "archline", "powerline", "roofline",
    "composite_bandwidth", "pattern_bandwidth", "spill_fraction", "two_socket_bandwidth", "write_amplification",
    "AccessTrace", "WorkloadSpec", "generate_trace", "preset",
]
