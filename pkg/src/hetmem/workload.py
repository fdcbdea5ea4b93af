"""Workload descriptors, the benchmark presets and trace generation."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Any, Iterator, Mapping

import numpy as np

from .config import GB

READ, WRITE = 0, 1


@dataclass(frozen=True)
class WorkloadSpec:
    pattern: str = "sequential"
    read_fraction: float = 1.0
    nt_store: bool = False
    threads: int = 48
    data_size: int = 64 * GB
    arithmetic_intensity: float = 0.0
    touched_bytes_per_media_line: int = 256

    def __post_init__(self):
        if self.pattern not in ("sequential", "random"):
            raise ValueError(f"pattern must be 'sequential' or 'random', got {self.pattern!r}")
        if not 0.0 <= self.read_fraction <= 1.0:
            raise ValueError("read_fraction must be in [0, 1]")
        if self.nt_store and self.read_fraction >= 1.0:
            raise ValueError("nt_store requires writes (read_fraction < 1)")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.data_size <= 0:
            raise ValueError("data_size must be > 0")
        if self.arithmetic_intensity < 0:
            raise ValueError("arithmetic_intensity must be >= 0")
        if not 1 <= self.touched_bytes_per_media_line <= 256:
            raise ValueError("touched_bytes_per_media_line must be in [1, 256]")

    @property
    def write_fraction(self) -> float:
        return 1.0 - self.read_fraction

    def replace(self, **changes) -> "WorkloadSpec":
        return dataclasses.replace(self, **changes)


_PRESETS: dict[str, dict[str, Any]] = {
    "accumulate": dict(read_fraction=1.0, arithmetic_intensity=1 / 8),
    "stream_copy": dict(read_fraction=0.5, arithmetic_intensity=0.0),
    "stream_triad": dict(read_fraction=2 / 3, arithmetic_intensity=2 / 16),
    "read_only": dict(read_fraction=1.0),
    "write_only": dict(read_fraction=0.0),
    "nt_write_only": dict(read_fraction=0.0, nt_store=True),
    "mix_1r1w": dict(read_fraction=0.5),
    "mix_2r1w": dict(read_fraction=2 / 3),
    "mix_3r1w": dict(read_fraction=0.75),
    "random_read": dict(pattern="random", read_fraction=1.0),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> WorkloadSpec:
    try:
        fields = _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; known presets: {', '.join(PRESET_NAMES)}") from None
    return WorkloadSpec(**fields)


def workload_from_doc(doc: str | Mapping[str, Any]) -> WorkloadSpec:
    """Accept a preset name or a mapping of WorkloadSpec fields.

    A mapping may carry ``"preset"`` to start from a preset and override
    individual fields.
    """
    if isinstance(doc, str):
        return preset(doc)
    doc = dict(doc)
    base = preset(doc.pop("preset")) if "preset" in doc else WorkloadSpec()
    known = {f.name for f in dataclasses.fields(WorkloadSpec)}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown workload field(s): {', '.join(sorted(unknown))}")
    if "data_size" in doc:
        doc["data_size"] = int(doc["data_size"])
    return base.replace(**doc)


def workload_to_doc(spec: WorkloadSpec) -> dict[str, Any]:
    return dataclasses.asdict(spec)


def effective_write_fraction(spec: WorkloadSpec, media_line_bytes: int = 256) -> float:
    """Write share of media traffic once partial-line writes are amplified."""
    from .tierperf import write_amplification

    r = spec.read_fraction
    w = 1.0 - r
    if w == 0.0:
        return 0.0
    amp = write_amplification(spec.touched_bytes_per_media_line, media_line_bytes)
    return w * amp / (r + w * amp)


@dataclass(frozen=True)
class AccessTrace:
    """Line-granular access sequence; ``kinds`` holds READ (0) / WRITE (1)."""

    addresses: np.ndarray
    kinds: np.ndarray
    line_bytes: int = 64

    def __post_init__(self):
        if len(self.addresses) == 0:
            raise ValueError("trace must be non-empty")
        if len(self.addresses) != len(self.kinds):
            raise ValueError("addresses and kinds differ in length")
        self.addresses.setflags(write=False)
        self.kinds.setflags(write=False)

    def __len__(self) -> int:
        return len(self.addresses)

    def __iter__(self) -> Iterator[tuple[int, str]]:
        for a, k in zip(self.addresses.tolist(), self.kinds.tolist()):
            yield a, "write" if k == WRITE else "read"

    @classmethod
    def from_events(cls, events, line_bytes: int = 64) -> "AccessTrace":
        addrs, kinds = [], []
        for addr, kind in events:
            addrs.append(int(addr))
            kinds.append(WRITE if kind in ("write", "W", "w", WRITE) else READ)
        return cls(np.asarray(addrs, dtype=np.int64), np.asarray(kinds, dtype=np.int8), line_bytes)


def generate_trace(spec: WorkloadSpec, seed: int, line_count: int, line_bytes: int = 64) -> AccessTrace:
    """Deterministic trace of ``line_count`` events over the workload's data."""
    if line_count < 1:
        raise ValueError("line_count must be >= 1")
    n_lines = max(1, spec.data_size // line_bytes)
    rng = np.random.Generator(np.random.PCG64(seed))
    if spec.pattern == "sequential":
        addrs = np.arange(line_count, dtype=np.int64) % n_lines
    else:
        addrs = rng.integers(0, n_lines, size=line_count, dtype=np.int64)
    if spec.read_fraction >= 1.0:
        kinds = np.zeros(line_count, dtype=np.int8)
    elif spec.read_fraction <= 0.0:
        kinds = np.ones(line_count, dtype=np.int8)
    else:
        kinds = (rng.random(line_count) >= spec.read_fraction).astype(np.int8)
    return AccessTrace(addrs, kinds, line_bytes)


def read_trace_file(path, line_bytes: int = 64) -> AccessTrace:
    """Parse ``R <index>`` / ``W <index>`` lines (blank lines and ``#`` ignored)."""
    events = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 or parts[0] not in ("R", "W") or not parts[1].isdigit():
                raise ValueError(f"{path}:{lineno}: expected 'R <index>' or 'W <index>'")
            events.append((int(parts[1]), "write" if parts[0] == "W" else "read"))
    return AccessTrace.from_events(events, line_bytes)


def write_trace_file(trace: AccessTrace, path) -> None:
    with open(path, "w") as fh:
        for addr, kind in trace:
            fh.write(f"{'W' if kind == 'write' else 'R'} {addr}\n")


def dumps_workload(spec: WorkloadSpec) -> str:
    return json.dumps(workload_to_doc(spec), indent=2)
