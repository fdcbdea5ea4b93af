"""Block allocation policies over an abstract two-tier, multi-socket memory.

``spill_alloc`` fills DRAM round-robin across sockets and overflows to PMM;
``split_alloc`` spreads a structure over every socket's PMM; and
``isolate_writes`` sends write-intensive structures to DRAM and the rest to
split PMM.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .config import MachineConfig, TierKind
from .tierperf import TrafficSplit


class OutOfMemory(Exception):
    def __init__(self, message: str, shortfall: int = 0):
        self.shortfall = shortfall
        super().__init__(message)


class CapacityError(OutOfMemory):
    pass


@dataclass
class MemoryState:
    """Free/capacity bytes per ``(socket, tier)``; mutated by the allocators."""

    capacity: dict[tuple[int, TierKind], int]
    free: dict[tuple[int, TierKind], int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.free:
            self.free = dict(self.capacity)
        for key, cap in self.capacity.items():
            if not 0 <= self.free[key] <= cap:
                raise ValueError(f"free bytes out of range for {key}")

    @classmethod
    def uniform(cls, sockets: int, dram: int, pmm: int) -> "MemoryState":
        cap = {}
        for s in range(sockets):
            cap[(s, TierKind.DRAM)] = dram
            cap[(s, TierKind.PMM)] = pmm
        return cls(cap)

    @classmethod
    def from_config(cls, config: MachineConfig) -> "MemoryState":
        """App Direct view: usable DRAM (after namespace metadata) and all PMM."""
        sockets = config.topology.sockets
        return cls.uniform(sockets, config.usable_dram // sockets, config.topology.pmm_per_socket)

    @property
    def sockets(self) -> int:
        return 1 + max(s for s, _ in self.capacity)

    def free_in(self, tier: TierKind) -> int:
        return sum(v for (s, t), v in self.free.items() if t is tier)

    def total_free(self) -> int:
        return sum(self.free.values())

    def copy(self) -> "MemoryState":
        return MemoryState(dict(self.capacity), dict(self.free))

    def _take(self, socket: int, tier: TierKind, size: int) -> None:
        self.free[(socket, tier)] -= size


@dataclass(frozen=True)
class BlockDescriptor:
    index: int
    size: int
    socket: int
    tier: TierKind
    offset: int = 0

    def __post_init__(self):
        if self.size <= 0:
            raise ValueError("block size must be > 0")


@dataclass(frozen=True)
class PlacementMap:
    blocks: tuple[BlockDescriptor, ...]
    total_size: int

    def __post_init__(self):
        if sum(b.size for b in self.blocks) != self.total_size:
            raise ValueError("block sizes do not add up to total_size")
        pos = 0
        for i, b in enumerate(self.blocks):
            if b.index != i or b.offset != pos:
                raise ValueError("blocks must be contiguous and in virtual order")
            pos += b.size

    def bytes_in(self, tier: TierKind, socket: int | None = None) -> int:
        return sum(b.size for b in self.blocks if b.tier is tier and (socket is None or b.socket == socket))

    def bytes_on_socket(self, socket: int) -> int:
        return sum(b.size for b in self.blocks if b.socket == socket)

    def to_doc(self) -> list[dict[str, Any]]:
        return [
            {"index": b.index, "offset": b.offset, "size": b.size, "socket": b.socket, "tier": b.tier.value}
            for b in self.blocks
        ]


class _Builder:
    def __init__(self):
        self.blocks: list[BlockDescriptor] = []
        self.offset = 0

    def add(self, size: int, socket: int, tier: TierKind) -> None:
        self.blocks.append(BlockDescriptor(len(self.blocks), size, socket, tier, self.offset))
        self.offset += size

    def build(self) -> PlacementMap:
        return PlacementMap(tuple(self.blocks), self.offset)


def _block_sizes(size: int, block_size: int) -> list[int]:
    full, rest = divmod(size, block_size)
    return [block_size] * full + ([rest] if rest else [])


def spill_alloc(size: int, state: MemoryState, block_size: int) -> PlacementMap:
    """Round-robin blocks over sockets, DRAM first, PMM once DRAM runs out."""
    if size <= 0 or block_size <= 0:
        raise ValueError("size and block_size must be > 0")
    free = state.total_free()
    if free < size:
        raise OutOfMemory(f"need {size} bytes, {free} free (short by {size - free})", size - free)
    sockets = state.sockets
    out = _Builder()
    for i, blk in enumerate(_block_sizes(size, block_size)):
        home = i % sockets
        candidates = [(home, TierKind.DRAM), (home, TierKind.PMM)]
        # home socket full: fall through to the others in round-robin order
        for k in range(1, sockets):
            s = (home + k) % sockets
            candidates += [(s, TierKind.DRAM), (s, TierKind.PMM)]
        for key in candidates:
            if state.free[key] >= blk:
                state._take(*key, blk)
                out.add(blk, *key)
                break
        else:
            raise OutOfMemory(f"no (socket, tier) has room for a {blk}-byte block", blk)
    return out.build()


def _dram_only_alloc(size: int, state: MemoryState, block_size: int, name: str) -> PlacementMap:
    sockets = state.sockets
    out = _Builder()
    for i, blk in enumerate(_block_sizes(size, block_size)):
        for k in range(sockets):
            key = ((i + k) % sockets, TierKind.DRAM)
            if state.free[key] >= blk:
                state._take(*key, blk)
                out.add(blk, *key)
                break
        else:
            raise CapacityError(f"write-intensive structure {name!r} does not fit in DRAM", blk)
    return out.build()


def split_alloc(size: int, state: MemoryState, parts: int) -> PlacementMap:
    """Cut ``size`` into ``parts`` near-equal segments on alternating sockets' PMM.

    A segment that does not fit its socket continues on the next socket.
    """
    if size <= 0:
        raise ValueError("size must be > 0")
    if parts < 1:
        raise ValueError("parts must be >= 1")
    pmm_free = state.free_in(TierKind.PMM)
    if pmm_free < size:
        raise OutOfMemory(f"need {size} bytes of PMM, {pmm_free} free (short by {size - pmm_free})",
                          size - pmm_free)
    sockets = state.sockets
    base, extra = divmod(size, parts)
    out = _Builder()
    for seg in range(parts):
        remaining = base + (1 if seg < extra else 0)
        k = 0
        while remaining:
            socket = (seg + k) % sockets
            room = state.free[(socket, TierKind.PMM)]
            piece = min(room, remaining)
            if piece:
                state._take(socket, TierKind.PMM, piece)
                out.add(piece, socket, TierKind.PMM)
                remaining -= piece
            k += 1
    return out.build()


@dataclass(frozen=True)
class Structure:
    name: str
    size: int
    write_intensity: float

    def __post_init__(self):
        if self.size <= 0:
            raise ValueError("structure size must be > 0")
        if not 0.0 <= self.write_intensity <= 1.0:
            raise ValueError("write_intensity must be in [0, 1]")


def structures_from_doc(doc: str | Iterable[Mapping[str, Any]]) -> list[Structure]:
    """Parse the structure-list document: ``[{name, size_bytes, write_intensity}]``."""
    items = json.loads(doc) if isinstance(doc, str) else doc
    return [Structure(str(d["name"]), int(d["size_bytes"]), float(d["write_intensity"])) for d in items]


def isolate_writes(structures: list[Structure], state: MemoryState, threshold: float = 0.5,
                   block_size: int = 10**9) -> list[PlacementMap]:
    """Write-intensive structures (``write_intensity >= threshold``) go to DRAM,
    the rest are split across every socket's PMM.  Results follow input order."""
    if not structures:
        raise ValueError("structures must be non-empty")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    heavy = [i for i, s in enumerate(structures) if s.write_intensity >= threshold]
    light = [i for i, s in enumerate(structures) if s.write_intensity < threshold]
    dram_free = state.free_in(TierKind.DRAM)
    need = 0
    for i in heavy:
        need += structures[i].size
        if need > dram_free:
            raise CapacityError(
                f"write-intensive structure {structures[i].name!r} does not fit in DRAM "
                f"({need} bytes needed, {dram_free} free)",
                need - dram_free,
            )
    placed: dict[int, PlacementMap] = {}
    for i in heavy:
        placed[i] = _dram_only_alloc(structures[i].size, state, block_size, structures[i].name)
    for i in light:
        placed[i] = split_alloc(structures[i].size, state, state.sockets)
    return [placed[i] for i in range(len(structures))]


def traffic_split(placement: PlacementMap, spec=None) -> TrafficSplit:
    """DRAM share of traffic assuming every byte of the allocation is touched equally."""
    if not placement.blocks:
        raise ValueError("placement is empty")
    dram = placement.bytes_in(TierKind.DRAM)
    return TrafficSplit.from_dram_fraction(dram / placement.total_size)
