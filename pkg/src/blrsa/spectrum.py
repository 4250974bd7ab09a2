"""Flex-grid spectrum model.

Slices are 12.5 GHz wide. A channel is a contiguous block of ``size`` body
slices followed by exactly one guard-band slice, and the guard slice belongs
to the light-path that owns the channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Hashable, Optional, Sequence, Tuple

import numpy as np

from .model import DEFAULT_MODULATIONS, Demand, Modulation, ModulationTable, Topology

SLICE_WIDTH_GHZ = 12.5
SLICES_PER_TRANSCEIVER = 3
GUARD_SLICES = 1
FREE = -1


class NoFeasibleModulation(ValueError):
    pass


class SpectrumConflictError(RuntimeError):
    """Double allocation, overlap or release of a foreign light-path."""


@dataclass(frozen=True)
class Channel:
    first_slice: int
    size: int

    @property
    def body_end(self) -> int:
        """One past the last body slice."""
        return self.first_slice + self.size

    @property
    def last_slice(self) -> int:
        """Highest slice index taken, guard band included."""
        return self.first_slice + self.size + GUARD_SLICES - 1

    @property
    def span(self) -> range:
        return range(self.first_slice, self.last_slice + 1)


@dataclass(frozen=True)
class RoutingPath:
    demand_id: int
    nodes: Tuple[int, ...]
    links: Tuple[int, ...]
    length_km: float

    @classmethod
    def from_nodes(cls, topology: Topology, demand_id: int, nodes: Sequence[int]) -> "RoutingPath":
        links = []
        for u, v in zip(nodes[:-1], nodes[1:]):
            lid = topology.link_between(u, v)
            if lid is None:
                raise ValueError(f"no link {u}->{v} in topology")
            links.append(lid)
        length = float(sum(topology.links[i].length_km for i in links))
        return cls(demand_id, tuple(int(v) for v in nodes), tuple(links), length)

    @property
    def hops(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class LightPath:
    path: RoutingPath
    modulation: str
    channel: Channel

    @property
    def demand_id(self) -> int:
        return self.path.demand_id


def select_modulation(path_len_km: float, table: ModulationTable = DEFAULT_MODULATIONS) -> Modulation:
    """Highest-bitrate format whose reach covers ``path_len_km``."""
    if not path_len_km > 0:
        raise ValueError("path length must be positive")
    for m in table:
        if m.reach_km >= path_len_km:
            return m
    raise NoFeasibleModulation(
        f"no feasible modulation for {path_len_km} km (max reach {table.max_reach_km} km)"
    )


def required_slices(bitrate_gbps: float, modulation: Modulation) -> int:
    """Body slices needed: 3 per transceiver, guard band excluded."""
    if not bitrate_gbps > 0:
        raise ValueError("bitrate must be positive")
    return SLICES_PER_TRANSCEIVER * math.ceil(bitrate_gbps / modulation.bitrate_gbps)


def build_lightpath(
    path: RoutingPath,
    demand: Demand,
    first_slice: int,
    table: ModulationTable = DEFAULT_MODULATIONS,
) -> LightPath:
    m = select_modulation(path.length_km, table)
    return LightPath(path, m.name, Channel(first_slice, required_slices(demand.bitrate_gbps, m)))


class SpectrumGrid:
    """Per-link slice occupancy; every occupied cell records its owner."""

    def __init__(self, num_links: int, num_slices: int):
        if num_slices < 1:
            raise ValueError("num_slices must be >= 1")
        self.num_links = num_links
        self.num_slices = num_slices
        self.occupancy = np.full((num_links, num_slices), FREE, dtype=np.int32)
        self._tokens: Dict[Hashable, int] = {}
        self._owned: Dict[int, LightPath] = {}
        self._next_token = 0

    def copy(self) -> "SpectrumGrid":
        other = SpectrumGrid.__new__(SpectrumGrid)
        other.num_links = self.num_links
        other.num_slices = self.num_slices
        other.occupancy = self.occupancy.copy()
        other._tokens = dict(self._tokens)
        other._owned = dict(self._owned)
        other._next_token = self._next_token
        return other

    def __eq__(self, other):
        if not isinstance(other, SpectrumGrid):
            return NotImplemented
        return (
            self.num_slices == other.num_slices
            and np.array_equal(self.occupancy != FREE, other.occupancy != FREE)
            and {k: self._owned[t] for k, t in self._tokens.items()}
            == {k: other._owned[t] for k, t in other._tokens.items()}
        )

    def free_mask(self, links: Sequence[int]) -> np.ndarray:
        """Slices free on every one of ``links``."""
        if len(links) == 0:
            return np.ones(self.num_slices, dtype=bool)
        return np.all(self.occupancy[list(links)] == FREE, axis=0)

    def is_free(self, links: Sequence[int], channel: Channel) -> bool:
        if channel.first_slice < 0 or channel.last_slice >= self.num_slices:
            return False
        return bool(self.free_mask(links)[channel.first_slice : channel.last_slice + 1].all())

    def allocate(self, owner: Hashable, lightpath: LightPath) -> None:
        if owner in self._tokens:
            raise SpectrumConflictError(f"owner {owner!r} already holds a channel")
        links = list(lightpath.path.links)
        ch = lightpath.channel
        if not self.is_free(links, ch):
            raise SpectrumConflictError(
                f"channel {ch} is not free on links {links} for {owner!r}"
            )
        token = self._next_token
        self._next_token += 1
        self.occupancy[np.ix_(links, list(ch.span))] = token
        self._tokens[owner] = token
        self._owned[token] = lightpath

    def release(self, owner: Hashable, lightpath: Optional[LightPath] = None) -> None:
        token = self._tokens.get(owner)
        if token is None:
            raise SpectrumConflictError(f"{owner!r} holds no channel")
        held = self._owned[token]
        if lightpath is not None and lightpath != held:
            raise SpectrumConflictError(f"{owner!r} holds a different light-path")
        self.occupancy[np.ix_(list(held.path.links), list(held.channel.span))] = FREE
        del self._tokens[owner]
        del self._owned[token]

    def owners(self) -> Dict[Hashable, LightPath]:
        return {k: self._owned[t] for k, t in self._tokens.items()}

    def max_slice_index(self) -> int:
        used = np.flatnonzero((self.occupancy != FREE).any(axis=0))
        return int(used[-1]) if used.size else -1

    def used_slice_count(self) -> int:
        """Number of slice indices occupied on at least one link."""
        return int((self.occupancy != FREE).any(axis=0).sum())

    def path_max_slice_index(self, links: Sequence[int]) -> int:
        if len(links) == 0:
            return -1
        used = np.flatnonzero((self.occupancy[list(links)] != FREE).any(axis=0))
        return int(used[-1]) if used.size else -1


def first_fit_channel(grid: SpectrumGrid, path: RoutingPath, size: int) -> Optional[Channel]:
    """Lowest-indexed channel of ``size`` body slices (plus guard) free on the path."""
    if size < 1:
        raise ValueError("channel size must be >= 1")
    width = size + GUARD_SLICES
    if width > grid.num_slices:
        return None
    free = grid.free_mask(path.links).astype(np.int64)
    csum = np.concatenate(([0], np.cumsum(free)))
    windows = csum[width:] - csum[:-width]
    hits = np.flatnonzero(windows == width)
    if hits.size == 0:
        return None
    return Channel(int(hits[0]), size)
