"""Domain types: topology, demands, attack scenarios and problem instances.

Everything here is immutable once built, so instances can be shared freely
between solver runs and worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

EARTH_RADIUS_KM = 6371.0


class UnknownNodeError(KeyError):
    """Raised when a node id does not belong to the topology."""


@dataclass(frozen=True)
class Node:
    id: int
    name: str
    lat: float
    lon: float


@dataclass(frozen=True)
class Link:
    id: int
    src: int
    dst: int
    length_km: float


@dataclass(frozen=True)
class Demand:
    id: int
    src: int
    dst: int
    bitrate_gbps: float


@dataclass(frozen=True)
class AttackScenario:
    id: int
    target: int
    destructive_km: float
    jamming_km: float


@dataclass(frozen=True)
class Modulation:
    name: str
    bitrate_gbps: float
    reach_km: float


@dataclass(frozen=True)
class ModulationTable:
    """Modulation formats ordered by decreasing per-transceiver bitrate."""

    entries: Tuple[Modulation, ...]

    def __post_init__(self):
        rates = [m.bitrate_gbps for m in self.entries]
        reaches = [m.reach_km for m in self.entries]
        if not self.entries:
            raise ValueError("modulation table is empty")
        if any(b <= a for a, b in zip(rates[1:], rates[:-1])) or any(
            b <= a for a, b in zip(reaches[:-1], reaches[1:])
        ):
            raise ValueError(
                "modulation table must have strictly decreasing bitrate "
                "and strictly increasing reach"
            )

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def by_name(self, name: str) -> Modulation:
        for m in self.entries:
            if m.name == name:
                return m
        raise KeyError(name)

    @property
    def max_reach_km(self) -> float:
        return self.entries[-1].reach_km


# transponder operating in 37.5 GHz (3 slices)
DEFAULT_MODULATIONS = ModulationTable(
    (
        Modulation("16-QAM", 200.0, 600.0),
        Modulation("32-QAM", 150.0, 1200.0),
        Modulation("QPSK", 100.0, 3500.0),
        Modulation("BPSK", 50.0, 6300.0),
    )
)


def geo_distance(a: Node, b: Node) -> float:
    """Great-circle (haversine) distance in km between two nodes."""
    return haversine_km(a.lat, a.lon, b.lat, b.lon)


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


class Topology:
    """Directed network graph with per-node outgoing/incoming link indices.

    Link lengths come from the data, they are never recomputed from the node
    coordinates (fibre routes are longer than geodesics).
    """

    def __init__(self, nodes: Sequence[Node], links: Sequence[Link], name: str = ""):
        self.nodes: Tuple[Node, ...] = tuple(nodes)
        self.links: Tuple[Link, ...] = tuple(links)
        self.name = name
        problems = self._structural_problems()
        if problems:
            raise ValueError("invalid topology: " + "; ".join(problems))
        n = len(self.nodes)
        out_links: List[List[int]] = [[] for _ in range(n)]
        in_links: List[List[int]] = [[] for _ in range(n)]
        for link in self.links:
            out_links[link.src].append(link.id)
            in_links[link.dst].append(link.id)
        self.out_links: Tuple[Tuple[int, ...], ...] = tuple(map(tuple, out_links))
        self.in_links: Tuple[Tuple[int, ...], ...] = tuple(map(tuple, in_links))
        self._by_pair: Dict[Tuple[int, int], int] = {
            (link.src, link.dst): link.id for link in self.links
        }

    def _structural_problems(self) -> List[str]:
        problems = []
        if [v.id for v in self.nodes] != list(range(len(self.nodes))):
            problems.append("node ids must be unique and contiguous from 0")
        if [e.id for e in self.links] != list(range(len(self.links))):
            problems.append("link ids must be unique and contiguous from 0")
        for v in self.nodes:
            if not (-90.0 <= v.lat <= 90.0 and -180.0 <= v.lon <= 180.0):
                problems.append(f"node {v.id} has invalid coordinates")
        seen = set()
        n = len(self.nodes)
        for e in self.links:
            if not (0 <= e.src < n and 0 <= e.dst < n):
                problems.append(f"link {e.id} references an unknown node")
                continue
            if e.src == e.dst:
                problems.append(f"link {e.id} is a self-loop")
            if not e.length_km > 0:
                problems.append(f"link {e.id} must have positive length")
            if (e.src, e.dst) in seen:
                problems.append(f"duplicate link {e.src}->{e.dst}")
            seen.add((e.src, e.dst))
        return problems

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_links(self) -> int:
        return len(self.links)

    def link_between(self, src: int, dst: int) -> Optional[int]:
        return self._by_pair.get((src, dst))

    def incident_links(self, v: int) -> Tuple[int, ...]:
        self.check_node(v)
        return self.out_links[v] + self.in_links[v]

    def degree(self, v: int) -> int:
        return len(self.out_links[v]) + len(self.in_links[v])

    def check_node(self, v: int) -> None:
        if not (isinstance(v, (int, np.integer)) and 0 <= v < self.num_nodes):
            raise UnknownNodeError(f"unknown node id {v!r}")

    def is_connected(self) -> bool:
        """Weak connectivity (link directions ignored)."""
        if not self.nodes:
            return True
        adj: List[set] = [set() for _ in self.nodes]
        for e in self.links:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in adj[u] - seen:
                seen.add(w)
                stack.append(w)
        return len(seen) == self.num_nodes

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """|V| x |V| haversine distances between node sites."""
        n = self.num_nodes
        d = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = geo_distance(self.nodes[i], self.nodes[j])
        return d

    @cached_property
    def adjacency(self) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
        """Per node, ``(link_id, dst)`` pairs of outgoing links."""
        return tuple(
            tuple((lid, self.links[lid].dst) for lid in self.out_links[v])
            for v in range(self.num_nodes)
        )

    @cached_property
    def link_endpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        src = np.array([e.src for e in self.links], dtype=int)
        dst = np.array([e.dst for e in self.links], dtype=int)
        return src, dst

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return (self.name, self.nodes, self.links) == (other.name, other.nodes, other.links)

    def __hash__(self):
        return hash((self.name, self.nodes, self.links))

    def __repr__(self):
        return f"Topology({self.name!r}, |V|={self.num_nodes}, |E|={self.num_links})"

    # cached_property needs a __dict__; make pickling drop the caches
    def __getstate__(self):
        state = self.__dict__.copy()
        for key in ("distance_matrix", "link_endpoints", "adjacency"):
            state.pop(key, None)
        return state


def attack_affected_sets(
    topology: Topology, attack: AttackScenario
) -> Tuple[FrozenSet[int], FrozenSet[int]]:
    """Return ``(destroyed, jammed)`` node sets for an attack.

    Membership uses closed balls around the target, so boundary nodes count
    as affected and the target itself is always destroyed.
    """
    topology.check_node(attack.target)
    dist = topology.distance_matrix[attack.target]
    destroyed = frozenset(int(v) for v in np.flatnonzero(dist <= attack.destructive_km))
    jammed = frozenset(int(v) for v in np.flatnonzero(dist <= attack.jamming_km))
    return destroyed, jammed


@dataclass(frozen=True)
class ProblemInstance:
    """A complete BLRSA input: network, traffic, threats and design knobs.

    ``max_spec`` / ``max_loss`` default to |S| and |A| * sum(h_d), which keeps
    both normalised objective terms inside [0, 1].
    """

    topology: Topology
    demands: Tuple[Demand, ...]
    attacks: Tuple[AttackScenario, ...]
    num_paths: int = 1
    num_bunkers: int = 0
    num_slices: int = 320
    c_spec: float = 0.5
    c_res: float = 0.5
    max_spec: Optional[float] = None
    max_loss: Optional[float] = None
    modulations: ModulationTable = field(default=DEFAULT_MODULATIONS)

    def __post_init__(self):
        object.__setattr__(self, "demands", tuple(self.demands))
        object.__setattr__(self, "attacks", tuple(self.attacks))

    @property
    def max_spec_value(self) -> float:
        return float(self.num_slices) if self.max_spec is None else float(self.max_spec)

    @property
    def max_loss_value(self) -> float:
        if self.max_loss is not None:
            return float(self.max_loss)
        worst = len(self.attacks) * sum(d.bitrate_gbps for d in self.demands)
        return float(worst) if worst > 0 else 1.0

    @property
    def total_traffic_gbps(self) -> float:
        return float(sum(d.bitrate_gbps for d in self.demands))

    def with_params(self, **changes) -> "ProblemInstance":
        from dataclasses import replace

        return replace(self, **changes)


def validate_instance(instance: ProblemInstance) -> List[str]:
    """List every broken invariant of ``instance``; empty means valid."""
    problems: List[str] = []
    topo = instance.topology
    n = topo.num_nodes
    if not topo.is_connected():
        problems.append("topology is not connected")
    if not (0.0 <= instance.c_spec <= 1.0 and 0.0 <= instance.c_res <= 1.0):
        problems.append("weights must lie in [0, 1]")
    if not math.isclose(instance.c_spec + instance.c_res, 1.0, abs_tol=1e-9):
        problems.append("weights must sum to 1")
    if instance.num_paths < 1:
        problems.append("num_paths must be >= 1")
    if not 0 <= instance.num_bunkers <= n:
        problems.append("num_bunkers must lie in [0, |V|]")
    if instance.num_slices < 1:
        problems.append("num_slices must be >= 1")
    if instance.max_spec is not None and not instance.max_spec > 0:
        problems.append("MAX_SPEC must be positive")
    if instance.max_loss is not None and not instance.max_loss > 0:
        problems.append("MAX_LOSS must be positive")
    seen = set()
    for d in instance.demands:
        if d.id in seen:
            problems.append(f"duplicate demand id {d.id}")
        seen.add(d.id)
        if not (0 <= d.src < n and 0 <= d.dst < n):
            problems.append(f"demand {d.id} references an unknown node")
        elif d.src == d.dst:
            problems.append(f"demand {d.id} has src == dst")
        if not d.bitrate_gbps > 0:
            problems.append(f"demand {d.id} must have positive bitrate")
    seen = set()
    for a in instance.attacks:
        if a.id in seen:
            problems.append(f"duplicate attack id {a.id}")
        seen.add(a.id)
        if not 0 <= a.target < n:
            problems.append(f"attack {a.id} targets an unknown node")
        if not a.jamming_km >= a.destructive_km >= 0:
            problems.append(f"attack {a.id} must satisfy jamming >= destructive >= 0")
    return problems
