"""Link vulnerability matrix and the bunker-location policies.

A node is out of service under an attack if it is destroyed, or if it is
jammed and not shielded by a bunker. A link is out if either end is out.
"""

from __future__ import annotations

from enum import Enum
from typing import FrozenSet, Iterable, Sequence, Tuple

import numpy as np

from .model import AttackScenario, Topology


class BunkerPolicy(str, Enum):
    AVG_NEIGHBOUR = "AvgNeighbour"
    MIN_NEIGHBOUR = "MinNeighbour"
    NODAL_DEGREE = "NodalDegree"
    ADAPTIVE_AVG = "AdaptiveAvg"
    ADAPTIVE_MAX = "AdaptiveMax"

    @classmethod
    def parse(cls, name) -> "BunkerPolicy":
        if isinstance(name, cls):
            return name
        key = str(name).replace("/", "").replace("_", "").replace("-", "").lower()
        for policy in cls:
            if policy.value.lower() == key:
                return policy
        raise ValueError(
            f"unknown bunker policy {name!r}; expected one of "
            + ", ".join(p.value for p in cls)
        )


def attack_masks(
    topology: Topology, attacks: Sequence[AttackScenario]
) -> Tuple[np.ndarray, np.ndarray]:
    """Boolean ``(destroyed, jammed)`` arrays of shape |A| x |V|."""
    n = topology.num_nodes
    if not attacks:
        empty = np.zeros((0, n), dtype=bool)
        return empty, empty.copy()
    for a in attacks:
        topology.check_node(a.target)
    dist = topology.distance_matrix[[a.target for a in attacks]]
    destr = np.array([a.destructive_km for a in attacks])[:, None]
    jam = np.array([a.jamming_km for a in attacks])[:, None]
    return dist <= destr, dist <= jam


def node_down(
    topology: Topology, attacks: Sequence[AttackScenario], bunkers: Iterable[int] = ()
) -> np.ndarray:
    """|A| x |V| mask of nodes that stop operating under each attack."""
    destroyed, jammed = attack_masks(topology, attacks)
    protected = np.zeros(topology.num_nodes, dtype=bool)
    protected[list(bunkers)] = True
    return destroyed | (jammed & ~protected)


def link_down(
    topology: Topology, attacks: Sequence[AttackScenario], bunkers: Iterable[int] = ()
) -> np.ndarray:
    """|A| x |E| mask of links that stop working under each attack."""
    down = node_down(topology, attacks, bunkers)
    src, dst = topology.link_endpoints
    return down[:, src] | down[:, dst]


def compute_vul_matrix(
    topology: Topology, attacks: Sequence[AttackScenario], bunkers: Iterable[int] = ()
) -> np.ndarray:
    """|V| x |V| count of attacks disabling link i->j (0 where no link)."""
    n = topology.num_nodes
    vul = np.zeros((n, n), dtype=np.int64)
    if topology.num_links == 0 or not attacks:
        return vul
    counts = link_down(topology, attacks, bunkers).sum(axis=0)
    src, dst = topology.link_endpoints
    vul[src, dst] = counts
    return vul


def link_weights(topology: Topology, matrix: np.ndarray) -> np.ndarray:
    """Per-link view (indexed by link id) of a |V| x |V| matrix."""
    src, dst = topology.link_endpoints
    return matrix[src, dst]


def node_vulnerability(matrix: np.ndarray, topology: Topology, v: int, mode: str = "avg") -> float:
    links = topology.incident_links(v)
    if not links:
        raise ValueError(f"node {v} has no incident links")
    values = link_weights(topology, matrix)[list(links)]
    if mode == "avg":
        return float(values.mean())
    if mode == "max":
        return float(values.max())
    raise ValueError(f"mode must be 'avg' or 'max', got {mode!r}")


def _neighbour_distances(topology: Topology, v: int) -> np.ndarray:
    return np.array([topology.links[e].length_km for e in topology.incident_links(v)])


def _ranked(scores: Sequence[float]) -> list:
    # lowest score first, lowest node id on ties
    return sorted(range(len(scores)), key=lambda v: (scores[v], v))


def place_bunkers(
    policy,
    topology: Topology,
    attacks: Sequence[AttackScenario],
    budget: int,
) -> FrozenSet[int]:
    """Choose ``min(budget, |V|)`` bunker nodes according to ``policy``."""
    policy = BunkerPolicy.parse(policy)
    n = topology.num_nodes
    if budget < 0:
        raise ValueError("budget must be non-negative")
    budget = min(budget, n)
    if budget == 0:
        return frozenset()

    if policy in (BunkerPolicy.AVG_NEIGHBOUR, BunkerPolicy.MIN_NEIGHBOUR):
        reduce = np.mean if policy is BunkerPolicy.AVG_NEIGHBOUR else np.min
        scores = []
        for v in range(n):
            d = _neighbour_distances(topology, v)
            scores.append(float(reduce(d)) if d.size else float("inf"))
        return frozenset(_ranked(scores)[:budget])

    if policy is BunkerPolicy.NODAL_DEGREE:
        return frozenset(_ranked([-topology.degree(v) for v in range(n)])[:budget])

    mode = "avg" if policy is BunkerPolicy.ADAPTIVE_AVG else "max"
    chosen: list = []
    for _ in range(budget):
        matrix = compute_vul_matrix(topology, attacks, chosen)
        best, best_score = None, -np.inf
        for v in range(n):
            if v in chosen or topology.degree(v) == 0:
                continue
            score = node_vulnerability(matrix, topology, v, mode)
            if score > best_score:
                best, best_score = v, score
        if best is None:
            # only isolated nodes remain
            best = min(set(range(n)) - set(chosen))
        chosen.append(best)
    return frozenset(chosen)
