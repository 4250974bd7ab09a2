"""Routing and spectrum assignment heuristics for placed bunkers.

Four methods share one skeleton (demands in decreasing bitrate, ``|P|``
light-paths each, one global spectrum grid):

* ``1s-rsa``: joint routing + spectrum, candidate light-paths scored by a
  weighted spectrum/vulnerability cost.
* ``2s-rsa``: vulnerability-aware routing for every demand first, then
  first-fit spectrum in the same demand order.
* ``ff-rsa``: km-shortest paths with first-fit channels.
* ``ld-rsa``: 40 km-shortest candidates, picking the least-overlapping ones.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .model import Demand, ProblemInstance, Topology
from .paths import iter_shortest_paths, k_shortest_paths, km_weights, path_weight
from .spectrum import (
    LightPath,
    NoFeasibleModulation,
    RoutingPath,
    SpectrumGrid,
    first_fit_channel,
    required_slices,
    select_modulation,
)
from .vulnerability import compute_vul_matrix, link_weights

logger = logging.getLogger(__name__)

ALGORITHMS = ("1s-rsa", "2s-rsa", "ff-rsa", "ld-rsa")
LAMBDA_GRID = (5, 10, 15, 20, 25, 30)


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs that are not part of the problem instance.

    ``lam`` is the candidate-path count of 1S-RSA; ``k_candidates`` is the
    LD-RSA candidate pool size.
    """

    lam: int = 30
    k_candidates: int = 40

    def __post_init__(self):
        if self.lam < 1:
            raise ValueError("lambda must be >= 1")
        if self.k_candidates < 1:
            raise ValueError("k_candidates must be >= 1")


@dataclass
class Solution:
    bunkers: FrozenSet[int]
    lightpaths: Dict[int, List[LightPath]]
    grid: SpectrumGrid
    blocked: Dict[int, int] = field(default_factory=dict)
    algorithm: str = ""

    def all_lightpaths(self) -> List[LightPath]:
        return [lp for d in sorted(self.lightpaths) for lp in self.lightpaths[d]]

    @property
    def is_complete(self) -> bool:
        return not any(self.blocked.values())

    def blocked_gbps(self, instance: ProblemInstance) -> float:
        rates = {d.id: d.bitrate_gbps for d in instance.demands}
        return float(sum(rates[d] for d, n in self.blocked.items() if n))

    def same_as(self, other: "Solution") -> bool:
        return (
            self.bunkers == other.bunkers
            and {d: list(v) for d, v in self.lightpaths.items()}
            == {d: list(v) for d, v in other.lightpaths.items()}
            and self.blocked == other.blocked
        )


def sort_demands(demands: Iterable[Demand]) -> List[Demand]:
    """Decreasing bitrate; lower id first on ties."""
    return sorted(demands, key=lambda d: (-d.bitrate_gbps, d.id))


def path_similarity(p1: RoutingPath, p2: RoutingPath) -> int:
    """Number of directed links the two paths share."""
    return len(set(p1.links) & set(p2.links))


def modified_vul_matrix(selected: Sequence, base: np.ndarray) -> np.ndarray:
    """Scale each link entry by (number of ``selected`` paths using it + 1)."""
    popularity = np.ones(base.shape, dtype=float)
    for item in selected:
        path = item.path if isinstance(item, LightPath) else item
        for u, v in zip(path.nodes[:-1], path.nodes[1:]):
            popularity[u, v] += 1.0
    return base * popularity


def find_sld_paths(
    topology: Topology,
    demand: Demand,
    selected: Sequence,
    vul: np.ndarray,
    count: int,
) -> List[RoutingPath]:
    """Paths link-disjoint with ``selected``, ranked by vulnerability weight."""
    used = set()
    for item in selected:
        path = item.path if isinstance(item, LightPath) else item
        used.update(path.links)
    return k_shortest_paths(
        topology,
        link_weights(topology, vul),
        demand.src,
        demand.dst,
        count,
        excluded_links=used,
        demand_id=demand.id,
    )


def lightpath_cost(
    s_max: int,
    vul_length: float,
    c_spec: float,
    c_res: float,
    num_slices: int,
    len_max: float,
) -> float:
    """Candidate cost: spectrum position vs. vulnerability-weighted length."""
    res_term = vul_length / len_max if len_max > 0 else 0.0
    return c_spec * s_max / num_slices + c_res * res_term


def _lightpath_on(grid: SpectrumGrid, path: RoutingPath, demand: Demand, instance) -> Optional[LightPath]:
    try:
        mod = select_modulation(path.length_km, instance.modulations)
    except NoFeasibleModulation:
        return None
    channel = first_fit_channel(grid, path, required_slices(demand.bitrate_gbps, mod))
    if channel is None:
        return None
    return LightPath(path, mod.name, channel)


class _Run:
    """Mutable state shared by one solver invocation."""

    def __init__(self, instance: ProblemInstance, bunkers, name: str):
        self.instance = instance
        self.topology = instance.topology
        self.bunkers = frozenset(int(b) for b in bunkers)
        self.grid = SpectrumGrid(self.topology.num_links, instance.num_slices)
        self.lightpaths: Dict[int, List[LightPath]] = {}
        self.blocked: Dict[int, int] = {}
        self.name = name
        self.order = sort_demands(instance.demands)
        for d in self.order:
            self.lightpaths[d.id] = []

    def commit(self, demand: Demand, lp: Optional[LightPath]) -> None:
        if lp is None:
            self.blocked[demand.id] = self.blocked.get(demand.id, 0) + 1
            logger.debug("%s: demand %d blocked", self.name, demand.id)
            return
        key = (demand.id, len(self.lightpaths[demand.id]))
        self.grid.allocate(key, lp)
        self.lightpaths[demand.id].append(lp)

    def place_first_fit(self, demand: Demand, paths: Sequence[RoutingPath]) -> None:
        for path in paths:
            self.commit(demand, _lightpath_on(self.grid, path, demand, self.instance))

    def solution(self) -> Solution:
        return Solution(self.bunkers, self.lightpaths, self.grid, self.blocked, self.name)


def solve_1s_rsa(instance: ProblemInstance, bunkers, config: SolverConfig = SolverConfig()) -> Solution:
    run = _Run(instance, bunkers, "1s-rsa")
    topo = run.topology
    vul = compute_vul_matrix(topo, instance.attacks, run.bunkers)
    len_max = float(len(instance.attacks) * topo.num_links)
    for demand in run.order:
        for _ in range(instance.num_paths):
            lp = _find_next_lightpath(run, demand, vul, config.lam, len_max)
            run.commit(demand, lp)
    return run.solution()


def _find_next_lightpath(run: _Run, demand: Demand, vul: np.ndarray, lam: int, len_max: float):
    instance, topo = run.instance, run.topology
    selected = run.lightpaths[demand.id]
    candidates = find_sld_paths(topo, demand, selected, vul, lam)
    # LEN(l) of every candidate uses this one popularity-scaled matrix
    weights = link_weights(topo, modified_vul_matrix(selected, vul))
    if len(candidates) < lam:
        have = {p.nodes for p in candidates}
        for _, nodes, links in iter_shortest_paths(topo, weights, demand.src, demand.dst):
            if nodes in have:
                continue
            length = float(sum(topo.links[i].length_km for i in links))
            candidates.append(RoutingPath(demand.id, nodes, links, length))
            if len(candidates) == lam:
                break

    best, best_cost = None, None
    for path in candidates:
        lp = _lightpath_on(run.grid, path, demand, instance)
        if lp is None:
            continue
        cost = lightpath_cost(
            lp.channel.last_slice,
            path_weight(path, weights),
            instance.c_spec,
            instance.c_res,
            instance.num_slices,
            len_max,
        )
        if best_cost is None or cost < best_cost:
            best, best_cost = lp, cost
    return best


def solve_2s_rsa(instance: ProblemInstance, bunkers, config: SolverConfig = SolverConfig()) -> Solution:
    run = _Run(instance, bunkers, "2s-rsa")
    topo = run.topology
    vul = compute_vul_matrix(topo, instance.attacks, run.bunkers)
    routes: Dict[int, List[RoutingPath]] = {}
    for demand in run.order:
        chosen: List[RoutingPath] = []
        for _ in range(instance.num_paths):
            path = _find_next_path(topo, demand, chosen, vul)
            if path is None:
                run.blocked[demand.id] = run.blocked.get(demand.id, 0) + 1
            else:
                chosen.append(path)
        routes[demand.id] = chosen
    for demand in run.order:
        run.place_first_fit(demand, routes[demand.id])
    return run.solution()


def _find_next_path(topo: Topology, demand: Demand, chosen, vul) -> Optional[RoutingPath]:
    sld = find_sld_paths(topo, demand, chosen, vul, 1)
    if sld:
        return sld[0]
    weights = link_weights(topo, modified_vul_matrix(chosen, vul))
    found = k_shortest_paths(topo, weights, demand.src, demand.dst, 1, demand_id=demand.id)
    return found[0] if found else None


def solve_ff_rsa(instance: ProblemInstance, bunkers, config: SolverConfig = SolverConfig()) -> Solution:
    run = _Run(instance, bunkers, "ff-rsa")
    km = km_weights(run.topology)
    P = instance.num_paths
    for demand in run.order:
        pool = k_shortest_paths(run.topology, km, demand.src, demand.dst, P, demand_id=demand.id)
        if not pool:
            run.blocked[demand.id] = P
            continue
        # fewer simple paths than |P|: reuse them in order
        run.place_first_fit(demand, [pool[i % len(pool)] for i in range(P)])
    return run.solution()


def solve_ld_rsa(instance: ProblemInstance, bunkers, config: SolverConfig = SolverConfig()) -> Solution:
    run = _Run(instance, bunkers, "ld-rsa")
    km = km_weights(run.topology)
    k = max(config.k_candidates, instance.num_paths)
    for demand in run.order:
        pool = k_shortest_paths(run.topology, km, demand.src, demand.dst, k, demand_id=demand.id)
        if not pool:
            run.blocked[demand.id] = instance.num_paths
            continue
        run.place_first_fit(demand, select_least_similar(pool, instance.num_paths))
    return run.solution()


def select_least_similar(pool: Sequence[RoutingPath], count: int) -> List[RoutingPath]:
    """Pick ``count`` paths from a ranked pool, minimising shared links.

    The first pool entry is always taken. Each further pick minimises the
    summed similarity with the paths taken so far, preferring shorter km and
    then pool order. An exhausted pool is refilled so repeats are possible.
    """
    selected = [pool[0]]
    remaining = list(enumerate(pool))[1:]
    while len(selected) < count:
        if not remaining:
            remaining = list(enumerate(pool))
        pick = min(
            remaining,
            key=lambda item: (
                sum(path_similarity(item[1], s) for s in selected),
                item[1].length_km,
                item[0],
            ),
        )
        remaining.remove(pick)
        selected.append(pick[1])
    return selected


SOLVERS = {
    "1s-rsa": solve_1s_rsa,
    "2s-rsa": solve_2s_rsa,
    "ff-rsa": solve_ff_rsa,
    "ld-rsa": solve_ld_rsa,
}


def solve(algorithm: str, instance: ProblemInstance, bunkers, config: SolverConfig = SolverConfig()) -> Solution:
    try:
        fn = SOLVERS[algorithm.lower()]
    except KeyError:
        raise ValueError(
            f"unknown algorithm {algorithm!r}; expected one of {', '.join(ALGORITHMS)}"
        ) from None
    return fn(instance, bunkers, config)
