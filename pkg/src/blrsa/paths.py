"""Loopless k-shortest path search (Yen) with a total, deterministic order.

Paths are ranked by ``(total weight, hop count, node-id sequence)``. The key
is strictly monotone under path extension, so a label-setting Dijkstra that
carries the whole key finds the unique minimum, and Yen's deviation scheme
then enumerates paths in exactly this order.
"""

from __future__ import annotations

import heapq
from itertools import islice
from typing import Callable, Collection, Iterator, List, Optional, Sequence, Tuple, Union

from .model import Topology
from .spectrum import RoutingPath

Weights = Union[Sequence[float], Callable[[int], float]]

_Path = Tuple[float, Tuple[int, ...], Tuple[int, ...]]  # weight, nodes, links


def _as_list(topology: Topology, weights: Weights) -> List[float]:
    if callable(weights):
        w = [float(weights(e.id)) for e in topology.links]
    else:
        w = [float(x) for x in weights]
        if len(w) != topology.num_links:
            raise ValueError("need one weight per link")
    if any(x < 0 for x in w):
        raise ValueError("link weights must be non-negative")
    return w


def _dijkstra(
    adjacency,
    weights: List[float],
    source: int,
    target: int,
    banned_nodes: Collection[int] = (),
    banned_links: Collection[int] = (),
) -> Optional[_Path]:
    heap = [(0.0, 0, (source,), ())]
    settled = set(banned_nodes)
    while heap:
        w, h, nodes, links = heapq.heappop(heap)
        u = nodes[-1]
        if u in settled:
            continue
        if u == target:
            return w, nodes, links
        settled.add(u)
        for lid, v in adjacency[u]:
            if v in settled or lid in banned_links:
                continue
            heapq.heappush(heap, (w + weights[lid], h + 1, nodes + (v,), links + (lid,)))
    return None


def iter_shortest_paths(
    topology: Topology,
    weights: Weights,
    source: int,
    target: int,
    excluded_links: Collection[int] = (),
) -> Iterator[Tuple[float, Tuple[int, ...], Tuple[int, ...]]]:
    """Lazily yield ``(weight, nodes, links)`` for simple paths in rank order."""
    topology.check_node(source)
    topology.check_node(target)
    if source == target:
        raise ValueError("source and target must differ")
    w = _as_list(topology, weights)
    adj = topology.adjacency
    excluded = frozenset(excluded_links)

    first = _dijkstra(adj, w, source, target, banned_links=excluded)
    if first is None:
        return
    accepted = [first]
    seen = {first[1]}
    candidates: list = []
    yield first
    while True:
        _, prev_nodes, prev_links = accepted[-1]
        for i in range(len(prev_links)):
            root = prev_nodes[: i + 1]
            banned = set(excluded)
            for _, nodes, links in accepted:
                if len(links) > i and nodes[: i + 1] == root:
                    banned.add(links[i])
            spur = _dijkstra(adj, w, root[-1], target, banned_nodes=root[:-1], banned_links=banned)
            if spur is None:
                continue
            nodes = root[:-1] + spur[1]
            if nodes in seen:
                continue
            links = prev_links[:i] + spur[2]
            total = sum(w[lid] for lid in links)
            seen.add(nodes)
            heapq.heappush(candidates, (total, len(links), nodes, links))
        if not candidates:
            return
        total, _, nodes, links = heapq.heappop(candidates)
        accepted.append((total, nodes, links))
        yield total, nodes, links


def _to_path(topology: Topology, demand_id: int, nodes, links) -> RoutingPath:
    length = float(sum(topology.links[lid].length_km for lid in links))
    return RoutingPath(demand_id, nodes, links, length)


def k_shortest_paths(
    topology: Topology,
    weights: Weights,
    source: int,
    target: int,
    k: int,
    excluded_links: Collection[int] = (),
    demand_id: int = -1,
) -> List[RoutingPath]:
    """Up to ``k`` distinct simple paths in nondecreasing weight.

    Ties are broken by fewer hops, then the lexicographically smaller node
    sequence. ``excluded_links`` are removed from the graph for the search.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    found = islice(iter_shortest_paths(topology, weights, source, target, excluded_links), k)
    return [_to_path(topology, demand_id, nodes, links) for _, nodes, links in found]


def km_weights(topology: Topology) -> List[float]:
    return [e.length_km for e in topology.links]


def path_weight(path: RoutingPath, weights: Sequence[float]) -> float:
    return float(sum(weights[lid] for lid in path.links))
