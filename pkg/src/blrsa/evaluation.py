"""Solution checking, attack simulation, metrics and an exact tiny-instance oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .model import AttackScenario, ProblemInstance
from .paths import iter_shortest_paths
from .spectrum import (
    GUARD_SLICES,
    Channel,
    LightPath,
    NoFeasibleModulation,
    RoutingPath,
    required_slices,
    select_modulation,
)
from .vulnerability import attack_masks, link_down


class InfeasibleSolutionError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations[:5]))


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self):
        return f"[{self.kind}] {self.message}"


@dataclass(frozen=True)
class AttackOutcome:
    attack_id: int
    node_available: Tuple[bool, ...]
    link_available: Tuple[bool, ...]
    lightpath_available: Dict[Tuple[int, int], bool]
    realized: Dict[int, bool]
    lost_gbps: float


@dataclass(frozen=True)
class Metrics:
    max_slice_index: int
    used_slices: int
    avg_lost_flow: float
    total_lost_flow: float
    objective: float
    blocked_gbps: float = 0.0
    per_attack: Tuple[float, ...] = field(default=(), repr=False)


def simulate_attack(solution, instance: ProblemInstance, attack: AttackScenario) -> AttackOutcome:
    """Availability of every node, link, light-path and demand under one attack."""
    topo = instance.topology
    destroyed, jammed = attack_masks(topo, [attack])
    protected = np.zeros(topo.num_nodes, dtype=bool)
    protected[list(solution.bunkers)] = True
    node_ok = ~(destroyed[0] | (jammed[0] & ~protected))
    src, dst = topo.link_endpoints
    link_ok = node_ok[src] & node_ok[dst]

    lp_ok: Dict[Tuple[int, int], bool] = {}
    realized: Dict[int, bool] = {}
    lost = 0.0
    for d in instance.demands:
        ok_any = False
        for i, lp in enumerate(solution.lightpaths.get(d.id, [])):
            ok = bool(link_ok[list(lp.path.links)].all())
            lp_ok[(d.id, i)] = ok
            ok_any = ok_any or ok
        realized[d.id] = ok_any
        if not ok_any:
            lost += d.bitrate_gbps
    return AttackOutcome(
        attack.id,
        tuple(bool(x) for x in node_ok),
        tuple(bool(x) for x in link_ok),
        lp_ok,
        realized,
        float(lost),
    )


def attack_losses(solution, instance: ProblemInstance, attacks: Optional[Sequence[AttackScenario]] = None) -> np.ndarray:
    """Lost bitrate per attack (vectorised counterpart of :func:`simulate_attack`)."""
    attacks = instance.attacks if attacks is None else tuple(attacks)
    if not attacks:
        return np.zeros(0)
    down = link_down(instance.topology, attacks, solution.bunkers)
    lost = np.zeros(len(attacks))
    for d in instance.demands:
        lps = solution.lightpaths.get(d.id, [])
        realized = np.zeros(len(attacks), dtype=bool)
        for lp in lps:
            realized |= ~down[:, list(lp.path.links)].any(axis=1)
        lost += np.where(realized, 0.0, d.bitrate_gbps)
    return lost


def check_feasibility(solution, instance: ProblemInstance) -> List[Violation]:
    """Verify a solution against the model constraints; empty list means feasible."""
    topo = instance.topology
    out: List[Violation] = []
    n, S = topo.num_nodes, instance.num_slices

    bunkers = solution.bunkers
    if len(bunkers) > instance.num_bunkers:
        out.append(Violation("bunkers", f"{len(bunkers)} bunkers exceed budget {instance.num_bunkers}"))
    for b in bunkers:
        if not 0 <= b < n:
            out.append(Violation("bunkers", f"bunker at unknown node {b}"))

    demands = {d.id: d for d in instance.demands}
    for demand_id in solution.lightpaths:
        if demand_id not in demands:
            out.append(Violation("flow", f"light-paths for unknown demand {demand_id}"))

    usage = np.zeros((topo.num_links, S), dtype=np.int32)
    for d in instance.demands:
        lps = solution.lightpaths.get(d.id, [])
        if len(lps) != instance.num_paths:
            out.append(
                Violation(
                    "incomplete" if len(lps) < instance.num_paths else "channel",
                    f"demand {d.id} has {len(lps)} light-paths, expected {instance.num_paths}",
                )
            )
        for i, lp in enumerate(lps):
            tag = f"demand {d.id} light-path {i}"
            path = lp.path
            out.extend(_check_path(topo, d, path, tag))
            length = float(sum(topo.links[e].length_km for e in path.links if 0 <= e < topo.num_links))
            if abs(length - path.length_km) > 1e-6:
                out.append(Violation("length", f"{tag}: recorded {path.length_km} km, links sum to {length} km"))
            try:
                mod = instance.modulations.by_name(lp.modulation)
            except KeyError:
                out.append(Violation("modulation", f"{tag}: unknown modulation {lp.modulation!r}"))
                mod = None
            if mod is not None:
                if mod.reach_km < length:
                    out.append(Violation("modulation", f"{tag}: {mod.name} reach {mod.reach_km} km < {length} km"))
                need = required_slices(d.bitrate_gbps, mod)
                if lp.channel.size < need:
                    out.append(Violation("size", f"{tag}: channel size {lp.channel.size} < required {need}"))
            ch = lp.channel
            if ch.first_slice < 0 or ch.size < 1 or ch.last_slice >= S:
                out.append(Violation("channel", f"{tag}: channel {ch} outside 0..{S - 1}"))
                continue
            for e in path.links:
                if 0 <= e < topo.num_links:
                    usage[e, ch.first_slice : ch.last_slice + 1] += 1

    clashes = np.argwhere(usage > 1)
    if clashes.size:
        links = sorted({int(e) for e, _ in clashes})
        out.append(Violation("overlap", f"spectrum overlap on links {links} ({len(clashes)} slice cells)"))

    grid = getattr(solution, "grid", None)
    if grid is not None:
        expected = {(d, i): lp for d, lps in solution.lightpaths.items() for i, lp in enumerate(lps)}
        if grid.owners() != expected or not np.array_equal(grid.occupancy >= 0, usage > 0):
            out.append(Violation("grid", "spectrum grid disagrees with the light-paths"))
    return out


def _check_path(topo, demand, path: RoutingPath, tag: str) -> List[Violation]:
    out = []
    nodes, links = path.nodes, path.links
    if not links or len(nodes) != len(links) + 1:
        return [Violation("flow", f"{tag}: malformed path")]
    if nodes[0] != demand.src or nodes[-1] != demand.dst:
        out.append(Violation("flow", f"{tag}: path {nodes[0]}->{nodes[-1]} does not join {demand.src}->{demand.dst}"))
    if len(set(nodes)) != len(nodes):
        out.append(Violation("flow", f"{tag}: path revisits a node"))
    for k, e in enumerate(links):
        if not 0 <= e < topo.num_links:
            out.append(Violation("flow", f"{tag}: unknown link {e}"))
            continue
        link = topo.links[e]
        if (link.src, link.dst) != (nodes[k], nodes[k + 1]):
            out.append(Violation("flow", f"{tag}: link {e} does not chain {nodes[k]}->{nodes[k + 1]}"))
    return out


def used_slice_indices(lightpaths: Sequence[LightPath]) -> set:
    used = set()
    for lp in lightpaths:
        if lp.path.links:
            used.update(lp.channel.span)
    return used


def compute_metrics(solution, instance: ProblemInstance) -> Metrics:
    """Max slice index, lost flow and the weighted objective.

    Blocked light-paths are tolerated (a demand with no light-path is lost
    under every attack); any other violation raises.
    """
    violations = [v for v in check_feasibility(solution, instance) if v.kind != "incomplete"]
    if violations:
        raise InfeasibleSolutionError(violations)
    used = used_slice_indices(solution.all_lightpaths())
    ms = max(used) if used else -1
    losses = attack_losses(solution, instance)
    total = float(losses.sum())
    lf = total / len(losses) if len(losses) else 0.0
    objective = (
        instance.c_spec * len(used) / instance.max_spec_value
        + instance.c_res * total / instance.max_loss_value
    )
    return Metrics(
        ms,
        len(used),
        lf,
        total,
        float(objective),
        solution.blocked_gbps(instance),
        tuple(float(x) for x in losses),
    )


# -- exact oracle -----------------------------------------------------------------------


class BruteForceRefused(ValueError):
    """The instance is too large for exhaustive search."""


@dataclass(frozen=True)
class BruteForceLimits:
    max_nodes: int = 6
    max_demands: int = 4
    max_slices: int = 12
    max_paths: int = 2
    max_bunkers: int = 2


def brute_force_optimal(instance: ProblemInstance, limits: BruteForceLimits = BruteForceLimits()):
    """Globally optimal solution of a tiny instance by exhaustive search.

    Enumerates bunker sets of size <= |B|, every multiset of |P| simple paths
    per demand and every channel placement. Branch-and-bound on admissible
    bounds (summed per-demand minimum loss, busiest-link slice load) keeps
    the search exact. Returns ``None`` when no feasible solution exists.
    """
    from .solvers import Solution
    from .io import grid_from_lightpaths

    topo = instance.topology
    checks = [
        (topo.num_nodes, limits.max_nodes, "nodes"),
        (len(instance.demands), limits.max_demands, "demands"),
        (instance.num_slices, limits.max_slices, "slices"),
        (instance.num_paths, limits.max_paths, "paths"),
        (instance.num_bunkers, limits.max_bunkers, "bunkers"),
    ]
    for value, cap, what in checks:
        if value > cap:
            raise BruteForceRefused(f"{value} {what} exceed the oracle limit of {cap}")

    P, S = instance.num_paths, instance.num_slices
    demands = sorted(instance.demands, key=lambda d: d.id)
    attacks = instance.attacks
    bunker_sets = [
        frozenset(c)
        for k in range(min(instance.num_bunkers, topo.num_nodes) + 1)
        for c in itertools.combinations(range(topo.num_nodes), k)
    ]
    downs = [link_down(topo, attacks, b) for b in bunker_sets]  # each |A| x |E|

    # per demand: usable paths, their channel width and failure pattern
    options = []
    for d in demands:
        paths = []
        for _, nodes, links in iter_shortest_paths(topo, [e.length_km for e in topo.links], d.src, d.dst):
            path = RoutingPath(d.id, nodes, links, float(sum(topo.links[e].length_km for e in links)))
            try:
                mod = select_modulation(path.length_km, instance.modulations)
            except NoFeasibleModulation:
                continue
            size = required_slices(d.bitrate_gbps, mod)
            if size + GUARD_SLICES <= S:
                paths.append((path, mod.name, size))
        if not paths:
            return None
        fails = [
            np.array([dn[:, list(p.links)].any(axis=1) for p, _, _ in paths]) for dn in downs
        ]  # per bunker set: n_paths x |A|
        choices = []
        for combo in itertools.combinations_with_replacement(range(len(paths)), P):
            loss = np.array(
                [d.bitrate_gbps * float(np.all(f[list(combo)], axis=0).sum()) if len(attacks) else 0.0 for f in fails]
            )
            load = np.zeros(topo.num_links, dtype=np.int64)
            for i in combo:
                p, _, size = paths[i]
                load[list(p.links)] += size + GUARD_SLICES
            choices.append((combo, loss, load))
        choices.sort(key=lambda c: (float(c[1].min()), int(c[2].sum())))
        options.append((paths, choices))

    nb = len(bunker_sets)
    min_loss = [np.min(np.array([c[1] for c in ch]), axis=0) for _, ch in options]
    rest = [np.zeros(nb) for _ in range(len(demands) + 1)]
    for i in range(len(demands) - 1, -1, -1):
        rest[i] = rest[i + 1] + min_loss[i]

    c_spec, c_res = instance.c_spec, instance.c_res
    mspec, mloss = instance.max_spec_value, instance.max_loss_value
    best = {"value": np.inf, "solution": None}

    def bound(load, loss_vec, depth):
        spec_lb = int(load.max()) if load.size else 0
        return c_spec * spec_lb / mspec + c_res * float((loss_vec + rest[depth]).min()) / mloss

    def descend(depth, load, loss_vec, picked):
        if bound(load, loss_vec, depth) >= best["value"] - 1e-12:
            return
        if depth == len(demands):
            _evaluate_leaf(load, loss_vec, picked)
            return
        for combo, loss, add in options[depth][1]:
            descend(depth + 1, load + add, loss_vec + loss, picked + [combo])

    def _evaluate_leaf(load, loss_vec, picked):
        items = []
        for d, (paths, _), combo in zip(demands, options, picked):
            for i in combo:
                items.append((d, paths[i]))
        loss_part = c_res * float(loss_vec.min()) / mloss
        budget = best["value"] - loss_part
        limit = None
        if c_spec > 0 and budget < np.inf:
            limit = math.ceil(budget * mspec / c_spec - 1e-9)
        placement = _pack(items, S, limit, minimize=c_spec > 0)
        if placement is None:
            return
        used, firsts = placement
        value = c_spec * used / mspec + loss_part
        if value < best["value"] - 1e-12:
            b = bunker_sets[int(np.argmin(loss_vec))]
            lightpaths = {d.id: [] for d in demands}
            for (d, (path, mod, size)), first in zip(items, firsts):
                lightpaths[d.id].append(LightPath(path, mod, Channel(first, size)))
            best["value"] = value
            best["solution"] = (b, lightpaths)

    descend(0, np.zeros(topo.num_links, dtype=np.int64), np.zeros(nb), [])
    if best["solution"] is None:
        return None
    bunkers, lightpaths = best["solution"]
    grid = grid_from_lightpaths(topo.num_links, S, lightpaths)
    return Solution(bunkers, lightpaths, grid, {}, "optimal")


def _pack(items, S, max_used=None, minimize=True):
    """Place every channel so that the number of used slice indices is minimal.

    ``items`` are ``(demand, (path, modulation, size))``. Returns
    ``(used_count, first_slices)`` in item order, or ``None`` when nothing
    fits within ``S`` slices using fewer than ``max_used`` indices. With
    ``minimize=False`` the first feasible placement is returned.

    Unused indices can always be squeezed out, so the minimum used count
    equals the minimum top slice + 1, and some optimum is left-justified;
    every left-justified packing is produced by first-fit for some order of
    the items, so the search runs over orders. Channels sharing a link must
    be stacked, which gives the max-weight conflict clique as lower bound.
    """
    n = len(items)
    widths = [it[1][2] + GUARD_SLICES for it in items]
    links = [frozenset(it[1][0].links) for it in items]
    conflict = [sum(1 << j for j in range(n) if j != i and links[i] & links[j]) for i in range(n)]
    lower = 0
    for mask in range(1, 1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        if all((conflict[i] | 1 << i) & mask == mask for i in members):
            lower = max(lower, sum(widths[i] for i in members))
    limit = S + 1 if max_used is None else min(S + 1, max_used)
    if lower >= limit:
        return None
    starts = [0] * n
    state = {"limit": limit, "best": None, "done": False}

    def first_fit(i, placed):
        busy = sorted((starts[j], starts[j] + widths[j]) for j in range(n) if placed >> j & 1 and conflict[i] >> j & 1)
        s = 0
        for lo, hi in busy:
            if s + widths[i] <= lo:
                break
            s = max(s, hi)
        return s

    def rec(placed, top):
        if top >= state["limit"]:
            return
        if placed == (1 << n) - 1:
            state["best"] = (top, list(starts))
            state["limit"] = top
            state["done"] = not minimize or top <= lower
            return
        tried = set()
        for i in range(n):
            if placed >> i & 1 or (links[i], widths[i]) in tried:
                continue
            tried.add((links[i], widths[i]))
            s = first_fit(i, placed)
            starts[i] = s
            rec(placed | 1 << i, max(top, s + widths[i]))
            if state["done"]:
                return

    rec(0, 0)
    return state["best"]
