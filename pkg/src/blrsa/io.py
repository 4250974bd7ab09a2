"""JSON/CSV readers and writers for topologies, scenarios, solutions, metrics."""

from __future__ import annotations

import csv
import json
import os
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

from .model import AttackScenario, Demand, Link, Node, ProblemInstance, Topology
from .spectrum import Channel, LightPath, RoutingPath, SpectrumGrid

BUNDLED_TOPOLOGIES = ("pl12", "dt14", "euro16")
METRICS_SCHEMA_VERSION = 1
METRICS_FIELDS = (
    "schema_version",
    "instance_id",
    "algorithm",
    "policy",
    "P",
    "B",
    "X",
    "lambda",
    "c_spec",
    "c_res",
    "MS",
    "used_slices",
    "LF_gbps",
    "objective",
    "blocked_gbps",
    "runtime_ms",
)


class FormatError(ValueError):
    """A file does not follow the expected schema."""


def _dump(obj: Any, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=False)
        fh.write("\n")


def _load(path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _unique_ids(items: List[dict], what: str) -> None:
    ids = [item["id"] for item in items]
    if len(ids) != len(set(ids)):
        raise FormatError(f"duplicate {what} ids")


# -- topology -------------------------------------------------------------------------

def topology_from_dict(data: Dict[str, Any], name: str = "") -> Topology:
    try:
        raw_nodes = data["nodes"]
        raw_links = data["links"]
        _unique_ids(raw_nodes, "node")
        _unique_ids(raw_links, "link")
        nodes = [
            Node(int(v["id"]), str(v.get("name", v["id"])), float(v["lat"]), float(v["lon"]))
            for v in sorted(raw_nodes, key=lambda v: v["id"])
        ]
        links = [
            Link(int(e["id"]), int(e["src"]), int(e["dst"]), float(e["length_km"]))
            for e in sorted(raw_links, key=lambda e: e["id"])
        ]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed topology: {exc!r}") from exc
    return Topology(nodes, links, name=str(data.get("name", name)))


def topology_to_dict(topology: Topology) -> Dict[str, Any]:
    return {
        "name": topology.name,
        "nodes": [{"id": v.id, "name": v.name, "lat": v.lat, "lon": v.lon} for v in topology.nodes],
        "links": [
            {"id": e.id, "src": e.src, "dst": e.dst, "length_km": e.length_km}
            for e in topology.links
        ],
    }


def load_topology(path_or_name) -> Topology:
    """Load a topology file, or a bundled one by name (``pl12``, ``dt14``, ``euro16``)."""
    key = str(path_or_name).lower()
    if key in BUNDLED_TOPOLOGIES and not os.path.exists(str(path_or_name)):
        return bundled_topology(key)
    path = Path(path_or_name)
    return topology_from_dict(_load(path), name=path.stem)


def bundled_topology(name: str) -> Topology:
    """Approximate reconstructions of the PL12, DT14 and Euro16 networks."""
    name = name.lower()
    if name not in BUNDLED_TOPOLOGIES:
        raise KeyError(f"no bundled topology {name!r}")
    text = resources.files("blrsa.data").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return topology_from_dict(json.loads(text), name=name)


def save_topology(topology: Topology, path) -> None:
    _dump(topology_to_dict(topology), path)


# -- scenario ---------------------------------------------------------------------

def scenario_to_dict(demands, attacks, meta: Optional[dict] = None) -> Dict[str, Any]:
    return {
        "demands": [
            {"id": d.id, "src": d.src, "dst": d.dst, "bitrate_gbps": d.bitrate_gbps} for d in demands
        ],
        "attacks": [
            {
                "id": a.id,
                "target": a.target,
                "destructive_km": a.destructive_km,
                "jamming_km": a.jamming_km,
            }
            for a in attacks
        ],
        "meta": dict(meta or {}),
    }


def scenario_from_dict(data: Dict[str, Any]) -> Tuple[List[Demand], List[AttackScenario], dict]:
    try:
        _unique_ids(data["demands"], "demand")
        _unique_ids(data["attacks"], "attack")
        demands = [
            Demand(int(d["id"]), int(d["src"]), int(d["dst"]), float(d["bitrate_gbps"]))
            for d in data["demands"]
        ]
        attacks = [
            AttackScenario(
                int(a["id"]), int(a["target"]), float(a["destructive_km"]), float(a["jamming_km"])
            )
            for a in data["attacks"]
        ]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed scenario: {exc!r}") from exc
    return demands, attacks, dict(data.get("meta", {}))


def save_scenario(path, demands, attacks, meta: Optional[dict] = None) -> None:
    _dump(scenario_to_dict(demands, attacks, meta), path)


def load_scenario(path):
    return scenario_from_dict(_load(path))


# -- solution ---------------------------------------------------------------------

def solution_to_dict(solution, params: Optional[dict] = None) -> Dict[str, Any]:
    """Serialisable form; ``params`` records the run settings for later re-evaluation."""
    lightpaths = []
    for demand_id in sorted(solution.lightpaths):
        for lp in solution.lightpaths[demand_id]:
            lightpaths.append(
                {
                    "demand": demand_id,
                    "nodes": list(lp.path.nodes),
                    "modulation": lp.modulation,
                    "channel": {"first_slice": lp.channel.first_slice, "size": lp.channel.size},
                }
            )
    out = {
        "algorithm": solution.algorithm,
        "bunkers": sorted(solution.bunkers),
        "lightpaths": lightpaths,
        "blocked": [
            {"demand": d, "missing": n} for d, n in sorted(solution.blocked.items()) if n
        ],
    }
    if params:
        out["params"] = dict(params)
    return out


def solution_from_dict(data: Dict[str, Any], instance: ProblemInstance):
    """Rebuild a :class:`~blrsa.solvers.Solution`.

    The grid is rebuilt without validation so that overlapping (tampered)
    channels survive the round trip and can be reported by the checker.
    """
    from .solvers import Solution

    topo = instance.topology
    lightpaths: Dict[int, List[LightPath]] = {d.id: [] for d in instance.demands}
    try:
        for item in data["lightpaths"]:
            demand_id = int(item["demand"])
            path = RoutingPath.from_nodes(topo, demand_id, [int(v) for v in item["nodes"]])
            ch = item["channel"]
            lp = LightPath(path, str(item["modulation"]), Channel(int(ch["first_slice"]), int(ch["size"])))
            lightpaths.setdefault(demand_id, []).append(lp)
        bunkers = frozenset(int(b) for b in data["bunkers"])
        blocked = {int(b["demand"]): int(b["missing"]) for b in data.get("blocked", [])}
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed solution: {exc!r}") from exc
    grid = grid_from_lightpaths(topo.num_links, instance.num_slices, lightpaths, strict=False)
    return Solution(bunkers, lightpaths, grid, blocked, str(data.get("algorithm", "")))


def grid_from_lightpaths(num_links: int, num_slices: int, lightpaths, strict: bool = True) -> SpectrumGrid:
    grid = SpectrumGrid(num_links, num_slices)
    for demand_id in sorted(lightpaths):
        for i, lp in enumerate(lightpaths[demand_id]):
            if strict:
                grid.allocate((demand_id, i), lp)
                continue
            try:
                grid.allocate((demand_id, i), lp)
            except Exception:
                # conflicting or out-of-range channel: left for the checker to report
                pass
    return grid


def save_solution(solution, path, params: Optional[dict] = None) -> None:
    _dump(solution_to_dict(solution, params), path)


def load_solution(path, instance: ProblemInstance):
    return solution_from_dict(_load(path), instance)


def read_solution_params(path) -> dict:
    data = _load(path)
    if not isinstance(data, dict):
        raise FormatError("solution file must hold a JSON object")
    return dict(data.get("params", {}))


# -- metrics CSV ------------------------------------------------------------------

def format_row(values: Dict[str, Any]) -> Dict[str, str]:
    out = {}
    for key in METRICS_FIELDS:
        value = values.get(key, "")
        if isinstance(value, float):
            out[key] = f"{value:.6f}"
        else:
            out[key] = str(value)
    return out


def append_metrics_rows(path, rows: Iterable[Dict[str, Any]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    new = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRICS_FIELDS, lineterminator="\n")
        if new:
            writer.writeheader()
        for row in rows:
            writer.writerow(format_row(row))


def read_metrics_rows(path) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
