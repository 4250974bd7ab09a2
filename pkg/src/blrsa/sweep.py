"""Grid experiments: run every cell of a parameter grid and tabulate gains.

A cell fixes topology, scenario group, jamming bound X, algorithm, bunker
policy, weights, lambda, |P| and |B|; its metrics are averaged over the
spec's seeds. Cells are enumerated in :data:`CELL_KEYS` order (last key
varies fastest) and results are merged in that order whatever the worker
count.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .estimator import run_blrsa
from .io import METRICS_SCHEMA_VERSION, append_metrics_rows, load_topology
from .scenarios import GROUPS, GenSpec, make_instance
from .solvers import SolverConfig
from .tuning import recommended_lambda
from .validation import check_algorithm, check_count, check_weights
from .vulnerability import BunkerPolicy

CELL_KEYS = ("topology", "group", "X", "algorithm", "policy", "c_spec", "lambda", "P", "B")
CELL_FIELDS = CELL_KEYS + (
    "c_res",
    "seeds",
    "MS",
    "used_slices",
    "LF_gbps",
    "objective",
    "blocked_gbps",
    "runtime_ms",
    "error",
)
GAIN_FIELDS = (
    "topology", "group", "X", "algorithm", "policy", "c_spec", "lambda", "P", "B",
    "gain_vs_single_path", "gain_vs_no_bunkers", "spectrum_ratio",
)
WEIGHT_LADDER = tuple((round(1.0 - i / 10, 1), round(i / 10, 1)) for i in range(11))
AUTO = "auto"


@dataclass(frozen=True)
class SweepSpec:
    topologies: Tuple[str, ...] = ("pl12",)
    group: str = "large"
    x_km: Tuple[float, ...] = (200.0,)
    algorithms: Tuple[str, ...] = ("1s-rsa",)
    policies: Tuple[str, ...] = ("AdaptiveAvg",)
    weights: Tuple[Tuple[float, float], ...] = ((0.0, 1.0),)
    lambdas: Tuple = (AUTO,)
    paths: Tuple[int, ...] = (1, 2)
    bunkers: Tuple[int, ...] = (0, 2)
    seeds: Tuple[int, ...] = tuple(range(10))
    num_slices: Optional[int] = None
    k_candidates: int = 40
    timing: bool = False

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {sorted(GROUPS)}")
        for name in self.algorithms:
            check_algorithm(name)
        for name in self.policies:
            BunkerPolicy.parse(name)
        for c_spec, c_res in self.weights:
            check_weights(c_spec, c_res)
        for lam in self.lambdas:
            if lam != AUTO:
                check_count(lam, "lambda", 1)
        for p in self.paths:
            check_count(p, "paths", 1)
        for b in self.bunkers:
            check_count(b, "bunkers")
        for s in self.seeds:
            check_count(s, "seed")
        if self.num_slices is not None:
            check_count(self.num_slices, "num_slices", 1)

    @classmethod
    def from_dict(cls, data: Dict) -> "SweepSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown sweep keys: {sorted(unknown)}")
        kwargs = {}
        for key, value in data.items():
            if key == "weights":
                value = tuple((float(a), float(b)) for a, b in (WEIGHT_LADDER if value == "ladder" else value))
            elif key == "x_km":
                value = tuple(float(x) for x in value)
            elif isinstance(value, list):
                value = tuple(value)
            kwargs[key] = value
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "SweepSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> Dict:
        return asdict(self)

    def cells(self) -> List[Dict]:
        out = []
        for topo, x, alg, pol, (c_spec, c_res), lam, p, b in itertools.product(
            self.topologies, self.x_km, self.algorithms, self.policies,
            self.weights, self.lambdas, self.paths, self.bunkers,
        ):
            out.append(
                {
                    "topology": topo, "group": self.group, "X": x,
                    "algorithm": check_algorithm(alg), "policy": BunkerPolicy.parse(pol).value,
                    "c_spec": c_spec, "c_res": c_res, "lambda": lam, "P": p, "B": b,
                }
            )
        return out


def instance_id(topology: str, group: str, x_km: float, seed: int) -> str:
    return f"{topology.lower()}-{group}-X{x_km:g}-s{seed}"


@dataclass
class CellResult:
    cell: Dict
    runs: List[Dict] = field(default_factory=list)
    error: str = ""

    def summary(self) -> Dict:
        row = {k: self.cell[k] for k in CELL_KEYS}
        row["c_res"] = self.cell["c_res"]
        row["seeds"] = len(self.runs)
        row["error"] = self.error
        for key in ("MS", "used_slices", "LF_gbps", "objective", "blocked_gbps", "runtime_ms"):
            row[key] = float(sum(r[key] for r in self.runs) / len(self.runs)) if self.runs else ""
        return row


def run_cell(cell: Dict, spec: SweepSpec) -> CellResult:
    """Solve the cell for every seed; a failure stops the cell, not the sweep."""
    result = CellResult(dict(cell))
    try:
        topology = load_topology(cell["topology"])
        policy = BunkerPolicy.parse(cell["policy"])
        lam = cell["lambda"]
        if lam == AUTO:
            lam = recommended_lambda(topology.name, policy, cell["c_spec"])
        config = SolverConfig(lam=lam, k_candidates=spec.k_candidates)
        result.cell["lambda"] = lam
        for seed in spec.seeds:
            gen = GenSpec(cell["group"], seed, cell["X"], topology)
            instance = make_instance(gen, cell["P"], cell["B"], spec.num_slices, cell["c_spec"], cell["c_res"])
            _, metrics, runtime = run_blrsa(instance, cell["algorithm"], policy, config)
            result.runs.append(
                {
                    "schema_version": METRICS_SCHEMA_VERSION,
                    "instance_id": instance_id(cell["topology"], cell["group"], cell["X"], seed),
                    "algorithm": cell["algorithm"], "policy": policy.value,
                    "P": cell["P"], "B": cell["B"], "X": float(cell["X"]), "lambda": lam,
                    "c_spec": float(cell["c_spec"]), "c_res": float(cell["c_res"]),
                    "MS": metrics.max_slice_index, "used_slices": metrics.used_slices,
                    "LF_gbps": metrics.avg_lost_flow, "objective": metrics.objective,
                    "blocked_gbps": float(metrics.blocked_gbps),
                    "runtime_ms": float(runtime) if spec.timing else 0.0,
                }
            )
    except Exception as exc:  # recorded per cell, the sweep carries on
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(spec: SweepSpec, workers: int = 1) -> List[CellResult]:
    cells = spec.cells()
    jobs = [(cell, spec) for cell in cells]
    if workers <= 1 or len(cells) <= 1:
        return [run_cell(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell_args, jobs))


def _ratio(num, den) -> Optional[float]:
    if num == "" or den == "" or den == 0:
        return None
    return num / den


def gain_table(summaries: Sequence[Dict]) -> List[Dict]:
    """Per cell: LF saving against |P|=1,|B|=0 and against |P|,|B|=0, plus
    the used-slices ratio against |P|=1 with the same |B|."""
    base_keys = ("topology", "group", "X", "algorithm", "policy", "c_spec", "lambda")
    index = {tuple(s[k] for k in base_keys) + (s["P"], s["B"]): s for s in summaries}
    rows = []
    for s in summaries:
        key = tuple(s[k] for k in base_keys)
        single = index.get(key + (1, 0))
        unprotected = index.get(key + (s["P"], 0))
        same_b = index.get(key + (1, s["B"]))
        g_p = _ratio(s["LF_gbps"], single["LF_gbps"]) if single else None
        g_b = _ratio(s["LF_gbps"], unprotected["LF_gbps"]) if unprotected else None
        r = _ratio(s["used_slices"], same_b["used_slices"]) if same_b else None
        row = {k: s[k] for k in base_keys}
        row.update(P=s["P"], B=s["B"])
        row["gain_vs_single_path"] = "" if g_p is None else 1.0 - g_p
        row["gain_vs_no_bunkers"] = "" if g_b is None else 1.0 - g_b
        row["spectrum_ratio"] = "" if r is None else r
        rows.append(row)
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        return "" if math.isnan(value) else f"{value:.6f}"
    return str(value)


def write_table(path, fields: Sequence[str], rows: Sequence[Dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(row.get(f, "")) for f in fields])


def write_outputs(results: Sequence[CellResult], out_dir) -> Dict[str, Path]:
    """``runs.csv`` (one row per seed, appended), ``cells.csv`` and ``gains.csv``."""
    out_dir = Path(out_dir)
    paths = {name: out_dir / f"{name}.csv" for name in ("runs", "cells", "gains")}
    append_metrics_rows(paths["runs"], [r for res in results for r in res.runs])
    summaries = [res.summary() for res in results]
    write_table(paths["cells"], CELL_FIELDS, summaries)
    write_table(paths["gains"], GAIN_FIELDS, gain_table([s for s in summaries if not s["error"]]))
    return paths


def format_summary(gains: Sequence[Dict]) -> str:
    lines = [f"{'algorithm':<8} {'policy':<13} {'P':>2} {'B':>2} {'vs P1B0':>8} {'vs B0':>8} {'slices':>7}"]
    for g in gains:
        cells = []
        for key, pct in (("gain_vs_single_path", True), ("gain_vs_no_bunkers", True), ("spectrum_ratio", False)):
            v = g[key]
            cells.append("-" if v == "" else (f"{100 * v:.1f}%" if pct else f"{v:.2f}"))
        lines.append(
            f"{g['algorithm']:<8} {g['policy']:<13} {g['P']:>2} {g['B']:>2} {cells[0]:>8} {cells[1]:>8} {cells[2]:>7}"
        )
    return "\n".join(lines)

