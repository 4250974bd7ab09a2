"""Command line front end: ``blrsa generate|solve|evaluate|sweep|bunkers``.

Exit status: 0 success, 1 usage error, 2 infeasible or partial solution,
3 file problems (missing, unreadable, malformed, unwritable).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .evaluation import check_feasibility, compute_metrics
from .estimator import run_blrsa
from .io import (
    METRICS_FIELDS,
    METRICS_SCHEMA_VERSION,
    append_metrics_rows,
    format_row,
    load_scenario,
    load_solution,
    load_topology,
    read_solution_params,
    save_scenario,
    save_solution,
)
from .model import DEFAULT_MODULATIONS, ProblemInstance
from .scenarios import DEFAULT_SLICES, GROUPS, GenSpec, generate_attacks, generate_demands
from .solvers import ALGORITHMS, SolverConfig
from .sweep import SweepSpec, format_summary, gain_table, instance_id, run_sweep, write_outputs
from .tuning import recommended_lambda
from .validation import check_instance, check_weights
from .vulnerability import BunkerPolicy, compute_vul_matrix, place_bunkers

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3
POLICY_NAMES = [p.value for p in BunkerPolicy]


class UsageError(Exception):
    pass


class FileProblem(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _policy(text: str) -> BunkerPolicy:
    try:
        return BunkerPolicy.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("common options")
    g.add_argument("--topology", help="topology JSON file or bundled name (pl12, dt14, euro16)")
    g.add_argument("--scenario", help="scenario JSON file")
    g.add_argument("--out", help="output directory")
    g.add_argument("--seed", type=int, action="append", help="scenario seed (repeatable)")
    g.add_argument("--workers", type=int, default=1, help="parallel worker processes")


def _instance_params(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--paths", type=int, default=None, help="light-paths per demand |P| (default 1)")
    parser.add_argument("--bunkers", type=int, default=None, help="bunker budget |B| (default 0)")
    parser.add_argument("--cspec", type=float, default=None, help="spectrum weight (default 0.5)")
    parser.add_argument("--cres", type=float, default=None, help="resilience weight (default 1 - cspec)")
    parser.add_argument("--slices", type=int, default=None, help="slices per link |S|")
    parser.add_argument("--bunker-policy", type=_policy, default=None, help=f"one of {', '.join(POLICY_NAMES)}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blrsa", description="Bunker location, routing and spectrum allocation under EMP attacks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write seeded scenario files")
    _common(p)
    p.add_argument("--group", choices=sorted(GROUPS), default="small")
    p.add_argument("--x-km", type=float, default=200.0, help="upper bound of the jamming range")
    p.add_argument("--seed-range", type=int, nargs=2, metavar=("START", "STOP"), help="seeds START..STOP-1")

    p = sub.add_parser("solve", help="place bunkers, route and allocate spectrum")
    _common(p)
    _instance_params(p)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="1s-rsa")
    p.add_argument("--lambda", dest="lam", type=int, default=None, help="1S-RSA candidate count")
    p.add_argument("--k-candidates", type=int, default=40, help="LD-RSA path pool size")
    p.add_argument("--solution", help="solution file (default OUT/<instance>.<algorithm>.json)")
    p.add_argument("--metrics", help="metrics CSV to append to (default OUT/metrics.csv)")
    p.add_argument("--timing", action="store_true", help="record wall-clock runtime (otherwise 0)")

    p = sub.add_parser("evaluate", help="check a solution and recompute its metrics")
    _common(p)
    _instance_params(p)
    p.add_argument("--solution", required=True)
    p.add_argument("--metrics", help="metrics CSV to append to")

    p = sub.add_parser("sweep", help="run a parameter grid and tabulate gains")
    _common(p)
    p.add_argument("--spec", required=True, help="sweep spec JSON")

    p = sub.add_parser("bunkers", help="bunker placement only")
    _common(p)
    _instance_params(p)
    return parser


# -- helpers -------------------------------------------------------------------------


def _read(fn, *args):
    try:
        return fn(*args)
    except (OSError, ValueError, KeyError) as exc:
        raise FileProblem(str(exc)) from exc


def _topology(args, meta: Optional[dict] = None):
    ref = args.topology or (meta or {}).get("topology")
    if not ref:
        raise UsageError("--topology is required")
    return _read(load_topology, ref)


def _load_instance(args, defaults: Optional[dict] = None):
    """Topology + scenario + flags (falling back to ``defaults``) as a checked instance."""
    if not args.scenario:
        raise UsageError("--scenario is required")
    demands, attacks, meta = _read(load_scenario, args.scenario)
    topology = _topology(args, meta)
    defaults = defaults or {}
    group = meta.get("group")

    def pick(flag, key, fallback):
        value = getattr(args, flag, None)
        return defaults.get(key, fallback) if value is None else value

    c_spec, c_res = args.cspec, args.cres
    if c_spec is None and c_res is None:
        c_spec, c_res = defaults.get("c_spec", 0.5), defaults.get("c_res", 0.5)
    elif c_spec is None:
        c_spec = 1.0 - c_res
    elif c_res is None:
        c_res = 1.0 - c_spec
    try:
        c_spec, c_res = check_weights(c_spec, c_res)
        instance = ProblemInstance(
            topology,
            tuple(demands),
            tuple(attacks),
            num_paths=pick("paths", "P", 1),
            num_bunkers=pick("bunkers", "B", 0),
            num_slices=pick("slices", "num_slices", DEFAULT_SLICES.get(group, DEFAULT_SLICES["small"])),
            c_spec=c_spec,
            c_res=c_res,
            modulations=DEFAULT_MODULATIONS,
        )
        check_instance(instance)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if meta.get("seed") is not None and meta.get("group") and meta.get("X_km") is not None:
        ident = instance_id(topology.name, group, float(meta["X_km"]), int(meta["seed"]))
    else:
        ident = Path(args.scenario).stem
    return instance, ident, meta


def _metrics_row(ident, algorithm, policy, instance, lam, metrics, runtime_ms, x_km):
    return {
        "schema_version": METRICS_SCHEMA_VERSION,
        "instance_id": ident,
        "algorithm": algorithm,
        "policy": policy,
        "P": instance.num_paths,
        "B": instance.num_bunkers,
        "X": "" if x_km is None else float(x_km),
        "lambda": lam,
        "c_spec": float(instance.c_spec),
        "c_res": float(instance.c_res),
        "MS": metrics.max_slice_index,
        "used_slices": metrics.used_slices,
        "LF_gbps": metrics.avg_lost_flow,
        "objective": metrics.objective,
        "blocked_gbps": float(metrics.blocked_gbps),
        "runtime_ms": float(runtime_ms),
    }


def _print_row(row) -> None:
    writer = csv.DictWriter(sys.stdout, fieldnames=METRICS_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerow(format_row(row))


def _write(fn, *args):
    try:
        fn(*args)
    except OSError as exc:
        raise FileProblem(str(exc)) from exc


def _out_dir(args) -> Path:
    return Path(args.out or ".")


# -- commands ------------------------------------------------------------------------


def cmd_generate(args) -> int:
    seeds = list(args.seed or [])
    if args.seed_range:
        seeds.extend(range(*args.seed_range))
    if not args.topology:
        raise UsageError("--topology is required")
    topology = _topology(args)
    out = _out_dir(args)
    for seed in seeds:
        try:
            spec = GenSpec(args.group, seed, args.x_km, topology)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        meta = {"seed": seed, "group": args.group, "X_km": float(args.x_km), "topology": args.topology}
        path = out / f"{instance_id(topology.name, args.group, args.x_km, seed)}.json"
        _write(save_scenario, path, generate_demands(spec), generate_attacks(spec), meta)
        print(path)
    return EXIT_OK


def cmd_solve(args) -> int:
    instance, ident, meta = _load_instance(args)
    policy = args.bunker_policy or BunkerPolicy.ADAPTIVE_AVG
    lam = args.lam if args.lam is not None else recommended_lambda(instance.topology.name, policy, instance.c_spec)
    try:
        config = SolverConfig(lam=lam, k_candidates=args.k_candidates)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    solution, metrics, runtime = run_blrsa(instance, args.algorithm, policy, config)
    out = _out_dir(args)
    params = {
        "instance_id": ident,
        "policy": policy.value,
        "lambda": lam,
        "P": instance.num_paths,
        "B": instance.num_bunkers,
        "num_slices": instance.num_slices,
        "c_spec": instance.c_spec,
        "c_res": instance.c_res,
    }
    sol_path = Path(args.solution) if args.solution else out / f"{ident}.{args.algorithm}.json"
    _write(save_solution, solution, sol_path, params)
    row = _metrics_row(ident, args.algorithm, policy.value, instance, lam, metrics,
                       runtime if args.timing else 0.0, meta.get("X_km"))
    _write(append_metrics_rows, Path(args.metrics) if args.metrics else out / "metrics.csv", [row])
    _print_row(row)
    if not solution.is_complete:
        print(f"partial: {len(solution.blocked)} demand(s) blocked", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_evaluate(args) -> int:
    params = _read(read_solution_params, args.solution)
    instance, ident, meta = _load_instance(args, params)
    solution = _read(load_solution, args.solution, instance)
    violations = check_feasibility(solution, instance)
    for v in violations:
        print(f"violation {v}", file=sys.stderr)
    if any(v.kind != "incomplete" for v in violations):
        return EXIT_INFEASIBLE
    metrics = compute_metrics(solution, instance)
    policy = args.bunker_policy.value if args.bunker_policy else params.get("policy", "")
    row = _metrics_row(params.get("instance_id", ident), solution.algorithm, policy, instance,
                       params.get("lambda", ""), metrics, 0.0, meta.get("X_km"))
    if args.metrics:
        _write(append_metrics_rows, Path(args.metrics), [row])
    _print_row(row)
    return EXIT_INFEASIBLE if violations else EXIT_OK


def cmd_sweep(args) -> int:
    try:
        spec = _read(SweepSpec.load, args.spec)
    except FileProblem as exc:
        if isinstance(exc.__cause__, (OSError, json.JSONDecodeError)):
            raise
        raise UsageError(str(exc)) from exc
    if args.topology:
        spec = SweepSpec.from_dict({**spec.to_dict(), "topologies": [args.topology]})
    if args.seed:
        spec = SweepSpec.from_dict({**spec.to_dict(), "seeds": list(args.seed)})
    results = run_sweep(spec, workers=max(1, args.workers))
    try:
        write_outputs(results, _out_dir(args))
    except OSError as exc:
        raise FileProblem(str(exc)) from exc
    summaries = [r.summary() for r in results if not r.error]
    print(format_summary(gain_table(summaries)))
    failed = [r for r in results if r.error]
    for r in failed:
        print(f"cell failed {r.cell}: {r.error}", file=sys.stderr)
    return EXIT_INFEASIBLE if failed else EXIT_OK


def cmd_bunkers(args) -> int:
    instance, ident, _ = _load_instance(args)
    policy = args.bunker_policy or BunkerPolicy.ADAPTIVE_AVG
    bunkers = place_bunkers(policy, instance.topology, instance.attacks, instance.num_bunkers)
    before = compute_vul_matrix(instance.topology, instance.attacks)
    after = compute_vul_matrix(instance.topology, instance.attacks, bunkers)
    report = {
        "instance_id": ident,
        "policy": policy.value,
        "bunkers": sorted(bunkers),
        "vul_total_before": int(before.sum()),
        "vul_total_after": int(after.sum()),
    }
    text = json.dumps(report, indent=1)
    if args.out:
        path = Path(args.out) / f"{ident}.bunkers.json"
        _write(lambda: (path.parent.mkdir(parents=True, exist_ok=True), path.write_text(text + "\n", encoding="utf-8")))
    print(text)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "bunkers": cmd_bunkers,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"blrsa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileProblem as exc:
        print(f"blrsa: file error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
