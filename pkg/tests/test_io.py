import json

import pytest

from blrsa.evaluation import check_feasibility, compute_metrics
from blrsa.io import (
    BUNDLED_TOPOLOGIES,
    METRICS_FIELDS,
    FormatError,
    append_metrics_rows,
    bundled_topology,
    load_scenario,
    load_solution,
    load_topology,
    read_metrics_rows,
    read_solution_params,
    save_scenario,
    save_solution,
    save_topology,
    solution_to_dict,
    topology_from_dict,
    topology_to_dict,
    scenario_from_dict,
)
from blrsa.solvers import solve

from helpers import random_instance


def test_topology_round_trip(tmp_path):
    topo = bundled_topology("dt14")
    save_topology(topo, tmp_path / "t.json")
    back = load_topology(tmp_path / "t.json")
    assert topology_to_dict(back) == topology_to_dict(topo)


def test_bundled_names_resolve():
    for name in BUNDLED_TOPOLOGIES:
        assert load_topology(name.upper()).name.lower() == name
    with pytest.raises(KeyError):
        bundled_topology("nsfnet")


def test_duplicate_ids_rejected():
    data = topology_to_dict(bundled_topology("pl12"))
    data["nodes"].append(dict(data["nodes"][0]))
    with pytest.raises(FormatError):
        topology_from_dict(data)
    with pytest.raises(FormatError):
        scenario_from_dict({"demands": [{"id": 0, "src": 0, "dst": 1, "bitrate_gbps": 5}] * 2, "attacks": []})
    with pytest.raises(FormatError):
        scenario_from_dict({"demands": []})


def test_scenario_round_trip(tmp_path):
    inst = random_instance(4, destructive=True)
    save_scenario(tmp_path / "s.json", inst.demands, inst.attacks, {"seed": 4})
    demands, attacks, meta = load_scenario(tmp_path / "s.json")
    assert tuple(demands) == inst.demands
    assert tuple(attacks) == inst.attacks
    assert meta == {"seed": 4}


@pytest.mark.parametrize("algorithm", ["1s-rsa", "ld-rsa"])
def test_solution_round_trip(tmp_path, algorithm):
    inst = random_instance(11, paths=(2, 2), num_slices=40)
    sol = solve(algorithm, inst, {0})
    save_solution(sol, tmp_path / "sol.json", {"lambda": 30})
    back = load_solution(tmp_path / "sol.json", inst)
    assert back.same_as(sol)
    assert back.algorithm == algorithm
    assert read_solution_params(tmp_path / "sol.json") == {"lambda": 30}
    assert compute_metrics(back, inst) == compute_metrics(sol, inst)
    data = json.loads((tmp_path / "sol.json").read_text())
    assert set(data["lightpaths"][0]) == {"demand", "nodes", "modulation", "channel"}
    assert set(data["lightpaths"][0]["channel"]) == {"first_slice", "size"}


def test_tampered_overlap_survives_load(tmp_path):
    inst = random_instance(11, paths=(2, 2), num_slices=40)
    data = solution_to_dict(solve("2s-rsa", inst, ()))
    for lp in data["lightpaths"]:
        lp["channel"]["first_slice"] = 0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    kinds = {v.kind for v in check_feasibility(load_solution(path, inst), inst)}
    assert "overlap" in kinds


def test_solution_params_need_object(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("[1, 2]")
    with pytest.raises(FormatError):
        read_solution_params(path)


def test_metrics_csv(tmp_path):
    path = tmp_path / "m.csv"
    row = {"instance_id": "a", "LF_gbps": 1 / 3, "MS": 7, "objective": 0.5}
    append_metrics_rows(path, [row])
    append_metrics_rows(path, [row])
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(METRICS_FIELDS)
    assert len(lines) == 3
    rows = read_metrics_rows(path)
    assert rows[0]["LF_gbps"] == "0.333333"
    assert rows[0]["objective"] == "0.500000"
    assert rows[0]["MS"] == "7"
    assert rows[0] == rows[1]
