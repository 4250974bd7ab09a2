import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blrsa.model import AttackScenario
from blrsa.vulnerability import (
    BunkerPolicy,
    compute_vul_matrix,
    link_down,
    node_down,
    node_vulnerability,
    place_bunkers,
)

from helpers import equator_line, random_instance, topology_from_edges


def _line_attacks(jam=120.0):
    return [AttackScenario(v, v, 0.0, jam) for v in range(3)]


def test_no_attacks_zero_matrix():
    assert not compute_vul_matrix(equator_line(), []).any()


def test_line_matrix_by_hand():
    vul = compute_vul_matrix(equator_line(100.0), _line_attacks())
    assert vul[0, 1] == 3 and vul[1, 0] == 3
    assert vul[1, 2] == 3 and vul[2, 1] == 3
    assert vul[0, 2] == 0


def test_line_matrix_with_bunker():
    vul = compute_vul_matrix(equator_line(100.0), _line_attacks(), bunkers={1})
    # attack on N3 no longer reaches N1 (200 km) and N2 is shielded
    assert vul[0, 1] == 2
    assert vul[1, 2] == 2


def test_destruction_ignores_bunkers():
    topo = equator_line(100.0)
    down = node_down(topo, [AttackScenario(0, 1, 0.0, 0.0)], bunkers={1})
    assert down[0].tolist() == [False, True, False]


def test_node_vulnerability_modes():
    topo = topology_from_edges(
        [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)], [(0, 1, 10), (0, 2, 10)]
    )
    m = np.zeros((5, 5))
    m[0, 1], m[1, 0], m[0, 2], m[2, 0] = 3, 3, 1, 1
    assert node_vulnerability(m, topo, 0, "avg") == 2.0
    assert node_vulnerability(m, topo, 0, "max") == 3.0
    assert node_vulnerability(m, topo, 1, "avg") == node_vulnerability(m, topo, 1, "max")
    assert node_vulnerability(np.zeros((5, 5)), topo, 0) == 0.0
    with pytest.raises(ValueError):
        node_vulnerability(m, topo, 3)


def test_policy_names():
    assert BunkerPolicy.parse("adaptive/avg") is BunkerPolicy.ADAPTIVE_AVG
    assert BunkerPolicy.parse("NODAL_DEGREE") is BunkerPolicy.NODAL_DEGREE
    assert BunkerPolicy.parse("minneighbour") is BunkerPolicy.MIN_NEIGHBOUR
    with pytest.raises(ValueError):
        BunkerPolicy.parse("random")


@pytest.mark.parametrize("policy", list(BunkerPolicy))
def test_zero_budget(policy):
    assert place_bunkers(policy, equator_line(), _line_attacks(), 0) == frozenset()


def test_nodal_degree_star():
    coords = [(0, 0), (0, 1), (1, 0), (-1, 0), (0, -1)]
    topo = topology_from_edges(coords, [(0, k, 100) for k in range(1, 5)])
    assert place_bunkers("NodalDegree", topo, [], 1) == {0}


def test_adaptive_tie_goes_to_lowest_id():
    # N1 and N2 both score 3 in either mode; the lower id wins
    topo = equator_line(100.0)
    assert place_bunkers("AdaptiveAvg", topo, _line_attacks(), 1) == {0}
    assert place_bunkers("AdaptiveMax", topo, _line_attacks(), 1) == {0}


def test_neighbour_policies_prefer_short_links():
    coords = [(0, 0), (0, 1), (0, 1.1), (0, 3)]
    topo = topology_from_edges(coords, [(0, 1, 110), (1, 2, 10), (2, 3, 200)])
    assert place_bunkers("MinNeighbour", topo, [], 2) == {1, 2}
    assert place_bunkers("AvgNeighbour", topo, [], 1) == {1}


def test_adaptive_placement_skips_protected_nodes():
    inst = random_instance(3, nodes=(6, 6))
    chosen = place_bunkers("AdaptiveMax", inst.topology, inst.attacks, 6)
    assert len(chosen) == 6


def test_budget_capped_by_node_count():
    assert len(place_bunkers("NodalDegree", equator_line(), [], 10)) == 3


@settings(max_examples=500, deadline=None)
@given(seed=st.integers(0, 10**6), extra=st.integers(0, 5))
def test_vul_entries_nonincreasing_in_bunkers(seed, extra):
    inst = random_instance(seed, nodes=(3, 7), destructive=True)
    rng = np.random.default_rng(seed)
    n = inst.topology.num_nodes
    small = set(rng.choice(n, size=int(rng.integers(0, n)), replace=False).tolist())
    large = small | set(rng.choice(n, size=min(extra, n), replace=False).tolist())
    a = compute_vul_matrix(inst.topology, inst.attacks, small)
    b = compute_vul_matrix(inst.topology, inst.attacks, large)
    assert (b <= a).all()


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_vul_matrix_matches_per_attack_count(seed):
    inst = random_instance(seed, nodes=(3, 7), destructive=True)
    topo = inst.topology
    vul = compute_vul_matrix(topo, inst.attacks, {0})
    for link in topo.links:
        count = 0
        for a in inst.attacks:
            down = node_down(topo, [a], {0})[0]
            count += bool(down[link.src] or down[link.dst])
        assert vul[link.src, link.dst] == count
    assert link_down(topo, inst.attacks, {0}).sum() == vul.sum()
