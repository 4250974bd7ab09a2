import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blrsa.io import bundled_topology
from blrsa.model import validate_instance
from blrsa.scenarios import DEFAULT_SLICES, GenSpec, generate_attacks, generate_demands, make_instance

PL12 = bundled_topology("pl12")


def test_small_group_volume_and_rates():
    demands = generate_demands(GenSpec("small", 3, 200.0, PL12))
    assert sum(d.bitrate_gbps for d in demands) == 1000
    assert all(1 <= d.bitrate_gbps <= 400 for d in demands)
    assert all(d.src != d.dst for d in demands)
    assert [d.id for d in demands] == list(range(len(demands)))


def test_large_group_volume_and_rates():
    demands = generate_demands(GenSpec("large", 3, 200.0, PL12))
    assert sum(d.bitrate_gbps for d in demands) == 40000
    assert all(1 <= d.bitrate_gbps <= 500 for d in demands)
    # only the final demand may be trimmed below the range floor
    assert all(d.bitrate_gbps >= 50 for d in demands[:-1])


def test_attack_counts():
    assert len(generate_attacks(GenSpec("small", 0, 200.0, PL12))) == 12
    large = generate_attacks(GenSpec("large", 0, 200.0, PL12))
    assert len(large) == 36
    assert len({a.target for a in large}) > 1


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32), x=st.floats(10.0, 1000.0), group=st.sampled_from(["small", "large"]))
def test_attack_ranges(seed, x, group):
    for a in generate_attacks(GenSpec(group, seed, x, PL12)):
        assert a.destructive_km == 0.0
        assert 10.0 <= a.jamming_km <= x
        assert 0 <= a.target < 12


def test_small_group_targets_every_node_once():
    attacks = generate_attacks(GenSpec("small", 9, 150.0, PL12))
    assert [a.target for a in attacks] == list(range(12))


def test_same_seed_same_scenario():
    a = GenSpec("large", 42, 200.0, PL12)
    assert generate_demands(a) == generate_demands(a)
    assert generate_attacks(a) == generate_attacks(a)


def test_seeds_and_x_change_the_draw():
    assert generate_demands(GenSpec("small", 1, 200.0, PL12)) != generate_demands(GenSpec("small", 2, 200.0, PL12))
    a = generate_attacks(GenSpec("small", 1, 200.0, PL12))
    b = generate_attacks(GenSpec("small", 1, 300.0, PL12))
    assert [x.jamming_km for x in a] != [x.jamming_km for x in b]
    # demands do not depend on X
    assert generate_demands(GenSpec("small", 1, 200.0, PL12)) == generate_demands(GenSpec("small", 1, 300.0, PL12))


@pytest.mark.parametrize(
    "args",
    [("medium", 0, 200.0), ("small", -1, 200.0), ("small", 0, 5.0), ("small", 2**64, 200.0)],
)
def test_genspec_validation(args):
    with pytest.raises(ValueError):
        GenSpec(*args, PL12)


@pytest.mark.parametrize("name", ["pl12", "dt14", "euro16"])
def test_instances_are_valid(name):
    topo = bundled_topology(name)
    for group in ("small", "large"):
        inst = make_instance(GenSpec(group, 5, 200.0, topo), num_paths=2, num_bunkers=2)
        assert validate_instance(inst) == []
        assert inst.num_slices == DEFAULT_SLICES[group]
