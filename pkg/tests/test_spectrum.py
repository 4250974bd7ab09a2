import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blrsa.model import DEFAULT_MODULATIONS, Demand
from blrsa.spectrum import (
    Channel,
    LightPath,
    NoFeasibleModulation,
    RoutingPath,
    SpectrumConflictError,
    SpectrumGrid,
    build_lightpath,
    first_fit_channel,
    required_slices,
    select_modulation,
)

MOD = {m.name: m for m in DEFAULT_MODULATIONS}


@pytest.mark.parametrize(
    "km, name",
    [
        (1, "16-QAM"),
        (500, "16-QAM"),
        (600, "16-QAM"),
        (601, "32-QAM"),
        (1200, "32-QAM"),
        (1201, "QPSK"),
        (3500, "QPSK"),
        (3501, "BPSK"),
        (6300, "BPSK"),
    ],
)
def test_modulation_reach_boundaries(km, name):
    assert select_modulation(km).name == name


def test_beyond_all_reaches():
    with pytest.raises(NoFeasibleModulation):
        select_modulation(6301)
    with pytest.raises(ValueError):
        select_modulation(0)


@pytest.mark.parametrize(
    "gbps, mod, slices",
    [(400, "16-QAM", 6), (50, "BPSK", 3), (150, "32-QAM", 3), (151, "32-QAM", 6), (1, "QPSK", 3)],
)
def test_required_slices(gbps, mod, slices):
    assert required_slices(gbps, MOD[mod]) == slices


def _path(links, demand=0):
    return RoutingPath(demand, tuple(range(len(links) + 1)), tuple(links), 100.0)


def test_channel_layout():
    ch = Channel(0, 3)
    assert ch.body_end == 3
    assert ch.last_slice == 3
    assert list(ch.span) == [0, 1, 2, 3]


def test_first_fit_on_empty_grid():
    assert first_fit_channel(SpectrumGrid(2, 20), _path([0, 1]), 3) == Channel(0, 3)


def test_first_fit_skips_occupied_block():
    grid = SpectrumGrid(2, 20)
    grid.allocate("x", LightPath(_path([1]), "QPSK", Channel(0, 3)))  # slices 0..3
    assert first_fit_channel(grid, _path([0, 1]), 3) == Channel(4, 3)


def test_first_fit_guard_does_not_fit():
    assert first_fit_channel(SpectrumGrid(1, 4), _path([0]), 4) is None


def test_allocate_release_restores_grid():
    grid = SpectrumGrid(3, 10)
    before = grid.copy()
    lp = LightPath(_path([0, 2]), "QPSK", Channel(2, 3))
    grid.allocate("a", lp)
    assert grid != before
    grid.release("a", lp)
    assert grid == before


def test_disjoint_paths_share_channel():
    grid = SpectrumGrid(2, 10)
    grid.allocate("a", LightPath(_path([0]), "QPSK", Channel(0, 3)))
    grid.allocate("b", LightPath(_path([1]), "QPSK", Channel(0, 3)))
    assert grid.used_slice_count() == 4


def test_overlap_rejected():
    grid = SpectrumGrid(2, 10)
    grid.allocate("a", LightPath(_path([0, 1]), "QPSK", Channel(0, 3)))
    with pytest.raises(SpectrumConflictError):
        grid.allocate("b", LightPath(_path([1]), "QPSK", Channel(3, 3)))
    with pytest.raises(SpectrumConflictError):
        grid.allocate("a", LightPath(_path([1]), "QPSK", Channel(5, 1)))
    with pytest.raises(SpectrumConflictError):
        grid.release("zzz")
    with pytest.raises(SpectrumConflictError):
        grid.release("a", LightPath(_path([0]), "QPSK", Channel(0, 3)))


def test_out_of_range_channel_rejected():
    grid = SpectrumGrid(1, 5)
    with pytest.raises(SpectrumConflictError):
        grid.allocate("a", LightPath(_path([0]), "QPSK", Channel(2, 3)))


def test_grid_statistics():
    grid = SpectrumGrid(2, 20)
    grid.allocate("a", LightPath(_path([0]), "QPSK", Channel(0, 3)))
    grid.allocate("b", LightPath(_path([1]), "QPSK", Channel(10, 3)))
    assert grid.max_slice_index() == 13
    assert grid.used_slice_count() == 8
    assert grid.path_max_slice_index([0]) == 3
    assert SpectrumGrid(1, 3).max_slice_index() == -1


def test_build_lightpath():
    path = RoutingPath(0, (0, 1), (0,), 700.0)
    lp = build_lightpath(path, Demand(0, 0, 1, 300.0), 5)
    assert lp.modulation == "32-QAM"
    assert lp.channel == Channel(5, 6)


def _scan_first_fit(grid, links, size):
    width = size + 1
    for f in range(grid.num_slices - width + 1):
        if all((grid.occupancy[e, f : f + width] == -1).all() for e in links):
            return f
    return None


@settings(max_examples=300, deadline=None)
@given(
    num_slices=st.integers(1, 64),
    blocks=st.lists(
        st.tuples(st.integers(0, 3), st.integers(0, 63), st.integers(1, 8)), max_size=12
    ),
    links=st.sets(st.integers(0, 3), min_size=1, max_size=4),
    size=st.integers(1, 10),
)
def test_first_fit_is_minimal(num_slices, blocks, links, size):
    grid = SpectrumGrid(4, num_slices)
    for k, (link, first, sz) in enumerate(blocks):
        lp = LightPath(_path([link]), "QPSK", Channel(first, sz))
        if grid.is_free([link], lp.channel):
            grid.allocate(k, lp)
    got = first_fit_channel(grid, _path(sorted(links)), size)
    want = _scan_first_fit(grid, sorted(links), size)
    assert (got.first_slice if got else None) == want
    if got is not None:
        assert got.size == size
        assert grid.is_free(sorted(links), got)
