import math

import pytest

from src.analysis.metric_geometry import (
    chaining_functional, covering_number, covering_number_bruteforce, dyadic_scales,
    greedy_packing_profile, packing_number, packing_number_bruteforce, radius_grid, sudakov_functional,
    sudakov_over_scales,
)
from src.analysis.resistance import resistance_diameter, resistance_matrix
from src.ensembles.random_graphs import gen_random_connected
from src.models.errors import BudgetExceeded, InvalidParameters, TooFewCenters
from src.models.models import NetKind, NetMode


@pytest.fixture
def path_metric(path4):
    return resistance_matrix(path4)


# ============================================================================
# NETS
# ============================================================================

def test_path_nets(path_metric):
    for mode in (NetMode.GREEDY, NetMode.EXACT):
        assert packing_number(path_metric, 0.0, mode).count == 4
        assert covering_number(path_metric, 0.0, mode).count == 4
        assert packing_number(path_metric, 1.5, mode).count == 2
        assert covering_number(path_metric, 1.5, mode).count == 2
        assert packing_number(path_metric, 3.5, mode).count == 1
        assert covering_number(path_metric, 3.5, mode).count == 1


def test_greedy_packing_scans_ascending(path_metric):
    result = packing_number(path_metric, 1.5)
    assert result.centers == (0, 3)
    assert result.kind is NetKind.PACKING
    assert result.to_dict()['mode'] == 'greedy'


@pytest.mark.parametrize('seed', [0, 1, 2, 3])
def test_exact_matches_bruteforce(seed):
    m = resistance_matrix(gen_random_connected(9, seed=seed))
    diam = resistance_diameter(m)
    for frac in (0.1, 0.25, 0.4, 0.6):
        r = frac * diam
        pack = packing_number(m, r, NetMode.EXACT)
        cover = covering_number(m, r, NetMode.EXACT)
        assert pack.count == packing_number_bruteforce(m, r)
        assert cover.count == covering_number_bruteforce(m, r)
        assert packing_number(m, r).count <= pack.count
        assert covering_number(m, r).count >= cover.count


@pytest.mark.parametrize('seed', [4, 5])
def test_packing_covering_duality(seed):
    m = resistance_matrix(gen_random_connected(14, seed=seed))
    for r in radius_grid(m, 8)[1:]:
        pack = packing_number(m, r, NetMode.EXACT).count
        assert pack <= covering_number(m, r, NetMode.EXACT).count
        assert covering_number(m, 2 * r, NetMode.EXACT).count <= pack


def test_exact_budget_and_mode(path_metric):
    with pytest.raises(BudgetExceeded):
        packing_number(path_metric, 1.0, NetMode.EXACT, max_vertices=3)
    with pytest.raises(BudgetExceeded):
        covering_number(path_metric, 1.0, 'exact', max_vertices=3)
    with pytest.raises(InvalidParameters):
        packing_number(path_metric, 1.0, 'optimal')
    with pytest.raises(InvalidParameters):
        covering_number(path_metric, -0.5)


def test_packing_profile_is_monotone():
    m = resistance_matrix(gen_random_connected(20, seed=6))
    counts = greedy_packing_profile(m, radius_grid(m, 10))
    assert counts[0] == 20
    assert counts[-1] == 1


# ============================================================================
# SCALES AND FUNCTIONALS
# ============================================================================

def test_dyadic_scales_path(path_metric):
    scales = dyadic_scales(path_metric)
    assert scales.radii == pytest.approx((3.0, 1.5, 0.0))
    assert scales.k0 == 2


def test_dyadic_scales_cycle(cycle6):
    scales = dyadic_scales(resistance_matrix(cycle6))
    assert scales.radii == pytest.approx((1.5, 0.0))


def test_dyadic_scales_single_vertex(single_vertex):
    scales = dyadic_scales(resistance_matrix(single_vertex))
    assert scales.radii == (0.0, 0.0)
    assert scales.k0 == 1
    assert chaining_functional(resistance_matrix(single_vertex), scales) == 0.0


def test_chaining_functional_path(path_metric):
    expected = math.sqrt(3.0 * math.log(2)) + math.sqrt(1.5 * math.log(4))
    assert chaining_functional(path_metric) == pytest.approx(expected)
    assert chaining_functional(path_metric, mode=NetMode.EXACT) == pytest.approx(expected)


def test_chaining_functional_cycle(cycle6):
    assert chaining_functional(resistance_matrix(cycle6)) == pytest.approx(math.sqrt(1.5 * math.log(6)))


def test_sudakov_functional(path_metric):
    assert sudakov_functional(path_metric, [0, 3]) == pytest.approx(math.sqrt(3.0 * math.log(2)))
    assert sudakov_functional(path_metric, [0, 2, 3, 3]) == pytest.approx(math.sqrt(math.log(3)))
    with pytest.raises(TooFewCenters):
        sudakov_functional(path_metric, [1, 1])


def test_radius_grid(path_metric):
    grid = radius_grid(path_metric, 4)
    assert grid.tolist() == pytest.approx([0.0, 1.0, 2.0, 3.0])


def test_sudakov_over_scales(path_metric, single_vertex):
    # path 0-1-2-3: the r = 0 packing keeps all four vertices at spacing 1
    assert sudakov_over_scales(path_metric) >= math.sqrt(math.log(4)) - 1e-12
    assert sudakov_over_scales(resistance_matrix(single_vertex)) is None
