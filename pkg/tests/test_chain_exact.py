import math

import numpy as np
import pytest

from src.analysis.chain_exact import (
    commute_bounds, cover_lower_bounds, exact_cover_time, hitting_times, matthews_upper, sandwich_check,
)
from src.analysis.resistance import resistance_diameter, resistance_matrix
from src.ensembles.deterministic import complete_graph, cycle_graph, path_graph
from src.ensembles.random_graphs import gen_random_connected
from src.models.errors import BudgetExceeded, InvalidParameters
from src.models.graph import volume


def harmonic(k):
    return math.fsum(1.0 / i for i in range(1, k + 1))


# ============================================================================
# HITTING TIMES
# ============================================================================

def test_complete_graph_hitting(triangle):
    profile = hitting_times(triangle)
    assert profile.t_hit == pytest.approx(2.0)
    off = profile.matrix[~np.eye(3, dtype=bool)]
    assert np.allclose(off, 2.0)
    assert np.all(np.diag(profile.matrix) == 0)


def test_path_hitting(path4):
    profile = hitting_times(path4)
    assert profile.matrix[0, 3] == pytest.approx(9.0)
    assert profile.t_hit == pytest.approx(9.0)
    assert profile.witness == (0, 3)


def test_star_hitting(star5):
    # leaf to leaf: one step in, then 2k - 1 expected from the center
    profile = hitting_times(star5)
    assert profile.t_hit == pytest.approx(10.0)
    assert profile.matrix[0, 1] == pytest.approx(9.0)


def test_commute_identity_on_random_graph():
    g = gen_random_connected(25, seed=13)
    profile = hitting_times(g, threads=2)
    m = resistance_matrix(g)
    vol = volume(g)
    commute = profile.matrix + profile.matrix.T
    assert np.allclose(commute, vol * m.table, rtol=1e-8)
    assert profile.commute_residual <= 1e-8


def test_hitting_budget_and_single_vertex(single_vertex):
    with pytest.raises(BudgetExceeded):
        hitting_times(path_graph(6), max_vertices=5)
    assert hitting_times(single_vertex).t_hit == 0.0


# ============================================================================
# EXACT COVER TIMES
# ============================================================================

@pytest.mark.parametrize('n', [2, 3, 4, 6, 8])
def test_complete_graph_cover(n):
    result = exact_cover_time(complete_graph(n))
    expected = (n - 1) * harmonic(n - 1)
    assert result.t_cov == pytest.approx(expected, rel=1e-10)
    assert np.allclose(result.per_start, expected)


@pytest.mark.parametrize('n', [3, 5, 7, 10])
def test_cycle_cover(n):
    assert exact_cover_time(cycle_graph(n)).t_cov == pytest.approx(n * (n - 1) / 2, rel=1e-10)


@pytest.mark.parametrize('n', [2, 3, 4, 5, 9])
def test_path_cover_per_start(n):
    L = n - 1
    result = exact_cover_time(path_graph(n))
    expected = [x * (L - x) + L * L for x in range(n)]
    assert np.allclose(result.per_start, expected, rtol=1e-10)
    assert result.t_cov == pytest.approx(max(expected), rel=1e-10)
    assert result.per_start[result.worst_start] == result.t_cov


def test_cover_state_space_and_budget(single_vertex):
    assert exact_cover_time(cycle_graph(5)).state_space == 5 * 16
    assert exact_cover_time(single_vertex).t_cov == 0.0
    with pytest.raises(BudgetExceeded):
        exact_cover_time(cycle_graph(15))


def test_cover_at_least_farthest_hitting():
    g = gen_random_connected(8, seed=21)
    cover = exact_cover_time(g)
    lower = cover_lower_bounds(hitting_times(g))
    assert np.all(np.array(cover.per_start) >= lower - 1e-9)


# ============================================================================
# BOUNDS
# ============================================================================

def test_matthews_upper(triangle):
    profile = hitting_times(triangle)
    assert matthews_upper(profile, 3) == pytest.approx(2.0 * (math.log(3) + 1))
    assert matthews_upper(2.0, 3) == matthews_upper(profile, 3)
    with pytest.raises(InvalidParameters):
        matthews_upper(1.0, 1)


@pytest.mark.parametrize('seed', range(5))
def test_sandwich_holds_on_random_graphs(seed):
    g = gen_random_connected(9, seed=100 + seed)
    t_cov = exact_cover_time(g).t_cov
    t_hit = hitting_times(g).t_hit
    result = sandwich_check(t_cov, t_hit, g.vertex_count)
    assert result.asserted and result.passed
    assert result.lower_slack >= 0
    assert result.upper_slack >= 0


def test_sandwich_tolerance_and_small_graphs():
    assert not sandwich_check(1.0, 2.0, 5).passed
    assert sandwich_check(1.9, 2.0, 5, tolerance=0.2).passed
    two = sandwich_check(1.0, 1.0, 2)
    assert not two.asserted and two.passed


def test_commute_bounds(triangle, path4):
    t_hit = hitting_times(triangle).t_hit
    bounds = commute_bounds(triangle, resistance_diameter(resistance_matrix(triangle)), t_hit)
    assert bounds.passed
    assert bounds.hit_ratio == pytest.approx(0.5)

    t_hit = hitting_times(path4).t_hit
    bounds = commute_bounds(path4, 3.0, t_hit)
    assert bounds.passed
    assert bounds.hit_ratio == pytest.approx(0.5)
    assert not commute_bounds(path4, 3.0, 100.0).passed
