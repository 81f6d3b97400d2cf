import networkx as nx
import numpy as np
import pytest

from src.analysis.resistance import (
    build_metric, delete_edge, deletion_decrease, diameter_is_exact, diameter_witness, green_kernel,
    nash_williams_bound, non_bridge_edges, per_pair_metric, resistance_ball, resistance_diameter,
    resistance_matrix, write_resistance_csv,
)
from src.ensembles.deterministic import complete_graph, gen_sierpinski
from src.ensembles.random_graphs import gen_random_connected, series_parallel_network
from src.models.errors import (
    BudgetExceeded, DisconnectedGraph, InvalidParameters, NotACutset, OverlappingCutsets,
)
from src.models.models import ResistanceMode


# ============================================================================
# CLOSED FORMS
# ============================================================================

@pytest.mark.parametrize('n', [3, 5, 8])
def test_complete_graph_resistance(n):
    m = resistance_matrix(complete_graph(n))
    off = m.table[~np.eye(n, dtype=bool)]
    assert np.allclose(off, 2.0 / n)
    assert resistance_diameter(m) == pytest.approx(2.0 / n)
    assert diameter_witness(m) == (0, 1)


def test_cycle_resistance(cycle6):
    m = resistance_matrix(cycle6)
    for k in range(6):
        assert m.distance(0, k) == pytest.approx(k * (6 - k) / 6)
    assert resistance_diameter(m) == pytest.approx(1.5)
    assert diameter_witness(m) == (0, 3)


def test_series_weights(weighted_path):
    m = resistance_matrix(weighted_path)
    assert m.distance(0, 1) == pytest.approx(0.5)
    assert m.distance(1, 2) == pytest.approx(2.0)
    assert m.distance(0, 2) == pytest.approx(2.5)


@pytest.mark.parametrize('seed', range(200))
def test_metric_axioms_on_random_graphs(seed):
    n = 2 + seed % 24
    m = resistance_matrix(gen_random_connected(n, seed=seed, weight_range=(0.1, 10.0)))
    t = m.table
    assert np.allclose(t, t.T, rtol=0, atol=1e-12)
    assert np.all(np.diag(t) == 0)
    assert np.all(t[~np.eye(n, dtype=bool)] > 0)
    # triangle inequality
    assert np.all(t[:, None, :] <= t[:, :, None] + t[None, :, :] + 1e-9)


def test_foster_sum():
    g = gen_random_connected(15, seed=8)
    m = resistance_matrix(g)
    total = sum(w * m.distance(u, v) for u, v, w in g.edges)
    assert total == pytest.approx(g.vertex_count - 1)


def test_series_parallel_closed_form():
    for seed in range(10):
        g, s, t, expected = series_parallel_network(seed)
        assert resistance_matrix(g).distance(s, t) == pytest.approx(expected, rel=1e-9)


def test_gasket_corner_resistance():
    # corner-to-corner resistance of the level-N gasket is (2/3)(5/3)^N
    for level in (0, 1, 2):
        m = resistance_matrix(gen_sierpinski(level))
        assert m.distance(0, 1) == pytest.approx(2.0 / 3.0 * (5.0 / 3.0) ** level)


def test_single_vertex_metric(single_vertex):
    m = resistance_matrix(single_vertex)
    assert resistance_diameter(m) == 0.0
    assert diameter_witness(m) == (0, 0)


# ============================================================================
# MODES
# ============================================================================

def test_dense_budget():
    with pytest.raises(BudgetExceeded):
        resistance_matrix(complete_graph(5), max_vertices=4)
    assert build_metric(complete_graph(5), max_dense=4).mode == ResistanceMode.PER_PAIR


def test_per_pair_matches_dense():
    g = gen_random_connected(20, seed=11)
    dense = resistance_matrix(g)
    lazy = per_pair_metric(g, threads=2)
    pairs = [(0, 19), (3, 7), (12, 5)]
    assert np.allclose(lazy.distances(pairs), [dense.distance(*p) for p in pairs], rtol=1e-8)
    assert np.allclose(lazy.row(4), dense.row(4), rtol=1e-8, atol=1e-12)
    with pytest.raises(BudgetExceeded):
        lazy.table


def test_per_pair_diameter_is_lower_bound(path4):
    m = per_pair_metric(path4)
    assert not diameter_is_exact(m)
    assert resistance_diameter(m) == pytest.approx(3.0)


def test_resistance_ball(path4):
    m = resistance_matrix(path4)
    assert resistance_ball(m, 0, 0.0) == frozenset({0})
    assert resistance_ball(m, 1, 1.0) == frozenset({0, 1, 2})
    with pytest.raises(InvalidParameters):
        resistance_ball(m, 0, -1.0)


# ============================================================================
# GREEN KERNEL AND CUTSETS
# ============================================================================

def test_green_kernel_on_path(path4):
    kernel = green_kernel(resistance_matrix(path4), root=0)
    expected = np.minimum.outer(np.arange(4.0), np.arange(4.0))
    assert np.allclose(kernel.matrix, expected)
    assert kernel.reduced.shape == (3, 3)


def test_green_kernel_is_psd():
    kernel = green_kernel(resistance_matrix(gen_random_connected(10, seed=2)), root=4)
    assert np.linalg.eigvalsh(kernel.reduced).min() > -1e-9
    assert np.all(kernel.matrix[4] == 0)


def test_nash_williams_equals_resistance_on_path(weighted_path):
    bound = nash_williams_bound(weighted_path, 0, 2, [[(0, 1)], [(1, 2)]])
    assert bound == pytest.approx(2.5)


def test_nash_williams_lower_bounds_cycle(cycle6):
    m = resistance_matrix(cycle6)
    cuts = [[(0, 1), (0, 5)], [(1, 2), (4, 5)], [(2, 3), (3, 4)]]
    bound = nash_williams_bound(cycle6, 0, 3, cuts)
    assert bound == pytest.approx(1.5)
    assert bound <= m.distance(0, 3) + 1e-12


def test_nash_williams_rejects_bad_cutsets(cycle6):
    with pytest.raises(NotACutset):
        nash_williams_bound(cycle6, 0, 3, [[(0, 1)]])
    with pytest.raises(NotACutset):
        nash_williams_bound(cycle6, 0, 3, [[(0, 3)]])
    with pytest.raises(OverlappingCutsets):
        nash_williams_bound(cycle6, 0, 3, [[(0, 1), (0, 5)], [(0, 1), (3, 4)]])


@pytest.mark.parametrize('seed', range(30))
def test_nash_williams_equals_resistance_on_trees(seed):
    n = 2 + seed % 20
    tree = gen_random_connected(n, seed=500 + seed, extra_edge_prob=0.0)
    assert tree.is_tree
    m = resistance_matrix(tree)
    x, y = 0, n - 1
    path = nx.shortest_path(tree.to_networkx(), x, y)
    cuts = [[(a, b)] for a, b in zip(path[:-1], path[1:])]
    assert abs(nash_williams_bound(tree, x, y, cuts) - m.distance(x, y)) <= 1e-9


# ============================================================================
# EDGE DELETION
# ============================================================================

@pytest.mark.parametrize('seed', range(50))
def test_rayleigh_edge_deletion(seed):
    g = gen_random_connected(4 + seed % 22, seed=1000 + seed, extra_edge_prob=0.4)
    before = resistance_matrix(g).table
    candidates = non_bridge_edges(g)
    assert candidates or g.is_tree
    for k in candidates:
        after = resistance_matrix(delete_edge(g, k)).table
        assert np.all(after >= before - 1e-9)
        assert deletion_decrease(g, k) <= 1e-9


def test_deleting_cycle_edge_gives_path(cycle6):
    assert non_bridge_edges(cycle6) == list(range(6))
    path = delete_edge(cycle6, cycle6.edges.index((0, 5, 1.0)))
    assert path.is_tree
    assert resistance_matrix(path).distance(0, 5) == pytest.approx(5.0)
    assert resistance_matrix(cycle6).distance(0, 5) == pytest.approx(5.0 / 6.0)


def test_bridges_cannot_be_deleted(path4):
    assert non_bridge_edges(path4) == []
    with pytest.raises(DisconnectedGraph):
        delete_edge(path4, 1)
    with pytest.raises(InvalidParameters):
        delete_edge(path4, 3)


def test_resistance_csv(tmp_path, triangle):
    path = tmp_path / 'r.csv'
    write_resistance_csv(resistance_matrix(triangle), path)
    lines = path.read_text().splitlines()
    assert lines[0] == 'x,y,R'
    assert len(lines) == 4
