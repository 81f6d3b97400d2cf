import math

import numpy as np
import pytest

from src.models.errors import (
    DisconnectedGraph, DuplicateEdge, EmptyGraph, InvalidVertex, IoFailure, MalformedFile,
    NonPositiveWeight, SelfLoop,
)
from src.models.graph import (
    build_graph, graph_distance, parse_graph, read_graph, volume, write_graph,
)


# ============================================================================
# CONSTRUCTION
# ============================================================================

def test_edges_are_canonical_and_sorted():
    g = build_graph([(2, 1, 1.0), (1, 0, 3.0)])
    assert g.edges == [(0, 1, 3.0), (1, 2, 1.0)]
    assert g.vertex_count == 3
    assert g.is_tree


def test_vertex_weights_and_volume(weighted_path):
    assert weighted_path.mu.tolist() == [2.0, 2.5, 0.5]
    assert volume(weighted_path) == pytest.approx(5.0)
    assert volume(weighted_path) == pytest.approx(weighted_path.mu.sum())


def test_neighbors_sorted_by_id(star5):
    assert [y for y, _ in star5.neighbors(0)] == [1, 2, 3, 4, 5]
    assert star5.neighbors(3) == [(0, 1.0)]


def test_single_vertex_graph(single_vertex):
    assert single_vertex.vertex_count == 1
    assert single_vertex.edge_count == 0
    assert volume(single_vertex) == 0.0


@pytest.mark.parametrize('edges, error', [
    ([(0, 0, 1.0)], SelfLoop),
    ([(0, 1, 0.0)], NonPositiveWeight),
    ([(0, 1, -1.0)], NonPositiveWeight),
    ([(0, 1, math.inf)], NonPositiveWeight),
    ([(0, 1, 1.0), (1, 0, 2.0)], DuplicateEdge),
    ([(0, 1, 1.0), (2, 3, 1.0)], DisconnectedGraph),
    ([(-1, 0, 1.0)], InvalidVertex),
    ([], EmptyGraph),
])
def test_invalid_edge_lists(edges, error):
    with pytest.raises(error) as exc:
        build_graph(edges)
    assert exc.value.exit_status == 2


def test_isolated_vertex_is_disconnected():
    with pytest.raises(DisconnectedGraph):
        build_graph([(0, 1, 1.0)], vertex_count=3)


def test_graph_distance(cycle6):
    assert graph_distance(cycle6, 0, 3) == 3
    assert graph_distance(cycle6, 0, 5) == 1
    assert graph_distance(cycle6, 2, 2) == 0
    with pytest.raises(InvalidVertex):
        graph_distance(cycle6, 0, 6)


def test_laplacian_rows_sum_to_zero(cycle6):
    lap = cycle6.laplacian().toarray()
    assert np.allclose(lap.sum(axis=1), 0.0)
    assert np.allclose(np.diag(lap), cycle6.mu)


# ============================================================================
# .wgr FORMAT
# ============================================================================

def test_write_then_read_preserves_weights(tmp_path):
    g = build_graph([(0, 1, 0.1), (1, 2, 1.0 / 3.0), (0, 2, 7.0)])
    path = tmp_path / 'g.wgr'
    write_graph(g, path)
    text = path.read_text()
    assert text.splitlines()[0] == '3 3'
    assert text.splitlines()[1] == '0 1 0.1'
    assert read_graph(path) == g


def test_parse_rejects_bad_header():
    with pytest.raises(MalformedFile):
        parse_graph('3\n0 1 1\n')
    with pytest.raises(MalformedFile):
        parse_graph('x y\n0 1 1\n')


def test_parse_rejects_edge_count_mismatch():
    with pytest.raises(MalformedFile):
        parse_graph('3 3\n0 1 1\n1 2 1\n')


def test_parse_single_vertex():
    g = parse_graph('1 0\n')
    assert g.vertex_count == 1


def test_read_missing_file(tmp_path):
    with pytest.raises(IoFailure):
        read_graph(tmp_path / 'missing.wgr')


def test_read_empty_file(tmp_path):
    path = tmp_path / 'empty.wgr'
    path.write_text('')
    with pytest.raises(MalformedFile):
        read_graph(path)
