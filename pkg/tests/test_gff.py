import math

import numpy as np
import pytest

from src.analysis.gff import (
    BLOCK_SIZE, build_gff, default_root, estimate_expected_max, field_ratio, increment_residual,
    sample_gff, sample_gff_batch,
)
from src.analysis.resistance import resistance_matrix
from src.ensembles.deterministic import gen_sierpinski
from src.ensembles.random_graphs import gen_random_connected
from src.models.errors import DegenerateField, InvalidParameters
from src.models.graph import build_graph


# ============================================================================
# FACTORIZATION
# ============================================================================

def test_factor_reproduces_kernel(path4):
    m = resistance_matrix(path4)
    model = build_gff(m)
    assert model.root == default_root(m) == 0
    assert model.rank == 3
    assert model.factor_error <= 1e-8
    assert np.allclose(model.factor @ model.factor.T, model.kernel.reduced)


def test_increment_variances_match_resistance():
    m = resistance_matrix(gen_random_connected(15, seed=7))
    model = build_gff(m, root=3)
    assert model.root == 3
    assert increment_residual(model, m) <= 1e-9


def test_gasket_factor():
    m = resistance_matrix(gen_sierpinski(2, (0.5, 2.0), seed=4))
    model = build_gff(m)
    assert model.rank == m.vertex_count - 1
    assert increment_residual(model, m) <= 1e-9


def test_single_vertex_field(single_vertex):
    model = build_gff(resistance_matrix(single_vertex))
    assert model.rank == 0
    assert sample_gff(model, 0).tolist() == [0.0]
    assert estimate_expected_max(model, 10, seed=0).mean == 0.0


# ============================================================================
# SAMPLING
# ============================================================================

def test_root_is_pinned(cycle6):
    model = build_gff(resistance_matrix(cycle6), root=2)
    samples = sample_gff_batch(model, 100, seed=1)
    assert samples.shape == (100, 6)
    assert np.all(samples[:, 2] == 0.0)


def test_sample_covariance(triangle):
    model = build_gff(resistance_matrix(triangle))
    samples = sample_gff_batch(model, 40000, seed=2)
    free = samples[:, model.free_vertices]
    assert np.allclose(np.cov(free, rowvar=False), model.kernel.reduced, atol=0.02)


def test_sample_gff_accepts_seed_or_generator(path4):
    model = build_gff(resistance_matrix(path4))
    a = sample_gff(model, 5)
    b = sample_gff(model, np.random.default_rng(5))
    assert np.array_equal(a, b)


def test_batches_are_reproducible(path4):
    model = build_gff(resistance_matrix(path4))
    replicas = BLOCK_SIZE + 10
    assert np.array_equal(sample_gff_batch(model, replicas, 3), sample_gff_batch(model, replicas, 3))
    assert not np.array_equal(sample_gff_batch(model, 10, 3), sample_gff_batch(model, 10, 4))


# ============================================================================
# EXPECTED MAXIMUM
# ============================================================================

@pytest.mark.parametrize('weight', [1.0, 4.0])
def test_single_edge_expected_max(weight):
    # eta_1 ~ N(0, 1/w) and the pinned root contributes 0: E max = sqrt(1 / (2 pi w))
    g = build_graph([(0, 1, weight)])
    model = build_gff(resistance_matrix(g), root=0)
    est = estimate_expected_max(model, 40000, seed=6)
    assert abs(est.mean - math.sqrt(1.0 / (2 * math.pi * weight))) <= 5 * est.standard_error
    assert est.root == 0


def test_expected_max_thread_invariance():
    model = build_gff(resistance_matrix(gen_random_connected(10, seed=1)))
    replicas = 3 * BLOCK_SIZE
    one = estimate_expected_max(model, replicas, seed=8, threads=1)
    many = estimate_expected_max(model, replicas, seed=8, threads=3)
    assert one.mean == many.mean
    assert one.standard_error == many.standard_error


def test_expected_max_needs_replicas(path4):
    model = build_gff(resistance_matrix(path4))
    with pytest.raises(InvalidParameters):
        estimate_expected_max(model, 1, seed=0)


def test_field_ratio(triangle):
    assert field_ratio(triangle, 3.0, 0.5) == pytest.approx(3.0 / (6.0 * 0.25))
    with pytest.raises(DegenerateField):
        field_ratio(triangle, 3.0, 0.0)
