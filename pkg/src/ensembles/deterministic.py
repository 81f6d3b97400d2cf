"""
Deterministic Families
Sierpinski gaskets, barbells and the small classical graphs used as exact
oracles

Place in: src/ensembles/deterministic.py
"""

import logging
from itertools import combinations
from typing import Tuple

import numpy as np
import pandas as pd

from src.models.errors import InvalidParameters
from src.models.graph import WeightedGraph, build_graph_arrays

logger = logging.getLogger(__name__)


def gen_sierpinski(N: int, weight_bounds: Tuple[float, float] = (1.0, 1.0), seed: int = 0,
                   dimension: int = 2) -> WeightedGraph:
    """
    Level-N Sierpinski gasket graph over a dimension-simplex

    Args:
        N: level (0 is the bare simplex K_{d+1})
        weight_bounds: i.i.d. uniform conductances on [c1, c2]
        seed: seed for the weights
        dimension: simplex dimension d (2 for the triangle gasket)

    Returns:
        Graph with (d+1)^N cells; the d+1 extreme corners are vertices 0..d
    """
    c1, c2 = (float(w) for w in weight_bounds)
    if N < 0:
        raise InvalidParameters(f'Level must be >= 0, got {N}')
    if not 0 < c1 <= c2 < np.inf:
        raise InvalidParameters(f'Weight bounds must satisfy 0 < c1 <= c2 < inf, got {weight_bounds}')
    if dimension < 1:
        raise InvalidParameters(f'Dimension must be >= 1, got {dimension}')

    k = dimension + 1
    # Corner points in barycentric integer coordinates scaled by 2^N
    corners = np.eye(k, dtype=np.int64) * (2 ** N)
    cells = corners[np.newaxis, :, :]
    for _ in range(N):
        # child j of a cell keeps corner j and halves the way to every other corner
        cells = np.stack([(cells + cells[:, j:j + 1, :]) // 2 for j in range(k)], axis=1)
        cells = cells.reshape(-1, k, k)

    points = np.vstack([corners, cells.reshape(-1, k)])
    labels = pd.DataFrame(points).groupby(list(range(k)), sort=False).ngroup().to_numpy()
    cell_labels = labels[k:].reshape(-1, k)

    pairs = np.array(list(combinations(range(k), 2)), dtype=np.int64)
    a = cell_labels[:, pairs[:, 0]].ravel()
    b = cell_labels[:, pairs[:, 1]].ravel()
    edges = np.unique(np.column_stack([np.minimum(a, b), np.maximum(a, b)]), axis=0)

    if c1 == c2:
        weights = np.full(len(edges), c1)
    else:
        weights = np.random.default_rng(seed).uniform(c1, c2, size=len(edges))
    n = int(labels.max()) + 1
    logger.debug(f'Gasket d={dimension} level {N}: {n} vertices, {len(edges)} edges')
    return build_graph_arrays(edges[:, 0], edges[:, 1], weights, vertex_count=n)


def gen_barbell(N: int, a_N: int) -> WeightedGraph:
    """K_N on 0..N-1 with pendant leaf N+i attached to vertex i for i < a_N"""
    if not (isinstance(N, (int, np.integer)) and isinstance(a_N, (int, np.integer))):
        raise InvalidParameters(f'Barbell parameters must be integers, got N={N!r}, a_N={a_N!r}')
    if not 2 <= a_N <= N:
        raise InvalidParameters(f'Barbell needs 2 <= a_N <= N, got N={N}, a_N={a_N}',
                                {'N': int(N), 'a_N': int(a_N)})
    iu, ju = np.triu_indices(N, k=1)
    u = np.concatenate([iu, np.arange(a_N)])
    v = np.concatenate([ju, N + np.arange(a_N)])
    return build_graph_arrays(u, v, 1.0, vertex_count=N + a_N)


def complete_graph(n: int) -> WeightedGraph:
    if n < 2:
        raise InvalidParameters(f'Complete graph needs n >= 2, got {n}')
    iu, ju = np.triu_indices(n, k=1)
    return build_graph_arrays(iu, ju, 1.0, vertex_count=n)


def cycle_graph(n: int) -> WeightedGraph:
    if n < 3:
        raise InvalidParameters(f'Cycle needs n >= 3, got {n}')
    u = np.arange(n)
    return build_graph_arrays(u, (u + 1) % n, 1.0, vertex_count=n)


def path_graph(n: int) -> WeightedGraph:
    if n < 2:
        raise InvalidParameters(f'Path needs n >= 2, got {n}')
    u = np.arange(n - 1)
    return build_graph_arrays(u, u + 1, 1.0, vertex_count=n)


def star_graph(leaves: int) -> WeightedGraph:
    """Center 0 with leaves 1..leaves"""
    if leaves < 1:
        raise InvalidParameters(f'Star needs at least one leaf, got {leaves}')
    v = np.arange(1, leaves + 1)
    return build_graph_arrays(np.zeros(leaves, dtype=np.int64), v, 1.0, vertex_count=leaves + 1)
