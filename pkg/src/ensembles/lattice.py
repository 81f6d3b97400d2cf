"""
Lattice Generators
Bond percolation in a box and the trace graph of a simple random walk

Place in: src/ensembles/lattice.py
"""

import logging

import numpy as np
import pandas as pd

from src.ensembles.union_find import largest_component
from src.models.errors import InvalidParameters
from src.models.graph import WeightedGraph, build_graph_arrays

logger = logging.getLogger(__name__)


def gen_percolation_box(d: int, N: int, p: float, seed: int) -> WeightedGraph:
    """
    Largest open cluster of bond percolation on [-N, N]^d

    Sites are flat indices into a (2N+1)^d array; bonds are drawn axis by
    axis in increasing site order.
    """
    if d < 2:
        raise InvalidParameters(f'Percolation box needs d >= 2, got {d}')
    if N < 1:
        raise InvalidParameters(f'N must be >= 1, got {N}')
    if not 0 <= p <= 1:
        raise InvalidParameters(f'Bond probability must be in [0, 1], got {p}')

    side = 2 * N + 1
    sites = side ** d
    rng = np.random.default_rng(seed)
    idx = np.arange(sites, dtype=np.int64)
    us, vs = [], []
    for axis in range(d):
        stride = side ** axis
        src = idx[(idx // stride) % side < side - 1]
        is_open = rng.random(src.size) < p
        us.append(src[is_open])
        vs.append(src[is_open] + stride)
    u = np.concatenate(us)
    v = np.concatenate(vs)
    logger.debug(f'Box d={d} N={N} p={p}: {u.size} open bonds of {sum(a.size for a in us)}')
    return largest_component(sites, u, v)


def gen_rw_range(d: int, N: int, seed: int) -> WeightedGraph:
    """
    Trace of an N-step simple random walk on Z^d from the origin.

    Visited points are hashed to ids in order of first visit (origin = 0);
    traversed steps become unit-weight edges, deduplicated.
    """
    if d < 5:
        raise InvalidParameters(f'Random-walk range needs d >= 5, got {d}')
    if N < 1:
        raise InvalidParameters(f'N must be >= 1, got {N}')

    rng = np.random.default_rng(seed)
    axes = rng.integers(0, d, size=N)
    signs = rng.integers(0, 2, size=N) * 2 - 1
    steps = np.zeros((N, d), dtype=np.int64)
    steps[np.arange(N), axes] = signs
    path = np.vstack([np.zeros((1, d), dtype=np.int64), np.cumsum(steps, axis=0)])

    labels = pd.DataFrame(path).groupby(list(range(d)), sort=False).ngroup().to_numpy()
    a, b = labels[:-1], labels[1:]
    pairs = np.unique(np.column_stack([np.minimum(a, b), np.maximum(a, b)]), axis=0)
    n = int(labels.max()) + 1
    logger.debug(f'Walk range d={d} N={N}: {n} points, {len(pairs)} edges')
    return build_graph_arrays(pairs[:, 0], pairs[:, 1], 1.0, vertex_count=n)
