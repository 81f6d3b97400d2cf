"""
Galton-Watson Trees
Supercritical trees conditioned on survival and Kesten's incipient infinite
cluster cut at depth N

Place in: src/ensembles/galton_watson.py
"""

import logging
from typing import List

import numpy as np

from src.ensembles.offspring import OffspringSpec, death_probability
from src.models.errors import (
    BudgetExceeded, InvalidParameters, NotCritical, RejectionBudgetExceeded,
)
from src.models.graph import WeightedGraph, build_graph, build_graph_arrays

logger = logging.getLogger(__name__)

DEFAULT_REJECTION_CAP = 1_000_000
DEFAULT_MAX_VERTICES = 2_000_000


class _TreeBuilder:
    """Accumulates parent -> child edges with consecutive child ids"""

    def __init__(self, start_count: int, max_vertices: int):
        self.count = start_count
        self.parents: List[np.ndarray] = []
        self.children: List[np.ndarray] = []
        self.max_vertices = max_vertices

    def add_generation(self, frontier: np.ndarray, counts: np.ndarray) -> np.ndarray:
        total = int(counts.sum())
        if self.count + total > self.max_vertices:
            raise BudgetExceeded(f'Tree exceeds {self.max_vertices} vertices',
                                 {'max_tree_vertices': self.max_vertices})
        children = np.arange(self.count, self.count + total, dtype=np.int64)
        self.parents.append(np.repeat(frontier, counts))
        self.children.append(children)
        self.count += total
        return children

    def graph(self) -> WeightedGraph:
        if not self.parents:
            return build_graph([], vertex_count=1)
        u = np.concatenate(self.parents)
        v = np.concatenate(self.children)
        return build_graph_arrays(u, v, 1.0, vertex_count=self.count)


def gen_supercritical_gw(spec: OffspringSpec, N: int, seed: int,
                         rejection_cap: int = DEFAULT_REJECTION_CAP,
                         max_vertices: int = DEFAULT_MAX_VERTICES) -> WeightedGraph:
    """
    First N generations of a supercritical GW tree conditioned on Z_N > 0

    Args:
        spec: offspring law with mean > 1
        N: number of generations
        seed: master seed
        rejection_cap: resamples allowed before giving up

    Returns:
        Unit-weight tree rooted at vertex 0, children numbered generation by generation
    """
    if not spec.mean > 1.0:
        raise InvalidParameters(f'Supercritical GW needs mean > 1, got {spec.mean}',
                                {'mean': spec.mean})
    if N < 1:
        raise InvalidParameters(f'N must be >= 1, got {N}')

    logger.debug(f'P(Z_{N} = 0) = {death_probability(spec, N):.4g} for {spec.kind}')
    rng = np.random.default_rng(seed)
    for attempt in range(rejection_cap):
        builder = _TreeBuilder(1, max_vertices)
        frontier = np.zeros(1, dtype=np.int64)
        for _ in range(N):
            counts = spec.sample(rng, frontier.size)
            frontier = builder.add_generation(frontier, counts)
            if frontier.size == 0:
                break
        if frontier.size > 0:
            if attempt:
                logger.debug(f'Survival to generation {N} after {attempt} rejections')
            return builder.graph()
    raise RejectionBudgetExceeded(f'No tree survived to generation {N} in {rejection_cap} attempts',
                                  {'rejection_cap': rejection_cap})


def gen_kesten_iic(spec: OffspringSpec, N: int, seed: int,
                   max_vertices: int = DEFAULT_MAX_VERTICES) -> WeightedGraph:
    """
    Kesten's tree T*_{<=N}: a spine 0-1-...-N whose vertices have size-biased
    offspring counts, with independent critical GW trees hanging off the
    non-spine children, all cut at depth N.
    """
    if not spec.is_critical:
        raise NotCritical(f'IIC needs a critical law (mean 1), got {spec.mean}', {'mean': spec.mean})
    if N < 1:
        raise InvalidParameters(f'N must be >= 1, got {N}')

    rng = np.random.default_rng(seed)
    builder = _TreeBuilder(N + 1, max_vertices)
    builder.parents.append(np.arange(N, dtype=np.int64))
    builder.children.append(np.arange(1, N + 1, dtype=np.int64))

    spine_counts = spec.sample_size_biased(rng, N)
    for depth in range(N):
        # Children are exchangeable, so which one continues the spine does not change the tree
        side = int(spine_counts[depth]) - 1
        frontier = builder.add_generation(np.array([depth], dtype=np.int64), np.array([side]))
        level = depth + 1
        while frontier.size and level < N:
            counts = spec.sample(rng, frontier.size)
            frontier = builder.add_generation(frontier, counts)
            level += 1
    return builder.graph()
