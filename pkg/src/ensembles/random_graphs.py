"""
Random Graph Generators
Erdos-Renyi regimes plus the random weighted graphs and series-parallel
networks used as test oracles

Place in: src/ensembles/random_graphs.py
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.ensembles.union_find import largest_component
from src.models.errors import InvalidParameters
from src.models.graph import WeightedGraph, build_graph_arrays

logger = logging.getLogger(__name__)

ER_REGIMES = ('supercritical_c_over_N', 'supercritical_f_over_N', 'critical')

# Growth rules f(N) for the f(N)/N regime (log N << f(N) << sqrt N)
F_RULES: Dict[str, Callable[[int], float]] = {
    'log_squared': lambda N: math.log(N) ** 2,
    'log_cubed': lambda N: math.log(N) ** 3,
    'log_three_halves': lambda N: math.log(N) ** 1.5,
}

DEFAULT_C = 2.0
DEFAULT_F_RULE = 'log_squared'


def er_edge_probability(N: int, regime: str, c: float = DEFAULT_C,
                        f_rule: str = DEFAULT_F_RULE) -> float:
    """Default p for each Erdos-Renyi regime"""
    if regime == 'supercritical_c_over_N':
        if c <= 1:
            raise InvalidParameters(f'c/N regime needs c > 1, got {c}')
        return min(1.0, c / N)
    if regime == 'supercritical_f_over_N':
        if f_rule not in F_RULES:
            raise InvalidParameters(f'Unknown f rule {f_rule!r}; expected one of {sorted(F_RULES)}')
        return min(1.0, F_RULES[f_rule](N) / N)
    if regime == 'critical':
        return 1.0 / N
    raise InvalidParameters(f'Unknown regime {regime!r}; expected one of {ER_REGIMES}')


def _pair_from_index(N: int, idx: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Decode positions in the row-major upper triangle of an N x N matrix"""
    row_len = np.arange(N - 1, 0, -1, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(row_len)])
    i = np.searchsorted(offsets, idx, side='right') - 1
    j = idx - offsets[i] + i + 1
    return i, j


def gen_er(N: int, p: Optional[float] = None, seed: int = 0,
           regime: str = 'supercritical_c_over_N', c: float = DEFAULT_C,
           f_rule: str = DEFAULT_F_RULE) -> WeightedGraph:
    """
    Largest component of G(N, p)

    Args:
        N: number of vertices before extraction
        p: edge probability; the regime default is used when omitted
        seed: master seed
        regime: one of ER_REGIMES

    Returns:
        Unit-weight component, vertices relabeled densely by original id
    """
    if N < 2:
        raise InvalidParameters(f'Erdos-Renyi needs N >= 2, got {N}')
    if regime not in ER_REGIMES:
        raise InvalidParameters(f'Unknown regime {regime!r}; expected one of {ER_REGIMES}')
    if p is None:
        p = er_edge_probability(N, regime, c, f_rule)
    if not 0 < p <= 1:
        raise InvalidParameters(f'Edge probability must be in (0, 1], got {p}')

    rng = np.random.default_rng(seed)
    pairs = N * (N - 1) // 2
    kept = int(rng.binomial(pairs, p))
    idx = np.sort(rng.choice(pairs, size=kept, replace=False)) if kept else np.zeros(0, np.int64)
    u, v = _pair_from_index(N, idx.astype(np.int64))
    logger.debug(f'G({N}, {p:.4g}): {kept} edges')
    return largest_component(N, u, v)


def gen_random_connected(n: int, seed: int, weight_range: Tuple[float, float] = (0.1, 10.0),
                         extra_edge_prob: float = 0.3) -> WeightedGraph:
    """Random spanning tree plus independent extra edges, uniform random weights"""
    if n < 2:
        raise InvalidParameters(f'Need at least 2 vertices, got {n}')
    rng = np.random.default_rng(seed)
    labels = rng.permutation(n)
    attach = np.array([rng.integers(0, k) for k in range(1, n)], dtype=np.int64)
    tree = {(min(a, b), max(a, b)) for a, b in zip(labels[1:].tolist(), labels[attach].tolist())}

    iu, ju = np.triu_indices(n, k=1)
    extra = rng.random(iu.size) < extra_edge_prob
    pairs = tree | {(int(a), int(b)) for a, b in zip(iu[extra], ju[extra])}
    pairs = sorted(pairs)
    u = np.array([a for a, _ in pairs], dtype=np.int64)
    v = np.array([b for _, b in pairs], dtype=np.int64)
    w = rng.uniform(weight_range[0], weight_range[1], size=u.size)
    return build_graph_arrays(u, v, w, vertex_count=n)


@dataclass
class _Network:
    vertex_count: int
    edges: List[Tuple[int, int, float]]
    s: int
    t: int
    resistance: float


def _compose(rng: np.random.Generator, budget: int, weight_range: Tuple[float, float]) -> _Network:
    if budget == 1 or rng.random() < 0.25:
        w = float(rng.uniform(*weight_range))
        return _Network(2, [(0, 1, w)], 0, 1, 1.0 / w)
    left = int(rng.integers(1, budget))
    a = _compose(rng, left, weight_range)
    b = _compose(rng, budget - left, weight_range)
    if rng.random() < 0.5:
        # series: b.s glued onto a.t
        fixed = {b.s: a.t}
        mapping = _glue(b, fixed, a.vertex_count)
        resistance = a.resistance + b.resistance
        s, t = a.s, mapping[b.t]
    else:
        fixed = {b.s: a.s, b.t: a.t}
        mapping = _glue(b, fixed, a.vertex_count)
        resistance = a.resistance * b.resistance / (a.resistance + b.resistance)
        s, t = a.s, a.t
    edges = a.edges + [(mapping[x], mapping[y], w) for x, y, w in b.edges]
    count = a.vertex_count + b.vertex_count - len(fixed)
    return _Network(count, edges, s, t, resistance)


def _glue(b: _Network, fixed: Dict[int, int], offset: int) -> Dict[int, int]:
    mapping = dict(fixed)
    nxt = offset
    for x in range(b.vertex_count):
        if x not in mapping:
            mapping[x] = nxt
            nxt += 1
    return mapping


def series_parallel_network(seed: int, max_edges: int = 12,
                            weight_range: Tuple[float, float] = (0.1, 10.0)
                            ) -> Tuple[WeightedGraph, int, int, float]:
    """
    Random two-terminal series-parallel network with its closed-form resistance

    Parallel edges produced by the composition are merged by adding conductances.

    Returns:
        (graph, source terminal, sink terminal, terminal resistance)
    """
    rng = np.random.default_rng(seed)
    net = _compose(rng, max_edges, weight_range)
    merged: Dict[Tuple[int, int], float] = {}
    for x, y, w in net.edges:
        key = (min(x, y), max(x, y))
        merged[key] = merged.get(key, 0.0) + w
    keys = sorted(merged)
    u = np.array([k[0] for k in keys], dtype=np.int64)
    v = np.array([k[1] for k in keys], dtype=np.int64)
    w = np.array([merged[k] for k in keys])
    return build_graph_arrays(u, v, w, vertex_count=net.vertex_count), net.s, net.t, net.resistance
