"""
Walk Monte Carlo
Seeded cover-time and hitting-time estimation with compiled walk kernels

Place in: src/analysis/walk_mc.py
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from numba import njit

from src.analysis.resistance import ResistanceMetric, diameter_witness
from src.extensions import parallel_map, substream_seed
from src.models.errors import InvalidParameters, NumericalFailure, StepBudgetExceeded
from src.models.graph import WeightedGraph, bfs_distances, check_vertex
from src.models.models import CoverEstimate, StartPolicy

logger = logging.getLogger(__name__)

DEFAULT_STEP_CAP = 10 ** 10
CHUNK_SIZE = 4096

# Start-vertex keys for hitting substreams live above any vertex id
HITTING_KEY = 1 << 40


# ============================================================================
# COMPILED KERNELS
# ============================================================================

@njit(cache=True, nogil=True)
def _splitmix64(x):
    z = x + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def _replica_seeds(base, first, count):
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        out[i] = _splitmix64(base ^ (first + np.uint64(i)))
    return out


@njit(cache=True, nogil=True)
def _row_cumsum(indptr, weights):
    out = np.empty_like(weights)
    for x in range(indptr.size - 1):
        acc = 0.0
        for j in range(indptr[x], indptr[x + 1]):
            acc += weights[j]
            out[j] = acc
    return out


@njit(cache=True, nogil=True)
def _step(indptr, indices, cumw, x, state):
    """One weighted transition from x; returns (next vertex, new state)"""
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    u = float(z >> np.uint64(11)) * (1.0 / 9007199254740992.0)
    lo = indptr[x]
    hi = indptr[x + 1]
    target = u * cumw[hi - 1]
    j = lo + np.searchsorted(cumw[lo:hi], target, side='right')
    if j >= hi:
        j = hi - 1
    return indices[j], state


@njit(cache=True, nogil=True)
def _cover_runs(indptr, indices, cumw, start, seeds, step_cap, out):
    """Cover-time steps per replica; returns -1 if a run hit step_cap"""
    n = indptr.size - 1
    visited = np.zeros((n + 63) // 64, dtype=np.uint64)
    for r in range(seeds.size):
        visited[:] = 0
        state = seeds[r]
        x = start
        visited[x >> 6] |= np.uint64(1) << np.uint64(x & 63)
        remaining = n - 1
        steps = 0
        while remaining > 0:
            if steps >= step_cap:
                return -1
            x, state = _step(indptr, indices, cumw, x, state)
            steps += 1
            word = x >> 6
            bit = np.uint64(1) << np.uint64(x & 63)
            if visited[word] & bit == 0:
                visited[word] |= bit
                remaining -= 1
        out[r] = steps
    return 0


@njit(cache=True, nogil=True)
def _hit_runs(indptr, indices, cumw, start, target, seeds, step_cap, out):
    for r in range(seeds.size):
        state = seeds[r]
        x = start
        steps = 0
        while x != target:
            if steps >= step_cap:
                return -1
            x, state = _step(indptr, indices, cumw, x, state)
            steps += 1
        out[r] = steps
    return 0


# ============================================================================
# ESTIMATORS
# ============================================================================

class _Walker:
    """CSR arrays prepared once per graph for the kernels"""

    def __init__(self, g: WeightedGraph):
        self.graph = g
        self.indptr = np.ascontiguousarray(g.indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(g.indices, dtype=np.int64)
        self.cumw = _row_cumsum(self.indptr, np.ascontiguousarray(g.weights, dtype=np.float64))

    def run(self, start: int, target: Optional[int], base_seed: int, replicas: int,
            step_cap: int, threads: int) -> np.ndarray:
        chunks = [(first, min(CHUNK_SIZE, replicas - first)) for first in range(0, replicas, CHUNK_SIZE)]
        base = np.uint64(base_seed)

        def work(chunk: Tuple[int, int]) -> np.ndarray:
            first, count = chunk
            seeds = _replica_seeds(base, np.uint64(first), count)
            out = np.zeros(count, dtype=np.int64)
            if target is None:
                status = _cover_runs(self.indptr, self.indices, self.cumw, start, seeds, step_cap, out)
            else:
                status = _hit_runs(self.indptr, self.indices, self.cumw, start, target, seeds,
                                   step_cap, out)
            if status != 0:
                raise StepBudgetExceeded(f'A walk from {start} exceeded {step_cap} steps',
                                         {'start': start, 'step_cap': step_cap})
            return out

        return np.concatenate(parallel_map(work, chunks, threads))


def _summarize(steps: np.ndarray) -> Tuple[float, float]:
    mean = math.fsum(steps.tolist()) / steps.size
    se = float(np.std(steps.astype(np.float64), ddof=1)) / math.sqrt(steps.size) if steps.size > 1 else float('nan')
    return mean, se


def simulate_cover_once(g: WeightedGraph, start: int, stream_seed: int,
                        step_cap: int = DEFAULT_STEP_CAP) -> int:
    """Steps until every vertex is visited, for one walk driven by stream_seed"""
    start = check_vertex(g, start)
    if g.vertex_count == 1:
        return 0
    walker = _Walker(g)
    out = np.zeros(1, dtype=np.int64)
    seeds = np.array([stream_seed & ((1 << 64) - 1)], dtype=np.uint64)
    if _cover_runs(walker.indptr, walker.indices, walker.cumw, start, seeds, step_cap, out) != 0:
        raise StepBudgetExceeded(f'Cover run from {start} exceeded {step_cap} steps',
                                 {'start': start, 'step_cap': step_cap})
    return int(out[0])


def cover_samples(g: WeightedGraph, start: int, replicas: int, seed: int,
                  step_cap: int = DEFAULT_STEP_CAP, threads: int = 1) -> np.ndarray:
    """Raw per-replica cover steps from one start"""
    start = check_vertex(g, start)
    if g.vertex_count == 1:
        return np.zeros(replicas, dtype=np.int64)
    steps = _Walker(g).run(start, None, substream_seed(seed, start), replicas, step_cap, threads)
    check_cover_steps(g, steps, start)
    return steps


def check_cover_steps(g: WeightedGraph, steps: np.ndarray, start: int) -> None:
    """Every cover walk takes at least n - 1 steps, which on a tree is the edge count"""
    floor = g.vertex_count - 1
    shortest = int(steps.min()) if steps.size else floor
    if shortest < floor:
        raise NumericalFailure(f'Cover walk from {start} finished in {shortest} steps, below the floor {floor}',
                               {'start': start, 'steps': shortest, 'floor': floor, 'tree': g.is_tree})


def estimate_cover_time(g: WeightedGraph, policy: StartPolicy, replicas: int, seed: int,
                        step_cap: int = DEFAULT_STEP_CAP, threads: int = 1) -> CoverEstimate:
    """
    Monte Carlo cover time; under worst_of_set the max of per-start means

    Args:
        g: connected graph
        policy: fixed start or a candidate start set
        replicas: walks per start (>= 2)
        seed: master seed; replica i from start x uses substream (seed, x, i)

    Returns:
        CoverEstimate in steps
    """
    if replicas < 2:
        raise InvalidParameters(f'Need at least 2 replicas for a standard error, got {replicas}')
    if not policy.vertices:
        raise InvalidParameters('Start policy names no vertices')
    walker = _Walker(g) if g.vertex_count > 1 else None
    per_start = {}
    for start in policy.vertices:
        start = check_vertex(g, start)
        if walker is None:
            per_start[start] = (0.0, 0.0)
            continue
        steps = walker.run(start, None, substream_seed(seed, start), replicas, step_cap, threads)
        check_cover_steps(g, steps, start)
        per_start[start] = _summarize(steps)
        logger.debug(f'Cover from {start}: {per_start[start][0]:.6g} +- {per_start[start][1]:.3g}')
    best = max(sorted(per_start), key=lambda v: per_start[v][0])
    mean, se = per_start[best]
    return CoverEstimate(mean, se, replicas, policy, seed, best, per_start, 'cover')


def estimate_hitting(g: WeightedGraph, x: int, y: int, replicas: int, seed: int,
                     step_cap: int = DEFAULT_STEP_CAP, threads: int = 1) -> CoverEstimate:
    """Monte Carlo mean first-passage time from x to y"""
    x = check_vertex(g, x)
    y = check_vertex(g, y)
    if x == y:
        raise InvalidParameters('Hitting estimate needs x != y')
    if replicas < 2:
        raise InvalidParameters(f'Need at least 2 replicas for a standard error, got {replicas}')
    steps = _Walker(g).run(x, y, substream_seed(seed, HITTING_KEY + x, y), replicas, step_cap, threads)
    mean, se = _summarize(steps)
    return CoverEstimate(mean, se, replicas, StartPolicy.fixed(x), seed, x, {x: (mean, se)}, 'hitting')


def candidate_starts(g: WeightedGraph, metric: Optional[ResistanceMetric] = None,
                     root: Optional[int] = None) -> List[int]:
    """
    Heuristic start set for worst_of_set: diameter-witness endpoints, the
    max-degree vertex and, for trees, the root and a deepest leaf
    """
    starts = {int(np.argmax(g.degrees))}
    if metric is not None and g.vertex_count > 1:
        starts.update(diameter_witness(metric))
    if g.is_tree and g.vertex_count > 1:
        root = 0 if root is None else root
        starts.add(root)
        starts.add(int(np.argmax(bfs_distances(g, root))))
    return sorted(starts)
