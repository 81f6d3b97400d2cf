"""
Exact Chain Computations
Hitting times, exact cover times on small graphs, the Matthews bound, the
hitting/cover sandwich and the commute-time bounds

Place in: src/analysis/chain_exact.py
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.sparse.linalg import splu

from src.analysis.resistance import ResistanceMetric, resistance_matrix
from src.extensions import parallel_map
from src.models.errors import BudgetExceeded, InvalidParameters, NumericalFailure
from src.models.graph import WeightedGraph, volume
from src.models.models import CommuteBounds, ExactCover, HittingProfile, SandwichResult

logger = logging.getLogger(__name__)

HITTING_MAX_VERTICES = 2000
EXACT_COVER_MAX_VERTICES = 14
COMMUTE_TOLERANCE = 1e-8


def _hitting_column(g: WeightedGraph, y: int) -> np.ndarray:
    """
    h(., y) from the grounded system L_{-y} h = mu_{-y}, i.e. the
    first-step equations h(x) = 1 + sum_z p(x, z) h(z) scaled by mu_x
    """
    n = g.vertex_count
    keep = np.flatnonzero(np.arange(n) != y)
    grounded = g.laplacian()[keep][:, keep].tocsc()
    rhs = g.mu[keep]
    lu = splu(grounded)
    h = lu.solve(rhs)
    # one step of iterative refinement
    h += lu.solve(rhs - grounded @ h)
    column = np.zeros(n)
    column[keep] = h
    return column


def hitting_times(g: WeightedGraph, metric: Optional[ResistanceMetric] = None,
                  max_vertices: int = HITTING_MAX_VERTICES, threads: int = 1) -> HittingProfile:
    """
    Full matrix h[x, y] = E^x tau_y, checked against the commute identity

    Args:
        g: connected graph
        metric: dense resistance metric for the commute check (computed if omitted)
        max_vertices: solve budget
        threads: worker count for per-target solves

    Returns:
        HittingProfile with t_hit and its witness pair
    """
    n = g.vertex_count
    if n > max_vertices:
        raise BudgetExceeded(f'Hitting-time solve limited to {max_vertices} vertices, graph has {n}',
                             {'vertex_count': n, 'budget': max_vertices})
    if n == 1:
        return HittingProfile(np.zeros((1, 1)), 0.0, (0, 0), 0.0)

    columns = parallel_map(lambda y: _hitting_column(g, y), range(n), threads)
    h = np.column_stack(columns)
    if not np.isfinite(h).all():
        raise NumericalFailure('Hitting-time solve produced non-finite values')

    if metric is None or not metric.is_dense:
        metric = resistance_matrix(g, max(n, 1))
    residual = commute_residual(h, metric.table, volume(g))
    if residual > COMMUTE_TOLERANCE:
        raise NumericalFailure(f'Commute identity residual {residual:.3e} above {COMMUTE_TOLERANCE}',
                               {'residual': residual})

    flat = int(np.argmax(h))
    x, y = divmod(flat, n)
    h.setflags(write=False)
    logger.info(f'Hitting times for {n} vertices: t_hit={h[x, y]:.6g} (commute residual {residual:.2e})')
    return HittingProfile(h, float(h[x, y]), (x, y), residual)


def commute_residual(h: np.ndarray, table: np.ndarray, vol: float) -> float:
    """max over x != y of |h(x,y) + h(y,x) - vol R(x,y)| / (vol R(x,y))"""
    n = h.shape[0]
    if n < 2:
        return 0.0
    off = ~np.eye(n, dtype=bool)
    commute = (h + h.T)[off]
    target = vol * table[off]
    return float(np.max(np.abs(commute - target) / target))


def exact_cover_time(g: WeightedGraph, max_vertices: int = EXACT_COVER_MAX_VERTICES) -> ExactCover:
    """
    Expected cover time from every start on the chain (current vertex, visited set)

    E[S, v] solves (I - P_SS) E[S, .] = 1 + sum_{u not in S} P[., u] E[S + u, u],
    processed by descending |S| with one batched solve per level.
    """
    n = g.vertex_count
    if n > max_vertices:
        raise BudgetExceeded(f'Exact cover time limited to {max_vertices} vertices, graph has {n}',
                             {'vertex_count': n, 'budget': max_vertices})
    if n == 1:
        return ExactCover((0.0,), 0.0, 0, 1)

    P = g.transition_matrix().toarray()
    full = (1 << n) - 1
    E = np.zeros((1 << n, n))
    masks = np.arange(1 << n, dtype=np.int64)
    bits_all = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    popcount = bits_all.sum(axis=1)

    for k in range(n - 1, 0, -1):
        level = masks[popcount == k]
        bits = bits_all[level]
        members = np.nonzero(bits)[1].reshape(level.size, k)
        # E[S + u, u] for every u; only u outside S is used
        grown = level[:, None] | (1 << np.arange(n))[None, :]
        nxt = E[grown, np.arange(n)[None, :]] * ~bits
        rows = P[members]                                    # (masks, k, n)
        rhs = 1.0 + np.einsum('mkn,mn->mk', rows, nxt)
        A = np.eye(k)[None, :, :] - np.take_along_axis(rows, members[:, None, :].repeat(k, axis=1), axis=2)
        sol = np.linalg.solve(A, rhs[:, :, None])[:, :, 0]
        E[level[:, None], members] = sol
    E[full] = 0.0

    per_start = tuple(float(E[1 << x, x]) for x in range(n))
    worst = int(np.argmax(per_start))
    state_space = n * (1 << (n - 1))
    logger.info(f'Exact cover time for {n} vertices: t_cov={per_start[worst]:.6g}')
    return ExactCover(per_start, per_start[worst], worst, state_space)


def matthews_upper(profile, n: int) -> float:
    """t_hit (ln n + 1); accepts a HittingProfile or a bare t_hit"""
    if n < 2:
        raise InvalidParameters(f'Matthews bound needs n >= 2, got {n}')
    t_hit = profile.t_hit if isinstance(profile, HittingProfile) else float(profile)
    return t_hit * (math.log(n) + 1.0)


def sandwich_check(t_cov: float, t_hit: float, n: int, tolerance: float = 0.0) -> SandwichResult:
    """
    t_hit <= t_cov <= 2 t_hit ln n, with slacks

    The check is only asserted for n >= 3; smaller graphs report margins.
    tolerance widens both sides (e.g. 4 standard errors for estimates).
    """
    lower = t_cov - t_hit
    upper = 2.0 * t_hit * math.log(n) - t_cov
    asserted = n >= 3
    passed = (lower >= -tolerance and upper >= -tolerance) if asserted else True
    if asserted and not passed:
        logger.warning(f'Sandwich violated: t_hit={t_hit}, t_cov={t_cov}, n={n}')
    mu = matthews_upper(t_hit, n) if n >= 2 else float('nan')
    return SandwichResult(passed, asserted, lower, upper, mu)


def commute_bounds(g: WeightedGraph, diam_r: float, t_hit: float, tolerance: float = 1e-9) -> CommuteBounds:
    """1/2 vol diam_R <= t_hit <= vol diam_R"""
    scale = volume(g) * diam_r
    if scale <= 0:
        return CommuteBounds(True, 0.0, 0.0, float('nan'))
    lower = t_hit - 0.5 * scale
    upper = scale - t_hit
    slack = tolerance * scale
    return CommuteBounds(lower >= -slack and upper >= -slack, lower, upper, t_hit / scale)


def cover_lower_bounds(profile: HittingProfile) -> np.ndarray:
    """max_y h(x, y) per start x: covering requires hitting the farthest vertex"""
    return profile.matrix.max(axis=1)
