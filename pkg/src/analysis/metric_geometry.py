"""
Metric Geometry
Packing and covering numbers in the resistance metric, dyadic scale
sequences, and the chaining and Sudakov functionals

Place in: src/analysis/metric_geometry.py
"""

import logging
import math
from itertools import combinations
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from src.analysis.resistance import ResistanceMetric, resistance_diameter
from src.models.errors import BudgetExceeded, InvalidParameters, TooFewCenters
from src.models.models import NetKind, NetMode, NetResult, ScaleSequence

logger = logging.getLogger(__name__)

EXACT_MAX_VERTICES = 60
EXACT_TIME_LIMIT = 30.0
BRUTEFORCE_MAX_VERTICES = 12

# Scale sequences stop once a radius falls this far below the smallest positive distance
SCALE_TOLERANCE = 1e-9


def ball_matrix(m: ResistanceMetric, r: float) -> np.ndarray:
    """B[z, x] = True iff z lies in the closed ball of radius r around x"""
    if r < 0:
        raise InvalidParameters(f'Radius must be >= 0, got {r}')
    return m.table <= r


def _mode(mode) -> NetMode:
    try:
        return NetMode(mode)
    except ValueError as exc:
        raise InvalidParameters(f'Unknown net mode {mode!r}') from exc


# ============================================================================
# GREEDY NETS
# ============================================================================

def greedy_packing(balls: np.ndarray) -> List[int]:
    """Maximal packing scanning centers in ascending id"""
    n = balls.shape[0]
    used = np.zeros(n, dtype=bool)
    centers = []
    for x in range(n):
        if not (balls[:, x] & used).any():
            centers.append(x)
            used |= balls[:, x]
    return centers


def greedy_covering(balls: np.ndarray) -> List[int]:
    """Standard greedy set cover; most newly covered vertices first, smallest id on ties"""
    n = balls.shape[0]
    uncovered = np.ones(n, dtype=bool)
    # gain[x] = uncovered vertices in ball(x), kept current as vertices get covered
    gain = balls.sum(axis=0).astype(np.int64)
    centers = []
    while uncovered.any():
        x = int(np.argmax(gain))
        centers.append(x)
        newly = np.flatnonzero(balls[:, x] & uncovered)
        uncovered[newly] = False
        gain -= balls[newly].sum(axis=0)
    return sorted(centers)


# ============================================================================
# EXACT NETS
# ============================================================================

def _solve_net(balls: np.ndarray, kind: NetKind, time_limit: float) -> List[int]:
    n = balls.shape[0]
    # id-weighted perturbation summing below 1/(n+1): ties go to small ids, counts unchanged
    tie = np.arange(n) / (n * n * (n + 1.0))
    a = balls.astype(np.float64)
    if kind is NetKind.PACKING:
        c = -1.0 + tie
        constraint = LinearConstraint(a, -np.inf, 1.0)
    else:
        c = 1.0 + tie
        constraint = LinearConstraint(a, 1.0, np.inf)
    res = milp(c, constraints=[constraint], integrality=np.ones(n), bounds=Bounds(0, 1),
               options={'time_limit': time_limit, 'disp': False, 'mip_rel_gap': 1e-9})
    if res.status != 0 or res.x is None:
        raise BudgetExceeded(f'Exact {kind.value} did not finish: {res.message}',
                             {'status': int(res.status), 'time_limit': time_limit})
    return [int(i) for i in np.flatnonzero(res.x > 0.5)]


def packing_number(m: ResistanceMetric, r: float, mode=NetMode.GREEDY,
                   max_vertices: int = EXACT_MAX_VERTICES,
                   time_limit: float = EXACT_TIME_LIMIT) -> NetResult:
    """
    Pairwise-disjoint closed r-balls

    Args:
        m: resistance metric (dense)
        r: radius in ohms
        mode: exact (0-1 program, budgeted) or greedy (certified lower bound)

    Returns:
        NetResult of kind packing
    """
    mode = _mode(mode)
    balls = ball_matrix(m, r)
    if mode is NetMode.EXACT:
        _check_exact_budget(m, max_vertices)
        centers = _solve_net(balls, NetKind.PACKING, time_limit)
    else:
        centers = greedy_packing(balls)
    return NetResult(tuple(centers), len(centers), mode, float(r), NetKind.PACKING)


def covering_number(m: ResistanceMetric, r: float, mode=NetMode.GREEDY,
                    max_vertices: int = EXACT_MAX_VERTICES,
                    time_limit: float = EXACT_TIME_LIMIT) -> NetResult:
    """Closed r-balls whose union is V; greedy gives a certified upper bound"""
    mode = _mode(mode)
    balls = ball_matrix(m, r)
    if mode is NetMode.EXACT:
        _check_exact_budget(m, max_vertices)
        centers = _solve_net(balls, NetKind.COVERING, time_limit)
    else:
        centers = greedy_covering(balls)
    return NetResult(tuple(centers), len(centers), mode, float(r), NetKind.COVERING)


def _check_exact_budget(m: ResistanceMetric, max_vertices: int) -> None:
    if m.vertex_count > max_vertices:
        raise BudgetExceeded(f'Exact nets limited to {max_vertices} vertices, graph has {m.vertex_count}',
                             {'vertex_count': m.vertex_count, 'budget': max_vertices})


def packing_number_bruteforce(m: ResistanceMetric, r: float) -> int:
    """Exhaustive maximum packing for tiny graphs"""
    balls = ball_matrix(m, r)
    n = balls.shape[0]
    if n > BRUTEFORCE_MAX_VERTICES:
        raise BudgetExceeded(f'Exhaustive search limited to {BRUTEFORCE_MAX_VERTICES} vertices')
    overlap = (balls.T.astype(np.int64) @ balls.astype(np.int64)) > 0
    for k in range(n, 0, -1):
        for subset in combinations(range(n), k):
            if not any(overlap[a, b] for a, b in combinations(subset, 2)):
                return k
    return 0


def covering_number_bruteforce(m: ResistanceMetric, r: float) -> int:
    """Exhaustive minimum covering for tiny graphs"""
    balls = ball_matrix(m, r)
    n = balls.shape[0]
    if n > BRUTEFORCE_MAX_VERTICES:
        raise BudgetExceeded(f'Exhaustive search limited to {BRUTEFORCE_MAX_VERTICES} vertices')
    for k in range(1, n + 1):
        for subset in combinations(range(n), k):
            if balls[:, list(subset)].any(axis=1).all():
                return k
    return n


# ============================================================================
# SCALES AND FUNCTIONALS
# ============================================================================

def dyadic_scales(m: ResistanceMetric) -> ScaleSequence:
    """diam_R / 2^k until below the smallest positive distance, then 0; a single vertex gives (0, 0)"""
    diam = resistance_diameter(m)
    if m.vertex_count < 2:
        return ScaleSequence((0.0, 0.0))
    floor = m.min_positive * (1.0 - SCALE_TOLERANCE)
    iu, ju = np.triu_indices(m.vertex_count, k=1)
    realized = np.unique(m.table[iu, ju])
    radii = [diam]
    k = 1
    while diam / 2 ** k >= floor:
        radii.append(_snap(diam / 2 ** k, realized))
        k += 1
    radii.append(0.0)
    return ScaleSequence(tuple(radii))


def _snap(radius: float, realized: np.ndarray) -> float:
    """Replace a radius by a realized distance within rounding of it, if one exists"""
    i = int(np.searchsorted(realized, radius * (1.0 + SCALE_TOLERANCE), side='right')) - 1
    if i >= 0 and realized[i] >= radius * (1.0 - SCALE_TOLERANCE):
        return float(realized[i])
    return radius


def chaining_functional(m: ResistanceMetric, s: Optional[ScaleSequence] = None,
                        mode=NetMode.GREEDY, max_vertices: int = EXACT_MAX_VERTICES,
                        time_limit: float = EXACT_TIME_LIMIT) -> float:
    """
    sum_{k=1..k0} sqrt(l_{k-1} * log n_cov(l_k)), in sqrt-ohms

    The last term uses n_cov(0) = |V|.
    """
    if s is None:
        s = dyadic_scales(m)
    n = m.vertex_count
    if n < 2:
        return 0.0
    terms = []
    for k in range(1, len(s.radii)):
        radius = s.radii[k]
        if radius == 0.0:
            count = n
        else:
            count = covering_number(m, radius, mode, max_vertices, time_limit).count
        terms.append(math.sqrt(s.radii[k - 1] * math.log(count)))
    return math.fsum(terms)


def sudakov_functional(m: ResistanceMetric, centers: Iterable[int]) -> float:
    """(min pairwise sqrt R over centers) * sqrt(log |centers|)"""
    centers = sorted({int(c) for c in centers})
    if len(centers) < 2:
        raise TooFewCenters(f'Sudakov functional needs at least 2 centers, got {len(centers)}',
                            {'centers': centers})
    if m.is_dense:
        sub = m.table[np.ix_(centers, centers)]
        closest = float(sub[~np.eye(len(centers), dtype=bool)].min())
    else:
        closest = float(m.distances(list(combinations(centers, 2))).min())
    return math.sqrt(closest) * math.sqrt(math.log(len(centers)))


def sudakov_over_scales(m: ResistanceMetric) -> Optional[float]:
    """Largest Sudakov value over greedy packings at the dyadic scales; None below 2 centers"""
    best = None
    for r in dyadic_scales(m).radii:
        centers = packing_number(m, r, NetMode.GREEDY).centers
        if len(centers) >= 2:
            value = sudakov_functional(m, centers)
            best = value if best is None else max(best, value)
    return best


def radius_grid(m: ResistanceMetric, points: int = 20) -> np.ndarray:
    """Evenly spaced radii from 0 to diam_R inclusive"""
    return np.linspace(0.0, resistance_diameter(m), points)


def greedy_packing_profile(m: ResistanceMetric, radii: Sequence[float]) -> List[int]:
    return [packing_number(m, r, NetMode.GREEDY).count for r in radii]
