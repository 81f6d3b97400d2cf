"""
Effective Resistance Engine
Pairwise effective resistances, diameter, balls, the rooted Green kernel and
Nash-Williams cutset bounds

Place in: src/analysis/resistance.py
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import LinearOperator, cg

from src.extensions import parallel_map
from src.models.errors import (
    BudgetExceeded, InvalidParameters, NotACutset, NumericalFailure, OverlappingCutsets,
)
from src.models.graph import WeightedGraph, bfs_distances, build_graph_arrays, check_vertex
from src.models.models import ResistanceMode
from src.utils.reporting import write_csv

logger = logging.getLogger(__name__)

DENSE_MAX_VERTICES = 4000
CG_RTOL = 1e-10
RESIDUAL_TOLERANCE = 1e-9
PSD_TOLERANCE = 1e-9


class ResistanceMetric:
    """
    Effective resistance R(x, y) on a graph's vertices, in ohms.

    Dense mode holds the full table. Per-pair mode solves grounded Laplacian
    systems on demand and caches every pair it has seen.
    """

    def __init__(self, graph: WeightedGraph, mode: ResistanceMode,
                 table: Optional[np.ndarray] = None, threads: int = 1):
        self.graph = graph
        self.mode = mode
        self.threads = threads
        self._table = table
        self._cache: Dict[Tuple[int, int], float] = {}
        self._lock = threading.Lock()
        self._diameter: Optional[Tuple[float, Tuple[int, int], bool]] = None
        if table is not None:
            table.setflags(write=False)

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count

    @property
    def is_dense(self) -> bool:
        return self._table is not None

    @property
    def table(self) -> np.ndarray:
        """Full n x n table (dense mode only)"""
        if self._table is None:
            raise BudgetExceeded(
                f'Full resistance table unavailable for {self.vertex_count} vertices in per-pair mode',
                {'vertex_count': self.vertex_count})
        return self._table

    def distance(self, x: int, y: int) -> float:
        x = check_vertex(self.graph, x)
        y = check_vertex(self.graph, y)
        if x == y:
            return 0.0
        if self._table is not None:
            return float(self._table[x, y])
        key = (min(x, y), max(x, y))
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = _solve_pair(self.graph, *key)
        with self._lock:
            self._cache[key] = value
        return value

    def distances(self, pairs: Sequence[Tuple[int, int]]) -> np.ndarray:
        """Resistances for a batch of pairs; per-pair solves run on the worker pool"""
        return np.array(parallel_map(lambda xy: self.distance(*xy), pairs, self.threads))

    def row(self, x: int) -> np.ndarray:
        x = check_vertex(self.graph, x)
        if self._table is not None:
            return self._table[x]
        return self.distances([(x, y) for y in range(self.vertex_count)])

    @property
    def min_positive(self) -> float:
        """Smallest resistance between distinct vertices"""
        if self.vertex_count < 2:
            return 0.0
        table = self.table
        return float(table[~np.eye(self.vertex_count, dtype=bool)].min())

    def to_frame(self) -> pd.DataFrame:
        """Rows (x, y, R) for x < y"""
        iu, ju = np.triu_indices(self.vertex_count, k=1)
        return pd.DataFrame({'x': iu, 'y': ju, 'R': self.table[iu, ju]})


@dataclass(frozen=True, eq=False)
class GreenKernel:
    """C(x, y) = (R(root, x) + R(root, y) - R(x, y)) / 2, pinned at the root"""
    root: int
    matrix: np.ndarray = field(repr=False)

    @property
    def reduced(self) -> np.ndarray:
        """Kernel restricted to the non-root vertices"""
        keep = np.arange(self.matrix.shape[0]) != self.root
        return self.matrix[np.ix_(keep, keep)]


# ============================================================================
# CONSTRUCTION
# ============================================================================

def resistance_matrix(g: WeightedGraph, max_vertices: int = DENSE_MAX_VERTICES) -> ResistanceMetric:
    """
    Full resistance table via the Laplacian pseudoinverse

    R(x, y) = L+_xx + L+_yy - 2 L+_xy, with L+ = (L + J/n)^-1 - J/n from a
    Cholesky factorization.

    Args:
        g: connected graph
        max_vertices: dense-mode budget

    Returns:
        Dense ResistanceMetric
    """
    n = g.vertex_count
    if n > max_vertices:
        raise BudgetExceeded(f'{n} vertices exceeds the dense resistance budget of {max_vertices}; '
                             f'use per-pair mode', {'vertex_count': n, 'budget': max_vertices})
    if n == 1:
        return ResistanceMetric(g, ResistanceMode.DENSE, np.zeros((1, 1)))

    lap = g.laplacian().toarray()
    shift = np.full((n, n), 1.0 / n)
    try:
        factor = linalg.cho_factor(lap + shift, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalFailure(f'Cholesky factorization failed: {exc}') from exc
    pinv = linalg.cho_solve(factor, np.eye(n), check_finite=False) - shift

    residual = np.abs(lap @ pinv - (np.eye(n) - shift)).max()
    scale = max(1.0, np.abs(lap).max() * np.abs(pinv).max())
    if not np.isfinite(residual) or residual > RESIDUAL_TOLERANCE * scale:
        raise NumericalFailure(f'Pseudoinverse residual {residual:.3e} above tolerance',
                               {'residual': float(residual)})

    diag = np.diag(pinv)
    table = diag[:, None] + diag[None, :] - 2.0 * pinv
    table = 0.5 * (table + table.T)
    np.clip(table, 0.0, None, out=table)
    np.fill_diagonal(table, 0.0)
    logger.info(f'Dense resistance table for {n} vertices (residual {residual:.2e})')
    return ResistanceMetric(g, ResistanceMode.DENSE, table)


def per_pair_metric(g: WeightedGraph, threads: int = 1) -> ResistanceMetric:
    """Lazy metric backed by conjugate-gradient solves"""
    logger.info(f'Per-pair resistance mode for {g.vertex_count} vertices')
    return ResistanceMetric(g, ResistanceMode.PER_PAIR, None, threads)


def build_metric(g: WeightedGraph, max_dense: int = DENSE_MAX_VERTICES, threads: int = 1) -> ResistanceMetric:
    """Dense table when within budget, per-pair solves otherwise"""
    if g.vertex_count <= max_dense:
        return resistance_matrix(g, max_dense)
    return per_pair_metric(g, threads)


def _solve_pair(g: WeightedGraph, x: int, y: int) -> float:
    """R(x, y) = (L_{-y}^-1)_xx with Jacobi-preconditioned CG on the grounded Laplacian"""
    n = g.vertex_count
    keep = np.flatnonzero(np.arange(n) != y)
    grounded = g.laplacian()[keep][:, keep].tocsr()
    rhs = np.zeros(n - 1)
    xi = int(np.searchsorted(keep, x))
    rhs[xi] = 1.0
    inv_diag = 1.0 / grounded.diagonal()
    precond = LinearOperator(grounded.shape, matvec=lambda r: inv_diag * r, dtype=np.float64)
    sol, info = cg(grounded, rhs, rtol=CG_RTOL, atol=0.0, M=precond, maxiter=10 * n)
    if info != 0:
        raise NumericalFailure(f'CG did not converge for pair ({x}, {y}) (info={info})',
                               {'pair': [x, y], 'info': int(info)})
    return float(sol[xi])


# ============================================================================
# DERIVED QUANTITIES
# ============================================================================

def _diameter(m: ResistanceMetric) -> Tuple[float, Tuple[int, int], bool]:
    if m._diameter is not None:
        return m._diameter
    n = m.vertex_count
    if n == 1:
        result = (0.0, (0, 0), True)
    elif m.is_dense:
        upper = np.triu(m.table)
        flat = int(np.argmax(upper))
        x, y = divmod(flat, n)
        result = (float(upper[x, y]), (x, y), True)
    else:
        result = _double_sweep(m)
    m._diameter = result
    return result


def _double_sweep(m: ResistanceMetric) -> Tuple[float, Tuple[int, int], bool]:
    """Lower bound on diam_R from hop-distance extremes (per-pair mode)"""
    g = m.graph
    a = int(np.argmax(bfs_distances(g, 0)))
    b = int(np.argmax(bfs_distances(g, a)))
    c = int(np.argmax(bfs_distances(g, b)))
    candidates = sorted({(min(p), max(p)) for p in ((a, b), (b, c), (a, c), (0, b)) if p[0] != p[1]})
    values = m.distances(candidates)
    best = int(np.argmax(values))
    logger.warning(f'Resistance diameter estimated from {len(candidates)} candidate pairs (lower bound)')
    return float(values[best]), candidates[best], False


def resistance_diameter(m: ResistanceMetric) -> float:
    """max over pairs of R(x, y); a lower bound in per-pair mode"""
    return _diameter(m)[0]


def diameter_witness(m: ResistanceMetric) -> Tuple[int, int]:
    """Pair realizing the diameter, smallest (x, y) on ties"""
    return _diameter(m)[1]


def diameter_is_exact(m: ResistanceMetric) -> bool:
    return _diameter(m)[2]


def resistance_ball(m: ResistanceMetric, x: int, r: float) -> FrozenSet[int]:
    """Closed ball {y : R(x, y) <= r}"""
    x = check_vertex(m.graph, x)
    if r < 0:
        raise InvalidParameters(f"Radius must be >= 0, got {r}")
    inside = np.flatnonzero(m.row(x) <= r)
    return frozenset(int(v) for v in inside) | {x}


def green_kernel(m: ResistanceMetric, root: int) -> GreenKernel:
    """Green kernel of the walk killed at root, from resistances"""
    root = check_vertex(m.graph, root)
    table = m.table
    r_root = table[root]
    kernel = 0.5 * (r_root[:, None] + r_root[None, :] - table)
    kernel[root, :] = 0.0
    kernel[:, root] = 0.0
    kernel = 0.5 * (kernel + kernel.T)
    kernel.setflags(write=False)
    result = GreenKernel(root, kernel)

    if m.vertex_count > 1:
        smallest = float(linalg.eigvalsh(result.reduced, subset_by_index=[0, 0])[0])
        scale = max(1.0, float(np.abs(kernel).max()))
        if smallest < -PSD_TOLERANCE * scale:
            raise NumericalFailure(f'Green kernel has eigenvalue {smallest:.3e}',
                                   {'eigenvalue': smallest})
    return result


def nash_williams_bound(g: WeightedGraph, x: int, y: int,
                        cutsets: Iterable[Iterable[Tuple[int, int]]]) -> float:
    """
    Sum over disjoint edge-cutsets of (total conductance of the cutset)^-1

    Args:
        g: graph
        x, y: pair being separated
        cutsets: disjoint edge sets, each of whose removal disconnects x from y

    Returns:
        Lower bound on R(x, y), in ohms
    """
    x = check_vertex(g, x)
    y = check_vertex(g, y)
    weight = {(u, v): w for u, v, w in g.edges}
    seen = set()
    total = 0.0
    normalized: List[List[Tuple[int, int]]] = []
    for k, cut in enumerate(cutsets):
        edges = sorted({(min(int(a), int(b)), max(int(a), int(b))) for a, b in cut})
        missing = [e for e in edges if e not in weight]
        if missing:
            raise NotACutset(f'Cutset {k} names edges not in the graph: {missing}', {'cutset': k})
        overlap = seen.intersection(edges)
        if overlap:
            raise OverlappingCutsets(f'Cutset {k} shares edges {sorted(overlap)} with an earlier cutset',
                                     {'cutset': k})
        seen.update(edges)
        normalized.append(edges)

    for k, edges in enumerate(normalized):
        if not edges or not _separates(g, edges, x, y):
            raise NotACutset(f'Cutset {k} does not separate {x} from {y}', {'cutset': k})
        total += 1.0 / sum(weight[e] for e in edges)
    return total


def _separates(g: WeightedGraph, edges: List[Tuple[int, int]], x: int, y: int) -> bool:
    removed = set(edges)
    keep = [i for i, (u, v) in enumerate(zip(g.edge_u.tolist(), g.edge_v.tolist()))
            if (u, v) not in removed]
    n = g.vertex_count
    u = g.edge_u[keep]
    v = g.edge_v[keep]
    adj = sparse.coo_matrix((np.ones(len(keep)), (u, v)), shape=(n, n))
    _, labels = csgraph.connected_components(adj, directed=False)
    return labels[x] != labels[y]


# ============================================================================
# EDGE DELETION
# ============================================================================

def non_bridge_edges(g: WeightedGraph) -> List[int]:
    """Indices of edges whose removal leaves the graph connected"""
    return [k for k, (u, v) in enumerate(zip(g.edge_u.tolist(), g.edge_v.tolist()))
            if not _separates(g, [(u, v)], u, v)]


def delete_edge(g: WeightedGraph, k: int) -> WeightedGraph:
    """Copy of g without edge k; raises DisconnectedGraph when k is a bridge"""
    if not 0 <= k < g.edge_count:
        raise InvalidParameters(f'Edge index {k} out of range for {g.edge_count} edges')
    keep = np.arange(g.edge_count) != k
    return build_graph_arrays(g.edge_u[keep], g.edge_v[keep], g.edge_w[keep], g.vertex_count)


def deletion_decrease(g: WeightedGraph, k: int) -> float:
    """Largest drop of any R(x, y) after deleting edge k; non-positive when deletion only raises resistance"""
    before = resistance_matrix(g).table
    after = resistance_matrix(delete_edge(g, k)).table
    return float((before - after).max())


def write_resistance_csv(m: ResistanceMetric, path) -> None:
    write_csv(m.to_frame(), path)
