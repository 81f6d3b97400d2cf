"""
Weighted Graph Core
Immutable weighted graphs with volume/degree conventions, validation and the
.wgr edge-list format

Place in: src/models/graph.py
"""

import io
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd
from scipy import sparse
from scipy.sparse import csgraph

from src.models.errors import (
    DisconnectedGraph, DuplicateEdge, EmptyGraph, InvalidVertex, IoFailure,
    MalformedFile, NonPositiveWeight, SelfLoop,
)
from src.utils.reporting import atomic_write_text

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, float]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """
    Connected graph on vertices 0..vertex_count-1 with positive conductances.

    Edges are stored canonically (u < v, sorted by (u, v)). Neighbor lists
    live in CSR arrays sorted by neighbor id.
    """

    vertex_count: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_w: np.ndarray
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)

    @property
    def edge_count(self) -> int:
        return int(self.edge_u.shape[0])

    @property
    def edges(self) -> List[Edge]:
        return [(int(u), int(v), float(w))
                for u, v, w in zip(self.edge_u, self.edge_v, self.edge_w)]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def is_tree(self) -> bool:
        return self.edge_count == self.vertex_count - 1

    def neighbors(self, x: int) -> List[Tuple[int, float]]:
        """Adjacency list of x as (neighbor, weight) pairs"""
        check_vertex(self, x)
        lo, hi = self.indptr[x], self.indptr[x + 1]
        return [(int(y), float(w)) for y, w in zip(self.indices[lo:hi], self.weights[lo:hi])]

    def adjacency_matrix(self) -> sparse.csr_matrix:
        n = self.vertex_count
        return sparse.csr_matrix((self.weights, self.indices, self.indptr), shape=(n, n))

    def laplacian(self) -> sparse.csr_matrix:
        """Weighted Laplacian L = D - A"""
        return sparse.csr_matrix(csgraph.laplacian(self.adjacency_matrix()))

    def transition_matrix(self) -> sparse.csr_matrix:
        """p(x, y) = mu_xy / mu_x"""
        return sparse.csr_matrix(sparse.diags(1.0 / self.mu) @ self.adjacency_matrix())

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.vertex_count))
        graph.add_weighted_edges_from(self.edges)
        return graph

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.vertex_count == other.vertex_count
                and np.array_equal(self.edge_u, other.edge_u)
                and np.array_equal(self.edge_v, other.edge_v)
                and np.array_equal(self.edge_w, other.edge_w))

    __hash__ = None


def build_graph(edges: Iterable[Sequence], vertex_count: Optional[int] = None) -> WeightedGraph:
    """
    Validate an edge list and build a WeightedGraph

    Args:
        edges: (u, v, weight) triples with 0-based ids
        vertex_count: number of vertices; inferred as max id + 1 when omitted.
            A single vertex with no edges is allowed only when given as 1.

    Returns:
        Connected, validated WeightedGraph
    """
    rows = [tuple(e) for e in edges]
    for e in rows:
        if len(e) != 3:
            raise InvalidVertex(f'Edge {e!r} is not a (u, v, weight) triple')

    if not rows:
        if vertex_count == 1:
            return _assemble(1, np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0))
        raise EmptyGraph('Edge list is empty')

    try:
        u = np.array([int(e[0]) for e in rows], dtype=np.int64)
        v = np.array([int(e[1]) for e in rows], dtype=np.int64)
        w = np.array([float(e[2]) for e in rows], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidVertex(f'Edge list holds a non-numeric entry: {exc}') from exc
    return build_graph_arrays(u, v, w, vertex_count)


def build_graph_arrays(u: np.ndarray, v: np.ndarray, w: np.ndarray,
                       vertex_count: Optional[int] = None) -> WeightedGraph:
    """build_graph over parallel endpoint/weight arrays"""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.broadcast_to(np.asarray(w, dtype=np.float64), u.shape).copy()
    if u.size == 0:
        if vertex_count == 1:
            return _assemble(1, u, v, w)
        raise EmptyGraph('Edge list is empty')

    if (u < 0).any() or (v < 0).any():
        raise InvalidVertex('Vertex ids must be non-negative')
    inferred = int(max(u.max(), v.max())) + 1
    n = inferred if vertex_count is None else int(vertex_count)
    if n < inferred:
        raise InvalidVertex(f'Edge references vertex {inferred - 1} but vertex_count is {n}')

    loops = np.flatnonzero(u == v)
    if loops.size:
        raise SelfLoop(f'Self-loop at vertex {int(u[loops[0]])}', {'vertex': int(u[loops[0]])})
    bad = np.flatnonzero(~(np.isfinite(w) & (w > 0)))
    if bad.size:
        i = int(bad[0])
        raise NonPositiveWeight(f'Edge ({int(u[i])}, {int(v[i])}) has weight {w[i]}',
                                {'edge': [int(u[i]), int(v[i])], 'weight': float(w[i])})

    lo, hi = np.minimum(u, v), np.maximum(u, v)
    order = np.lexsort((hi, lo))
    lo, hi, w = lo[order], hi[order], w[order]
    dup = np.flatnonzero((lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1]))
    if dup.size:
        i = int(dup[0])
        raise DuplicateEdge(f'Edge ({int(lo[i])}, {int(hi[i])}) appears more than once',
                            {'edge': [int(lo[i]), int(hi[i])]})

    g = _assemble(n, lo, hi, w)
    components, labels = csgraph.connected_components(g.adjacency_matrix(), directed=False)
    if components > 1:
        raise DisconnectedGraph(f'Graph has {components} connected components',
                                {'components': int(components)})
    return g


def _assemble(n: int, lo: np.ndarray, hi: np.ndarray, w: np.ndarray) -> WeightedGraph:
    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    data = np.concatenate([w, w])
    adj = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    adj.sort_indices()
    mu = np.asarray(adj.sum(axis=1)).ravel()
    return WeightedGraph(
        vertex_count=n,
        edge_u=_frozen(lo.astype(np.int64)),
        edge_v=_frozen(hi.astype(np.int64)),
        edge_w=_frozen(w.astype(np.float64)),
        indptr=_frozen(adj.indptr.astype(np.int64)),
        indices=_frozen(adj.indices.astype(np.int64)),
        weights=_frozen(adj.data.astype(np.float64)),
        mu=_frozen(mu.astype(np.float64)),
    )


def check_vertex(g: WeightedGraph, x) -> int:
    if isinstance(x, bool) or not isinstance(x, (int, np.integer)) or not 0 <= x < g.vertex_count:
        raise InvalidVertex(f'Vertex {x!r} is not in 0..{g.vertex_count - 1}', {'vertex': str(x)})
    return int(x)


def vertex_weights(g: WeightedGraph) -> np.ndarray:
    """mu_x = sum of incident edge weights"""
    return g.mu


def volume(g: WeightedGraph) -> float:
    """Ordered-pair volume: twice the total edge weight"""
    return 2.0 * math.fsum(g.edge_w.tolist())


def bfs_distances(g: WeightedGraph, source: int) -> np.ndarray:
    """Hop distances from source to every vertex"""
    source = check_vertex(g, source)
    dist = csgraph.shortest_path(g.adjacency_matrix(), method='D', directed=False,
                                 unweighted=True, indices=source)
    return dist.astype(np.int64)


def graph_distance(g: WeightedGraph, x: int, y: int) -> int:
    """Unweighted shortest-path hop count between x and y"""
    x = check_vertex(g, x)
    y = check_vertex(g, y)
    if x == y:
        return 0
    return int(bfs_distances(g, x)[y])


# ============================================================================
# .wgr EDGE-LIST FORMAT
# ============================================================================

def _format_weight(w: float) -> str:
    if float(w).is_integer():
        return str(int(w))
    return repr(float(w))


def format_graph(g: WeightedGraph) -> str:
    lines = [f'{g.vertex_count} {g.edge_count}']
    lines.extend(f'{u} {v} {_format_weight(w)}' for u, v, w in g.edges)
    return '\n'.join(lines) + '\n'


def write_graph(g: WeightedGraph, path) -> None:
    """Write g as a .wgr file (edges sorted by (u, v)), atomically"""
    atomic_write_text(path, format_graph(g))
    logger.debug(f'Wrote graph with {g.vertex_count} vertices to {path}')


def parse_graph(text: str) -> WeightedGraph:
    lines = text.split('\n')
    header = lines[0].split()
    if len(header) != 2:
        raise MalformedFile(f'Header must be "n m", got {lines[0]!r}')
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError as exc:
        raise MalformedFile(f'Header must hold two integers, got {lines[0]!r}') from exc
    if n < 1 or m < 0:
        raise MalformedFile(f'Header counts out of range: n={n}, m={m}')

    body = '\n'.join(line for line in lines[1:] if line.strip())
    if m == 0:
        if body:
            raise MalformedFile('Header declares 0 edges but edge lines follow')
        return build_graph([], vertex_count=n)

    try:
        table = pd.read_csv(io.StringIO(body), sep=r'\s+', header=None, names=['u', 'v', 'w'],
                            dtype={'u': 'int64', 'v': 'int64', 'w': 'float64'},
                            float_precision='round_trip')
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise MalformedFile(f'Edge lines must be "u v w": {exc}') from exc
    if len(table) != m:
        raise MalformedFile(f'Header declares {m} edges, file has {len(table)}')
    return build_graph(table.itertuples(index=False, name=None), vertex_count=n)


def read_graph(path) -> WeightedGraph:
    """Read and validate a .wgr file"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as exc:
        raise IoFailure(f'Cannot read {path}: {exc}', {'path': str(path)}) from exc
    if not text.strip():
        raise MalformedFile(f'{path} is empty')
    return parse_graph(text)
