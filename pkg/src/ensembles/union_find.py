"""
Array union-find with path compression and union by rank, plus the
largest-component extraction every random-graph generator shares
"""

import logging

import numpy as np

from src.models.errors import EmptyGraph
from src.models.graph import WeightedGraph, build_graph_arrays

logger = logging.getLogger(__name__)


class UnionFind:
    """
    Disjoint sets over 0..n-1.

    >>> uf = UnionFind(5)
    >>> uf.union(1, 2)
    >>> uf.find(2) == uf.find(1)
    True
    """

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.rank = np.zeros(n, dtype=np.int8)

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        # Path compression
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return int(root)

    def union(self, x: int, y: int) -> None:
        px, py = self.find(x), self.find(y)
        if px == py:
            return
        if self.rank[px] < self.rank[py]:
            px, py = py, px
        self.parent[py] = px
        if self.rank[px] == self.rank[py]:
            self.rank[px] += 1

    def labels(self) -> np.ndarray:
        return np.array([self.find(i) for i in range(len(self.parent))], dtype=np.int64)


def largest_component(n: int, u: np.ndarray, v: np.ndarray) -> WeightedGraph:
    """
    Largest connected component of the unit-weight graph with edges (u, v) on
    vertices 0..n-1, relabeled densely in increasing original id.

    Ties between equal-size components go to the one holding the smallest
    original vertex id. Isolated vertices never count as a component.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if u.size == 0:
        raise EmptyGraph('No edges survived')

    uf = UnionFind(n)
    for a, b in zip(u.tolist(), v.tolist()):
        uf.union(a, b)
    labels = uf.labels()

    touched = np.zeros(n, dtype=bool)
    touched[u] = True
    touched[v] = True
    sizes = np.bincount(labels[touched], minlength=n)
    best = int(sizes.max())
    # smallest vertex id belonging to a component of maximal size
    candidates = np.flatnonzero(touched & (sizes[labels] == best))
    winner = labels[int(candidates.min())]

    keep = labels == winner
    relabel = np.full(n, -1, dtype=np.int64)
    relabel[keep] = np.arange(int(keep.sum()))
    mask = keep[u]
    logger.debug(f'Largest component: {int(keep.sum())} of {n} vertices')
    return build_graph_arrays(relabel[u[mask]], relabel[v[mask]], 1.0, vertex_count=int(keep.sum()))
