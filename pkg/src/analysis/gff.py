"""
Gaussian Free Field
Pinned free field sampling from the Green kernel and the expected-maximum
to cover-time ratio

Place in: src/analysis/gff.py
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.linalg.lapack import dpstrf

from src.analysis.resistance import GreenKernel, ResistanceMetric, diameter_witness, green_kernel
from src.extensions import parallel_map, substream_seed
from src.models.errors import DegenerateField, InvalidParameters, NumericalFailure
from src.models.graph import WeightedGraph, volume
from src.models.models import GffEstimate

logger = logging.getLogger(__name__)

FACTOR_TOLERANCE = 1e-8
BLOCK_SIZE = 4096

# Block substreams are keyed above any vertex id so they never meet walk streams
GFF_KEY = 1 << 41


@dataclass(frozen=True)
class GffModel:
    """Green kernel plus a square-root factor of its non-root block"""
    kernel: GreenKernel
    factor: np.ndarray = field(repr=False)   # (n - 1, rank), rows in vertex order
    rank: int
    factor_error: float

    @property
    def root(self) -> int:
        return self.kernel.root

    @property
    def vertex_count(self) -> int:
        return self.kernel.matrix.shape[0]

    @property
    def free_vertices(self) -> np.ndarray:
        return np.flatnonzero(np.arange(self.vertex_count) != self.root)

    def increment_variances(self) -> np.ndarray:
        """C_xx + C_yy - 2 C_xy for every pair"""
        c = self.kernel.matrix
        diag = np.diag(c)
        return diag[:, None] + diag[None, :] - 2.0 * c


def default_root(m: ResistanceMetric) -> int:
    """First endpoint of the resistance-diameter witness"""
    if m.vertex_count < 2:
        return 0
    return int(diameter_witness(m)[0])


def build_gff(m: ResistanceMetric, root: Optional[int] = None) -> GffModel:
    """
    Factor the Green kernel with pivoted Cholesky (semidefinite tolerant)

    Args:
        m: dense resistance metric
        root: pinned vertex; the diameter witness endpoint when omitted

    Returns:
        GffModel whose factor reproduces the kernel to 1e-8 relative Frobenius error
    """
    root = default_root(m) if root is None else root
    kernel = green_kernel(m, root)
    n = m.vertex_count
    if n == 1:
        return GffModel(kernel, np.zeros((0, 0)), 0, 0.0)

    reduced = np.array(kernel.reduced, dtype=np.float64, order='F')
    c, piv, rank, info = dpstrf(reduced, lower=1, tol=-1.0)
    if info < 0:
        raise NumericalFailure(f'Pivoted Cholesky failed (info={info})', {'info': int(info)})
    lower = np.tril(c)
    lower[:, rank:] = 0.0
    factor = np.empty_like(lower)
    factor[piv - 1] = lower
    factor = np.ascontiguousarray(factor[:, :rank])

    scale = np.linalg.norm(reduced)
    error = float(np.linalg.norm(factor @ factor.T - reduced) / scale) if scale > 0 else 0.0
    if error > FACTOR_TOLERANCE:
        raise NumericalFailure(f'Kernel factor error {error:.3e} above {FACTOR_TOLERANCE}',
                               {'relative_error': error, 'rank': int(rank)})
    factor.setflags(write=False)
    logger.debug(f'GFF factor: n={n}, rank={rank}, root={root}, error={error:.2e}')
    return GffModel(kernel, factor, int(rank), error)


def _draw(model: GffModel, rng: np.random.Generator, count: int) -> np.ndarray:
    fields = np.zeros((count, model.vertex_count))
    if model.rank:
        z = rng.standard_normal((count, model.rank))
        fields[:, model.free_vertices] = z @ model.factor.T
    return fields


def sample_gff(model: GffModel, rng: Union[np.random.Generator, int]) -> np.ndarray:
    """One field sample; the root is pinned at 0"""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return _draw(model, rng, 1)[0]


def sample_gff_batch(model: GffModel, replicas: int, seed: int) -> np.ndarray:
    """(replicas, n) samples; block b draws from substream (seed, GFF_KEY, b)"""
    blocks = [(b, min(BLOCK_SIZE, replicas - start)) for b, start in
              enumerate(range(0, replicas, BLOCK_SIZE))]
    parts = [_draw(model, np.random.default_rng(substream_seed(seed, GFF_KEY, b)), count) for b, count in blocks]
    return np.concatenate(parts) if parts else np.zeros((0, model.vertex_count))


def estimate_expected_max(model: GffModel, replicas: int, seed: int, threads: int = 1) -> GffEstimate:
    """Monte Carlo E max_x eta_x, root included"""
    if replicas < 2:
        raise InvalidParameters(f'Need at least 2 replicas for a standard error, got {replicas}')
    if model.vertex_count == 1:
        return GffEstimate(0.0, 0.0, replicas, model.root, seed)

    blocks = [(b, min(BLOCK_SIZE, replicas - start)) for b, start in
              enumerate(range(0, replicas, BLOCK_SIZE))]

    def block_max(block):
        b, count = block
        return _draw(model, np.random.default_rng(substream_seed(seed, GFF_KEY, b)), count).max(axis=1)

    maxima = np.concatenate(parallel_map(block_max, blocks, threads))
    mean = math.fsum(maxima.tolist()) / maxima.size
    se = float(np.std(maxima, ddof=1)) / math.sqrt(maxima.size)
    logger.info(f'E max GFF (root {model.root}, {replicas} draws): {mean:.6g} +- {se:.2g}')
    return GffEstimate(mean, se, replicas, model.root, seed)


def field_ratio(g: WeightedGraph, t_cov: float, emax: float) -> float:
    """t_cov / (vol(G) * (E max eta)^2)"""
    if not emax > 0:
        raise DegenerateField(f'Expected maximum must be positive, got {emax}', {'emax': emax})
    return t_cov / (volume(g) * emax ** 2)


def increment_residual(model: GffModel, m: ResistanceMetric) -> float:
    """max |C_xx + C_yy - 2 C_xy - R(x, y)| over all pairs"""
    return float(np.abs(model.increment_variances() - m.table).max())
