"""
Offspring Laws
Branching-process offspring distributions: pmf tables, generating functions,
survival and extinction probabilities, size-biased sampling

Place in: src/ensembles/offspring.py
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import special, stats

from src.models.errors import InvalidParameters, NotCritical

logger = logging.getLogger(__name__)

KINDS = ('poisson', 'geometric', 'binomial', 'explicit', 'power_tail')

# Tail mass dropped when tabulating unbounded laws
TABLE_TAIL = 1e-17

CRITICAL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class OffspringSpec:
    """
    Offspring law Z of a Galton-Watson process.

    geometric(p) has P(Z = k) = p (1 - p)^k. power_tail(alpha, cutoff, mean)
    puts weights proportional to k^-(1 + alpha) on {2..cutoff} scaled to the
    target mean, with the rest of the mass at 0.
    """

    kind: str
    m: Optional[float] = None
    p: Optional[float] = None
    n: Optional[int] = None
    probabilities: Optional[Tuple[float, ...]] = None
    alpha: Optional[float] = None
    cutoff: Optional[int] = None
    target_mean: Optional[float] = None
    _table: np.ndarray = field(init=False, repr=False, compare=False)

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def poisson(cls, m: float) -> 'OffspringSpec':
        return cls('poisson', m=float(m))

    @classmethod
    def geometric(cls, p: float) -> 'OffspringSpec':
        return cls('geometric', p=float(p))

    @classmethod
    def binomial(cls, n: int, p: float) -> 'OffspringSpec':
        return cls('binomial', n=int(n), p=float(p))

    @classmethod
    def explicit(cls, probabilities) -> 'OffspringSpec':
        if isinstance(probabilities, dict):
            size = max(int(k) for k in probabilities) + 1
            table = [0.0] * size
            for k, q in probabilities.items():
                table[int(k)] = float(q)
            probabilities = table
        return cls('explicit', probabilities=tuple(float(q) for q in probabilities))

    @classmethod
    def power_tail(cls, alpha: float, cutoff: int, mean: float = 1.0) -> 'OffspringSpec':
        return cls('power_tail', alpha=float(alpha), cutoff=int(cutoff), target_mean=float(mean))

    @classmethod
    def from_dict(cls, data: Dict) -> 'OffspringSpec':
        """Parse the config form, e.g. {"kind": "poisson", "m": 2}"""
        if not isinstance(data, dict) or 'kind' not in data:
            raise InvalidParameters(f'Offspring spec needs a "kind": {data!r}')
        kind = data['kind']
        try:
            if kind == 'poisson':
                return cls.poisson(data['m'])
            if kind == 'geometric':
                return cls.geometric(data['p'])
            if kind == 'binomial':
                return cls.binomial(data['n'], data['p'])
            if kind == 'explicit':
                return cls.explicit(data['probabilities'])
            if kind == 'power_tail':
                return cls.power_tail(data['alpha'], data['cutoff'], data.get('mean', 1.0))
        except KeyError as exc:
            raise InvalidParameters(f'Offspring spec {kind!r} is missing {exc}') from exc
        raise InvalidParameters(f'Unknown offspring kind {kind!r}; expected one of {KINDS}')

    def to_dict(self) -> Dict:
        out = {'kind': self.kind, 'mean': self.mean}
        for name in ('m', 'p', 'n', 'alpha', 'cutoff', 'target_mean'):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.probabilities is not None:
            out['probabilities'] = list(self.probabilities)
        if self.kind == 'power_tail':
            out['truncation_error'] = self.truncation_error
        return out

    # ------------------------------------------------------------------
    # Validation and tabulation
    # ------------------------------------------------------------------

    def __post_init__(self):
        object.__setattr__(self, '_table', self._build_table())

    def _build_table(self) -> np.ndarray:
        if self.kind == 'poisson':
            if not (self.m is not None and self.m > 0):
                raise InvalidParameters(f'poisson mean must be > 0, got {self.m}')
            kmax = int(stats.poisson.isf(TABLE_TAIL, self.m)) + 1
            table = stats.poisson.pmf(np.arange(kmax + 1), self.m)
        elif self.kind == 'geometric':
            if not (self.p is not None and 0 < self.p <= 1):
                raise InvalidParameters(f'geometric p must be in (0, 1], got {self.p}')
            if self.p == 1:
                table = np.array([1.0])
            else:
                kmax = int(math.ceil(math.log(TABLE_TAIL) / math.log1p(-self.p)))
                k = np.arange(kmax + 1)
                table = self.p * np.exp(k * math.log1p(-self.p))
        elif self.kind == 'binomial':
            if not (self.n is not None and self.n >= 1 and self.p is not None and 0 <= self.p <= 1):
                raise InvalidParameters(f'binomial needs n >= 1, p in [0, 1]; got n={self.n}, p={self.p}')
            table = stats.binom.pmf(np.arange(self.n + 1), self.n, self.p)
        elif self.kind == 'explicit':
            table = np.asarray(self.probabilities or (), dtype=np.float64)
            if table.size == 0 or (table < 0).any():
                raise InvalidParameters('explicit offspring table must be non-empty and non-negative')
            if abs(math.fsum(table.tolist()) - 1.0) > 1e-12:
                raise InvalidParameters(f'explicit offspring probabilities sum to {table.sum()!r}, not 1')
            return table / math.fsum(table.tolist())
        elif self.kind == 'power_tail':
            table = self._power_tail_table()
        else:
            raise InvalidParameters(f'Unknown offspring kind {self.kind!r}; expected one of {KINDS}')
        total = math.fsum(table.tolist())
        return table / total

    def _power_tail_table(self) -> np.ndarray:
        if not (self.alpha is not None and 1 < self.alpha <= 2):
            raise InvalidParameters(f'power_tail alpha must be in (1, 2], got {self.alpha}')
        if not (self.cutoff is not None and self.cutoff >= 2):
            raise InvalidParameters(f'power_tail cutoff must be >= 2, got {self.cutoff}')
        k = np.arange(2, self.cutoff + 1, dtype=np.float64)
        q = k ** -(1.0 + self.alpha)
        q /= math.fsum(q.tolist())
        tail_mean = math.fsum((k * q).tolist())
        scale = self.target_mean / tail_mean
        if not 0 < scale <= 1:
            raise InvalidParameters(
                f'power_tail mean {self.target_mean} is unreachable with cutoff {self.cutoff}')
        table = np.zeros(self.cutoff + 1)
        table[2:] = scale * q
        table[0] = 1.0 - math.fsum(table[2:].tolist())
        return table

    @property
    def table(self) -> np.ndarray:
        """P(Z = k) for k = 0..len-1"""
        return self._table

    @property
    def mean(self) -> float:
        if self.kind == 'poisson':
            return float(self.m)
        if self.kind == 'geometric':
            return (1.0 - self.p) / self.p
        if self.kind == 'binomial':
            return self.n * self.p
        k = np.arange(self._table.size)
        return math.fsum((k * self._table).tolist())

    @property
    def truncation_error(self) -> float:
        """Mass of the untruncated power tail beyond the cutoff"""
        if self.kind != 'power_tail':
            return 0.0
        s = 1.0 + self.alpha
        return float(special.zeta(s, self.cutoff + 1) / special.zeta(s, 2))

    @property
    def is_critical(self) -> bool:
        return abs(self.mean - 1.0) <= CRITICAL_TOLERANCE

    # ------------------------------------------------------------------
    # Generating functions
    # ------------------------------------------------------------------

    def pgf(self, s: float) -> float:
        """f(s) = E s^Z"""
        return 1.0 - self.complement_pgf(1.0 - s)

    def complement_pgf(self, x: float) -> float:
        """1 - f(1 - x), evaluated without cancellation for small x"""
        if x == 0.0:
            return 0.0
        if self.kind == 'poisson':
            return -math.expm1(-self.m * x)
        if self.kind == 'geometric':
            q = 1.0 - self.p
            return q * x / (self.p + q * x)
        if self.kind == 'binomial':
            if self.p * x >= 1.0:
                return 1.0
            return -math.expm1(self.n * math.log1p(-self.p * x))
        if x >= 1.0:
            return 1.0 - float(self._table[0])
        log_s = math.log1p(-x)
        k = np.arange(1, self._table.size)
        return math.fsum((self._table[1:] * -np.expm1(k * log_s)).tolist())

    # ------------------------------------------------------------------
    # Sampling
    # ------------------------------------------------------------------

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if size == 0:
            return np.zeros(0, dtype=np.int64)
        if self.kind == 'poisson':
            return rng.poisson(self.m, size).astype(np.int64)
        if self.kind == 'geometric':
            return (rng.geometric(self.p, size) - 1).astype(np.int64)
        if self.kind == 'binomial':
            return rng.binomial(self.n, self.p, size).astype(np.int64)
        return rng.choice(self._table.size, size=size, p=self._table).astype(np.int64)

    def size_biased_table(self) -> np.ndarray:
        """k P(Z = k) / E Z"""
        if self.mean <= 0:
            raise InvalidParameters('Size-biased law needs a positive mean')
        k = np.arange(self._table.size)
        biased = k * self._table
        return biased / math.fsum(biased.tolist())

    def sample_size_biased(self, rng: np.random.Generator, size: int) -> np.ndarray:
        biased = self.size_biased_table()
        return rng.choice(biased.size, size=size, p=biased).astype(np.int64)


def survival_probability(spec: OffspringSpec, N: int) -> float:
    """
    p_N = P(Z_N > 0) for a critical process by p_k = 1 - f(1 - p_{k-1}), p_0 = 1

    Args:
        spec: critical offspring law
        N: generation

    Returns:
        Survival probability in (0, 1]
    """
    if not spec.is_critical:
        raise NotCritical(f'Offspring mean is {spec.mean}, expected 1', {'mean': spec.mean})
    if N < 0:
        raise InvalidParameters(f'Generation must be >= 0, got {N}')
    p = 1.0
    for _ in range(int(N)):
        p = spec.complement_pgf(p)
    return p


def extinction_probability(spec: OffspringSpec, tol: float = 1e-15, max_iter: int = 1_000_000) -> float:
    """Smallest fixed point of f(s) = s, iterated from s = 0"""
    s = 0.0
    for _ in range(max_iter):
        nxt = spec.pgf(s)
        if abs(nxt - s) <= tol:
            return nxt
        s = nxt
    logger.warning(f'Extinction probability did not converge for {spec.kind}; returning {s}')
    return s


def death_probability(spec: OffspringSpec, N: int) -> float:
    """P(Z_N = 0) = f^(N)(0)"""
    s = 0.0
    for _ in range(int(N)):
        s = spec.pgf(s)
    return s
