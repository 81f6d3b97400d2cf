"""
Graph Families
FamilySpec parsing/validation, dispatch to the generators, and the model
functions v(N), r(N) and predicted cover-time orders for each family

Place in: src/ensembles/families.py
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple, Union

from scipy.optimize import brentq

from src.ensembles.deterministic import (
    complete_graph, cycle_graph, gen_barbell, gen_sierpinski,
)
from src.ensembles.galton_watson import (
    DEFAULT_MAX_VERTICES, DEFAULT_REJECTION_CAP, gen_kesten_iic, gen_supercritical_gw,
)
from src.ensembles.lattice import gen_percolation_box, gen_rw_range
from src.ensembles.offspring import OffspringSpec, survival_probability
from src.ensembles.random_graphs import (
    DEFAULT_C, DEFAULT_F_RULE, ER_REGIMES, F_RULES, gen_er,
)
from src.models.errors import InvalidParameters, NotCritical
from src.models.graph import WeightedGraph

logger = logging.getLogger(__name__)

FAMILIES = ('gw_supercritical', 'iic_kesten', 'er', 'percolation_box', 'rw_range',
            'sierpinski', 'barbell', 'cycle', 'complete')

A_RULES = ('N', 'sqrt', 'log')


@dataclass(frozen=True)
class FamilySpec:
    """A graph family plus its parameters; N and seed are optional defaults"""
    family: str
    N: Optional[int] = None
    seed: Optional[int] = None
    offspring: Optional[OffspringSpec] = None
    p: Optional[float] = None
    d: Optional[int] = None
    regime: str = 'supercritical_c_over_N'
    c: float = DEFAULT_C
    f_rule: str = DEFAULT_F_RULE
    weight_bounds: Tuple[float, float] = (1.0, 1.0)
    a_rule: Union[str, int] = 'N'
    dimension: int = 2

    @classmethod
    def from_dict(cls, data: Dict) -> 'FamilySpec':
        if not isinstance(data, dict) or 'family' not in data:
            raise InvalidParameters(f'Family spec needs a "family" entry: {data!r}')
        known = {'family', 'N', 'seed', 'offspring', 'p', 'd', 'regime', 'c', 'f_rule',
                 'weight_bounds', 'a_rule', 'a_N', 'dimension'}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidParameters(f'Unknown family fields: {unknown}')
        kwargs = {k: data[k] for k in known & set(data) if k not in ('offspring', 'a_N')}
        if 'offspring' in data:
            kwargs['offspring'] = OffspringSpec.from_dict(data['offspring'])
        if 'a_N' in data:
            kwargs['a_rule'] = data['a_N']
        if 'weight_bounds' in kwargs:
            kwargs['weight_bounds'] = tuple(float(w) for w in kwargs['weight_bounds'])
        spec = cls(**kwargs)
        spec.validate()
        return spec

    def to_dict(self) -> Dict:
        out = {'family': self.family}
        if self.N is not None:
            out['N'] = self.N
        if self.seed is not None:
            out['seed'] = self.seed
        if self.offspring is not None:
            out['offspring'] = self.offspring.to_dict()
        if self.family == 'er':
            out.update({'regime': self.regime, 'c': self.c, 'f_rule': self.f_rule, 'p': self.p})
        if self.family in ('percolation_box',):
            out.update({'d': self.d, 'p': self.p})
        if self.family == 'rw_range':
            out['d'] = self.d
        if self.family == 'sierpinski':
            out.update({'weight_bounds': list(self.weight_bounds), 'dimension': self.dimension})
        if self.family == 'barbell':
            out['a_N'] = self.a_rule
        return out

    def with_size(self, N: int, seed: Optional[int] = None) -> 'FamilySpec':
        return replace(self, N=N, seed=self.seed if seed is None else seed)

    def validate(self) -> None:
        """Check parameters against the family's domain"""
        f = self.family
        if f not in FAMILIES:
            raise InvalidParameters(f'Unknown family {f!r}; expected one of {FAMILIES}')
        if self.N is not None and (not isinstance(self.N, int) or self.N < 0):
            raise InvalidParameters(f'N must be a non-negative integer, got {self.N!r}')
        if f == 'gw_supercritical':
            if self.offspring is None or not self.offspring.mean > 1:
                raise InvalidParameters('gw_supercritical needs an offspring law with mean > 1')
        elif f == 'iic_kesten':
            if self.offspring is None:
                raise InvalidParameters('iic_kesten needs an offspring law')
            if not self.offspring.is_critical:
                raise NotCritical(f'iic_kesten needs mean 1, got {self.offspring.mean}')
        elif f == 'er':
            if self.regime not in ER_REGIMES:
                raise InvalidParameters(f'Unknown regime {self.regime!r}; expected one of {ER_REGIMES}')
            if self.f_rule not in F_RULES:
                raise InvalidParameters(f'Unknown f rule {self.f_rule!r}')
            if self.p is not None and not 0 < self.p <= 1:
                raise InvalidParameters(f'p must be in (0, 1], got {self.p}')
        elif f == 'percolation_box':
            if self.d is None or self.d < 2:
                raise InvalidParameters(f'percolation_box needs d >= 2, got {self.d}')
            if self.p is None or not 0 < self.p <= 1:
                raise InvalidParameters(f'percolation_box needs p in (0, 1], got {self.p}')
        elif f == 'rw_range':
            if self.d is None or self.d < 5:
                raise InvalidParameters(f'rw_range needs d >= 5, got {self.d}')
        elif f == 'sierpinski':
            c1, c2 = self.weight_bounds
            if not 0 < c1 <= c2:
                raise InvalidParameters(f'Weight bounds must satisfy 0 < c1 <= c2, got {self.weight_bounds}')
        elif f == 'barbell':
            if not (self.a_rule in A_RULES or isinstance(self.a_rule, int)):
                raise InvalidParameters(f'a_N must be an integer or one of {A_RULES}, got {self.a_rule!r}')

    def pendant_count(self, N: int) -> int:
        """a_N for the barbell family"""
        if isinstance(self.a_rule, int):
            return self.a_rule
        if self.a_rule == 'N':
            return N
        if self.a_rule == 'sqrt':
            return max(2, math.isqrt(N))
        return max(2, math.ceil(math.log(N)))


def generate(spec: FamilySpec, N: Optional[int] = None, seed: Optional[int] = None,
             rejection_cap: int = DEFAULT_REJECTION_CAP,
             max_vertices: int = DEFAULT_MAX_VERTICES) -> WeightedGraph:
    """Generate one graph of the family at size N"""
    N = spec.N if N is None else N
    seed = spec.seed if seed is None else seed
    if N is None:
        raise InvalidParameters('Size parameter N is required')
    if seed is None:
        seed = 0
    f = spec.family
    logger.debug(f'Generating {f} N={N} seed={seed}')
    if f == 'gw_supercritical':
        return gen_supercritical_gw(spec.offspring, N, seed, rejection_cap, max_vertices)
    if f == 'iic_kesten':
        return gen_kesten_iic(spec.offspring, N, seed, max_vertices)
    if f == 'er':
        return gen_er(N, spec.p, seed, spec.regime, spec.c, spec.f_rule)
    if f == 'percolation_box':
        return gen_percolation_box(spec.d, N, spec.p, seed)
    if f == 'rw_range':
        return gen_rw_range(spec.d, N, seed)
    if f == 'sierpinski':
        return gen_sierpinski(N, spec.weight_bounds, seed, spec.dimension)
    if f == 'barbell':
        return gen_barbell(N, spec.pendant_count(N))
    if f == 'cycle':
        return cycle_graph(N)
    if f == 'complete':
        return complete_graph(N)
    raise InvalidParameters(f'Unknown family {f!r}')


def is_stochastic(spec: FamilySpec) -> bool:
    if spec.family == 'sierpinski':
        return spec.weight_bounds[0] != spec.weight_bounds[1]
    return spec.family not in ('barbell', 'cycle', 'complete')


# ============================================================================
# MODEL ORDERS
# ============================================================================

def giant_fraction(c: float) -> float:
    """Positive root x of x = 1 - exp(-c x) for c > 1"""
    return brentq(lambda x: x - 1.0 + math.exp(-c * x), 1e-12, 1.0)


def er_cover_constant(c: float) -> float:
    """Sharp constant of t_cov / (N (log N)^2) for the giant of G(N, c/N)"""
    x = giant_fraction(c)
    return c * x * (2 - x) / (4 * (c * x - math.log(c)))


def model_orders(spec: FamilySpec, N: int) -> Dict:
    """
    Model functions v(N), r(N), the predicted order of t_cov and the
    predicted type for one family at size N

    Returns:
        Dict with v, r, cover_order, predicted_type and family-specific extras
    """
    f = spec.family
    log_n = math.log(N) if N > 1 else float('nan')
    out: Dict = {'family': f, 'N': N}
    if f == 'gw_supercritical':
        m = spec.offspring.mean
        out.update(v=m ** N, r=float(N), cover_order=N ** 2 * m ** N, predicted_type='type1')
    elif f == 'iic_kesten':
        p_n = survival_probability(spec.offspring, N)
        out.update(v=N / p_n, r=float(N), cover_order=N ** 2 / p_n, predicted_type='type2',
                   survival_probability=p_n)
    elif f == 'er':
        if spec.regime == 'supercritical_c_over_N':
            out.update(v=float(N), r=log_n, cover_order=N * log_n ** 2, predicted_type='type1',
                       reference_constant=er_cover_constant(spec.c))
        elif spec.regime == 'supercritical_f_over_N':
            f_n = F_RULES[spec.f_rule](N)
            out.update(v=N * f_n, r=1.0 / f_n, cover_order=N * log_n, predicted_type='type1',
                       f_rule=spec.f_rule, f_value=f_n)
        else:
            out.update(v=N ** (2 / 3), r=N ** (1 / 3), cover_order=float(N), predicted_type='type2')
    elif f == 'percolation_box':
        d = spec.d
        low, high = (2.0, 3.0) if d == 2 else (1.0, (2 * d - 1) / (d - 1))
        out.update(v=float(N ** d), r=log_n ** (d / (d - 1)), cover_order=N ** d * log_n ** low,
                   cover_order_upper=N ** d * log_n ** high, predicted_type='type1',
                   log_exponent_candidates=[low, high])
    elif f == 'rw_range':
        out.update(v=float(N), r=float(N), cover_order=float(N ** 2), predicted_type='type2')
    elif f == 'sierpinski':
        k = spec.dimension + 1
        out.update(v=float(k ** N), r=((k + 2) / k) ** N, cover_order=float((k + 2) ** N),
                   predicted_type='type2', mass_factor=k, resistance_factor=(k + 2) / k,
                   time_factor=k + 2)
    elif f == 'barbell':
        a_n = spec.pendant_count(N)
        slow = spec.a_rule == 'log'
        out.update(v=float(N + a_n), r=2.0 + 2.0 / N, cover_order=N ** 2 * math.log(a_n),
                   predicted_type='neither' if slow else 'type1', a_N=a_n)
    elif f == 'cycle':
        out.update(v=float(N), r=float(N), cover_order=float(N ** 2), predicted_type='type2')
    elif f == 'complete':
        out.update(v=float(N), r=1.0, cover_order=N * log_n, predicted_type='type1')
    return out
