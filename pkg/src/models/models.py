"""
Value records shared across modules
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

# Export records so other modules can import from models.models
__all__ = ['NetMode', 'NetKind', 'ResistanceMode', 'Verdict', 'StartPolicy', 'ScaleSequence',
           'NetResult', 'HittingProfile', 'ExactCover', 'SandwichResult', 'CommuteBounds',
           'CoverEstimate', 'GffEstimate', 'EnsembleStats', 'TypeReport', 'ExponentFit']


class NetMode(str, Enum):
    EXACT = 'exact'
    GREEDY = 'greedy'


class NetKind(str, Enum):
    PACKING = 'packing'
    COVERING = 'covering'


class ResistanceMode(str, Enum):
    DENSE = 'dense_pseudoinverse'
    PER_PAIR = 'per_pair_solve'


class Verdict(str, Enum):
    TYPE1 = 'type1-consistent'
    TYPE2 = 'type2-consistent'
    NEITHER = 'neither'
    INCONCLUSIVE = 'inconclusive'


@dataclass(frozen=True)
class StartPolicy:
    """Which start vertices a cover estimate maximizes over"""
    kind: str  # 'fixed' or 'worst_of_set'
    vertices: Tuple[int, ...]

    @classmethod
    def fixed(cls, v: int) -> 'StartPolicy':
        return cls('fixed', (int(v),))

    @classmethod
    def worst_of_set(cls, vertices) -> 'StartPolicy':
        return cls('worst_of_set', tuple(sorted({int(v) for v in vertices})))

    def to_dict(self) -> Dict:
        return {'kind': self.kind, 'vertices': list(self.vertices)}


@dataclass(frozen=True)
class ScaleSequence:
    """Radii l_0 = diam_R >= l_1 >= ... >= l_k0 = 0"""
    radii: Tuple[float, ...]

    @property
    def k0(self) -> int:
        return len(self.radii) - 1

    def to_dict(self) -> Dict:
        return {'scales': list(self.radii), 'k0': self.k0}


@dataclass(frozen=True)
class NetResult:
    """A packing or covering of the vertex set by closed resistance balls"""
    centers: Tuple[int, ...]
    count: int
    mode: NetMode
    radius: float
    kind: NetKind

    def to_dict(self) -> Dict:
        return {
            'centers': list(self.centers),
            'count': self.count,
            'mode': self.mode.value,
            'radius': self.radius,
            'kind': self.kind.value,
        }


@dataclass(frozen=True, eq=False)
class HittingProfile:
    """h[x, y] = expected steps from x to first hit y"""
    matrix: np.ndarray = field(repr=False)
    t_hit: float
    witness: Tuple[int, int]
    commute_residual: float = 0.0

    def to_dict(self) -> Dict:
        return {'t_hit': self.t_hit, 'witness': list(self.witness),
                'commute_residual': self.commute_residual}


@dataclass(frozen=True)
class ExactCover:
    """Exact expected cover time from every start"""
    per_start: Tuple[float, ...]
    t_cov: float
    worst_start: int
    state_space: int

    def to_dict(self) -> Dict:
        return {'per_start': list(self.per_start), 't_cov': self.t_cov,
                'worst_start': self.worst_start, 'state_space': self.state_space}


@dataclass(frozen=True)
class SandwichResult:
    """t_hit <= t_cov <= 2 t_hit ln n, with slacks (positive means satisfied)"""
    passed: bool
    asserted: bool
    lower_slack: float
    upper_slack: float
    matthews_upper: float

    def to_dict(self) -> Dict:
        return {'passed': self.passed, 'asserted': self.asserted,
                'lower_slack': self.lower_slack, 'upper_slack': self.upper_slack,
                'matthews_upper': self.matthews_upper}


@dataclass(frozen=True)
class CommuteBounds:
    """1/2 vol diam_R <= t_hit <= vol diam_R"""
    passed: bool
    lower_slack: float
    upper_slack: float
    hit_ratio: float

    def to_dict(self) -> Dict:
        return {'passed': self.passed, 'lower_slack': self.lower_slack,
                'upper_slack': self.upper_slack, 'hit_ratio': self.hit_ratio}


@dataclass(frozen=True)
class CoverEstimate:
    """Monte Carlo estimate of a cover or hitting time, in steps"""
    mean: float
    standard_error: float
    replicas: int
    policy: StartPolicy
    seed: int
    argmax_start: int
    per_start: Dict[int, Tuple[float, float]] = field(default_factory=dict)
    quantity: str = 'cover'

    def to_dict(self) -> Dict:
        return {
            'quantity': self.quantity,
            'mean': self.mean,
            'standard_error': self.standard_error,
            'replicas': self.replicas,
            'policy': self.policy.to_dict(),
            'seed': self.seed,
            'argmax_start': self.argmax_start,
            'per_start': {str(k): {'mean': m, 'standard_error': s}
                          for k, (m, s) in sorted(self.per_start.items())},
            'gap_direction': 'estimate <= true t_cov' if self.policy.kind == 'worst_of_set' else None,
        }


@dataclass(frozen=True)
class GffEstimate:
    """Monte Carlo mean of max_x eta_x"""
    mean: float
    standard_error: float
    replicas: int
    root: int
    seed: int

    def to_dict(self) -> Dict:
        return {'emax': self.mean, 'emax_se': self.standard_error,
                'replicas': self.replicas, 'root': self.root, 'seed': self.seed}


@dataclass
class EnsembleStats:
    """One row per (N, sample) plus bookkeeping for excluded samples"""
    family: str
    records: pd.DataFrame
    excluded: Dict[int, int] = field(default_factory=dict)
    partial: bool = False
    notes: List[str] = field(default_factory=list)

    @property
    def n_values(self) -> List[int]:
        return sorted(int(n) for n in self.records['N'].unique()) if len(self.records) else []

    def to_dict(self) -> Dict:
        return {'family': self.family, 'rows': len(self.records),
                'excluded': {str(k): v for k, v in sorted(self.excluded.items())},
                'partial': self.partial, 'notes': list(self.notes)}


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares scaling exponent with bootstrap confidence interval"""
    model: str
    quantity: str
    exponent: float
    ci_low: float
    ci_high: float
    n_values: Tuple[int, ...]

    def to_dict(self) -> Dict:
        return {'model': self.model, 'quantity': self.quantity, 'exponent': self.exponent,
                'ci': [self.ci_low, self.ci_high], 'n_values': list(self.n_values)}


@dataclass
class TypeReport:
    """Event frequencies per (N, lambda), ratio growth fit and verdict"""
    frequencies: pd.DataFrame
    lambda_grid: Tuple[float, ...]
    threshold: float
    verdict: Verdict
    ratio_growth: Optional[ExponentFit] = None
    details: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            'verdict': self.verdict.value,
            'lambda_grid': list(self.lambda_grid),
            'threshold': self.threshold,
            'frequencies': self.frequencies.to_dict(orient='records'),
            'ratio_growth': self.ratio_growth.to_dict() if self.ratio_growth else None,
            'details': self.details,
        }
