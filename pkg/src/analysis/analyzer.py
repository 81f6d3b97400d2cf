"""
Graph Analyzer
Runs the full measurement pipeline on one weighted graph: resistance metric,
hitting and cover times, nets and functionals, and the free field

Place in: src/analysis/analyzer.py
"""

import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.analysis.chain_exact import (
    commute_bounds, exact_cover_time, hitting_times, matthews_upper, sandwich_check,
)
from src.analysis.gff import build_gff, estimate_expected_max, field_ratio, increment_residual
from src.analysis.metric_geometry import (
    chaining_functional, covering_number, dyadic_scales, packing_number, radius_grid,
    sudakov_over_scales,
)
from src.analysis.resistance import (
    ResistanceMetric, build_metric, diameter_is_exact, diameter_witness, resistance_diameter,
)
from src.analysis.walk_mc import candidate_starts, estimate_cover_time, estimate_hitting
from src.config import AnalysisToggles, EstimatorBudgets
from src.extensions import substream_seed
from src.models.errors import ConfigError, DegenerateField
from src.models.graph import WeightedGraph, volume
from src.models.models import CoverEstimate, ExactCover, HittingProfile, NetMode, StartPolicy

logger = logging.getLogger(__name__)

# Walk and field estimates run on independent substreams of the master seed
COVER_STREAM = 1
HITTING_STREAM = 2
GFF_STREAM = 3


class GraphAnalyzer:
    """Measurement pipeline for one graph; each quantity is computed once and cached"""

    def __init__(self, graph: WeightedGraph, budgets: Optional[EstimatorBudgets] = None,
                 toggles: Optional[AnalysisToggles] = None, seed: Optional[int] = None,
                 threads: int = 1, root: Optional[int] = None):
        self.graph = graph
        self.budgets = budgets or EstimatorBudgets()
        self.toggles = toggles or AnalysisToggles()
        self.seed = seed
        self.threads = threads
        self.root = root
        self._metric: Optional[ResistanceMetric] = None
        self._hitting: Optional[Dict] = None
        self._exact: Optional[ExactCover] = None
        self._mc: Optional[CoverEstimate] = None

    def _require_seed(self, what: str) -> int:
        if self.seed is None:
            raise ConfigError(f'{what} needs a seed')
        return self.seed

    @property
    def n(self) -> int:
        return self.graph.vertex_count

    # ------------------------------------------------------------------
    # Resistance
    # ------------------------------------------------------------------

    @property
    def metric(self) -> ResistanceMetric:
        if self._metric is None:
            self._metric = build_metric(self.graph, self.budgets.dense_resistance_max_vertices,
                                        self.threads)
        return self._metric

    def resistance_summary(self) -> Dict:
        m = self.metric
        return {
            'mode': m.mode.value,
            'diam_R': resistance_diameter(m),
            'witness': list(diameter_witness(m)),
            'diameter_exact': diameter_is_exact(m),
            'min_positive_R': m.min_positive if m.is_dense and self.n > 1 else None,
        }

    # ------------------------------------------------------------------
    # Hitting and cover times
    # ------------------------------------------------------------------

    def hitting(self) -> Dict:
        """
        Exact t_hit within the solve budget; otherwise the larger Monte Carlo
        hitting time between the diameter witness endpoints, flagged as a lower bound
        """
        if self._hitting is not None:
            return self._hitting
        if self.n <= self.budgets.hitting_max_vertices:
            metric = self.metric if self.metric.is_dense else None
            profile: HittingProfile = hitting_times(self.graph, metric, self.budgets.hitting_max_vertices,
                                                    self.threads)
            self._hitting = {
                't_hit': profile.t_hit, 't_hit_se': 0.0, 'witness': list(profile.witness),
                'source': 'exact', 'lower_bound': False,
                'commute_residual': profile.commute_residual,
            }
        else:
            seed = self._require_seed('Monte Carlo hitting estimation')
            a, b = diameter_witness(self.metric)
            logger.warning(f'Graph has {self.n} vertices; t_hit falls back to walks between {a} and {b}')
            there = estimate_hitting(self.graph, a, b, self.budgets.replicas, substream_seed(seed, HITTING_STREAM),
                                     self.budgets.step_cap, self.threads)
            back = estimate_hitting(self.graph, b, a, self.budgets.replicas, substream_seed(seed, HITTING_STREAM),
                                    self.budgets.step_cap, self.threads)
            best, pair = (there, (a, b)) if there.mean >= back.mean else (back, (b, a))
            self._hitting = {
                't_hit': best.mean, 't_hit_se': best.standard_error, 'witness': list(pair),
                'source': 'monte_carlo', 'lower_bound': True, 'commute_residual': None,
            }
        return self._hitting

    def exact_cover(self) -> Optional[ExactCover]:
        if not self.toggles.cover_exact or self.n > self.budgets.exact_cover_max_vertices:
            return None
        if self._exact is None:
            self._exact = exact_cover_time(self.graph, self.budgets.exact_cover_max_vertices)
        return self._exact

    def monte_carlo_cover(self) -> Optional[CoverEstimate]:
        if not self.toggles.cover_mc:
            return None
        if self._mc is None:
            seed = self._require_seed('Monte Carlo cover estimation')
            metric = self.metric if self.n > 1 else None
            starts = candidate_starts(self.graph, metric, self.root)
            self._mc = estimate_cover_time(self.graph, StartPolicy.worst_of_set(starts),
                                           self.budgets.replicas, substream_seed(seed, COVER_STREAM),
                                           self.budgets.step_cap, self.threads)
        return self._mc

    def cover_time(self) -> Tuple[float, float, str]:
        """(t_cov, standard error, source): exact when in budget, else Monte Carlo"""
        exact = self.exact_cover()
        if exact is not None:
            return exact.t_cov, 0.0, 'exact'
        mc = self.monte_carlo_cover()
        if mc is None:
            raise ConfigError('Cover time needs cover_exact within budget or cover_mc enabled',
                              {'vertex_count': self.n})
        return mc.mean, mc.standard_error, 'monte_carlo'

    def bounds(self) -> Dict:
        t_hit = self.hitting()['t_hit']
        t_cov, se, _ = self.cover_time()
        out = {}
        if self.n >= 2:
            out['sandwich'] = sandwich_check(t_cov, t_hit, self.n, 4.0 * se).to_dict()
            out['matthews_upper'] = matthews_upper(t_hit, self.n)
            out['commute_bounds'] = commute_bounds(self.graph, resistance_diameter(self.metric), t_hit).to_dict()
        return out

    # ------------------------------------------------------------------
    # Nets and functionals
    # ------------------------------------------------------------------

    def net_mode(self) -> NetMode:
        return NetMode.EXACT if self.n <= self.budgets.exact_net_max_vertices else NetMode.GREEDY

    def nets(self, points: int = 20) -> Dict:
        """Packing and covering counts on an evenly spaced radius grid"""
        mode = self.net_mode()
        radii = radius_grid(self.metric, points) if self.n > 1 else np.zeros(1)
        out: Dict = {'mode': mode.value, 'radius': radii.tolist()}
        if self.toggles.packing:
            out['packing_count'] = [packing_number(self.metric, r, mode, self.budgets.exact_net_max_vertices,
                                                   self.budgets.net_time_limit).count for r in radii]
        if self.toggles.covering:
            out['covering_count'] = [covering_number(self.metric, r, mode, self.budgets.exact_net_max_vertices,
                                                     self.budgets.net_time_limit).count for r in radii]
        return out

    def chaining(self) -> Dict:
        scales = dyadic_scales(self.metric)
        mode = self.net_mode()
        value = chaining_functional(self.metric, scales, mode, self.budgets.exact_net_max_vertices,
                                    self.budgets.net_time_limit)
        return {'chaining': value, 'scales': list(scales.radii), 'k0': scales.k0, 'mode': mode.value}

    def sudakov(self) -> Optional[float]:
        """Largest Sudakov value over greedy packings at the dyadic scales"""
        return sudakov_over_scales(self.metric)

    # ------------------------------------------------------------------
    # Free field
    # ------------------------------------------------------------------

    def free_field(self, t_cov: Optional[float] = None) -> Dict:
        seed = self._require_seed('Free field sampling')
        model = build_gff(self.metric)
        estimate = estimate_expected_max(model, self.budgets.gff_replicas, substream_seed(seed, GFF_STREAM), self.threads)
        out = {
            'root': model.root,
            'emax': estimate.mean,
            'emax_se': estimate.standard_error,
            'replicas': estimate.replicas,
            'rank': model.rank,
            'increment_residual': increment_residual(model, self.metric),
        }
        if t_cov is not None:
            try:
                out['field_ratio'] = field_ratio(self.graph, t_cov, estimate.mean)
            except DegenerateField:
                out['field_ratio'] = None
        return out

    # ------------------------------------------------------------------
    # Full report
    # ------------------------------------------------------------------

    def analyze(self, radius_points: int = 20) -> Dict:
        """
        Every enabled measurement for the graph

        Returns:
            Report values keyed by section
        """
        g = self.graph
        report: Dict = {
            'graph': {'vertex_count': self.n, 'edge_count': g.edge_count, 'volume': volume(g),
                      'is_tree': g.is_tree},
        }
        logger.info(f'Analyzing graph with {self.n} vertices and {g.edge_count} edges')
        if self.toggles.resistance:
            report['resistance'] = self.resistance_summary()
        if self.n > 1:
            report['hitting'] = self.hitting()

        cover: Dict = {}
        exact = self.exact_cover()
        if exact is not None:
            cover['exact'] = exact.to_dict()
        mc = self.monte_carlo_cover()
        if mc is not None:
            cover['monte_carlo'] = mc.to_dict()
        t_cov = None
        if exact is not None or mc is not None:
            t_cov, t_cov_se, source = self.cover_time()
            cover.update(t_cov=t_cov, t_cov_se=t_cov_se, source=source)
            if self.n > 1:
                cover.update(self.bounds())
                t_hit = report['hitting']['t_hit']
                cover['ratio1'] = t_cov / (t_hit * math.log(self.n))
                cover['ratio2'] = t_cov / t_hit
        report['cover'] = cover

        if self.n > 1 and self.metric.is_dense:
            if self.toggles.packing or self.toggles.covering:
                report['nets'] = self.nets(radius_points)
            if self.toggles.chaining:
                report['functionals'] = self.chaining()
                report['functionals']['sudakov'] = self.sudakov()
            if self.toggles.gff:
                report['gff'] = self.free_field(t_cov)
        elif self.n > 1:
            logger.warning('Resistance table not materialized; nets, functionals and free field skipped')
        return report

    def gnuplot_series(self, nets: Dict) -> List[Tuple[str, List[float], List[float]]]:
        """(stem, x, y) pairs for two-column plot files"""
        series = []
        for key in ('packing_count', 'covering_count'):
            if key in nets:
                series.append((key.replace('_count', ''), nets['radius'], nets[key]))
        return series
