"""
Run Configuration
Environment settings, estimator budgets, analysis toggles and JSON run configs

Place in: src/config.py
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, Optional, Tuple

from dotenv import load_dotenv

from src.ensembles.families import FamilySpec, is_stochastic
from src.models.errors import ConfigError, CtlabError, IoFailure

load_dotenv()

logger = logging.getLogger(__name__)

COMMANDS = ('gen', 'analyze', 'classify', 'catalog')
PROFILES = ('quick', 'full')


@dataclass(frozen=True)
class Settings:
    """Process-level defaults read from the environment"""
    threads: int
    log_level: str
    report_dir: str

    @classmethod
    def from_env(cls) -> 'Settings':
        raw = os.getenv('CTLAB_THREADS')
        try:
            threads = int(raw) if raw else (os.cpu_count() or 1)
        except ValueError as exc:
            raise ConfigError(f'CTLAB_THREADS must be an integer, got {raw!r}') from exc
        return cls(threads=max(1, threads),
                   log_level=os.getenv('CTLAB_LOG_LEVEL', 'INFO'),
                   report_dir=os.getenv('CTLAB_REPORT_DIR', 'reports'))


@dataclass(frozen=True)
class EstimatorBudgets:
    replicas: int = 10000
    gff_replicas: int = 10000
    step_cap: int = 10 ** 10
    exact_cover_max_vertices: int = 14
    exact_net_max_vertices: int = 60
    net_time_limit: float = 30.0
    dense_resistance_max_vertices: int = 4000
    hitting_max_vertices: int = 2000
    rejection_cap: int = 10 ** 6
    max_tree_vertices: int = 2 * 10 ** 6

    @classmethod
    def from_dict(cls, data: Optional[Dict]) -> 'EstimatorBudgets':
        data = data or {}
        names = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(names))
        if unknown:
            raise ConfigError(f'Unknown budget fields: {unknown}')
        values = {}
        for key, value in data.items():
            kind = float if names[key].type in (float, 'float') else int
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f'Budget {key} must be a number, got {value!r}')
            if kind is int and float(value) != int(value):
                raise ConfigError(f'Budget {key} must be an integer, got {value!r}')
            values[key] = kind(value)
        budgets = cls(**values)
        budgets.validate()
        return budgets

    def validate(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ConfigError(f'Budget {f.name} must be positive, got {value}')
        if self.replicas < 2 or self.gff_replicas < 2:
            raise ConfigError('Replica budgets must be at least 2')

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class AnalysisToggles:
    resistance: bool = True
    packing: bool = True
    covering: bool = True
    chaining: bool = True
    cover_mc: bool = True
    cover_exact: bool = True
    gff: bool = True

    @classmethod
    def from_dict(cls, data: Optional[Dict]) -> 'AnalysisToggles':
        data = {k.replace('-', '_'): v for k, v in (data or {}).items()}
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f'Unknown analysis toggles: {unknown}')
        for key, value in data.items():
            if not isinstance(value, bool):
                raise ConfigError(f'Toggle {key} must be true or false, got {value!r}')
        return cls(**data)

    @property
    def needs_seed(self) -> bool:
        return self.cover_mc or self.gff

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class RunConfig:
    """One parsed JSON run config"""
    command: str
    name: str
    family: Optional[FamilySpec] = None
    graph: Optional[Path] = None
    seed: Optional[int] = None
    n_values: Tuple[int, ...] = ()
    samples: int = 10
    budgets: EstimatorBudgets = field(default_factory=EstimatorBudgets)
    toggles: AnalysisToggles = field(default_factory=AnalysisToggles)
    out_dir: Optional[Path] = None
    lambda_grid: Tuple[float, ...] = (2.0, 4.0, 8.0, 16.0, 32.0)
    threshold: float = 0.9
    packing_constant: float = 0.25
    radius_points: int = 20
    resistance_csv: bool = False
    gnuplot: bool = False
    profile: str = 'full'
    fits: Tuple[Dict, ...] = ()

    @classmethod
    def from_dict(cls, data: Dict, base_dir: Optional[Path] = None) -> 'RunConfig':
        """
        Validate and build a run config

        Args:
            data: parsed JSON document
            base_dir: directory relative input paths resolve against

        Returns:
            RunConfig
        """
        if not isinstance(data, dict):
            raise ConfigError('Run config must be a JSON object')
        known = {'command', 'name', 'family', 'graph', 'seed', 'N', 'n_values', 'samples', 'budgets',
                 'toggles', 'out', 'lambda_grid', 'threshold', 'packing_constant', 'radius_points',
                 'resistance_csv', 'gnuplot', 'profile', 'fits'}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f'Unknown config fields: {unknown}')

        command = data.get('command')
        if command not in COMMANDS:
            raise ConfigError(f'command must be one of {COMMANDS}, got {command!r}')
        name = str(data.get('name', command))
        if not name or any(ch in name for ch in '/\\'):
            raise ConfigError(f'name must be a plain file stem, got {name!r}')

        seed = data.get('seed')
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
            raise ConfigError(f'seed must be a non-negative integer, got {seed!r}')

        family = None
        if 'family' in data:
            family_data = data['family']
            if isinstance(family_data, str):
                family_data = {'family': family_data}
            if isinstance(family_data, dict) and 'N' not in family_data and isinstance(data.get('N'), int):
                family_data = dict(family_data, N=data['N'])
            try:
                family = FamilySpec.from_dict(family_data)
            except CtlabError as exc:
                raise ConfigError(f'Invalid family spec: {exc.message}', exc.details) from exc

        graph = None
        if data.get('graph') is not None:
            graph = Path(data['graph'])
            if base_dir is not None and not graph.is_absolute():
                graph = base_dir / graph
            if not graph.is_file():
                raise ConfigError(f'Graph file not found: {graph}', {'graph': str(graph)})

        n_values = data.get('n_values', [])
        if not isinstance(n_values, list) or not all(isinstance(n, int) and not isinstance(n, bool)
                                                     and n >= 0 for n in n_values):
            raise ConfigError(f'n_values must be a list of non-negative integers, got {n_values!r}')

        samples = data.get('samples', 10)
        if isinstance(samples, bool) or not isinstance(samples, int) or samples < 1:
            raise ConfigError(f'samples must be a positive integer, got {samples!r}')

        lambda_grid = data.get('lambda_grid', [2, 4, 8, 16, 32])
        if not lambda_grid or not all(isinstance(v, (int, float)) and v >= 1 for v in lambda_grid):
            raise ConfigError(f'lambda_grid must be a non-empty list of values >= 1, got {lambda_grid!r}')
        threshold = data.get('threshold', 0.9)
        if not isinstance(threshold, (int, float)) or not 0 < threshold <= 1:
            raise ConfigError(f'threshold must lie in (0, 1], got {threshold!r}')
        packing_constant = data.get('packing_constant', 0.25)
        if not isinstance(packing_constant, (int, float)) or packing_constant <= 0:
            raise ConfigError(f'packing_constant must be positive, got {packing_constant!r}')
        radius_points = data.get('radius_points', 20)
        if not isinstance(radius_points, int) or radius_points < 2:
            raise ConfigError(f'radius_points must be an integer >= 2, got {radius_points!r}')
        profile = data.get('profile', 'full')
        if profile not in PROFILES:
            raise ConfigError(f'profile must be one of {PROFILES}, got {profile!r}')
        fits = data.get('fits', [])
        if not isinstance(fits, list) or not all(isinstance(f, dict) for f in fits):
            raise ConfigError('fits must be a list of objects')

        config = cls(
            command=command,
            name=name,
            family=family,
            graph=graph,
            seed=seed,
            n_values=tuple(sorted(set(n_values))),
            samples=samples,
            budgets=EstimatorBudgets.from_dict(data.get('budgets')),
            toggles=AnalysisToggles.from_dict(data.get('toggles')),
            out_dir=Path(data['out']) if data.get('out') else None,
            lambda_grid=tuple(sorted(float(v) for v in lambda_grid)),
            threshold=float(threshold),
            packing_constant=float(packing_constant),
            radius_points=radius_points,
            resistance_csv=bool(data.get('resistance_csv', False)),
            gnuplot=bool(data.get('gnuplot', False)),
            profile=profile,
            fits=tuple(fits),
        )
        config.validate()
        return config

    def validate(self) -> None:
        """Cross-field checks per command"""
        if self.command == 'gen':
            if self.family is None or self.family.N is None:
                raise ConfigError('gen needs a family with N')
            if is_stochastic(self.family) and self.seed is None and self.family.seed is None:
                raise ConfigError('gen of a random family needs a seed')
        elif self.command == 'analyze':
            if (self.family is None) == (self.graph is None):
                raise ConfigError('analyze needs exactly one of "graph" or "family"')
            if self.family is not None and self.family.N is None:
                raise ConfigError('analyze of a family needs N')
            stochastic = self.family is not None and is_stochastic(self.family)
            if self.seed is None and (self.toggles.needs_seed or stochastic):
                raise ConfigError('A seed is required when Monte Carlo estimation or a random family is enabled')
        elif self.command == 'classify':
            if self.family is None:
                raise ConfigError('classify needs a family')
            if len(self.n_values) < 1:
                raise ConfigError('classify needs n_values')
            if self.seed is None:
                raise ConfigError('classify needs a seed')
        elif self.command == 'catalog':
            if self.seed is None:
                raise ConfigError('catalog needs a seed')

    @property
    def effective_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        if self.family is not None and self.family.seed is not None:
            return self.family.seed
        return 0

    def to_dict(self) -> Dict:
        out = {
            'command': self.command,
            'name': self.name,
            'seed': self.seed,
            'budgets': self.budgets.to_dict(),
            'toggles': self.toggles.to_dict(),
        }
        if self.family is not None:
            out['family'] = self.family.to_dict()
        if self.graph is not None:
            out['graph'] = self.graph.name
        if self.command == 'classify':
            out.update(n_values=list(self.n_values), samples=self.samples,
                       lambda_grid=list(self.lambda_grid), threshold=self.threshold,
                       packing_constant=self.packing_constant, fits=list(self.fits))
        if self.command == 'catalog':
            out['profile'] = self.profile
        return out


def load_config(path) -> RunConfig:
    """Read and validate a JSON run config from disk"""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise IoFailure(f'Cannot read config {path}: {exc}', {'path': str(path)}) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f'Config {path} is not valid JSON: {exc}', {'path': str(path)}) from exc
    config = RunConfig.from_dict(data, base_dir=path.parent)
    logger.info(f'Loaded {config.command} config "{config.name}" from {path}')
    return config


def resolve_out_dir(config: RunConfig, override: Optional[str], settings: Settings) -> Path:
    """--out beats the config's "out", which beats CTLAB_REPORT_DIR"""
    if override:
        return Path(override)
    if config.out_dir is not None:
        return config.out_dir
    return Path(settings.report_dir)

