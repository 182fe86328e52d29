"""
Scenario Configuration
======================
Run settings for one scenario: scenario defaults, overridden by a JSON file,
overridden by command-line flags.
"""

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from src.scenarios.catalog import Scenario, get_scenario
from src.utils.errors import ConfigError

EXTENSIONS = ('zero', 'smooth')
INNER_PRODUCTS = ('euclidean', 'mass')
EIG_METHODS = ('jacobi', 'lapack')


@dataclass
class ScenarioConfig:
    """
    Attributes left as None take the scenario's default when resolved.
    parameter_ranges may narrow the scenario's ranges; its length must match
    the scenario's parameter dimension.
    """
    scenario: str = 'heat'
    nx: Optional[int] = None
    ny: Optional[int] = None
    n_train: Optional[int] = None
    n_test: Optional[int] = None
    seed: int = 42
    extension: Optional[str] = None
    transport: Optional[bool] = None
    supremizers: Optional[bool] = None
    modes: Optional[List[int]] = None
    inner: str = 'euclidean'
    eig_method: str = 'jacobi'
    penalties: Dict[str, float] = field(default_factory=dict)
    parameter_ranges: Optional[List[List[float]]] = None
    threads: Optional[int] = None
    out: Optional[str] = None

    @property
    def definition(self) -> Scenario:
        return get_scenario(self.scenario)

    @property
    def ranges(self) -> Tuple[Tuple[float, float], ...]:
        if self.parameter_ranges is None:
            return self.definition.ranges
        return tuple((float(lo), float(hi)) for lo, hi in self.parameter_ranges)

    @property
    def test_seed(self) -> int:
        return self.seed + 1

    @property
    def out_dir(self) -> Path:
        return Path(self.out) if self.out else Path('output') / self.scenario

    @property
    def snapshot_dir(self) -> Path:
        return self.out_dir / 'snapshots'

    @property
    def basis_dir(self) -> Path:
        return self.out_dir / 'basis'

    @property
    def reports_dir(self) -> Path:
        return self.out_dir / 'reports'

    @property
    def fields_dir(self) -> Path:
        return self.out_dir / 'fields'

    def resolved(self) -> 'ScenarioConfig':
        """Copy with every None filled from the scenario definition"""
        scenario = self.definition
        updates = {}
        if self.nx is None:
            updates['nx'] = scenario.resolution[0]
        if self.ny is None:
            updates['ny'] = scenario.resolution[1]
        for key in ('n_train', 'n_test', 'extension', 'transport', 'supremizers'):
            if getattr(self, key) is None:
                updates[key] = scenario.defaults[key]
        if self.modes is None:
            updates['modes'] = list(scenario.defaults['modes'])
        return replace(self, **updates)

    def validate(self) -> 'ScenarioConfig':
        scenario = self.definition
        if self.parameter_ranges is not None:
            if len(self.parameter_ranges) != scenario.dimension:
                raise ConfigError(
                    f"scenario {self.scenario} has {scenario.dimension} parameter(s), "
                    f"config gives {len(self.parameter_ranges)} ranges")
            for lo, hi in self.ranges:
                if not hi > lo:
                    raise ConfigError(f"degenerate parameter range [{lo}, {hi}]")
        for key in ('nx', 'ny', 'n_train'):
            value = getattr(self, key)
            if value is not None and int(value) < 1:
                raise ConfigError(f"{key} must be >= 1, got {value}")
        if self.n_test is not None and int(self.n_test) < 0:
            raise ConfigError(f"n_test must be >= 0, got {self.n_test}")
        if self.extension is not None and self.extension not in EXTENSIONS:
            raise ConfigError(f"extension must be one of {EXTENSIONS}, got {self.extension!r}")
        if self.inner not in INNER_PRODUCTS:
            raise ConfigError(f"inner product must be one of {INNER_PRODUCTS}, got {self.inner!r}")
        if self.eig_method not in EIG_METHODS:
            raise ConfigError(f"eig_method must be one of {EIG_METHODS}, got {self.eig_method!r}")
        if self.modes is not None and (not self.modes or any(int(m) < 1 for m in self.modes)):
            raise ConfigError(f"mode counts must be positive integers, got {self.modes}")
        if self.supremizers and not scenario.is_stokes:
            raise ConfigError(f"supremizers only apply to Stokes scenarios, not {self.scenario}")
        if self.threads is not None and int(self.threads) < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        scenario.make_options(self.penalties)
        return self

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def load_config(path=None, **overrides) -> ScenarioConfig:
    """
    Build a resolved, validated config

    Args:
        path: optional JSON file with ScenarioConfig keys
        overrides: flag values; None means "not given"
    """
    values: Dict[str, object] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        try:
            values = json.loads(path.read_text(encoding='utf-8'))
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path} is not valid JSON: {e}")
        if not isinstance(values, dict):
            raise ConfigError(f"{path} must hold a JSON object")

    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    config = ScenarioConfig(**values)
    get_scenario(config.scenario)
    return config.resolved().validate()
