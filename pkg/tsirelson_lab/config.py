"""
Configuration for tsirelson_lab.

Defaults live in module constants. A `.env` file, an optional YAML file and
`TSIRELSON_*` environment variables override them, in that order of
increasing precedence. Settings and experiment files are checked against the
limits below before use; a bad value raises InvalidConfig.
"""
import dataclasses
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Mapping, Optional

import yaml
from dotenv import load_dotenv

from .exceptions import InvalidConfig

logger = logging.getLogger(__name__)

# ---------- Configuration ----------
SUPPORT_BOUND = 256
ENUMERATION_BOUND = 20
ENUMERATION_MAX_ORDER = 4
ORACLE_SUPPORT_BOUND = 10
BRUTE_MEMBER_MAX_SIZE = 12
BRUTE_MEMBER_MAX_ORDER = 3
DECIMAL_DIGITS = 12
BASIS_LENGTH = 1024
DELTA_MAX_FAMILY = 8
DELTA_MAX_BLOCK_WIDTH = 2
DISTORTION_INTERVALS = 8
DISTORTION_AVERAGES = 8
MAX_EXPERIMENT_ORDER = 3
JOBS = 1
SEED = 0

ENV_PREFIX = "TSIRELSON_"

# ---------- Limits ----------
# field -> (minimum, maximum); None leaves a side open
SETTINGS_LIMITS = {
    "support_bound": (1, None),
    "enumeration_bound": (1, None),
    "enumeration_max_order": (0, None),
    "oracle_support_bound": (1, None),
    "brute_member_max_size": (1, None),
    "brute_member_max_order": (0, None),
    "decimal_digits": (1, 50),
    "basis_length": (1, None),
    "delta_max_family": (1, None),
    "delta_max_block_width": (1, None),
    "distortion_intervals": (1, None),
    "distortion_averages": (1, None),
    "max_experiment_order": (1, None),
    "seed": (0, None),
}

EXPERIMENTS = ("stabilize", "average", "distort_theta", "distort_mixed", "delta")
NORMS = ("tsirelson", "norm_n")
COEFFICIENT_RULE_NAMES = ("one", "geometric")


def _check_limits(owner: str, values: Mapping[str, Any], limits: Mapping[str, tuple]) -> None:
    for name, (low, high) in limits.items():
        value = values[name]
        if isinstance(value, bool) or not isinstance(value, int):
            raise InvalidConfig(f"{owner}.{name} must be an integer, got {value!r}")
        if low is not None and value < low:
            raise InvalidConfig(f"{owner}.{name} must be >= {low}, got {value}")
        if high is not None and value > high:
            raise InvalidConfig(f"{owner}.{name} must be <= {high}, got {value}")


def _coerce(owner: str, target: dataclasses.Field, raw: Any) -> Any:
    """Turn a YAML or environment value into the field's type."""
    kind = target.type
    if kind is bool and isinstance(raw, str):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if kind in (int, str) and not isinstance(raw, kind):
        try:
            return kind(raw)
        except (TypeError, ValueError) as e:
            raise InvalidConfig(f"{owner}.{target.name}: cannot read {raw!r} as {kind.__name__}") from e
    return raw


def _build(cls, owner: str, data: Mapping[str, Any]):
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise InvalidConfig(f"{owner}: unknown keys {unknown}")
    return cls(**{name: _coerce(owner, known[name], value) for name, value in data.items()})


@dataclass(frozen=True)
class Settings:
    support_bound: int = SUPPORT_BOUND
    enumeration_bound: int = ENUMERATION_BOUND
    enumeration_max_order: int = ENUMERATION_MAX_ORDER
    oracle_support_bound: int = ORACLE_SUPPORT_BOUND
    brute_member_max_size: int = BRUTE_MEMBER_MAX_SIZE
    brute_member_max_order: int = BRUTE_MEMBER_MAX_ORDER
    decimal_digits: int = DECIMAL_DIGITS
    basis_length: int = BASIS_LENGTH
    delta_max_family: int = DELTA_MAX_FAMILY
    delta_max_block_width: int = DELTA_MAX_BLOCK_WIDTH
    distortion_intervals: int = DISTORTION_INTERVALS
    distortion_averages: int = DISTORTION_AVERAGES
    max_experiment_order: int = MAX_EXPERIMENT_ORDER
    jobs: int = JOBS
    seed: int = SEED

    def __post_init__(self):
        _check_limits("settings", dataclasses.asdict(self), SETTINGS_LIMITS)
        if isinstance(self.jobs, bool) or not isinstance(self.jobs, int) or self.jobs == 0:
            raise InvalidConfig(f"settings.jobs must be a nonzero integer (joblib n_jobs), got {self.jobs!r}")


@dataclass(frozen=True)
class BasisSpec:
    kind: str = "unit"
    length: int = BASIS_LENGTH

    def __post_init__(self):
        if self.kind != "unit":
            raise InvalidConfig(f"unsupported basis kind '{self.kind}' (only 'unit')")
        _check_limits("basis", {"length": self.length}, {"length": (1, None)})


@dataclass(frozen=True)
class Budgets:
    support: int = SUPPORT_BOUND
    family: int = DELTA_MAX_FAMILY
    block_width: int = DELTA_MAX_BLOCK_WIDTH
    intervals: int = DISTORTION_INTERVALS
    averages: int = DISTORTION_AVERAGES

    def __post_init__(self):
        _check_limits("budgets", dataclasses.asdict(self), {name: (1, None) for name in dataclasses.asdict(self)})

    @classmethod
    def from_settings(cls, settings: Settings) -> "Budgets":
        return cls(
            support=settings.support_bound,
            family=settings.delta_max_family,
            block_width=settings.delta_max_block_width,
            intervals=settings.distortion_intervals,
            averages=settings.distortion_averages,
        )


def _rational(name: str, value: Any) -> str:
    try:
        parsed = Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidConfig(f"{name}: not an exact rational: {value!r}") from e
    if not 0 < parsed <= 1:
        raise InvalidConfig(f"{name}: {value} is outside (0, 1]")
    return str(parsed)


@dataclass
class ExperimentConfig:
    """Schema of an experiment configuration file."""

    experiment: str = "stabilize"
    norm: str = "tsirelson"
    n: int = 1
    epsilon: str = "1/8"
    k: int = 1
    theta: str = "1/2"
    c_rule: str = "geometric"
    basis: BasisSpec = field(default_factory=BasisSpec)
    # None takes the budgets from Settings
    budgets: Optional[Budgets] = None
    seed: int = SEED
    relax: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidConfig(f"experiment must be one of {list(EXPERIMENTS)}, got '{self.experiment}'")
        if self.norm not in NORMS:
            raise InvalidConfig(f"norm must be one of {list(NORMS)}, got '{self.norm}'")
        if self.c_rule not in COEFFICIENT_RULE_NAMES:
            raise InvalidConfig(f"c_rule must be one of {list(COEFFICIENT_RULE_NAMES)}, got '{self.c_rule}'")
        _check_limits("experiment", {"n": self.n, "k": self.k, "seed": self.seed},
                      {"n": (1, None), "k": (1, None), "seed": (0, None)})
        self.epsilon = _rational("epsilon", self.epsilon)
        self.theta = _rational("theta", self.theta)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        data = dict(data)
        for key, nested in (("basis", BasisSpec), ("budgets", Budgets)):
            if key in data:
                if not isinstance(data[key], Mapping):
                    raise InvalidConfig(f"{key} must be a mapping")
                data[key] = _build(nested, key, data[key])
        return _build(cls, "experiment", data)

    @property
    def epsilon_value(self) -> Fraction:
        return Fraction(self.epsilon)

    @property
    def theta_value(self) -> Fraction:
        return Fraction(self.theta)


def _read_yaml(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle) or {}
    except OSError as e:
        raise InvalidConfig(f"cannot read configuration file {path}: {e}") from e
    except yaml.YAMLError as e:
        raise InvalidConfig(f"malformed YAML in {path}: {e}") from e
    if not isinstance(data, dict):
        raise InvalidConfig(f"{path} must contain a mapping at top level")
    return data


def _environment_overrides() -> Dict[str, str]:
    overrides = {}
    for target in dataclasses.fields(Settings):
        raw = os.environ.get(ENV_PREFIX + target.name.upper())
        if raw is not None:
            overrides[target.name] = raw
    return overrides


def load_settings(config_path: Optional[str] = None, dotenv_path: Optional[str] = None) -> Settings:
    """
    Build validated Settings.

    Parameters:
    -----------
    config_path : Optional[str]
        YAML file whose `settings:` mapping overrides the defaults
    dotenv_path : Optional[str]
        .env file loaded before environment variables are read
    """
    load_dotenv(dotenv_path)
    values: Dict[str, Any] = {}
    if config_path:
        values.update(_read_yaml(config_path).get("settings") or {})
    values.update(_environment_overrides())
    settings = _build(Settings, "settings", values)
    logger.info(f"Loaded settings (support_bound={settings.support_bound}, jobs={settings.jobs})")
    return settings


def load_experiment_config(path: str) -> ExperimentConfig:
    data = _read_yaml(path)
    data.pop("settings", None)
    return ExperimentConfig.from_mapping(data)


DEFAULT_SETTINGS = Settings()
