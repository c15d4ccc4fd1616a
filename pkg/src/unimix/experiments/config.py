"""Experiment configuration: built-in defaults < JSON config file < CLI flags."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Optional

from ..core.errors import ConfigError
from ..core.prob import EXACT, LOGFLOAT, parse_fraction

EXPERIMENTS = ("divergence", "bernoulli-mixture", "bound-check", "diagonalize", "toy-m")
FORMATS = ("csv", "json")
COMMON_KEYS = ("experiment", "horizon", "seed", "backend", "format", "out")

# per-experiment keys and defaults; fraction-valued entries are strings
DEFAULTS: dict = {
    "divergence": {
        "horizon": 1_000_000, "backend": LOGFLOAT,
        "weights": ["1/2", "1/2"], "checkpoints_per_decade": 10,
        "law_window": [1000, 100000], "law_tolerance": "1/100",
    },
    "bernoulli-mixture": {
        "horizon": 10_000, "backend": LOGFLOAT, "mode": "gappy",
        "thetas": ["1/4", "1/2"], "weights": None, "theta0": "1/4", "theta1": "1/2",
        "dyadic_m": None, "seeds": 1, "threshold": "1/20", "min_exceed": 100,
        "final_tolerance": "1/50", "pattern": "01", "fit_start": None,
    },
    "bound-check": {
        "horizon": 12, "backend": EXACT,
        "thetas": ["3/10", "1/2", "7/10"], "weights": None, "mu": "3/10",
    },
    "diagonalize": {
        "horizon": 100, "backend": EXACT, "mode": "discrete",
        "chunks": 20, "theta": "7/10", "epsilon": "0",
    },
    "toy-m": {
        "horizon": 32, "backend": EXACT,
        "max_program_bits": 16, "n_max": 64, "audit_max_len": 8,
    },
}

MODES = {
    "bernoulli-mixture": ("gappy", "dense", "periodic", "extended"),
    "diagonalize": ("discrete", "continuous"),
}

# applied on top of DEFAULTS once the mode is known
MODE_DEFAULTS = {
    ("bernoulli-mixture", "extended"): {"thetas": ["1/8", "1/4", "1/2", "7/8"], "horizon": 2000},
    ("bernoulli-mixture", "periodic"): {"thetas": ["1/4", "3/4"], "horizon": 100,
                                        "backend": EXACT},
    ("bernoulli-mixture", "dense"): {"thetas": None, "dyadic_m": 6, "theta0": "19/64",
                                     "seeds": 100},
    ("diagonalize", "continuous"): {"backend": LOGFLOAT},
}

HORIZON_CAPS = {
    "divergence": 10_000_000,
    "bernoulli-mixture": 10_000_000,
    "bound-check": 16,
    "diagonalize": 1000,
    "toy-m": 64,
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    horizon: int
    seed: int = 0
    backend: str = LOGFLOAT
    format: str = "json"
    out: Optional[str] = None
    params: Mapping[str, Any] = field(default_factory=dict)

    def frac(self, key: str) -> Fraction:
        return parse_fraction(self.params[key])

    def fracs(self, key: str) -> Optional[list]:
        v = self.params[key]
        return None if v is None else [parse_fraction(x) for x in v]

    def canonical(self) -> dict:
        """Everything that determines the report, in canonical form (``out``
        and ``format`` excluded)."""
        doc = {"experiment": self.experiment, "horizon": self.horizon, "seed": self.seed,
               "backend": self.backend}
        doc.update(self.params)
        return doc

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _normalize_param(key, value):
    # validate fraction strings up front so bad input fails before any work
    if isinstance(value, list):
        return [_normalize_param(key, v) for v in value]
    if isinstance(value, str) and key not in ("mode", "pattern"):
        try:
            return str(parse_fraction(value))
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    if isinstance(value, float):
        raise ConfigError(f"{key}: give rationals as strings such as \"3/10\", not floats")
    return value


def load_config_file(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    return doc


def build_config(experiment: str, file_values: Optional[Mapping] = None,
                 overrides: Optional[Mapping] = None) -> ExperimentConfig:
    """Merge defaults, file values and overrides (``None`` overrides are ignored)."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    defaults = DEFAULTS[experiment]
    allowed = set(COMMON_KEYS) | set(defaults)
    sources = (dict(file_values or {}), {k: v for k, v in (overrides or {}).items() if v is not None})
    for source in sources:
        unknown = set(source) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys for {experiment}: {sorted(unknown)}")
    mode = defaults.get("mode")
    for source in sources:
        mode = source.get("mode", mode)
    merged: dict = {"seed": 0, "format": "json", "out": None}
    merged.update(defaults)
    merged.update(MODE_DEFAULTS.get((experiment, mode), {}))
    for source in sources:
        merged.update(source)
    if merged.get("experiment", experiment) != experiment:
        raise ConfigError(f"config is for {merged['experiment']!r}, not {experiment!r}")

    horizon = merged["horizon"]
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise ConfigError(f"horizon must be an integer >= 1, got {horizon!r}")
    if horizon > HORIZON_CAPS[experiment]:
        raise ConfigError(f"horizon {horizon} exceeds the cap {HORIZON_CAPS[experiment]} for {experiment}")
    seed = merged["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")
    if merged["backend"] not in (EXACT, LOGFLOAT):
        raise ConfigError(f"backend must be exact or logfloat, got {merged['backend']!r}")
    if merged["format"] not in FORMATS:
        raise ConfigError(f"format must be csv or json, got {merged['format']!r}")
    if experiment in MODES and merged["mode"] not in MODES[experiment]:
        raise ConfigError(f"mode must be one of {MODES[experiment]}, got {merged['mode']!r}")

    params = {k: _normalize_param(k, merged[k]) for k in sorted(defaults)
              if k not in COMMON_KEYS}
    return ExperimentConfig(experiment=experiment, horizon=horizon, seed=seed,
                            backend=merged["backend"], format=merged["format"],
                            out=merged["out"], params=params)
