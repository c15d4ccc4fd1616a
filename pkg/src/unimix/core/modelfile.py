"""Reading and writing model descriptions.

A model description is a JSON document; every rational is a string such as
``"1/2"`` or ``"3"`` so that values round-trip exactly.  See
``docs/model_format.md`` for the schema.
"""

from __future__ import annotations

import json
from pathlib import Path

from .environments import (
    IID,
    Bernoulli,
    Deterministic,
    Environment,
    NormalizedEnvironment,
    VariableRate,
)
from .errors import ConfigError
from .mixture import MixtureModel
from .prob import parse_fraction
from .strings import Alphabet, as_string

FORMAT = "unimix-model/1"

_KEYS = {
    "bernoulli": {"kind", "theta"},
    "iid": {"kind", "probs"},
    "variable-rate": {"kind", "coef", "exponent"},
    "deterministic": {"kind", "prefix", "period"},
    "mixture": {"kind", "components"},
    "normalized": {"kind", "base"},
    "toy-m": {"kind", "max_program_bits", "n_max"},
}


def _frac(node, key):
    try:
        return parse_fraction(node[key])
    except KeyError:
        raise ConfigError(f"missing field {key!r} in {node!r}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def environment_from_dict(node: dict, alphabet: Alphabet) -> Environment:
    if not isinstance(node, dict) or "kind" not in node:
        raise ConfigError(f"environment must be an object with a 'kind', got {node!r}")
    kind = node["kind"]
    if kind not in _KEYS:
        raise ConfigError(f"unknown environment kind {kind!r}")
    extra = set(node) - _KEYS[kind]
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)} for kind {kind!r}")
    try:
        if kind == "bernoulli":
            return Bernoulli(_frac(node, "theta"))
        if kind == "iid":
            probs = tuple(parse_fraction(p) for p in node["probs"])
            if len(probs) != alphabet.size:
                raise ConfigError("iid probs length differs from the alphabet size")
            return IID(probs)
        if kind == "variable-rate":
            exponent = node["exponent"]
            if isinstance(exponent, bool) or not isinstance(exponent, int):
                raise ConfigError("variable-rate exponent must be an integer")
            return VariableRate(_frac(node, "coef"), exponent)
        if kind == "deterministic":
            prefix = as_string(node.get("prefix", ""), alphabet).symbols
            period = as_string(node.get("period", "0"), alphabet).symbols
            return Deterministic(prefix, period, alphabet)
        if kind == "mixture":
            comps = []
            for comp in node["components"]:
                if set(comp) - {"weight", "environment"}:
                    raise ConfigError(f"unknown keys in mixture component {sorted(comp)}")
                comps.append((_frac(comp, "weight"),
                              environment_from_dict(comp["environment"], alphabet)))
            return MixtureModel(comps)
        if kind == "normalized":
            return NormalizedEnvironment(environment_from_dict(node["base"], alphabet))
        from ..toy_m import ToyMEnvironment

        return ToyMEnvironment(int(node["max_program_bits"]), int(node.get("n_max", 64)))
    except KeyError as exc:
        raise ConfigError(f"missing field {exc.args[0]!r} for kind {kind!r}") from None
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_model(source) -> Environment:
    """Parse a model description from a dict, a JSON string, or a path."""
    if isinstance(source, dict):
        doc = source
    elif isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        doc = json.loads(Path(source).read_text())
    else:
        doc = json.loads(source)
    if set(doc) - {"format", "alphabet", "environment"}:
        raise ConfigError(f"unknown top-level keys {sorted(set(doc) - {'format', 'alphabet', 'environment'})}")
    if doc.get("format", FORMAT) != FORMAT:
        raise ConfigError(f"unsupported model format {doc.get('format')!r}")
    size = doc.get("alphabet", 2)
    if isinstance(size, bool) or not isinstance(size, int):
        raise ConfigError("alphabet must be an integer size")
    return environment_from_dict(doc["environment"], Alphabet(size))


def dump_model(env: Environment) -> dict:
    return {"format": FORMAT, "alphabet": env.alphabet.size, "environment": env.describe()}


def dumps_model(env: Environment) -> str:
    return json.dumps(dump_model(env), indent=2, sort_keys=True)
