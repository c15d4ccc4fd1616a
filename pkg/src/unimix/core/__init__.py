"""Strings, probability backends, environments and mixtures."""

from .environments import (
    IID,
    Bernoulli,
    CustomEnvironment,
    Deterministic,
    Environment,
    NormalizedEnvironment,
    SequentialMeasure,
    VariableRate,
    normalize,
    sample,
)
from .errors import (
    AlphabetError,
    ConfigError,
    DegenerateError,
    HorizonError,
    MembershipError,
    NotAMeasureError,
    UnimixError,
    ZeroHistoryError,
)
from .mixture import MixtureModel, PosteriorState, mixture_mass, posterior_weights, predictive
from .modelfile import dump_model, dumps_model, load_model
from .prob import EXACT, LOGFLOAT, LogProb, Prob, parse_fraction
from .strings import BINARY, Alphabet, FiniteString, all_strings, all_strings_upto, as_string


def mass(env: Environment, x, backend: str = EXACT):
    """``nu(x)``."""
    return env.mass(x, backend)


def conditional(env: Environment, a: int, x, backend: str = EXACT):
    """``nu(a | x)``."""
    return env.conditional(a, x, backend)
