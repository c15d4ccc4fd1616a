"""Environments: (semi)measures on finite strings.

An environment maps a string ``x`` to ``nu(x)``, the probability that a
sequence starts with ``x``.  A semimeasure has ``nu(empty) <= 1`` and
``nu(x) >= sum_a nu(xa)``; a measure has equality in both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .. import _kernels
from .errors import AlphabetError, DegenerateError, NotAMeasureError, ZeroHistoryError
from .prob import EXACT, LOGFLOAT, LogProb, Prob, check_backend, log_fraction, logsumexp
from .strings import BINARY, Alphabet, FiniteString, StringLike, as_string


class Environment:
    """Base class.  Subclasses implement ``_exact_mass`` (and optionally the
    log-domain and conditional hooks for speed)."""

    kind = "custom"
    alphabet: Alphabet = BINARY
    is_measure: bool = False

    def mass(self, x: StringLike, backend: str = EXACT) -> Prob:
        syms = self._symbols(x)
        if check_backend(backend) == EXACT:
            return self._exact_mass(syms)
        return LogProb(self._log_mass(syms))

    def conditional(self, a: int, x: StringLike, backend: str = EXACT) -> Prob:
        """``nu(a | x) = nu(xa) / nu(x)``; raises ZeroHistoryError if ``nu(x) = 0``."""
        if a not in self.alphabet:
            raise AlphabetError(f"symbol {a!r} outside alphabet of size {self.alphabet.size}")
        return self.next_probs(x, backend)[a]

    def next_probs(self, x: StringLike, backend: str = EXACT) -> list:
        """One-step conditionals ``[nu(a | x) for a in alphabet]``."""
        syms = self._symbols(x)
        if check_backend(backend) == EXACT:
            return list(self._exact_next(syms))
        return [LogProb(v) for v in self._log_next(syms)]

    def log_prefix_masses(self, x: StringLike) -> np.ndarray:
        """``log nu(x_{1:k})`` for ``k = 0 .. len(x)``."""
        syms = self._symbols(x)
        return np.array([self._log_mass(syms[:k]) for k in range(len(syms) + 1)])

    # hooks

    def _exact_mass(self, syms: tuple) -> Fraction:
        raise NotImplementedError

    def _log_mass(self, syms: tuple) -> float:
        return log_fraction(self._exact_mass(syms))

    def _exact_next(self, syms: tuple):
        base = self._exact_mass(syms)
        if base == 0:
            raise ZeroHistoryError(f"conditioning on a null history {_fmt(syms)}")
        return [self._exact_mass(syms + (a,)) / base for a in self.alphabet.symbols()]

    def _log_next(self, syms: tuple):
        base = self._log_mass(syms)
        if base == -math.inf:
            raise ZeroHistoryError(f"conditioning on a null history {_fmt(syms)}")
        out = []
        for a in self.alphabet.symbols():
            lm = self._log_mass(syms + (a,))
            out.append(lm - base if lm != -math.inf else -math.inf)
        return out

    def _symbols(self, x: StringLike) -> tuple:
        return as_string(x, self.alphabet).symbols

    def describe(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} has no model description")


def _fmt(syms) -> str:
    return "".join(str(s) for s in syms) or "<empty>"


class SequentialMeasure(Environment):
    """A measure given by its one-step conditionals ``step(t, prefix)``.

    ``t`` is the 1-based time of the symbol being predicted and ``prefix`` the
    ``t - 1`` symbols before it.
    """

    is_measure = True

    def step(self, t: int, prefix: tuple) -> Sequence[Fraction]:
        raise NotImplementedError

    def _exact_mass(self, syms):
        m = Fraction(1)
        for t, s in enumerate(syms, start=1):
            m *= self.step(t, syms[: t - 1])[s]
            if m == 0:
                return m
        return m

    def _log_mass(self, syms):
        terms = []
        for t, s in enumerate(syms, start=1):
            p = self.step(t, syms[: t - 1])[s]
            if p == 0:
                return -math.inf
            terms.append(log_fraction(p))
        return math.fsum(terms)

    def _exact_next(self, syms):
        if self._exact_mass(syms) == 0:
            raise ZeroHistoryError(f"conditioning on a null history {_fmt(syms)}")
        return list(self.step(len(syms) + 1, syms))

    def _log_next(self, syms):
        if self._log_mass(syms) == -math.inf:
            raise ZeroHistoryError(f"conditioning on a null history {_fmt(syms)}")
        return [log_fraction(p) for p in self.step(len(syms) + 1, syms)]


@dataclass(frozen=True)
class IID(SequentialMeasure):
    """Independent draws from a fixed distribution over the alphabet."""

    probs: tuple
    kind = "iid"

    def __post_init__(self):
        probs = tuple(Fraction(p) for p in self.probs)
        if len(probs) < 2 or any(p < 0 for p in probs) or sum(probs) != 1:
            raise ValueError(f"iid probabilities must be >= 0 and sum to 1, got {probs}")
        object.__setattr__(self, "probs", probs)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(len(self.probs))

    def step(self, t, prefix):
        return self.probs

    def _exact_mass(self, syms):
        m = Fraction(1)
        for a, p in enumerate(self.probs):
            k = syms.count(a)
            if k:
                m *= p**k
        return m

    def _log_mass(self, syms):
        total = []
        for a, p in enumerate(self.probs):
            k = syms.count(a)
            if k:
                if p == 0:
                    return -math.inf
                total.append(k * log_fraction(p))
        return math.fsum(total)

    def _exact_next(self, syms):
        if self._exact_mass(syms) == 0:
            raise ZeroHistoryError(f"conditioning on a null history {_fmt(syms)}")
        return list(self.probs)

    def describe(self):
        return {"kind": "iid", "probs": [str(p) for p in self.probs]}


@dataclass(frozen=True)
class Bernoulli(SequentialMeasure):
    """Binary i.i.d. measure with ``P(1) = theta``:
    ``mu(x) = theta^n1 (1 - theta)^(n - n1)``."""

    theta: Fraction
    kind = "bernoulli"

    def __post_init__(self):
        theta = Fraction(self.theta)
        if not 0 <= theta <= 1:
            raise ValueError(f"theta must lie in [0, 1], got {theta}")
        object.__setattr__(self, "theta", theta)

    @property
    def alphabet(self) -> Alphabet:
        return BINARY

    def step(self, t, prefix):
        return (1 - self.theta, self.theta)

    def _exact_mass(self, syms):
        n1 = sum(syms)
        return self.theta**n1 * (1 - self.theta) ** (len(syms) - n1)

    def _log_mass(self, syms):
        n1 = sum(syms)
        return _xlogy(n1, self.theta) + _xlogy(len(syms) - n1, 1 - self.theta)

    def _exact_next(self, syms):
        if self._exact_mass(syms) == 0:
            raise ZeroHistoryError(f"conditioning on a null history {_fmt(syms)}")
        return [1 - self.theta, self.theta]

    def log_prefix_masses(self, x):
        bits = np.asarray(self._symbols(x), dtype=np.int64)
        n1 = np.concatenate(([0], np.cumsum(bits)))
        n0 = np.arange(bits.shape[0] + 1) - n1
        with np.errstate(divide="ignore", invalid="ignore"):
            l1 = log_fraction(self.theta)
            l0 = log_fraction(1 - self.theta)
            out = np.where(n1 > 0, n1 * l1, 0.0) + np.where(n0 > 0, n0 * l0, 0.0)
        return out

    def describe(self):
        return {"kind": "bernoulli", "theta": str(self.theta)}


def _xlogy(k: int, p: Fraction) -> float:
    if k == 0:
        return 0.0
    if p == 0:
        return -math.inf
    return k * log_fraction(p)


@dataclass(frozen=True)
class VariableRate(SequentialMeasure):
    """Binary measure with ``mu(1 | x_{<t}) = coef * t**exponent``.

    ``exponent <= 0`` and ``0 <= coef <= 1`` keep the rate in [0, 1] for all
    ``t >= 1``.
    """

    coef: Fraction
    exponent: int
    kind = "variable-rate"

    def __post_init__(self):
        coef = Fraction(self.coef)
        if not isinstance(self.exponent, int) or self.exponent > 0:
            raise ValueError(f"exponent must be a nonpositive integer, got {self.exponent!r}")
        if not 0 <= coef <= 1:
            raise ValueError(f"coefficient must lie in [0, 1], got {coef}")
        object.__setattr__(self, "coef", coef)

    @property
    def alphabet(self) -> Alphabet:
        return BINARY

    def rate(self, t: int) -> Fraction:
        return self.coef * Fraction(t) ** self.exponent

    def step(self, t, prefix):
        r = self.rate(t)
        return (1 - r, r)

    def log_rate_terms(self, syms) -> np.ndarray:
        """``log mu(x_t | x_{<t})`` for each position of ``syms``."""
        bits = np.asarray(syms, dtype=np.int64)
        t = np.arange(1, bits.shape[0] + 1, dtype=np.float64)
        r = float(self.coef) * t ** float(self.exponent)
        with np.errstate(divide="ignore"):
            return np.where(bits == 1, np.log(r), np.log1p(-r))

    def _log_mass(self, syms):
        if not syms:
            return 0.0
        return math.fsum(self.log_rate_terms(syms).tolist())

    def log_prefix_masses(self, x):
        syms = self._symbols(x)
        terms = self.log_rate_terms(syms)
        return np.concatenate(([0.0], _kernels.compensated_cumsum(terms)))

    def describe(self):
        return {"kind": "variable-rate", "coef": str(self.coef), "exponent": self.exponent}


@dataclass(frozen=True)
class Deterministic(SequentialMeasure):
    """Point mass on the ultimately periodic sequence ``prefix period period ...``."""

    prefix: tuple = ()
    period: tuple = (0,)
    alphabet: Alphabet = BINARY
    kind = "deterministic"

    def __post_init__(self):
        prefix = tuple(int(s) for s in self.prefix)
        period = tuple(int(s) for s in self.period)
        if not period:
            raise ValueError("period must be nonempty")
        for s in prefix + period:
            if s not in self.alphabet:
                raise AlphabetError(f"symbol {s} outside alphabet of size {self.alphabet.size}")
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    @classmethod
    def from_prefix(cls, x: StringLike, fill: int = 0, alphabet: Alphabet = BINARY):
        return cls(as_string(x, alphabet).symbols, (fill,), alphabet)

    @classmethod
    def periodic(cls, pattern: StringLike, alphabet: Alphabet = BINARY):
        return cls((), as_string(pattern, alphabet).symbols, alphabet)

    def target(self, k: int) -> int:
        """Symbol at 0-based position ``k``."""
        if k < len(self.prefix):
            return self.prefix[k]
        return self.period[(k - len(self.prefix)) % len(self.period)]

    def step(self, t, prefix):
        probs = [Fraction(0)] * self.alphabet.size
        probs[self.target(t - 1)] = Fraction(1)
        return probs

    def _matches(self, syms) -> bool:
        return all(s == self.target(k) for k, s in enumerate(syms))

    def _exact_mass(self, syms):
        return Fraction(1) if self._matches(syms) else Fraction(0)

    def _log_mass(self, syms):
        return 0.0 if self._matches(syms) else -math.inf

    def describe(self):
        return {
            "kind": "deterministic",
            "prefix": "".join(map(str, self.prefix)),
            "period": "".join(map(str, self.period)),
        }


class CustomEnvironment(Environment):
    """Wraps a user-supplied exact mass function ``symbols tuple -> Fraction``."""

    kind = "custom"

    def __init__(self, mass_fn: Callable[[tuple], Fraction], alphabet: Alphabet = BINARY,
                 is_measure: bool = False, name: str = "custom"):
        self._mass_fn = mass_fn
        self.alphabet = alphabet
        self.is_measure = is_measure
        self.name = name

    def _exact_mass(self, syms):
        return Fraction(self._mass_fn(syms))

    def __repr__(self):
        return f"CustomEnvironment({self.name!r}, is_measure={self.is_measure})"


class NormalizedEnvironment(Environment):
    """Solomonoff normalization of a semimeasure ``nu``:

        nu_norm(x_{1:n}) = prod_t nu(x_{1:t}) / sum_a nu(x_{<t} a)

    The result is a measure with ``nu_norm >= nu`` pointwise.
    """

    kind = "normalized"
    is_measure = True

    def __init__(self, base: Environment):
        self.base = base
        self.alphabet = base.alphabet

    def __eq__(self, other):
        return isinstance(other, NormalizedEnvironment) and other.base == self.base

    def __hash__(self):
        return hash(("normalized", id(self.base)))

    def _factors(self, syms):
        base = self.base
        for t in range(1, len(syms) + 1):
            prev = syms[: t - 1]
            ext = [base._exact_mass(prev + (a,)) for a in self.alphabet.symbols()]
            denom = sum(ext, Fraction(0))
            num = ext[syms[t - 1]]
            if denom == 0:
                raise DegenerateError(
                    f"all one-symbol extensions of {_fmt(prev)} have mass zero")
            yield num / denom
            if num == 0:
                return

    def _exact_mass(self, syms):
        m = Fraction(1)
        for f in self._factors(syms):
            m *= f
            if m == 0:
                return m
        return m

    def _log_mass(self, syms):
        base = self.base
        terms = []
        for t in range(1, len(syms) + 1):
            prev = syms[: t - 1]
            ext = [base._log_mass(prev + (a,)) for a in self.alphabet.symbols()]
            denom = logsumexp(ext)
            if denom == -math.inf:
                raise DegenerateError(
                    f"all one-symbol extensions of {_fmt(prev)} have mass zero")
            num = ext[syms[t - 1]]
            if num == -math.inf:
                return -math.inf
            terms.append(num - denom)
        return math.fsum(terms)

    def _exact_next(self, syms):
        if self._exact_mass(syms) == 0:
            raise ZeroHistoryError(f"conditioning on a null history {_fmt(syms)}")
        ext = [self.base._exact_mass(syms + (a,)) for a in self.alphabet.symbols()]
        denom = sum(ext, Fraction(0))
        if denom == 0:
            raise DegenerateError(f"all one-symbol extensions of {_fmt(syms)} have mass zero")
        return [e / denom for e in ext]

    def describe(self):
        return {"kind": "normalized", "base": self.base.describe()}


def normalize(env: Environment) -> Environment:
    """Return the normalized measure of a semimeasure with ``env(empty) > 0``.

    Normalizing a normalized environment returns it unchanged.
    """
    if isinstance(env, NormalizedEnvironment):
        return env
    if env.mass(()) == 0:
        raise DegenerateError("cannot normalize a semimeasure with zero total mass")
    return NormalizedEnvironment(env)


def sample(env: Environment, seed: int, n: int) -> FiniteString:
    """Draw ``x_{1:n}`` from a measure by sequential conditionals.

    Symbol ``t`` is the smallest ``a`` with ``u_t < sum_{b <= a} mu(b | x_{<t})``
    for uniforms ``u_t`` from ``numpy.random.default_rng(seed)``, so the same
    seed always gives the same string.
    """
    if not env.is_measure:
        raise NotAMeasureError("sampling requires a measure; this environment may leak mass")
    if n < 0:
        raise ValueError("length must be nonnegative")
    u = np.random.default_rng(seed).random(n)
    if isinstance(env, Bernoulli):
        bits = (u >= float(1 - env.theta)).astype(np.int64)
        return FiniteString(tuple(bits.tolist()), BINARY)
    syms = []
    for t in range(n):
        probs = env.next_probs(tuple(syms), EXACT)
        acc = 0.0
        choice = len(probs) - 1
        for a, p in enumerate(probs):
            acc += float(p)
            if u[t] < acc:
                choice = a
                break
        while probs[choice] == 0:
            choice -= 1
        syms.append(choice)
    return FiniteString(tuple(syms), env.alphabet)
