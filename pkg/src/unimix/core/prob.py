"""Nonnegative scalars for masses and weights, in two numeric backends.

``exact``: :class:`fractions.Fraction`, closed under ``+ * /``.
``logfloat``: :class:`LogProb`, a double holding ``log(value)``; addition
goes through a stable log-sum-exp so products of 10^6 factors stay finite.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Union

EXACT = "exact"
LOGFLOAT = "logfloat"
BACKENDS = (EXACT, LOGFLOAT)


def check_backend(backend: str) -> str:
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    return backend


def logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


def logsumexp(values: Iterable[float]) -> float:
    vals = [v for v in values if v != -math.inf]
    if not vals:
        return -math.inf
    peak = max(vals)
    if peak == math.inf:
        return math.inf
    return peak + math.log(math.fsum(math.exp(v - peak) for v in vals))


def log_fraction(q: Fraction) -> float:
    """Natural log of a nonnegative rational without float underflow."""
    if q < 0:
        raise ValueError("log of a negative number")
    if q == 0:
        return -math.inf
    return math.log(q.numerator) - math.log(q.denominator)


@total_ordering
class LogProb:
    """A nonnegative real stored as its natural logarithm."""

    __slots__ = ("log",)

    def __init__(self, log: float):
        log = float(log)
        if math.isnan(log):
            raise ValueError("LogProb log value is NaN")
        self.log = log

    @classmethod
    def from_value(cls, value) -> "LogProb":
        if isinstance(value, LogProb):
            return value
        if isinstance(value, Fraction) or isinstance(value, int):
            return cls(log_fraction(Fraction(value)))
        value = float(value)
        if value < 0:
            raise ValueError("probabilities are nonnegative")
        return cls(math.log(value) if value > 0 else -math.inf)

    @classmethod
    def zero(cls) -> "LogProb":
        return cls(-math.inf)

    @classmethod
    def one(cls) -> "LogProb":
        return cls(0.0)

    def __float__(self) -> float:
        return math.exp(self.log)

    def __bool__(self) -> bool:
        return self.log != -math.inf

    def __add__(self, other) -> "LogProb":
        other = LogProb.from_value(other)
        return LogProb(logaddexp(self.log, other.log))

    __radd__ = __add__

    def __mul__(self, other) -> "LogProb":
        other = LogProb.from_value(other)
        if self.log == -math.inf or other.log == -math.inf:
            return LogProb.zero()
        return LogProb(self.log + other.log)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogProb":
        other = LogProb.from_value(other)
        if other.log == -math.inf:
            raise ZeroDivisionError("division by a zero probability")
        if self.log == -math.inf:
            return LogProb.zero()
        return LogProb(self.log - other.log)

    def __rtruediv__(self, other) -> "LogProb":
        return LogProb.from_value(other) / self

    def __eq__(self, other) -> bool:
        try:
            return self.log == LogProb.from_value(other).log
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other) -> bool:
        return self.log < LogProb.from_value(other).log

    def __hash__(self) -> int:
        return hash(("LogProb", self.log))

    def __repr__(self) -> str:
        return f"LogProb(log={self.log!r})"


Prob = Union[Fraction, LogProb]


def as_prob(value, backend: str) -> Prob:
    """Convert ``value`` (Fraction, int or LogProb) to the given backend."""
    if check_backend(backend) == EXACT:
        if isinstance(value, LogProb):
            raise TypeError("cannot convert a log-domain value to an exact rational")
        return Fraction(value)
    return LogProb.from_value(value)


def zero(backend: str) -> Prob:
    return Fraction(0) if check_backend(backend) == EXACT else LogProb.zero()


def one(backend: str) -> Prob:
    return Fraction(1) if check_backend(backend) == EXACT else LogProb.one()


def to_float(p: Prob) -> float:
    return float(p)


def log_of(p: Prob) -> float:
    if isinstance(p, LogProb):
        return p.log
    return log_fraction(Fraction(p))


def is_zero(p: Prob) -> bool:
    return not p


def prob_sum(values: Iterable[Prob], backend: str) -> Prob:
    values = list(values)
    if check_backend(backend) == EXACT:
        return sum(values, Fraction(0))
    return LogProb(logsumexp(v.log for v in values))


def parse_fraction(text) -> Fraction:
    """Parse an exact rational from ``"1/2"``, ``"0.25"`` or an int.

    Floats are refused because they are not exact.
    """
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        try:
            return Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {text!r}") from exc
    raise ValueError(f"expected an exact fraction string, got {type(text).__name__} {text!r}")


def format_fraction(q: Fraction) -> str:
    return str(Fraction(q))
