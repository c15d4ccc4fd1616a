"""Finite alphabets and strings over them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import AlphabetError


@dataclass(frozen=True)
class Alphabet:
    """Symbols ``0 .. size-1``."""

    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 2:
            raise AlphabetError(f"alphabet size must be an integer >= 2, got {self.size!r}")

    def symbols(self) -> range:
        return range(self.size)

    def __contains__(self, symbol) -> bool:
        return isinstance(symbol, int) and 0 <= symbol < self.size


BINARY = Alphabet(2)


@dataclass(frozen=True)
class FiniteString:
    """An immutable string ``x_1 .. x_n`` over a finite alphabet.

    The empty string is allowed.  For binary strings, ``n1`` is the number of
    ones and ``theta_hat`` the empirical frequency ``n1 / n``.
    """

    symbols: tuple
    alphabet: Alphabet = BINARY

    def __post_init__(self):
        syms = tuple(int(s) for s in self.symbols)
        for s in syms:
            if not 0 <= s < self.alphabet.size:
                raise AlphabetError(f"symbol {s} outside alphabet of size {self.alphabet.size}")
        object.__setattr__(self, "symbols", syms)

    @classmethod
    def from_str(cls, text: str, alphabet: Alphabet = BINARY) -> "FiniteString":
        if alphabet.size > 10:
            raise AlphabetError("from_str only supports alphabets of at most 10 symbols")
        try:
            return cls(tuple(int(c) for c in text), alphabet)
        except ValueError as exc:
            raise AlphabetError(f"not a digit string: {text!r}") from exc

    @classmethod
    def empty(cls, alphabet: Alphabet = BINARY) -> "FiniteString":
        return cls((), alphabet)

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return FiniteString(self.symbols[item], self.alphabet)
        return self.symbols[item]

    def __add__(self, other: "FiniteString") -> "FiniteString":
        other = as_string(other, self.alphabet)
        return FiniteString(self.symbols + other.symbols, self.alphabet)

    def __str__(self) -> str:
        if self.alphabet.size <= 10:
            return "".join(str(s) for s in self.symbols)
        return " ".join(str(s) for s in self.symbols)

    def extend(self, symbol: int) -> "FiniteString":
        return FiniteString(self.symbols + (symbol,), self.alphabet)

    def prefix(self, k: int) -> "FiniteString":
        return FiniteString(self.symbols[:k], self.alphabet)

    def prefixes(self, include_empty: bool = True):
        start = 0 if include_empty else 1
        for k in range(start, len(self) + 1):
            yield self.prefix(k)

    def count(self, symbol: int) -> int:
        return self.symbols.count(symbol)

    @property
    def n1(self) -> int:
        return self.symbols.count(1)

    @property
    def theta_hat(self) -> Fraction:
        if not self.symbols:
            raise ValueError("empirical frequency of the empty string is undefined")
        return Fraction(self.n1, len(self.symbols))


StringLike = Union[FiniteString, str, Sequence[int]]


def as_string(x: StringLike, alphabet: Alphabet = BINARY) -> FiniteString:
    """Coerce ``x`` to a FiniteString over ``alphabet``."""
    if isinstance(x, FiniteString):
        if x.alphabet != alphabet:
            raise AlphabetError(f"string over {x.alphabet} used where {alphabet} expected")
        return x
    if isinstance(x, str):
        return FiniteString.from_str(x, alphabet)
    return FiniteString(tuple(x), alphabet)


def all_strings(alphabet: Alphabet, length: int) -> Iterable[FiniteString]:
    """All strings of exactly ``length`` symbols, in lexicographic order."""
    from itertools import product

    for syms in product(range(alphabet.size), repeat=length):
        yield FiniteString(syms, alphabet)


def all_strings_upto(alphabet: Alphabet, max_length: int) -> Iterable[FiniteString]:
    for n in range(max_length + 1):
        yield from all_strings(alphabet, n)
