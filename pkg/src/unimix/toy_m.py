"""A four-opcode monotone machine and the semimeasure ``M_L`` it induces.

Programs are read two bits at a time:

    00  emit 0
    01  emit 1
    10  append a copy of the whole output so far (no-op on empty output)
    11  repeat the output forever; on empty output, halt

Output is truncated at ``n_max`` symbols.  ``M_L(x)`` sums ``2^-len(p)``
over minimal programs of at most ``L`` bits: programs whose output starts
with ``x`` and whose last opcode is the one that completed ``x``.  Minimal
programs of a fixed ``x`` form a prefix-free set, so ``M_L`` is a
semimeasure; by convention ``M_L(empty) = 1``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .core.environments import Environment
from .core.errors import HorizonError, ZeroHistoryError
from .core.strings import BINARY, FiniteString, StringLike, all_strings_upto, as_string

MACHINE_SPEC_VERSION = "unimix-toy-monotone/1 (00:emit0 01:emit1 10:double 11:repeat)"
DEFAULT_N_MAX = 64
DEFAULT_L = 16
MAX_L = 24

_OPNAMES = ("00", "01", "10", "11")


def program_to_ops(p: str) -> list:
    """Opcode indices of a bit string; an odd trailing bit is dropped."""
    if set(p) - {"0", "1"}:
        raise ValueError(f"program must be a bit string, got {p!r}")
    return [int(p[k: k + 2], 2) for k in range(0, len(p) - 1, 2)]


def ops_to_program(ops) -> str:
    return "".join(_OPNAMES[o] for o in ops)


@dataclass(frozen=True)
class MachineRun:
    program: str
    consumed_bits: int
    output: FiniteString
    status: str  # "exhausted" | "looping" | "halted"


def run_program(p: str, n_max: int = DEFAULT_N_MAX) -> MachineRun:
    consumed, _, out, status = _kernels.run_opcodes(program_to_ops(p), n_max)
    return MachineRun(p, 2 * consumed, FiniteString(tuple(out), BINARY), status)


@lru_cache(maxsize=8)
def _program_arrays(max_ops: int, n_max: int):
    lengths, before, after, outputs = _kernels.enumerate_programs(max_ops, n_max)
    return 2 * lengths, before, after, outputs


def _check_L(L: int):
    if L < 0 or L > MAX_L:
        raise HorizonError(f"program length bound L={L} outside [0, {MAX_L}]")


class PriorTable:
    """All programs of at most ``L`` bits, with queries for ``M_L`` and ``Km_L``."""

    def __init__(self, L: int = DEFAULT_L, n_max: int = DEFAULT_N_MAX):
        _check_L(L)
        self.L = L
        self.n_max = n_max
        self.bits, self.before, self.after, self.outputs = _program_arrays(L // 2, n_max)
        top = int(self.bits.max()) if self.bits.size else 0
        self._scale = top
        self._ticks = np.left_shift(np.int64(1), (top - self.bits).astype(np.int64))

    def __len__(self):
        return int(self.bits.shape[0])

    def _matching(self, syms):
        k = len(syms)
        if k > self.n_max:
            raise HorizonError(f"string length {k} exceeds n_max={self.n_max}")
        if k == 0:
            return np.ones(len(self), dtype=bool)
        return (self.outputs[:, :k] == np.asarray(syms, dtype=np.uint8)).all(axis=1)

    def minimal_mask(self, x: StringLike) -> np.ndarray:
        syms = as_string(x, BINARY).symbols
        k = len(syms)
        return (self.before < k) & (self.after >= k) & self._matching(syms)

    def minimal_programs(self, x: StringLike) -> set:
        idx = np.flatnonzero(self.minimal_mask(x))
        return {self.program(i) for i in idx}

    def program(self, row: int) -> str:
        return _program_strings(self.L // 2)[row]

    def m(self, x: StringLike) -> Fraction:
        syms = as_string(x, BINARY).symbols
        if not syms:
            return Fraction(1)
        ticks = int(self._ticks[self.minimal_mask(syms)].sum())
        return Fraction(ticks, 1 << self._scale)

    def kraft_sum(self, x: StringLike) -> Fraction:
        """``sum 2^-len(p)`` over the minimal programs of ``x`` (never the convention)."""
        syms = as_string(x, BINARY).symbols
        ticks = int(self._ticks[self.minimal_mask(syms)].sum())
        return Fraction(ticks, 1 << self._scale)

    def km(self, x: StringLike):
        syms = as_string(x, BINARY).symbols
        if not syms:
            return 0
        mask = (self.after >= len(syms)) & self._matching(syms)
        if not mask.any():
            return math.inf
        return int(self.bits[mask].min())

    def rows(self, max_len: int):
        """``(x, M_L(x), Km_L(x))`` for all strings with ``len(x) <= max_len``."""
        for x in all_strings_upto(BINARY, max_len):
            yield x, self.m(x), self.km(x)

    def to_csv(self, max_len: int) -> str:
        buf = io.StringIO()
        buf.write(f"# machine: {MACHINE_SPEC_VERSION}\n# L: {self.L}\n# n_max: {self.n_max}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "m_num", "m_den", "km"])
        for x, m, km in self.rows(max_len):
            w.writerow([str(x) or "<empty>", m.numerator, m.denominator,
                        "inf" if km == math.inf else km])
        return buf.getvalue()


@lru_cache(maxsize=4)
def _program_strings(max_ops: int) -> tuple:
    # same pre-order as the enumeration kernels; 11 never has children
    out = []

    def walk(prefix, depth):
        for op in range(4):
            p = prefix + _OPNAMES[op]
            out.append(p)
            if op != 3 and depth + 1 < max_ops:
                walk(p, depth + 1)

    if max_ops > 0:
        walk("", 0)
    return tuple(out)


@lru_cache(maxsize=8)
def prior_table(L: int = DEFAULT_L, n_max: int = DEFAULT_N_MAX) -> PriorTable:
    return PriorTable(L, n_max)


def minimal_programs(x: StringLike, L: int, n_max: int = DEFAULT_N_MAX) -> set:
    return prior_table(L, n_max).minimal_programs(x)


def m_lower(x: StringLike, L: int, n_max: int = DEFAULT_N_MAX) -> Fraction:
    """``M_L(x)``, nondecreasing in ``L``."""
    return prior_table(L, n_max).m(x)


def km_upper(x: StringLike, L: int, n_max: int = DEFAULT_N_MAX):
    """Length of the shortest program of at most ``L`` bits whose output starts
    with ``x``; ``math.inf`` if there is none."""
    return prior_table(L, n_max).km(x)


@dataclass(frozen=True)
class DetBoundLedger:
    x: FiniteString
    L: int
    km: int
    sum_sq_miss: float
    half_neg_log_m: float
    half_ln2_km: float
    conditionals: tuple = field(repr=False)

    @property
    def first_link(self) -> bool:
        return self.sum_sq_miss <= self.half_neg_log_m

    @property
    def second_link(self) -> bool:
        return self.half_neg_log_m <= self.half_ln2_km

    @property
    def holds(self) -> bool:
        return self.first_link and self.second_link


def det_bound_check(x: StringLike, L: int, n_max: int = DEFAULT_N_MAX) -> DetBoundLedger:
    """Check ``sum_t (1 - M_L(x_t|x_<t))^2 <= -1/2 ln M_L(x) <= 1/2 ln 2 Km_L(x)``."""
    x = as_string(x, BINARY)
    table = prior_table(L, n_max)
    masses = [table.m(x.prefix(k)) for k in range(len(x) + 1)]
    for k, m in enumerate(masses):
        if m == 0:
            raise ZeroHistoryError(f"M_L vanishes on prefix {x.prefix(k)} (L={L})")
    conds = tuple(masses[t] / masses[t - 1] for t in range(1, len(masses)))
    sum_sq = float(sum(((1 - a) ** 2 for a in conds), Fraction(0)))
    m_x = masses[-1]
    half_neg_log = -0.5 * (math.log(m_x.numerator) - math.log(m_x.denominator))
    km = table.km(x)
    return DetBoundLedger(x, L, km, sum_sq, half_neg_log, 0.5 * math.log(2) * km, conds)


@dataclass(frozen=True)
class ToyAudit:
    L: int
    max_len: int
    strings_checked: int
    monotonicity_violations: int
    kraft_violations: int
    shortest_program_violations: int

    @property
    def passed(self) -> bool:
        return (self.monotonicity_violations == 0 and self.kraft_violations == 0
                and self.shortest_program_violations == 0)


def audit(L: int = DEFAULT_L, max_len: int = 8, n_max: int = DEFAULT_N_MAX) -> ToyAudit:
    """Exhaustive semimeasure, Kraft and ``M_L >= 2^-Km_L`` checks over ``len(x) <= max_len``."""
    table = prior_table(L, n_max)
    mono = kraft = short = checked = 0
    for x in all_strings_upto(BINARY, max_len):
        checked += 1
        m = table.m(x)
        if m < table.m(x.extend(0)) + table.m(x.extend(1)):
            mono += 1
        if table.kraft_sum(x) > 1:
            kraft += 1
        km = table.km(x)
        if km != math.inf and m < Fraction(1, 2**km):
            short += 1
    return ToyAudit(L, max_len, checked, mono, kraft, short)


class ToyMEnvironment(Environment):
    """``M_L`` as a semimeasure over binary strings of length at most ``n_max``."""

    kind = "toy-m"
    is_measure = False

    def __init__(self, L: int = DEFAULT_L, n_max: int = DEFAULT_N_MAX):
        self.L = L
        self.n_max = n_max
        self.alphabet = BINARY
        self.table = prior_table(L, n_max)

    def __eq__(self, other):
        return isinstance(other, ToyMEnvironment) and (other.L, other.n_max) == (self.L, self.n_max)

    def __hash__(self):
        return hash(("toy-m", self.L, self.n_max))

    def __repr__(self):
        return f"ToyMEnvironment(L={self.L}, n_max={self.n_max})"

    def _exact_mass(self, syms):
        return self.table.m(syms)

    def describe(self):
        return {"kind": "toy-m", "max_program_bits": self.L, "n_max": self.n_max}
