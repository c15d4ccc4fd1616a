"""Counterexample machinery for Bernoulli classes and dominance.

* KL geometry on Bernoulli parameters and the KL-middle of a gap.
* Doubly-random sequences whose empirical frequency tracks the KL-middle
  within ``1/n``, making them random for both gap boundaries at once.
* Two diagonalizations that build a measure no given semimeasure dominates:
  one over the naturals (chunks ``2^(n-1) .. 2^n - 1``), one over binary
  sequences (follow the less likely symbol).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .core.environments import Bernoulli, Deterministic, Environment
from .core.errors import DegenerateError, MembershipError, ZeroHistoryError
from .core.mixture import MixtureModel
from .core.strings import BINARY, FiniteString


def kl_divergence(p, q) -> float:
    """``D(p || q)`` between Bernoulli(p) and Bernoulli(q), with ``0 ln 0 = 0``."""
    p = float(p)
    q = float(q)
    if not 0.0 <= p <= 1.0 or not 0.0 <= q <= 1.0:
        raise ValueError(f"parameters must lie in [0, 1], got p={p}, q={q}")
    total = 0.0
    for a, b in ((p, q), (1.0 - p, 1.0 - q)):
        if a == 0.0:
            continue
        if b == 0.0:
            raise ValueError(f"D({p} || {q}) is infinite")
        total += a * math.log(a / b)
    return total


@dataclass(frozen=True)
class ThetaClass:
    """A finite, strictly increasing set of Bernoulli parameters in (0, 1) with
    positive prior weights summing to at most one."""

    thetas: tuple
    weights: tuple

    def __post_init__(self):
        thetas = tuple(Fraction(t) for t in self.thetas)
        weights = tuple(Fraction(w) for w in self.weights)
        if len(thetas) != len(weights) or not thetas:
            raise ValueError("thetas and weights must be nonempty and of equal length")
        if any(not 0 < t < 1 for t in thetas):
            raise ValueError("parameters 0 and 1 are excluded from a theta class")
        if any(b <= a for a, b in zip(thetas, thetas[1:])):
            raise ValueError("thetas must be strictly increasing")
        if any(w <= 0 for w in weights) or sum(weights) > 1:
            raise ValueError("weights must be positive and sum to at most 1")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, thetas: Sequence) -> "ThetaClass":
        thetas = sorted(Fraction(t) for t in thetas)
        return cls(tuple(thetas), (Fraction(1, len(thetas)),) * len(thetas))

    @classmethod
    def dyadic(cls, m: int) -> "ThetaClass":
        """``{k / 2^m : 0 < k < 2^m}`` with uniform weights."""
        return cls.uniform([Fraction(k, 2**m) for k in range(1, 2**m)])

    def __contains__(self, theta) -> bool:
        return Fraction(theta) in self.thetas

    def weight(self, theta) -> Fraction:
        theta = Fraction(theta)
        try:
            return self.weights[self.thetas.index(theta)]
        except ValueError:
            raise MembershipError(f"{theta} is not in the class") from None

    def mixture(self) -> MixtureModel:
        return MixtureModel((w, Bernoulli(t)) for t, w in zip(self.thetas, self.weights))


@dataclass(frozen=True)
class GapCertificate:
    theta0: Fraction
    theta1: Fraction
    kl_middle: float
    lipschitz_c: float

    def to_dict(self) -> dict:
        return {
            "theta0": str(self.theta0),
            "theta1": str(self.theta1),
            "kl_middle": self.kl_middle,
            "lipschitz_c": self.lipschitz_c,
            "kl_gap": kl_divergence(self.kl_middle, self.theta0)
            - kl_divergence(self.kl_middle, self.theta1),
        }

    @property
    def exp_2c(self) -> Fraction:
        """``e^{2c}`` exactly: the square of the odds ratio of the boundaries."""
        t0, t1 = self.theta0, self.theta1
        return (t1 * (1 - t0) / (t0 * (1 - t1))) ** 2


def kl_middle(theta0, theta1) -> GapCertificate:
    """The point ``m`` in ``(theta0, theta1)`` with ``D(m||theta0) = D(m||theta1)``
    and the Lipschitz constant ``c = ln(theta1 (1-theta0) / (theta0 (1-theta1)))``."""
    t0 = Fraction(theta0)
    t1 = Fraction(theta1)
    if t0 == t1:
        raise DegenerateError("the KL-middle of a single point is undefined")
    if not 0 < t0 < t1 < 1:
        raise ValueError(f"need 0 < theta0 < theta1 < 1, got {t0}, {t1}")
    a = math.log(t1 / t0)            # ln(theta1/theta0)
    b = math.log((1 - t0) / (1 - t1))  # ln((1-theta0)/(1-theta1))
    return GapCertificate(t0, t1, b / (a + b), a + b)


def nonconvergence_bounds(gap: GapCertificate, w0, w1) -> tuple:
    """``(c0, deficiency_bound)`` with ``c0 = [1 + (w1/w0) e^{2c}]^{-1}`` the lower
    bound on the posterior weight of ``theta0`` and ``w0 + w1 e^{2c} = w0 / c0``
    the bound on ``xi / mu_theta0`` along a doubly-random sequence."""
    w0 = Fraction(w0)
    w1 = Fraction(w1)
    e2c = gap.exp_2c
    c0 = 1 / (1 + (w1 / w0) * e2c)
    return c0, w0 + w1 * e2c


def doubly_random_sequence(theta_bar, n: int, check: bool = True) -> FiniteString:
    """Binary ``x_{1:n}`` with ``|n1_k - k theta_bar| <= 1/2`` for every ``k``.

    Each symbol moves the count of ones to whichever of ``n1`` and ``n1 + 1``
    is nearer ``k theta_bar``; ties go to 0.
    """
    if isinstance(theta_bar, Fraction):
        tb = theta_bar
    else:
        tb = float(theta_bar)
    if not 0 < tb < 1:
        raise ValueError("theta_bar must lie in (0, 1)")
    bits = []
    n1 = 0
    for k in range(1, n + 1):
        target = k * tb
        if (n1 + 1) - target < target - n1:
            n1 += 1
            bits.append(1)
        else:
            bits.append(0)
        if check and not abs(n1 - target) < 1:
            raise AssertionError(f"frequency left the 1/k envelope at k={k}")
    return FiniteString(tuple(bits), BINARY)


def gap_check(theta_class: ThetaClass, theta0, theta1) -> bool:
    """True iff ``[theta0, theta1]`` contains no class member besides its ends."""
    t0 = Fraction(theta0)
    t1 = Fraction(theta1)
    for t in (t0, t1):
        if t not in theta_class:
            raise MembershipError(f"{t} is not in the class")
    lo, hi = min(t0, t1), max(t0, t1)
    return not any(lo < t < hi for t in theta_class.thetas)


@dataclass
class DiscreteSemimeasure:
    """``P`` over the naturals ``1, 2, ...``, given exactly and optionally in
    vectorized float form for fast scanning of large chunks."""

    evaluator: Callable[[int], Fraction]
    batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    mass_bound: Fraction = Fraction(1)
    name: str = "P"

    def __call__(self, x: int) -> Fraction:
        return Fraction(self.evaluator(x))


def harmonic_pair_measure() -> DiscreteSemimeasure:
    """``T(x) = 1 / (x (x + 1))``, a recursive measure on the naturals."""
    return DiscreteSemimeasure(
        evaluator=lambda x: Fraction(1, x * (x + 1)),
        batch=lambda xs: 1.0 / (xs.astype(np.float64) * (xs.astype(np.float64) + 1.0)),
        name="1/(x(x+1))",
    )


@dataclass(frozen=True)
class ChunkWitness:
    n: int
    x_n: int
    p_value: Fraction
    q_value: Fraction
    bound: Fraction  # n(n+1) / 2^(n-1)

    @property
    def ratio(self) -> Fraction:
        return self.p_value / self.q_value

    @property
    def holds(self) -> bool:
        return self.ratio <= self.bound

    def to_dict(self) -> dict:
        return {"n": self.n, "x_n": self.x_n, "P": str(self.p_value), "Q": str(self.q_value),
                "ratio": str(self.ratio), "bound": str(self.bound), "holds": self.holds}


@dataclass
class DiagonalMeasure:
    """The output ``Q``: mass ``1/(n(n+1))`` on the chunk minimizer ``x_n``."""

    witnesses: list = field(default_factory=list)

    def __call__(self, x: int) -> Fraction:
        for w in self.witnesses:
            if w.x_n == x:
                return w.q_value
        return Fraction(0)

    @property
    def support(self) -> list:
        return [w.x_n for w in self.witnesses]

    @property
    def partial_mass(self) -> Fraction:
        return sum((w.q_value for w in self.witnesses), Fraction(0))

    def as_semimeasure(self) -> DiscreteSemimeasure:
        return DiscreteSemimeasure(self, name="Q")


_BLOCK = 1 << 22
_TIE_RTOL = 1e-9


def _chunk_argmin(P: DiscreteSemimeasure, lo: int, hi: int) -> int:
    # smallest x in [lo, hi] minimizing P exactly
    if P.batch is None or hi - lo < 64:
        best_x, best_v = lo, P(lo)
        for x in range(lo + 1, hi + 1):
            v = P(x)
            if v < best_v:
                best_x, best_v = x, v
        return best_x
    # float screen, then exact comparison of everything within the float
    # error of the minimum
    kept_x, kept_v = [], []
    for start in range(lo, hi + 1, _BLOCK):
        xs = np.arange(start, min(start + _BLOCK, hi + 1), dtype=np.int64)
        vals = np.asarray(P.batch(xs), dtype=np.float64)
        close = vals <= vals.min() * (1 + _TIE_RTOL)
        kept_x.append(xs[close])
        kept_v.append(vals[close])
    xs = np.concatenate(kept_x)
    vals = np.concatenate(kept_v)
    candidates = xs[vals <= vals.min() * (1 + _TIE_RTOL)].tolist()
    best_x, best_v = candidates[0], P(candidates[0])
    for x in candidates[1:]:
        v = P(x)
        if v < best_v:
            best_x, best_v = x, v
    return best_x


def discrete_diagonalize(P: DiscreteSemimeasure, N: int) -> DiagonalMeasure:
    """Chunk ``I_n = {2^(n-1), ..., 2^n - 1}``, put ``Q(x_n) = 1/(n(n+1))`` on
    ``x_n = argmin_{I_n} P`` (smallest on ties), and record the witness
    ``P(x_n) / Q(x_n) <= n(n+1) / 2^(n-1)`` (a minimum is below the mean)."""
    out = DiagonalMeasure()
    for n in range(1, N + 1):
        lo, hi = 2 ** (n - 1), 2**n - 1
        x_n = _chunk_argmin(P, lo, hi)
        out.witnesses.append(ChunkWitness(
            n=n, x_n=x_n, p_value=P(x_n), q_value=Fraction(1, n * (n + 1)),
            bound=Fraction(n * (n + 1), 2 ** (n - 1))))
    return out


@dataclass(frozen=True)
class AdversarialResult:
    path: FiniteString
    rho: Deterministic
    log_mu_path: tuple  # log mu(x*_{1:k}) for k = 1..n
    epsilon: Fraction

    def envelope_holds(self) -> bool:
        """``mu(x*_{1:k}) <= (1/2 + 2 eps)^k`` for every ``k``."""
        base = math.log(0.5 + 2 * float(self.epsilon))
        return all(lm <= (k * base) + 1e-12 * max(1.0, abs(k * base))
                   for k, lm in enumerate(self.log_mu_path, start=1))


def _perturb(p: Fraction, eps: Fraction) -> Fraction:
    # an eps-approximation from below: rounds down to the eps grid
    if eps == 0:
        return p
    return eps * math.floor(p / eps)


def continuous_adversarial(mu: Environment, epsilon, n: int) -> AdversarialResult:
    """Follow the symbol minimizing an ``epsilon``-approximation of
    ``mu(.|x*_{<k})`` (smallest symbol on ties); returns ``x*`` and the point
    mass ``rho`` on it.  For a binary measure ``mu(x*_{1:n}) <= (1/2 + 2 eps)^n``,
    so ``mu`` cannot dominate ``rho``."""
    if mu.alphabet != BINARY:
        raise ValueError("the adversarial construction is binary")
    eps = Fraction(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be >= 0")
    syms: list = []
    logs = []
    log_m = 0.0
    for k in range(n):
        try:
            probs = mu._exact_next(tuple(syms))
        except ZeroHistoryError:
            raise DegenerateError(f"mu vanishes on the constructed path at step {k + 1}") from None
        if all(p == 0 for p in probs):
            raise DegenerateError(f"both conditionals vanish at step {k + 1}")
        approx = [_perturb(Fraction(p), eps) for p in probs]
        a = min(range(len(approx)), key=lambda s: (approx[s], s))
        if probs[a] == 0:
            raise DegenerateError(f"the chosen symbol has mu-probability zero at step {k + 1}")
        syms.append(a)
        log_m += math.log(probs[a].numerator) - math.log(probs[a].denominator)
        logs.append(log_m)
    path = FiniteString(tuple(syms), BINARY)
    return AdversarialResult(path, Deterministic.from_prefix(path), tuple(logs), eps)


def suppression_rates(gap: GapCertificate, thetas: Sequence) -> dict:
    """Predicted log-decay rate ``D(m||theta) - D(m||theta0)`` of the posterior
    weight of each ``theta`` outside the gap, ``m`` the KL-middle."""
    m = gap.kl_middle
    base = kl_divergence(m, gap.theta0)
    return {Fraction(t): kl_divergence(m, t) - base for t in thetas}


def certificate_json(gap: GapCertificate, witnesses: Sequence[ChunkWitness] = ()) -> str:
    doc = gap.to_dict()
    doc["chunks"] = [w.to_dict() for w in witnesses]
    return json.dumps(doc, indent=2, sort_keys=True)
