"""Convergence ledgers and randomness statistics.

Per-step distances between the true predictive ``mu(.|h)`` and the mixture
predictive ``xi(.|h)``:

    hellinger  h = sum_a (sqrt(mu_a) - sqrt(xi_a))^2
    kl         d = sum_a mu_a ln(mu_a / xi_a),  0 ln(0/z) = 0
    sq_ratio   s = sum'_a mu_a (sqrt(xi_a / mu_a) - 1)^2   (mu_a > 0 only)

For a measure ``mu`` and semimeasure ``xi``, ``s <= h <= d`` at every step.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .core.environments import Environment
from .core.errors import HorizonError, ZeroHistoryError
from .core.mixture import MixtureModel
from .core.prob import EXACT, LOGFLOAT, log_fraction
from .core.strings import FiniteString, StringLike, as_string

MAX_EXACT_HORIZON = 16


@dataclass(frozen=True)
class StepDistances:
    t: int
    hellinger: float
    kl: float
    sq_ratio: float


def _u_minus_log1p(u: float) -> float:
    if u == -1.0:
        return math.inf
    if abs(u) < 1e-3:
        return u * u * (0.5 - u * (1.0 / 3.0 - u * (0.25 - u * (0.2 - u / 6.0))))
    return u - math.log1p(u)


def distances_from_predictives(mu_probs: Sequence, xi_probs: Sequence) -> tuple:
    """``(hellinger, kl, sq_ratio)`` for one step.

    ``mu_probs`` must be a distribution, ``xi_probs`` a semi-distribution.
    Exact rationals are differenced before conversion to floats, so nearly
    equal predictives do not lose the distance to cancellation.
    """
    hell = kl = sq = 0.0
    mu_total = xi_total = Fraction(0)
    exact = all(isinstance(p, (Fraction, int)) for p in list(mu_probs) + list(xi_probs))
    for mu_a, xi_a in zip(mu_probs, xi_probs):
        if exact:
            mu_total += mu_a
            xi_total += xi_a
        if mu_a > 0 and xi_a > 2 * mu_a:
            # no cancellation here; the ratio itself may overflow a float
            h = (math.sqrt(float(xi_a)) - math.sqrt(float(mu_a))) ** 2
            hell += h
            sq += h
            lr = (log_fraction(Fraction(xi_a) / Fraction(mu_a)) if exact
                  else math.log(float(xi_a)) - math.log(float(mu_a)))
            kl += float(xi_a) - float(mu_a) - float(mu_a) * lr
        elif mu_a > 0:
            u = float((Fraction(xi_a) - Fraction(mu_a)) / Fraction(mu_a)) if exact \
                else (float(xi_a) - float(mu_a)) / float(mu_a)
            m = float(mu_a)
            root = math.sqrt(1.0 + u) if u > -1.0 else 0.0
            h = m * u * u / ((1.0 + root) ** 2)
            hell += h
            sq += h
            kl += m * _u_minus_log1p(u)
        elif xi_a > 0:
            hell += float(xi_a)
            kl += float(xi_a)
    # d = sum [mu ln(mu/xi) - mu + xi] + (sum mu - sum xi); the bracket is what
    # the loop added, the leak term is >= 0 for a semi-distribution xi
    if exact:
        leak = float(mu_total - xi_total)
    else:
        leak = math.fsum(float(p) for p in mu_probs) - math.fsum(float(p) for p in xi_probs)
    kl += max(leak, 0.0)
    return hell, kl, sq


def step_distances(mix: MixtureModel, mu: Environment, history: StringLike,
                   backend: str = EXACT) -> StepDistances:
    h = as_string(history, mu.alphabet)
    mu_probs = mu.next_probs(h, backend)
    xi_probs = mix.next_probs(h, backend)
    if backend == LOGFLOAT:
        mu_probs = [float(p) for p in mu_probs]
        xi_probs = [float(p) for p in xi_probs]
    hell, kl, sq = distances_from_predictives(mu_probs, xi_probs)
    return StepDistances(len(h) + 1, hell, kl, sq)


@dataclass
class BoundLedger:
    """Cumulative expected distances up to ``horizon`` against ``ln(1/w_mu)``."""

    horizon: int
    weight: Fraction
    bound: float
    expected_sq_ratio: list = field(default_factory=list)
    expected_hellinger: list = field(default_factory=list)
    expected_kl: list = field(default_factory=list)
    expected_log_ratio: float = 0.0
    steps_evaluated: int = 0
    min_step_gap: float = math.inf

    @property
    def cumulative_expected_sq_ratio(self) -> float:
        return math.fsum(self.expected_sq_ratio)

    @property
    def cumulative_expected_hellinger(self) -> float:
        return math.fsum(self.expected_hellinger)

    @property
    def cumulative_expected_kl(self) -> float:
        return math.fsum(self.expected_kl)

    def chain(self) -> dict:
        s, h, d = (self.cumulative_expected_sq_ratio, self.cumulative_expected_hellinger,
                   self.cumulative_expected_kl)
        return {
            "sq_ratio<=hellinger": s <= h,
            "hellinger<=kl": h <= d,
            "kl<=bound": d <= self.bound + 1e-12 * max(1.0, self.bound),
        }

    @property
    def holds(self) -> bool:
        return all(self.chain().values())

    def slack(self) -> dict:
        return {
            "hellinger-sq_ratio": self.cumulative_expected_hellinger - self.cumulative_expected_sq_ratio,
            "kl-hellinger": self.cumulative_expected_kl - self.cumulative_expected_hellinger,
            "bound-kl": self.bound - self.cumulative_expected_kl,
        }

    def records(self) -> list:
        out = []
        cs = ch = cd = 0.0
        for t, (s, h, d) in enumerate(zip(self.expected_sq_ratio, self.expected_hellinger,
                                          self.expected_kl), start=1):
            cs += s
            ch += h
            cd += d
            out.append({"t": t, "h_t": h, "d_t": d, "sq_ratio": s,
                        "cum_sq_ratio": cs, "cum_hellinger": ch, "cum_kl": cd})
        return out


LEDGER_COLUMNS = ("t", "h_t", "d_t", "sq_ratio", "cum_sq_ratio", "cum_hellinger", "cum_kl")


def exact_bound_ledger(mix: MixtureModel, mu: Environment, n: int) -> BoundLedger:
    """Expected per-step distances by exhaustive enumeration of ``X^t``, ``t <= n``.

    Expectations weight each history by its exact ``mu``-probability and skip
    histories of ``mu``-probability zero.
    """
    if n > MAX_EXACT_HORIZON:
        raise HorizonError(f"exhaustive ledger limited to n <= {MAX_EXACT_HORIZON}, got {n}")
    if not mu.is_measure:
        raise ValueError("the true environment must be a measure")
    w = mix.weight_of(mu)
    ledger = BoundLedger(horizon=n, weight=w, bound=-log_fraction(w))
    sums = [[0.0, 0.0, 0.0] for _ in range(n)]
    log_ratio_terms = []
    alphabet = mu.alphabet.symbols()

    # frontier of (history, mu mass, component masses)
    frontier = [((), Fraction(1), [env._exact_mass(()) for env in mix.environments])]
    for t in range(n):
        nxt = []
        acc = [[], [], []]
        for hist, mu_m, comp_m in frontier:
            mu_probs = mu._exact_next(hist)
            xi_m = sum((wk * ck for wk, ck in zip(mix.weights, comp_m)), Fraction(0))
            ext = [[env._exact_mass(hist + (a,)) for a in alphabet] for env in mix.environments]
            xi_probs = [sum((wk * e[a] for wk, e in zip(mix.weights, ext)), Fraction(0)) / xi_m
                        for a in alphabet]
            hell, kl, sq = distances_from_predictives(mu_probs, xi_probs)
            ledger.steps_evaluated += 1
            ledger.min_step_gap = min(ledger.min_step_gap, kl - hell)
            p = float(mu_m)
            acc[0].append(p * sq)
            acc[1].append(p * hell)
            acc[2].append(p * kl)
            for a in alphabet:
                if mu_probs[a] == 0:
                    continue
                child_mu = mu_m * mu_probs[a]
                child_comp = [e[a] for e in ext]
                nxt.append((hist + (a,), child_mu, child_comp))
                if t == n - 1:
                    xi_child = sum((wk * ck for wk, ck in zip(mix.weights, child_comp)), Fraction(0))
                    mu_child_mass = mu._exact_mass(hist + (a,))
                    log_ratio_terms.append(float(child_mu) * (
                        log_fraction(mu_child_mass) - log_fraction(xi_child)))
        ledger.expected_sq_ratio.append(math.fsum(acc[0]))
        ledger.expected_hellinger.append(math.fsum(acc[1]))
        ledger.expected_kl.append(math.fsum(acc[2]))
        frontier = nxt
    ledger.expected_log_ratio = math.fsum(log_ratio_terms)
    return ledger


@dataclass
class DeficiencyTrace:
    """Ratios ``xi(x_{1:k}) / mu(x_{1:k})`` for ``k = 1..n`` and their running maximum."""

    log_ratios: np.ndarray
    ratios: np.ndarray
    running_max: np.ndarray

    @property
    def deficiency(self) -> float:
        return float(self.running_max[-1]) if self.running_max.size else 1.0

    def bounded_by(self, c: float) -> bool:
        return bool(np.all(self.ratios <= c))

    def exceeds(self, c: float) -> bool:
        """True when the running maximum passes ``c``: evidence of non-randomness."""
        return not self.bounded_by(c)


def deficiency_trace(mix: MixtureModel, mu: Environment, omega: StringLike,
                     backend: str = LOGFLOAT) -> DeficiencyTrace:
    omega = as_string(omega, mu.alphabet)
    if backend == EXACT:
        logs = []
        ratios = []
        for k in range(1, len(omega) + 1):
            syms = omega.symbols[:k]
            m = mu._exact_mass(syms)
            if m == 0:
                raise ZeroHistoryError(f"omega leaves the support of mu at position {k}")
            r = mix._exact_mass(syms) / m
            ratios.append(r)
            logs.append(log_fraction(r))
        log_ratios = np.asarray(logs, dtype=np.float64)
        exact_running = []
        best = None
        for r in ratios:
            best = r if best is None or r > best else best
            exact_running.append(best)
        return DeficiencyTrace(log_ratios, np.asarray([float(r) for r in ratios]),
                               np.asarray([float(r) for r in exact_running]))
    log_mu = mu.log_prefix_masses(omega)[1:]
    if np.any(np.isneginf(log_mu)):
        k = int(np.argmax(np.isneginf(log_mu))) + 1
        raise ZeroHistoryError(f"omega leaves the support of mu at position {k}")
    log_xi = mixture_log_prefix_masses(mix, omega)[1:]
    log_ratios = log_xi - log_mu
    with np.errstate(over="ignore"):
        ratios = np.exp(log_ratios)
    return DeficiencyTrace(log_ratios, ratios, np.maximum.accumulate(ratios))


def mixture_log_prefix_masses(mix: MixtureModel, x: StringLike) -> np.ndarray:
    """``log xi(x_{1:k})`` for ``k = 0..n`` by log-sum-exp over components."""
    x = as_string(x, mix.alphabet)
    rows = np.stack([log_fraction(w) + env.log_prefix_masses(x) for w, env in mix.components])
    peak = np.max(rows, axis=0)
    safe = np.where(np.isneginf(peak), 0.0, peak)
    with np.errstate(divide="ignore"):
        out = safe + np.log(np.exp(rows - safe).sum(axis=0))
    return np.where(np.isneginf(peak), -np.inf, out)


def dominance_constant(rho: Environment, nu: Environment, n: int):
    """``max nu(x) / rho(x)`` over ``len(x) <= n`` (``math.inf`` if ``rho(x) = 0 < nu(x)``).

    Subtrees where ``nu`` vanishes are skipped, since a semimeasure is zero
    on every extension of a null string.
    """
    if n > 24:
        raise HorizonError("dominance enumeration limited to depth 24")
    best = Fraction(0)
    stack = [()]
    alphabet = nu.alphabet.symbols()
    while stack:
        syms = stack.pop()
        v = nu._exact_mass(syms)
        if v == 0:
            continue
        r = rho._exact_mass(syms)
        if r == 0:
            return math.inf
        best = max(best, v / r)
        if len(syms) < n:
            stack.extend(syms + (a,) for a in alphabet)
    return best


@dataclass(frozen=True)
class ConvergenceSummary:
    horizon: int
    final_deviation: float
    sup_after: dict
    cumulative_sq_deviation: float
    threshold: float
    exceed_count: int
    last_exceed: int  # 1-based step, 0 if never

    def infinitely_often(self, min_count: int) -> bool:
        """Finite-horizon reading of "infinitely often": at least ``min_count``
        exceedances with the last one in the final tenth of the horizon."""
        return self.exceed_count >= min_count and self.last_exceed > 0.9 * self.horizon


def convergence_report(predicted: Sequence[float], target: Sequence[float],
                       threshold: float = 0.05, checkpoints: Sequence[int] = ()) -> ConvergenceSummary:
    """Finite-horizon convergence statistics of ``predicted[t]`` against ``target[t]``.

    ``sup_after[N]`` is ``max_{t >= N} |predicted - target|``; the default
    checkpoints are the horizon divided by 10, 4 and 2.
    """
    p = np.asarray(predicted, dtype=np.float64)
    q = np.asarray(target, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"trajectory length mismatch: {p.shape} vs {q.shape}")
    n = p.shape[0]
    dev = np.abs(p - q)
    if not checkpoints:
        checkpoints = sorted({max(1, n // 10), max(1, n // 4), max(1, n // 2)}) if n else ()
    sup_after = {int(N): float(dev[N - 1:].max()) for N in checkpoints if 1 <= N <= n}
    hits = np.flatnonzero(dev >= threshold)
    return ConvergenceSummary(
        horizon=n,
        final_deviation=float(dev[-1]) if n else 0.0,
        sup_after=sup_after,
        cumulative_sq_deviation=math.fsum((dev * dev).tolist()),
        threshold=threshold,
        exceed_count=int(hits.size),
        last_exceed=int(hits[-1]) + 1 if hits.size else 0,
    )


def binary_path_distances(mu1: np.ndarray, xi1: np.ndarray):
    """Vectorized per-step distances along a binary path; see module docstring."""
    return _kernels.binary_step_distances(mu1, xi1)


def ledger_to_csv(ledger: BoundLedger) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=LEDGER_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in ledger.records():
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def ledger_to_json(ledger: BoundLedger) -> str:
    doc = {
        "horizon": ledger.horizon,
        "weight": str(ledger.weight),
        "bound": ledger.bound,
        "cumulative": {
            "sq_ratio": ledger.cumulative_expected_sq_ratio,
            "hellinger": ledger.cumulative_expected_hellinger,
            "kl": ledger.cumulative_expected_kl,
        },
        "chain": ledger.chain(),
        "records": ledger.records(),
    }
    return json.dumps(doc, indent=2)


def trace_to_csv(trace: DeficiencyTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "log_ratio", "ratio", "running_max"])
    for k, (lr, r, m) in enumerate(zip(trace.log_ratios, trace.ratios, trace.running_max), start=1):
        w.writerow([k, repr(float(lr)), repr(float(r)), repr(float(m))])
    return buf.getvalue()
