"""Finite Bayesian mixtures ``xi(x) = sum_nu w_nu nu(x)`` and their posteriors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .environments import Environment
from .errors import AlphabetError, MembershipError, ZeroHistoryError
from .prob import EXACT, LogProb, Prob, check_backend, log_fraction, logsumexp
from .strings import Alphabet, FiniteString, StringLike, as_string


class MixtureModel(Environment):
    """Weighted finite family of environments over one alphabet.

    Weights are exact positive rationals with sum at most one.  The mixture
    is itself an environment; it dominates each component,
    ``xi(x) >= w_nu nu(x)``.
    """

    kind = "mixture"

    def __init__(self, components: Iterable[tuple]):
        comps = [(Fraction(w), env) for w, env in components]
        if not comps:
            raise ValueError("a mixture needs at least one component")
        alphabet = comps[0][1].alphabet
        for w, env in comps:
            if w <= 0:
                raise ValueError(f"mixture weights must be > 0, got {w}")
            if env.alphabet != alphabet:
                raise AlphabetError("all mixture components must share an alphabet")
        total = sum((w for w, _ in comps), Fraction(0))
        if total > 1:
            raise ValueError(f"mixture weights sum to {total} > 1")
        self.components = tuple(comps)
        self.alphabet = alphabet
        self.weight_sum = total
        self.is_measure = total == 1 and all(env.is_measure for _, env in comps)

    @classmethod
    def uniform(cls, envs: Sequence[Environment]) -> "MixtureModel":
        w = Fraction(1, len(envs))
        return cls((w, env) for env in envs)

    @property
    def weights(self) -> tuple:
        return tuple(w for w, _ in self.components)

    @property
    def environments(self) -> tuple:
        return tuple(env for _, env in self.components)

    def __len__(self):
        return len(self.components)

    def __eq__(self, other):
        return isinstance(other, MixtureModel) and other.components == self.components

    def __hash__(self):
        return hash(("mixture", len(self.components)))

    def __repr__(self):
        inner = ", ".join(f"{w}: {env!r}" for w, env in self.components)
        return f"MixtureModel({inner})"

    def index_of(self, env: Environment) -> int:
        for k, (_, comp) in enumerate(self.components):
            if comp == env:
                return k
        raise MembershipError(f"{env!r} is not a component of this mixture")

    def weight_of(self, env: Environment) -> Fraction:
        return self.components[self.index_of(env)][0]

    def _exact_mass(self, syms):
        return sum((w * env._exact_mass(syms) for w, env in self.components), Fraction(0))

    def _log_mass(self, syms):
        return logsumexp(log_fraction(w) + env._log_mass(syms) for w, env in self.components)

    def _exact_next(self, syms):
        state = posterior_weights(self, FiniteString(syms, self.alphabet), EXACT)
        out = [Fraction(0)] * self.alphabet.size
        for wpost, (_, env) in zip(state.weights, self.components):
            if wpost == 0:
                continue
            for a, p in enumerate(env._exact_next(syms)):
                out[a] += wpost * p
        return out

    def _log_next(self, syms):
        state = posterior_weights(self, FiniteString(syms, self.alphabet), "logfloat")
        terms = [[] for _ in self.alphabet.symbols()]
        for wpost, (_, env) in zip(state.weights, self.components):
            if not wpost:
                continue
            for a, lp in enumerate(env._log_next(syms)):
                terms[a].append(wpost.log + lp)
        return [logsumexp(t) for t in terms]

    def describe(self):
        return {
            "kind": "mixture",
            "components": [
                {"weight": str(w), "environment": env.describe()} for w, env in self.components
            ],
        }


@dataclass(frozen=True)
class PosteriorState:
    """Posterior weights ``w_n^nu = w_nu nu(x) / xi(x)`` after observing ``history``."""

    history: FiniteString
    weights: tuple

    def as_floats(self) -> list:
        return [float(w) for w in self.weights]


def mixture_mass(mix: MixtureModel, x: StringLike, backend: str = EXACT) -> Prob:
    """``xi(x) = sum_nu w_nu nu(x)``."""
    return mix.mass(x, backend)


def posterior_weights(mix: MixtureModel, x: StringLike, backend: str = EXACT) -> PosteriorState:
    """Posterior weight of every component after ``x``.

    Raises ZeroHistoryError if ``xi(x) = 0``.
    """
    x = as_string(x, mix.alphabet)
    syms = x.symbols
    if check_backend(backend) == EXACT:
        joint = [w * env._exact_mass(syms) for w, env in mix.components]
        total = sum(joint, Fraction(0))
        if total == 0:
            raise ZeroHistoryError(f"mixture assigns zero mass to history {x}")
        return PosteriorState(x, tuple(j / total for j in joint))
    logs = [log_fraction(w) + env._log_mass(syms) for w, env in mix.components]
    total = logsumexp(logs)
    if total == -math.inf:
        raise ZeroHistoryError(f"mixture assigns zero mass to history {x}")
    return PosteriorState(x, tuple(LogProb(l - total if l != -math.inf else -math.inf)
                                   for l in logs))


def predictive(mix: MixtureModel, x: StringLike, backend: str = EXACT) -> list:
    """``[xi(a | x) for a in alphabet]`` as the posterior-weighted component conditionals."""
    return mix.next_probs(x, backend)
