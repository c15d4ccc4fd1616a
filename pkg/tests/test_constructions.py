import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from unimix import constructions as C
from unimix.core import Bernoulli, CustomEnvironment, DegenerateError, Deterministic, MembershipError


class TestKL:
    def test_identity(self):
        for t in (F(1, 7), F(1, 2), F(5, 6)):
            assert C.kl_divergence(t, t) == 0.0

    def test_direct_value(self):
        assert C.kl_divergence(F(1, 2), F(1, 4)) == pytest.approx(0.143841036225890, rel=1e-13)

    def test_domain(self):
        with pytest.raises(ValueError):
            C.kl_divergence(F(1, 2), 0)
        with pytest.raises(ValueError):
            C.kl_divergence(F(1, 2), 1)
        with pytest.raises(ValueError):
            C.kl_divergence(F(3, 2), F(1, 2))
        assert C.kl_divergence(0, F(1, 2)) == pytest.approx(math.log(2))
        assert C.kl_divergence(1, 1) == 0.0

    def test_pinsker_type_grid(self):
        grid = [F(k, 40) for k in range(1, 40)]
        for p in grid[::3]:
            for a in grid[::2]:
                for b in grid[1::2]:
                    assert C.kl_divergence(p, a) + C.kl_divergence(p, b) >= (float(b) - float(a)) ** 2 - 1e-15


class TestKLMiddle:
    def test_symmetric(self):
        assert C.kl_middle(F(1, 4), F(3, 4)).kl_middle == pytest.approx(0.5, abs=1e-15)

    def test_root_solve_oracle(self):
        g = C.kl_middle(F(1, 4), F(1, 2))
        root = brentq(lambda m: C.kl_divergence(m, .25) - C.kl_divergence(m, .5), .25, .5, xtol=1e-15)
        assert g.kl_middle == pytest.approx(root, abs=1e-13)
        assert g.kl_middle == pytest.approx(0.369070, abs=1e-6)
        assert g.lipschitz_c == pytest.approx(math.log(3), rel=1e-15)

    def test_degenerate(self):
        with pytest.raises(DegenerateError):
            C.kl_middle(F(1, 3), F(1, 3))
        with pytest.raises(ValueError):
            C.kl_middle(F(1, 2), F(1, 3))

    def test_certificate_export(self):
        doc = json.loads(C.certificate_json(C.kl_middle(F(1, 4), F(1, 2))))
        assert set(doc) >= {"theta0", "theta1", "kl_middle", "lipschitz_c", "chunks"}
        assert doc["theta0"] == "1/4"


gaps = st.tuples(st.integers(1, 98), st.integers(1, 98)).filter(lambda p: p[0] < p[1]).map(
    lambda p: (F(p[0], 99), F(p[1], 99)))


@given(gaps)
def test_middle_certificate(gap):
    t0, t1 = gap
    g = C.kl_middle(t0, t1)
    assert t0 < g.kl_middle < t1
    assert abs(C.kl_divergence(g.kl_middle, t0) - C.kl_divergence(g.kl_middle, t1)) < 1e-12
    assert g.lipschitz_c > 0


def test_lipschitz_grid():
    t0, t1 = F(1, 4), F(1, 2)
    g = C.kl_middle(t0, t1)
    pts = np.linspace(float(t0), float(t1), 100)
    for theta in (t0, t1):
        base = C.kl_divergence(g.kl_middle, theta)
        for th_hat in pts:
            assert abs(C.kl_divergence(th_hat, theta) - base) <= g.lipschitz_c * abs(th_hat - g.kl_middle) + 1e-12
    # the same constant bounds the difference quotient over the whole square
    for a in pts:
        for b in pts[::7]:
            for theta in (t0, t1):
                diff = abs(C.kl_divergence(a, theta) - C.kl_divergence(b, theta))
                assert diff <= g.lipschitz_c * abs(a - b) + 1e-12


class TestDoublyRandom:
    def test_alternation(self):
        assert str(C.doubly_random_sequence(F(1, 2), 6)) == "010101"
        assert str(C.doubly_random_sequence(0.5, 6)) == "010101"

    def test_envelope(self):
        tb = C.kl_middle(F(1, 4), F(1, 2)).kl_middle
        x = C.doubly_random_sequence(tb, 10_000)
        n1 = np.cumsum(x.symbols)
        k = np.arange(1, 10_001)
        assert np.all(np.abs(n1 / k - tb) < 1 / k)
        assert np.all(np.abs(n1 - k * tb) <= 0.5 + 1e-9)

    def test_near_one(self):
        assert str(C.doubly_random_sequence(1 - 1e-9, 20)) == "1" * 20

    def test_domain(self):
        with pytest.raises(ValueError):
            C.doubly_random_sequence(1.0, 3)


@given(st.fractions(min_value=F(1, 1000), max_value=F(999, 1000), max_denominator=1000), st.integers(1, 400))
def test_doubly_random_envelope_property(tb, n):
    x = C.doubly_random_sequence(tb, n)
    n1 = 0
    for k, b in enumerate(x.symbols, start=1):
        n1 += b
        assert abs(n1 - k * tb) <= F(1, 2)


class TestThetaClass:
    def test_validation(self):
        with pytest.raises(ValueError):
            C.ThetaClass((F(1, 2), F(1, 4)), (F(1, 2), F(1, 2)))
        with pytest.raises(ValueError):
            C.ThetaClass((F(0), F(1, 2)), (F(1, 2), F(1, 2)))
        with pytest.raises(ValueError):
            C.ThetaClass((F(1, 4), F(1, 2)), (F(2, 3), F(2, 3)))

    def test_dyadic(self):
        tc = C.ThetaClass.dyadic(6)
        assert len(tc.thetas) == 63 and F(19, 64) in tc
        assert sum(tc.weights) == 1

    def test_gap_check(self):
        assert C.gap_check(C.ThetaClass.uniform([F(1, 4), F(1, 2)]), F(1, 4), F(1, 2))
        eighths = C.ThetaClass.uniform([F(k, 8) for k in range(1, 8)])
        assert not C.gap_check(eighths, F(1, 4), F(1, 2))
        truncated = C.ThetaClass.uniform([F(k, 16) for k in range(1, 16) if not 4 < k < 8])
        assert C.gap_check(truncated, F(1, 4), F(1, 2))
        with pytest.raises(MembershipError):
            C.gap_check(eighths, F(1, 4), F(1, 3))


class TestNonconvergenceBounds:
    def test_quarter_half(self):
        c0, bound = C.nonconvergence_bounds(C.kl_middle(F(1, 4), F(1, 2)), F(1, 2), F(1, 2))
        assert (c0, bound) == (F(1, 10), F(5))

    def test_symmetric_gap(self):
        g = C.kl_middle(F(1, 4), F(3, 4))
        assert g.lipschitz_c == pytest.approx(math.log(9))
        assert C.nonconvergence_bounds(g, F(1, 2), F(1, 2))[0] == F(1, 82)

    def test_singleton_limit(self):
        g = C.kl_middle(F(1, 4), F(1, 2))
        c0 = [C.nonconvergence_bounds(g, 1 - F(1, 10**k), F(1, 10**k))[0] for k in (2, 4, 8)]
        assert c0[0] < c0[1] < c0[2] < 1
        assert 1 - c0[2] < 1e-6

    def test_bound_equals_w0_over_c0(self):
        g = C.kl_middle(F(1, 5), F(2, 3))
        c0, bound = C.nonconvergence_bounds(g, F(1, 3), F(2, 3))
        assert bound == F(1, 3) / c0


class TestDiscrete:
    def test_first_chunks(self):
        q = C.discrete_diagonalize(C.harmonic_pair_measure(), 20)
        assert q.support[:3] == [1, 3, 7]
        assert q(1) == F(1, 2) and q(3) == F(1, 6) and q(2) == 0
        assert q.partial_mass == 1 - F(1, 21)
        for w in q.witnesses:
            assert w.holds
            assert w.p_value / w.q_value == w.ratio
        assert q.witnesses[-1].ratio <= F(20 * 21, 2**19)

    @pytest.mark.parametrize("N", [1, 5, 12])
    def test_partial_mass(self, N):
        assert C.discrete_diagonalize(C.harmonic_pair_measure(), N).partial_mass == 1 - F(1, N + 1)

    def test_tie_break_smallest(self):
        P = C.DiscreteSemimeasure(lambda x: F(1, 64))
        q = C.discrete_diagonalize(P, 5)
        assert q.support == [1, 2, 4, 8, 16]

    def test_near_ties_resolved_exactly(self):
        # floats cannot separate these; the exact comparison must
        target = 1500

        def ev(x):
            return F(1, 2**12) - (F(1, 10**40) if x == target else 0)

        P = C.DiscreteSemimeasure(ev, batch=lambda xs: np.full(xs.shape, 2.0**-12))
        q = C.discrete_diagonalize(P, 11)
        assert q.support[-1] == target
        assert q.support[:3] == [1, 2, 4]

    def test_batch_matches_scalar(self):
        a = C.discrete_diagonalize(C.harmonic_pair_measure(), 14)
        P = C.harmonic_pair_measure()
        b = C.discrete_diagonalize(C.DiscreteSemimeasure(P.evaluator), 14)
        assert a.support == b.support

    def test_defeats_any_multiple(self):
        q = C.discrete_diagonalize(C.harmonic_pair_measure(), 25)
        ratios = [w.ratio for w in q.witnesses]
        assert ratios[-1] < F(1, 10**4)
        assert all(b <= a for a, b in zip(ratios[6:], ratios[7:]))


class TestContinuous:
    def test_biased_coin(self):
        r = C.continuous_adversarial(Bernoulli(F(7, 10)), 0, 100)
        assert str(r.path) == "0" * 100
        assert r.log_mu_path[-1] == pytest.approx(100 * math.log(0.3), rel=1e-13)
        assert r.rho.mass(r.path) == 1
        assert r.envelope_holds()

    def test_fair_coin_tie_break(self):
        r = C.continuous_adversarial(Bernoulli(F(1, 2)), 0, 30)
        assert str(r.path) == "0" * 30
        assert r.log_mu_path[-1] == pytest.approx(-30 * math.log(2))

    def test_epsilon_envelope(self):
        r = C.continuous_adversarial(Bernoulli(F(51, 100)), F(1, 20), 60)
        assert r.envelope_holds()

    def test_nonstationary_measure(self):
        from unimix.core import MixtureModel

        mix = MixtureModel.uniform([Bernoulli(F(1, 5)), Bernoulli(F(4, 5))])
        r = C.continuous_adversarial(mix, 0, 40)
        assert r.envelope_holds()
        assert math.exp(r.log_mu_path[-1]) == pytest.approx(float(mix.mass(r.path)), rel=1e-9)

    def test_null_path(self):
        zero = CustomEnvironment(lambda s: F(1) if not s else F(0))
        with pytest.raises(DegenerateError):
            C.continuous_adversarial(zero, 0, 3)
        with pytest.raises(DegenerateError):
            C.continuous_adversarial(Deterministic(), 0, 3)

    @pytest.mark.parametrize("k", range(0, 41, 4))
    def test_half_power_over_range(self, k):
        theta = F(30 + k, 100)
        r = C.continuous_adversarial(Bernoulli(theta), 0, 100)
        assert r.log_mu_path[-1] <= -100 * math.log(2) + 1e-9


def test_suppression_rates_positive_off_gap():
    g = C.kl_middle(F(1, 4), F(1, 2))
    rates = C.suppression_rates(g, [F(1, 8), F(7, 8)])
    assert all(r > 0 for r in rates.values())
    assert C.suppression_rates(g, [F(1, 2)])[F(1, 2)] == pytest.approx(0.0, abs=1e-15)
