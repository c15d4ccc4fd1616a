"""The compiled kernels and the numpy fallback must agree."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from unimix import _kernels
from unimix._kernels import _fallback

try:
    from unimix._kernels import _ckernels
except ImportError:  # pure-Python install
    _ckernels = None

IMPLS = [pytest.param(_fallback, id="fallback")]
if _ckernels is not None:
    IMPLS.append(pytest.param(_ckernels, id="cython"))
needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


def test_backend_selected():
    assert _kernels.BACKEND_NAME in ("cython", "python")
    assert _kernels.COMPILED == (_kernels.BACKEND_NAME == "cython")


@pytest.mark.parametrize("impl", IMPLS)
def test_compensated_cumsum(impl):
    vals = np.array([1e16, 1.0, -1e16, 1.0] * 3)
    out = impl.compensated_cumsum(vals)
    assert out[-1] == 6.0
    assert list(out[:4]) == [1e16, 1e16 + 1.0, 1.0, 2.0]
    rng = np.random.default_rng(0)
    v = rng.normal(size=10_000)
    assert impl.compensated_cumsum(v)[-1] == pytest.approx(math.fsum(v), abs=1e-12)


@pytest.mark.parametrize("impl", IMPLS)
def test_run_opcodes(impl):
    assert impl.run_opcodes([0, 3], 8)[2:] == ([0] * 8, "looping")
    assert impl.run_opcodes([0, 1, 3], 8)[2:] == ([0, 1] * 4, "looping")
    assert impl.run_opcodes([2], 8)[2:] == ([], "exhausted")
    assert impl.run_opcodes([3, 0], 8) == (1, 0, [], "halted")


@pytest.mark.parametrize("impl", IMPLS)
def test_enumeration_count(impl):
    lengths, before, after, outputs = impl.enumerate_programs(8, 64)
    assert lengths.shape[0] == sum(4 * 3**k for k in range(8)) == 13120
    assert outputs.shape == (13120, 64)
    assert np.all(before <= after)


@needs_c
def test_enumeration_identical():
    a = _fallback.enumerate_programs(6, 32)
    b = _ckernels.enumerate_programs(6, 32)
    for x, y in zip(a, b):
        assert np.array_equal(np.asarray(x), np.asarray(y))


@needs_c
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50),
       st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50))
def test_step_distances_agree(mu, xi):
    n = min(len(mu), len(xi))
    mu = np.array(mu[:n])
    xi = np.array(xi[:n])
    for x, y in zip(_fallback.binary_step_distances(mu, xi), _ckernels.binary_step_distances(mu, xi)):
        assert np.allclose(x, y, rtol=1e-12, atol=1e-300, equal_nan=True)


@needs_c
@given(st.lists(st.integers(0, 1), max_size=300))
def test_mixture_path_agree(bits):
    thetas = [0.125, 0.25, 0.5, 0.875]
    lw = np.log([0.25] * 4)
    pa, la = _fallback.bernoulli_mixture_path(bits, thetas, lw)
    pb, lb = _ckernels.bernoulli_mixture_path(bits, thetas, lw)
    assert np.allclose(pa, pb, rtol=1e-12)
    assert np.allclose(la, lb, rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("impl", IMPLS)
def test_mixture_path_exact_small(impl):
    pred, log_post = impl.bernoulli_mixture_path([0], [0.25, 0.75], np.log([0.5, 0.5]))
    assert pred[0] == pytest.approx(0.5)
    assert pred[1] == pytest.approx(0.375)
    assert np.exp(log_post[1]) == pytest.approx([0.75, 0.25])


@pytest.mark.parametrize("impl", IMPLS)
def test_step_distances_known(impl):
    h, d, s = impl.binary_step_distances(np.array([0.5]), np.array([0.75]))
    assert h[0] == pytest.approx((math.sqrt(.5) - math.sqrt(.25)) ** 2 + (math.sqrt(.5) - math.sqrt(.75)) ** 2)
    assert d[0] == pytest.approx(0.5 * math.log(2) + 0.5 * math.log(2 / 3))
    assert s[0] == pytest.approx(h[0])
