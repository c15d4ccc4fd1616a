"""Acceptance criteria, one check per criterion at its stated tolerance.

Run under pytest (``pytest tests/test_acceptance.py -s``) or directly
(``python tests/test_acceptance.py``); either way one PASS/FAIL line is
printed per criterion.
"""

from __future__ import annotations

import json
import math
import sys
import time
from fractions import Fraction as F
from functools import lru_cache

import pytest

from unimix import constructions as C
from unimix import toy_m
from unimix.core import Bernoulli
from unimix.experiments import build_config, run

CRITERIA = {}


def criterion(number, title):
    def register(fn):
        CRITERIA[number] = (title, fn)
        return fn
    return register


def _key(values):
    return json.dumps(values, sort_keys=True)


@lru_cache(maxsize=None)
def _report(experiment, key):
    cfg = build_config(experiment, json.loads(key))
    t0 = time.perf_counter()
    rep = run(cfg)
    return rep, time.perf_counter() - t0


def report(experiment, **values):
    return _report(experiment, _key(values))


# configurations exercised by the criteria; criterion 11 reruns all of them
CONFIGS = [
    ("divergence", {"horizon": 1_000_000, "weights": ["1/2", "1/2"]}),
    ("bernoulli-mixture", {"mode": "periodic", "thetas": ["1/4", "3/4"], "horizon": 100, "backend": "exact"}),
    ("bound-check", {"mu": "3/10", "horizon": 12}),
    ("bound-check", {"mu": "1/2", "horizon": 12}),
    ("bound-check", {"mu": "7/10", "horizon": 12}),
    ("bernoulli-mixture", {"mode": "gappy", "thetas": ["1/4", "1/2"], "horizon": 10_000}),
    ("bernoulli-mixture", {"mode": "extended", "thetas": ["1/8", "1/4", "1/2", "7/8"], "horizon": 2000}),
    ("bernoulli-mixture", {"mode": "dense", "dyadic_m": 6, "theta0": "19/64", "seeds": 100,
                           "horizon": 10_000, "seed": 0}),
    ("diagonalize", {"mode": "discrete", "chunks": 20}),
    ("toy-m", {"max_program_bits": 16, "horizon": 32, "audit_max_len": 8}),
]


@criterion(1, "divergence constants c1, c2 at n=1e6 within 0.001, runtime < 5 s")
def c1():
    rep, secs = report(CONFIGS[0][0], **CONFIGS[0][1])
    c1_, c2_ = rep.summary["c1"], rep.summary["c2"]
    ok = abs(c1_ - 0.450) <= 0.001 and abs(c2_ - 0.358) <= 0.001 and secs < 5
    return ok, f"c1={c1_:.6f} c2={c2_:.6f} runtime={secs:.2f}s"


@criterion(2, "xi(1|0^{t-1}) / mu1(1|0^{t-1}) / t within 1% of w2 c2 / c_xi on [1e3, 1e5]")
def c2():
    rep, _ = report(CONFIGS[0][0], **CONFIGS[0][1])
    s = rep.summary
    ok = s["law_window"] == [1000, 100000] and s["law_max_rel_error"] <= 0.01
    return ok, f"constant={s['law_constant']:.6f} max_rel_error={s['law_max_rel_error']:.2e}"


@criterion(3, "periodic gap example: predictive exactly 1/2 then 3/8 alternating, n <= 100")
def c3():
    rep, _ = report(CONFIGS[1][0], **CONFIGS[1][1])
    # t = 1, 3, ... predict x_t = 0 with 1/2; t = 2, 4, ... predict x_t = 1 with 3/8
    # i.e. xi(x_{2n}|x_{<2n}) = 3/8 and xi(x_{2n+1}|x_{1:2n}) = 1/2
    vals = [r["xi_of_x_t"] for r in rep.records]
    ok = (len(vals) == 100 and all(isinstance(v, F) for v in vals)
          and all(v == (F(1, 2) if t % 2 == 1 else F(3, 8)) for t, v in enumerate(vals, start=1)))
    return ok, f"odd steps {rep.summary['odd_step_values']}, even steps {rep.summary['even_step_values']}"


@criterion(4, "exhaustive chain sq_ratio <= hellinger <= kl <= ln 3 at n=12 for each mu, runtime < 30 s")
def c4():
    total = 0.0
    ok = True
    parts = []
    for experiment, values in CONFIGS[2:5]:
        rep, secs = report(experiment, **values)
        total += secs
        s = rep.summary
        ok &= all(v for k, v in rep.flags.items() if k.startswith("chain:"))
        ok &= abs(s["bound"] - math.log(3)) < 1e-12
        parts.append(f"mu={s['mu']} slack(bound-kl)={s['slack']['bound-kl']:.4f}")
    ok &= total < 30
    return ok, "; ".join(parts) + f"; runtime={total:.1f}s"


@criterion(5, "h_t <= d_t at every evaluated step, >= 1e5 steps across experiments")
def c5():
    steps = violations = 0
    for experiment, values in CONFIGS:
        rep, _ = report(experiment, **values)
        if "steps" in rep.summary:
            steps += rep.summary["steps"]
            violations += rep.summary["h_le_d_violations"]
    ok = steps >= 100_000 and violations == 0
    return ok, f"steps={steps} violations={violations}"


@criterion(6, "gappy {1/4,1/2}: envelope, deficiency <= 5 vs both boundaries, deviation >= 0.05 i.o.")
def c6():
    rep, _ = report(CONFIGS[5][0], **CONFIGS[5][1])
    s, f = rep.summary, rep.flags
    ok = (abs(s["kl_middle"] - 0.369070) < 5e-7 and f["frequency_envelope"]
          and s["deficiency_theta0"] <= 5 and s["deficiency_theta1"] <= 5
          and f["deficiency_theta0<=bound"] and f["deficiency_theta1<=bound"]
          and s["exceed_count"] >= 100 and f["nonconvergence_infinitely_often"])
    return ok, (f"theta_bar={s['kl_middle']:.6f} deficiency=({s['deficiency_theta0']:.4f}, "
                f"{s['deficiency_theta1']:.4f}) exceed_count={s['exceed_count']} last={s['last_exceed']}")


@criterion(7, "extended gap: log-slope of posteriors of 1/8, 7/8 within 10% of delta by n=2000")
def c7():
    rep, _ = report(CONFIGS[6][0], **CONFIGS[6][1])
    fits = rep.summary["suppression"]
    ok = set(fits) == {"1/8", "7/8"} and all(v["rel_error"] <= 0.1 for v in fits.values())
    detail = " ".join(f"{k}: slope={-v['slope']:.5f} delta={v['delta']:.5f}" for k, v in fits.items())
    return ok, detail


@criterion(8, "dense dyadic m=6, mu=B(19/64), 100 seeds, n=1e4: |xi - theta0| <= 0.02 in >= 95 runs")
def c8():
    rep, _ = report(CONFIGS[7][0], **CONFIGS[7][1])
    s = rep.summary
    ok = s["runs"] == 100 and s["within_tolerance"] >= 95 and s["final_tolerance"] == 0.02
    return ok, f"within={s['within_tolerance']}/100 max_dev={s['max_abs_deviation']:.4f}"


@criterion(9, "diagonalization: chunk witnesses n <= 20, Q mass 1 - 1/21; mu(x*) <= 2^-100 on [0.3, 0.7]")
def c9():
    rep, _ = report(CONFIGS[8][0], **CONFIGS[8][1])
    ok = rep.flags["witness_ratio<=bound"] and rep.summary["partial_mass"] == 1 - F(1, 21)
    thetas = [F(k, 100) for k in range(30, 71)] + [F(1, 3), F(2, 3), F(3, 7), F(29, 41)]
    worst = -math.inf
    for th in thetas:
        r = C.continuous_adversarial(Bernoulli(th), 0, 100)
        worst = max(worst, r.log_mu_path[-1] + 100 * math.log(2))
    ok = ok and worst <= 1e-9
    return ok, f"partial_mass={rep.summary['partial_mass']} worst log(mu(x*) 2^100)={worst:.3f}"


@criterion(10, "toy-M at L=16: audit clean, det bound on 0^32 and (01)^16 with Km 4 and 6, runtime < 60 s")
def c10():
    toy_m.prior_table.cache_clear()
    toy_m._program_arrays.cache_clear()
    toy_m._program_strings.cache_clear()
    cfg = build_config(CONFIGS[9][0], CONFIGS[9][1])
    t0 = time.perf_counter()
    rep = run(cfg)
    secs = time.perf_counter() - t0
    s = rep.summary
    ok = rep.passed and s["zeros"]["km"] == 4 and s["alternating"]["km"] == 6 and secs < 60
    return ok, f"audit={s['audit']} km=({s['zeros']['km']}, {s['alternating']['km']}) runtime={secs:.1f}s"


@criterion(11, "every experiment rerun with identical config gives byte-identical reports")
def c11():
    mismatched = []
    for experiment, values in CONFIGS:
        cfg = build_config(experiment, values)
        first = run(cfg)
        second = run(cfg)
        for fmt in ("json", "csv"):
            if first.render(fmt) != second.render(fmt):
                mismatched.append(f"{experiment}/{fmt}")
    extra = build_config("diagonalize", {"mode": "continuous", "theta": "3/10"})
    if run(extra).render("csv") != run(extra).render("csv"):
        mismatched.append("diagonalize-continuous/csv")
    return not mismatched, f"configs={len(CONFIGS) + 1} mismatched={mismatched or 'none'}"


def _line(number):
    title, fn = CRITERIA[number]
    try:
        ok, detail = fn()
    except Exception as exc:  # report, then let pytest see the failure
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return ok, f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, line = _line(number)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_line(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
