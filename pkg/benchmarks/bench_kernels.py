"""Compare the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each kernel is timed on both implementations with the same inputs (best of
``--repeat``), and the outputs are checked for agreement.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from unimix._kernels import _fallback

try:
    from unimix._kernels import _ckernels
except ImportError:
    _ckernels = None


def _cases():
    rng = np.random.default_rng(12345)
    bits = (rng.random(1_000_000) < 0.3).astype(np.int64)
    thetas = np.arange(1, 64) / 64.0
    logw = np.full(thetas.size, -np.log(thetas.size))
    small_bits = bits[:100_000]
    t = np.arange(1, 1_000_001, dtype=np.float64)
    mu1 = 0.5 * t ** -3
    xi1 = 0.5 * (mu1 + 0.5 * t ** -2)
    values = rng.standard_normal(1_000_000)
    return {
        "compensated_cumsum (n=1e6)": ("compensated_cumsum", (values,)),
        "binary_step_distances (n=1e6)": ("binary_step_distances", (mu1, xi1)),
        "bernoulli_mixture_path (n=1e5, K=63)": ("bernoulli_mixture_path", (small_bits, thetas, logw)),
        "bernoulli_mixture_path (n=1e6, K=2)": ("bernoulli_mixture_path",
                                                (bits, np.array([0.25, 0.5]), np.log([0.5, 0.5]))),
        "enumerate_programs (8 ops)": ("enumerate_programs", (8, 64)),
    }


def _agree(a, b):
    if isinstance(a, tuple):
        return all(_agree(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind == "f":
        return a.shape == b.shape and bool(np.allclose(a, b, rtol=1e-9, atol=1e-300))
    return bool(np.array_equal(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; only the fallback can be timed", file=sys.stderr)

    rows = []
    for label, (name, inputs) in _cases().items():
        py_fn = getattr(_fallback, name)
        py = min(timeit.repeat(lambda: py_fn(*inputs), number=1, repeat=args.repeat))
        row = {"kernel": label, "python_s": py, "compiled_s": None, "speedup": None, "agree": None}
        if _ckernels is not None:
            c_fn = getattr(_ckernels, name)
            c = min(timeit.repeat(lambda: c_fn(*inputs), number=1, repeat=args.repeat))
            row.update(compiled_s=c, speedup=py / c, agree=_agree(py_fn(*inputs), c_fn(*inputs)))
        rows.append(row)

    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':<{width}}  {'python':>10}  {'compiled':>10}  {'speedup':>8}  agree")
    for r in rows:
        c = "-" if r["compiled_s"] is None else f"{r['compiled_s'] * 1e3:8.2f}ms"
        s = "-" if r["speedup"] is None else f"{r['speedup']:7.1f}x"
        print(f"{r['kernel']:<{width}}  {r['python_s'] * 1e3:8.2f}ms  {c:>10}  {s:>8}  {r['agree']}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["agree"] in (None, True) for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
