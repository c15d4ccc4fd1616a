"""Reference implementations of the hot kernels.

Plain Python loops where the work is inherently sequential, numpy where it
vectorizes.  The compiled module ``_ckernels`` exposes the same functions
with the same signatures; ``unimix._kernels`` picks one at import time.
"""

import numpy as np


def compensated_cumsum(values):
    """Running sums of ``values`` with Neumaier compensation.

    Returns a float64 array ``s`` with ``s[k] = values[0] + ... + values[k]``.
    """
    values = np.asarray(values, dtype=np.float64)
    out = np.empty(values.shape[0], dtype=np.float64)
    total = 0.0
    comp = 0.0
    for k, v in enumerate(values.tolist()):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[k] = total + comp
    return out


def bernoulli_mixture_path(bits, thetas, log_weights):
    """Posterior path of a finite Bernoulli mixture along ``bits``.

    Returns ``(pred, log_post)``: ``pred[t]`` is the mixture probability of a
    one after the first ``t`` symbols (``t = 0..n``) and ``log_post[t, k]`` the
    log posterior weight of component ``k`` at the same point.
    """
    bits = np.asarray(bits, dtype=np.int64)
    thetas = np.asarray(thetas, dtype=np.float64)
    log_weights = np.asarray(log_weights, dtype=np.float64)
    n = bits.shape[0]
    n1 = np.concatenate(([0], np.cumsum(bits)))
    n0 = np.arange(n + 1) - n1
    log_mass = (
        log_weights[None, :]
        + n1[:, None] * np.log(thetas)[None, :]
        + n0[:, None] * np.log1p(-thetas)[None, :]
    )
    peak = log_mass.max(axis=1, keepdims=True)
    log_norm = peak + np.log(np.exp(log_mass - peak).sum(axis=1, keepdims=True))
    log_post = log_mass - log_norm
    pred = np.exp(log_post) @ thetas
    return pred, log_post


def _u_minus_log1p(u):
    # u - log(1 + u) >= 0; series near zero where log1p cancels
    u = np.asarray(u, dtype=np.float64)
    small = np.abs(u) < 1e-3
    us = np.where(small, u, 0.0)
    series = us * us * (0.5 - us * (1.0 / 3.0 - us * (0.25 - us * (0.2 - us / 6.0))))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = u - np.log1p(u)
    out = np.where(small, series, direct)
    return np.where(u == -1.0, np.inf, out)


def binary_step_distances(mu1, xi1):
    """Per-step (hellinger, kl, sq_ratio) between two binary predictives.

    ``mu1`` and ``xi1`` are the probabilities of symbol 1 under the true
    measure and the mixture; both are treated as full distributions.
    """
    mu1 = np.asarray(mu1, dtype=np.float64)
    xi1 = np.asarray(xi1, dtype=np.float64)
    diff = xi1 - mu1
    hell = np.zeros_like(mu1)
    kl = np.zeros_like(mu1)
    sq = np.zeros_like(mu1)
    for mu_a, delta in ((1.0 - mu1, -diff), (mu1, diff)):
        xi_a = mu_a + delta
        on = mu_a > 0.0
        # relative form where xi_a <= 2 mu_a (cancellation), direct form above
        big = on & (delta > mu_a)
        safe_mu = np.where(on, mu_a, 1.0)
        u = np.where(big, 0.0, delta / np.where(big, 1.0, safe_mu))
        root = np.sqrt(np.maximum(1.0 + u, 0.0))
        h_on = mu_a * u * u / ((1.0 + root) ** 2)
        d_on = mu_a * _u_minus_log1p(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            h_big = (np.sqrt(np.maximum(xi_a, 0.0)) - np.sqrt(mu_a)) ** 2
            d_big = delta - mu_a * (np.log(np.where(big, xi_a, 1.0)) - np.log(safe_mu))
        h_on = np.where(big, h_big, h_on)
        d_on = np.where(big, d_big, d_on)
        h_a = np.where(on, h_on, np.maximum(xi_a, 0.0))
        d_a = np.where(on, d_on, np.maximum(xi_a, 0.0))
        hell += h_a
        kl += d_a
        sq += np.where(on, h_on, 0.0)
    return hell, kl, sq


OP_ZERO, OP_ONE, OP_DOUBLE, OP_REPEAT = 0, 1, 2, 3


def _apply(op, out, n_max):
    """Apply one opcode to the output list in place; return the new status."""
    if op == OP_ZERO or op == OP_ONE:
        if len(out) < n_max:
            out.append(op)
        return "exhausted"
    if op == OP_DOUBLE:
        room = n_max - len(out)
        if room > 0:
            out.extend(out[:room])
        return "exhausted"
    if not out:
        return "halted"
    while len(out) < n_max:
        out.extend(out[: n_max - len(out)])
    return "looping"


def run_opcodes(ops, n_max):
    """Execute an opcode sequence; return ``(consumed_ops, out_before_last, output, status)``."""
    out = []
    status = "exhausted"
    consumed = 0
    before = 0
    for op in ops:
        before = len(out)
        status = _apply(op, out, n_max)
        consumed += 1
        if status != "exhausted":
            break
    return consumed, before, out, status


def enumerate_programs(max_ops, n_max):
    """All distinct consumed opcode strings of length 1..max_ops.

    A program stops being extended once it halts or loops, since the machine
    reads no further input.  Returns ``(lengths, before, after, outputs)``
    where ``outputs`` is an ``(count, n_max)`` uint8 array padded with 255.
    """
    lengths, befores, afters, outs = [], [], [], []

    def walk(out, depth):
        for op in (OP_ZERO, OP_ONE, OP_DOUBLE, OP_REPEAT):
            child = list(out)
            status = _apply(op, child, n_max)
            lengths.append(depth + 1)
            befores.append(len(out))
            afters.append(len(child))
            outs.append(child)
            if status == "exhausted" and depth + 1 < max_ops:
                walk(child, depth + 1)

    if max_ops > 0:
        walk([], 0)
    table = np.full((len(outs), n_max), 255, dtype=np.uint8)
    for row, o in enumerate(outs):
        table[row, : len(o)] = o
    return (
        np.asarray(lengths, dtype=np.int64),
        np.asarray(befores, dtype=np.int64),
        np.asarray(afters, dtype=np.int64),
        table,
    )
