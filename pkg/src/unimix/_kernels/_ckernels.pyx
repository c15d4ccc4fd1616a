# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_fallback``; same signatures."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, exp, sqrt, fabs, INFINITY

cnp.import_array()


def compensated_cumsum(values):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], k
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double total = 0.0, comp = 0.0, t, x
    for k in range(n):
        x = v[k]
        t = total + x
        if fabs(total) >= fabs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
        out[k] = total + comp
    return out_arr


def bernoulli_mixture_path(bits, thetas, log_weights):
    cdef cnp.int64_t[::1] b = np.ascontiguousarray(bits, dtype=np.int64)
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef double[::1] lw = np.ascontiguousarray(log_weights, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0], K = th.shape[0], t, k
    pred_arr = np.empty(n + 1, dtype=np.float64)
    post_arr = np.empty((n + 1, K), dtype=np.float64)
    cdef double[::1] pred = pred_arr
    cdef double[:, ::1] post = post_arr
    lt_arr = np.log(np.asarray(th))
    l1t_arr = np.log1p(-np.asarray(th))
    cdef double[::1] lt = lt_arr
    cdef double[::1] l1t = l1t_arr
    cdef cnp.int64_t n1 = 0, n0 = 0
    cdef double peak, acc, lm, norm, p
    for t in range(n + 1):
        if t > 0:
            if b[t - 1]:
                n1 += 1
            else:
                n0 += 1
        peak = -INFINITY
        for k in range(K):
            lm = lw[k] + n1 * lt[k] + n0 * l1t[k]
            post[t, k] = lm
            if lm > peak:
                peak = lm
        acc = 0.0
        for k in range(K):
            acc += exp(post[t, k] - peak)
        norm = peak + log(acc)
        p = 0.0
        for k in range(K):
            post[t, k] = post[t, k] - norm
            p += exp(post[t, k]) * th[k]
        pred[t] = p
    return pred_arr, post_arr


cdef inline double _u_minus_log1p(double u):
    if u == -1.0:
        return INFINITY
    if fabs(u) < 1e-3:
        return u * u * (0.5 - u * (1.0 / 3.0 - u * (0.25 - u * (0.2 - u / 6.0))))
    return u - log1p(u)


def binary_step_distances(mu1, xi1):
    cdef double[::1] m = np.ascontiguousarray(mu1, dtype=np.float64)
    cdef double[::1] x = np.ascontiguousarray(xi1, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0], i
    hell_arr = np.zeros(n, dtype=np.float64)
    kl_arr = np.zeros(n, dtype=np.float64)
    sq_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] hell = hell_arr
    cdef double[::1] kl = kl_arr
    cdef double[::1] sq = sq_arr
    cdef double diff, mu_a, delta, xi_a, u, root, h_on
    cdef int side
    for i in range(n):
        diff = x[i] - m[i]
        for side in range(2):
            if side == 0:
                mu_a = 1.0 - m[i]
                delta = -diff
            else:
                mu_a = m[i]
                delta = diff
            xi_a = mu_a + delta
            if mu_a > 0.0 and delta > mu_a:
                h_on = (sqrt(xi_a) - sqrt(mu_a)) * (sqrt(xi_a) - sqrt(mu_a))
                hell[i] += h_on
                sq[i] += h_on
                kl[i] += delta - mu_a * (log(xi_a) - log(mu_a))
            elif mu_a > 0.0:
                u = delta / mu_a
                root = sqrt(1.0 + u) if u > -1.0 else 0.0
                h_on = mu_a * u * u / ((1.0 + root) * (1.0 + root))
                hell[i] += h_on
                sq[i] += h_on
                kl[i] += mu_a * _u_minus_log1p(u)
            elif xi_a > 0.0:
                hell[i] += xi_a
                kl[i] += xi_a
    return hell_arr, kl_arr, sq_arr


cdef int _apply(int op, unsigned char* out, int* length, int n_max):
    # returns 0 exhausted, 1 looping, 2 halted
    cdef int room, k, cur
    if op == 0 or op == 1:
        if length[0] < n_max:
            out[length[0]] = op
            length[0] += 1
        return 0
    if op == 2:
        cur = length[0]
        room = n_max - cur
        if room > cur:
            room = cur
        for k in range(room):
            out[cur + k] = out[k]
        length[0] = cur + room
        return 0
    if length[0] == 0:
        return 2
    cur = length[0]
    for k in range(cur, n_max):
        out[k] = out[k - cur]
    length[0] = n_max
    return 1


_STATUS = ("exhausted", "looping", "halted")


def run_opcodes(ops, n_max):
    cdef int nm = n_max
    buf = bytearray(max(nm, 1))
    cdef unsigned char* out = buf
    cdef int length = 0, status = 0, consumed = 0, before = 0
    for op in ops:
        before = length
        status = _apply(<int>op, out, &length, nm)
        consumed += 1
        if status != 0:
            break
    return consumed, before, list(buf[:length]), _STATUS[status]


def enumerate_programs(int max_ops, int n_max):
    cdef Py_ssize_t count = 0, level = 4, k
    if max_ops > 63:
        raise ValueError("max_ops above 63 is not supported")
    for k in range(max_ops):
        count += level
        level *= 3
    lengths_arr = np.empty(count, dtype=np.int64)
    before_arr = np.empty(count, dtype=np.int64)
    after_arr = np.empty(count, dtype=np.int64)
    table_arr = np.full((count, max(n_max, 1)), 255, dtype=np.uint8)
    if max_ops <= 0:
        return lengths_arr, before_arr, after_arr, table_arr[:, :n_max]
    cdef cnp.int64_t[::1] lengths = lengths_arr
    cdef cnp.int64_t[::1] befores = before_arr
    cdef cnp.int64_t[::1] afters = after_arr
    cdef unsigned char[:, ::1] table = table_arr
    # explicit DFS stack: per depth, the buffer and next opcode to try
    stack_buf = np.zeros((max_ops + 1, max(n_max, 1)), dtype=np.uint8)
    cdef unsigned char[:, ::1] bufs = stack_buf
    cdef int[64] lens
    cdef int[64] next_op
    cdef int depth = 0, op, status, j, child_len
    cdef Py_ssize_t row = 0
    lens[0] = 0
    next_op[0] = 0
    while depth >= 0:
        if next_op[depth] > 3:
            depth -= 1
            continue
        op = next_op[depth]
        next_op[depth] += 1
        for j in range(lens[depth]):
            bufs[depth + 1, j] = bufs[depth, j]
        child_len = lens[depth]
        status = _apply(op, &bufs[depth + 1, 0], &child_len, n_max)
        lengths[row] = depth + 1
        befores[row] = lens[depth]
        afters[row] = child_len
        for j in range(child_len):
            table[row, j] = bufs[depth + 1, j]
        row += 1
        if status == 0 and depth + 1 < max_ops:
            depth += 1
            lens[depth] = child_len
            next_op[depth] = 0
    return lengths_arr, before_arr, after_arr, table_arr[:, :n_max]
