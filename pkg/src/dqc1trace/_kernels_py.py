"""Pure-Python/numpy twins of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def clenshaw(coeffs, t):
    """Evaluate sum_k coeffs[k] T_k(t) at every point of ``t``."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if coeffs.size == 0:
        return np.zeros_like(t)
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    x2 = 2.0 * t
    for c in coeffs[:0:-1]:
        b1, b2 = c + x2 * b1 - b2, b1
    return coeffs[0] + t * b1 - b2


def fwht_rows(x):
    """In-place unnormalized Walsh-Hadamard transform along axis 0."""
    n, m = x.shape
    h = 1
    while h < n:
        view = x.reshape(n // (2 * h), 2, h, m)
        top = view[:, 0].copy()
        view[:, 0] += view[:, 1]
        view[:, 1] = top - view[:, 1]
        h *= 2


def walk_enumerate(indptr, indices, data, start, depth):
    """Closed-walk sums (A^t)_{start,start}, t = 0..depth, by explicit path enumeration.

    Same query accounting as the compiled version.
    """
    sums = np.zeros(depth + 1, dtype=np.complex128)
    sums[0] = 1.0
    if depth == 0:
        return sums, 0, 0
    indptr = [int(v) for v in indptr]
    indices = [int(v) for v in indices]
    data = [complex(v) for v in data]
    rows = {}

    def row(v):
        r = rows.get(v)
        if r is None:
            lo, hi = indptr[v], indptr[v + 1]
            r = rows[v] = (indices[lo:hi], data[lo:hi], dict(zip(indices[lo:hi], data[lo:hi])))
        return r

    acc = [0j] * (depth + 1)
    entry_q = 0
    pos_q = 0
    stack = [(start, 0, 1.0 + 0j)]
    while stack:
        v, t, w = stack.pop()
        cols, vals, lookup = row(v)
        entry_q += 1
        a = lookup.get(start)
        if a is not None:
            acc[t + 1] += w * a
        if t <= depth - 2:
            pos_q += len(cols)
            entry_q += len(cols)
            stack.extend((u, t + 1, w * a_vu) for u, a_vu in zip(cols, vals))
    sums[1:] = acc[1:]
    return sums, entry_q, pos_q
