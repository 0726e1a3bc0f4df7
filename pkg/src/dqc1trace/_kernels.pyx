# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Signatures mirror ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def clenshaw(const double[::1] coeffs, const double[::1] t):
    """Evaluate sum_k coeffs[k] T_k(t) at every point of ``t``."""
    cdef Py_ssize_t n = coeffs.shape[0]
    cdef Py_ssize_t npts = t.shape[0]
    cdef Py_ssize_t i, k
    cdef double b0, b1, b2, x2
    out = np.empty(npts, dtype=np.float64)
    cdef double[::1] res = out
    if n == 0:
        out[:] = 0.0
        return out
    for i in range(npts):
        x2 = 2.0 * t[i]
        b1 = 0.0
        b2 = 0.0
        for k in range(n - 1, 0, -1):
            b0 = coeffs[k] + x2 * b1 - b2
            b2 = b1
            b1 = b0
        res[i] = coeffs[0] + t[i] * b1 - b2
    return out


def fwht_rows(double[:, ::1] x):
    """In-place unnormalized Walsh-Hadamard transform along axis 0."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t h = 1
    cdef Py_ssize_t i, j, c
    cdef double u, v
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                for c in range(m):
                    u = x[j, c]
                    v = x[j + h, c]
                    x[j, c] = u + v
                    x[j + h, c] = u - v
        h *= 2


cdef Py_ssize_t _find(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                      Py_ssize_t row, Py_ssize_t col) nogil:
    cdef Py_ssize_t lo = indptr[row]
    cdef Py_ssize_t hi = indptr[row + 1]
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) // 2
        if indices[mid] < col:
            lo = mid + 1
        else:
            hi = mid
    if lo < indptr[row + 1] and indices[lo] == col:
        return lo
    return -1


def walk_enumerate(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                   const double complex[::1] data, Py_ssize_t start, Py_ssize_t depth):
    """Closed-walk sums (A^t)_{start,start}, t = 0..depth, by explicit path enumeration.

    Returns ``(sums, entry_queries, position_queries)``. Every path prefix of
    length t < depth costs one entry query for A[v, start]; every prefix of
    length t < depth - 1 is expanded, costing one position and one entry query
    per nonzero of its end row.
    """
    sums = np.zeros(depth + 1, dtype=np.complex128)
    cdef double complex[::1] s = sums
    cdef long long entry_q = 0
    cdef long long pos_q = 0
    s[0] = 1.0
    if depth == 0:
        return sums, 0, 0
    cdef Py_ssize_t maxdeg = 0
    cdef Py_ssize_t r
    for r in range(indptr.shape[0] - 1):
        if indptr[r + 1] - indptr[r] > maxdeg:
            maxdeg = indptr[r + 1] - indptr[r]
    cdef Py_ssize_t cap = 1 + depth * (maxdeg if maxdeg > 0 else 1)
    cdef cnp.int64_t[::1] st_node = np.empty(cap, dtype=np.int64)
    cdef cnp.int64_t[::1] st_depth = np.empty(cap, dtype=np.int64)
    cdef double complex[::1] st_w = np.empty(cap, dtype=np.complex128)
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t v, t, p, loc
    cdef double complex w
    st_node[0] = start
    st_depth[0] = 0
    st_w[0] = 1.0
    top = 1
    with nogil:
        while top > 0:
            top -= 1
            v = st_node[top]
            t = st_depth[top]
            w = st_w[top]
            entry_q += 1
            loc = _find(indptr, indices, v, start)
            if loc >= 0:
                s[t + 1] = s[t + 1] + w * data[loc]
            if t <= depth - 2:
                pos_q += indptr[v + 1] - indptr[v]
                entry_q += indptr[v + 1] - indptr[v]
                for p in range(indptr[v], indptr[v + 1]):
                    st_node[top] = indices[p]
                    st_depth[top] = t + 1
                    st_w[top] = w * data[p]
                    top += 1
    return sums, entry_q, pos_q
