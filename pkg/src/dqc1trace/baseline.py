"""Classical sparse-access baseline.

A Hermitian matrix is exposed through two counted oracles: the entry oracle
returns A[i, j] and the position oracle returns the column of the j-th nonzero
of row i. The estimator samples diagonal indices uniformly and computes
[P(A)]_{ii} exactly by expanding closed walks of length <= deg P.

Query accounting follows the walk expansion literally. Every walk prefix of
length t < k ending at v costs one entry query for A[v, i] (does the walk
close?). Every prefix of length t <= k - 2 is extended, costing one position
query and one entry query per nonzero of row v. The cost per sample is
therefore Theta(s^(k-1)) for an s-regular pattern.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import InvalidInput, NotHermitian
from .polynomial import Polynomial


class SparseOracle:
    """Counted entry and position oracles over a compressed-row Hermitian matrix."""

    def __init__(self, csr: sp.csr_matrix):
        csr = sp.csr_matrix(csr, dtype=complex)
        csr.sum_duplicates()
        csr.sort_indices()
        self._csr = csr
        self.indptr = csr.indptr.astype(np.int64)
        self.indices = csr.indices.astype(np.int64)
        self.data = np.ascontiguousarray(csr.data)
        self.dim = csr.shape[0]
        self.degrees = np.diff(self.indptr)
        self.sparsity = int(self.degrees.max()) if self.dim else 0
        self.entry_queries = 0
        self.position_queries = 0

    @property
    def queries(self) -> int:
        return self.entry_queries + self.position_queries

    def entry(self, i: int, j: int) -> complex:
        self.entry_queries += 1
        lo, hi = self.indptr[i], self.indptr[i + 1]
        k = lo + np.searchsorted(self.indices[lo:hi], j)
        return complex(self.data[k]) if k < hi and self.indices[k] == j else 0j

    def position(self, i: int, j: int) -> int:
        """Column of the j-th nonzero of row i, or -1 past the end of the row."""
        self.position_queries += 1
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return int(self.indices[lo + j]) if j < hi - lo else -1

    def charge(self, entry: int, position: int):
        self.entry_queries += int(entry)
        self.position_queries += int(position)

    def matrix(self) -> sp.csr_matrix:
        return self._csr


def wrap_dense(A, tol: float = 1e-10) -> SparseOracle:
    mat = A if sp.issparse(A) else np.asarray(A)
    diff = abs(mat - mat.conj().T)
    worst = diff.max() if sp.issparse(mat) else np.max(diff)
    if worst > tol:
        raise NotHermitian(f"matrix is not Hermitian (deviation {worst:.3g})")
    return SparseOracle(sp.csr_matrix(mat))


@dataclass(frozen=True)
class WalkEstimate:
    value: float
    std_error: float
    samples: int
    queries_used: int
    entry_queries: int
    position_queries: int
    target_error: float | None = None


def _closed_walks_dp(oracle: SparseOracle, starts: np.ndarray, depth: int):
    """(A^t)_{ii} for t = 0..depth and the walk-expansion query charges, for each start i."""
    A = oracle.matrix()
    pattern = sp.csr_matrix((np.ones_like(oracle.data, dtype=np.int64), oracle.indices, oracle.indptr),
                            shape=A.shape)
    n = starts.size
    rows = np.zeros((n, oracle.dim), dtype=complex)
    rows[np.arange(n), starts] = 1.0
    counts = np.zeros((n, oracle.dim), dtype=np.int64)
    counts[np.arange(n), starts] = 1
    sums = np.zeros((n, depth + 1), dtype=complex)
    sums[:, 0] = 1.0
    entry_q = np.zeros(n, dtype=np.int64)
    pos_q = np.zeros(n, dtype=np.int64)
    col_at_start = A[:, starts].toarray().T if depth else None
    for t in range(depth):
        # walks of length t close with one more step back to the start
        sums[:, t + 1] = np.einsum("ij,ij->i", rows, col_at_start)
        entry_q += counts.sum(axis=1)
        if t <= depth - 2:
            expand = counts @ oracle.degrees
            pos_q += expand
            entry_q += expand
            rows = np.asarray((A.T @ rows.T).T)
            counts = np.asarray((pattern.T @ counts.T).T)
    return sums, entry_q, pos_q


def walk_trace_poly(oracle: SparseOracle, P: Polynomial, samples: int, seed: int, cache: bool = True,
                    target_error: float | None = None) -> WalkEstimate:
    """Estimate (1/D) tr P(A) from uniformly sampled diagonal entries of P(A).

    With ``cache`` the closed-walk sums are computed once per distinct index by
    sparse vector recurrences; without it every sample enumerates its walks
    one by one. Both charge the same queries to the oracle for every sample.
    """
    if samples < 1:
        raise InvalidInput("samples must be at least 1")
    k = P.degree
    mono = P.to_monomial()[: k + 1]
    rng = np.random.default_rng(seed)
    idx = rng.integers(oracle.dim, size=samples)
    e0, p0 = oracle.entry_queries, oracle.position_queries
    if cache:
        uniq, inverse = np.unique(idx, return_inverse=True)
        sums, eq, pq = _closed_walks_dp(oracle, uniq, k)
        diag = (sums @ mono).real[inverse]
        oracle.charge(eq[inverse].sum(), pq[inverse].sum())
    else:
        diag = np.empty(samples)
        for s, i in enumerate(idx):
            sums, eq, pq = kernels.walk_enumerate(oracle.indptr, oracle.indices, oracle.data, int(i), k)
            oracle.charge(eq, pq)
            diag[s] = float(np.real(sums @ mono))
    value = float(diag.mean())
    std_error = float(diag.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    de, dp = oracle.entry_queries - e0, oracle.position_queries - p0
    return WalkEstimate(value, std_error, samples, de + dp, de, dp, target_error)


def exact_normalized_trace(A, P: Polynomial) -> float:
    mat = A.toarray() if sp.issparse(A) else np.asarray(A)
    ev = np.linalg.eigvalsh(mat)
    return float(np.mean(P(ev)))


def circulant(dim: int, s: int) -> sp.csr_matrix:
    """s-sparse symmetric circulant with weight 1/s at offsets +-1 .. +-s/2 (identity for s = 1)."""
    if s == 1:
        return sp.identity(dim, format="csr", dtype=complex)
    if s % 2 or s >= dim:
        raise InvalidInput("s must be 1 or an even number below the dimension")
    offsets = [o for h in range(1, s // 2 + 1) for o in (h, -h)]
    mats = [sp.eye(dim, k=o, format="csr") + sp.eye(dim, k=o - np.sign(o) * dim, format="csr") for o in offsets]
    return sp.csr_matrix(sum(mats) / s, dtype=complex)


@dataclass(frozen=True)
class ScalingRow:
    s: int
    k: int
    D: int
    samples: int
    mean: float
    stderr: float
    queries_per_sample: float

    @property
    def ratio_to_s_pow_k(self) -> float:
        return self.queries_per_sample / float(self.s) ** self.k


def query_scaling_report(s_values, k_values, dim: int = 1024, samples: int = 32, seed: int = 0,
                         cache: bool = True) -> list[ScalingRow]:
    """Per-sample query counts of the walk estimator for P = T_k on circulants of sparsity s."""
    rows = []
    for s in s_values:
        oracle = wrap_dense(circulant(dim, s))
        for k in k_values:
            P = Polynomial.chebyshev_t(k)
            est = walk_trace_poly(oracle, P, samples, seed, cache=cache)
            rows.append(ScalingRow(s, k, dim, samples, est.value, est.std_error, est.queries_used / samples))
    return rows


def scaling_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "k", "D", "samples", "mean", "stderr", "queries_per_sample"])
    for r in rows:
        w.writerow([r.s, r.k, r.D, r.samples, repr(r.mean), repr(r.stderr), repr(r.queries_per_sample)])
    return buf.getvalue()
