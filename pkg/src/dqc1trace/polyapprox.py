"""Best uniform polynomial approximation on unions of intervals.

The exchange iteration works in the Chebyshev basis of the domain's convex hull.
At every step the alternation system

    g(x_i) + (-1)^i delta = f(x_i),    i = 0 .. d+1

is solved for the level ``delta`` and the coefficients of ``g``; the references
then move to the strongest alternating extrema of f - g. Signs are 0-based
throughout: the error of a converged result satisfies
``f(x_i) - p(x_i) = sign * (-1)^i * E``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import (
    DegenerateCertificate,
    DegenerateReferences,
    Dqc1TraceError,
    InvalidInput,
    NoConvergence,
    SearchExceeded,
    SingularSystem,
)
from .functions import TargetFunction
from .polynomial import Domain, Interval, Polynomial

log = logging.getLogger(__name__)

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class RemezOptions:
    tol: float = 1e-9
    max_iters: int = 80
    grid_factor: int = 64
    spacing_floor: float = 1e-12
    golden_iters: int = 60
    max_degree: int = 64
    # decimal digits for the multiprecision path; None keeps everything in float64
    dps: int | None = None


def certify_tol(error: float) -> float:
    return max(1e-9, 1e-12 * (1.0 + abs(error)))


@dataclass(frozen=True, eq=False)
class MinimaxResult:
    degree: int
    best_poly: Polynomial
    error: float
    ref_points: np.ndarray
    sign: int
    level: float = 0.0
    iterations: int = 0
    precise_error: object = None  # mpmath.mpf when the multiprecision path ran

    def to_json(self):
        return {
            "degree": self.degree,
            "error": self.error,
            "sign": self.sign,
            "ref_points": self.ref_points.tolist(),
            "iterations": self.iterations,
            "best_poly": self.best_poly.to_json(),
        }

    def errors_at_references(self, f: TargetFunction) -> np.ndarray:
        return f(self.ref_points) - self.best_poly(self.ref_points)

    def certificate(self, f: TargetFunction, grid_per_interval: int = 4001) -> "Certificate":
        """Check sign alternation with equal magnitude, and the sup-norm bound on a dense grid."""
        tol = certify_tol(self.error)
        errs = self.errors_at_references(f)
        pattern = self.sign * (-1.0) ** np.arange(errs.size) * self.error
        alternation_gap = float(np.max(np.abs(errs - pattern)))
        grid = np.concatenate([f.domain.grid(grid_per_interval), self.ref_points])
        grid_max = float(np.max(np.abs(f(grid) - self.best_poly(grid))))
        return Certificate(
            alternation_gap=alternation_gap,
            grid_max=grid_max,
            grid_excess=grid_max - self.error,
            tol=tol,
            n_refs=int(errs.size),
            ok=bool(alternation_gap <= tol and grid_max <= self.error + tol
                    and errs.size == self.degree + 2),
        )


@dataclass(frozen=True)
class Certificate:
    alternation_gap: float
    grid_max: float
    grid_excess: float
    tol: float
    n_refs: int
    ok: bool


@dataclass(frozen=True, eq=False)
class ApproxDegreeResult:
    epsilon: float
    degree: int
    E_d: float
    E_dm1: float
    minimax_at_d: MinimaxResult
    minimax_at_dm1: MinimaxResult | None = None
    evaluated: dict = field(default_factory=dict)


# ----------------------------------------------------------------------------
# one alternation solve


def _alternation_matrix(t: np.ndarray, d: int) -> np.ndarray:
    signs = (-1.0) ** np.arange(t.size)
    return np.column_stack([C.chebvander(t, d), signs])


def remez_step(f: TargetFunction, points, spacing_floor: float = 1e-12) -> tuple[float, Polynomial]:
    """Solve g(x_i) + (-1)^i delta = f(x_i) on d+2 references.

    Returns the signed level ``delta`` and ``g`` of degree <= d, expressed in the
    Chebyshev basis of the domain hull.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidInput("need at least two reference points")
    if np.any(np.diff(x) <= 0):
        raise InvalidInput("reference points must be strictly increasing")
    if not np.all(f.domain.contains(x, tol=1e-12)):
        raise InvalidInput("reference points must lie in the domain")
    if np.min(np.diff(x)) < spacing_floor:
        raise SingularSystem("reference points closer than the spacing floor")
    hull = f.domain.hull
    t = (2.0 * x - (hull.lo + hull.hi)) / hull.length
    d = x.size - 2
    mat = _alternation_matrix(t, d)
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularSystem(f"alternation system is singular (cond={cond:.3g})")
    sol = np.linalg.solve(mat, f(x))
    return float(sol[-1]), Polynomial(sol[:-1], hull)


# ----------------------------------------------------------------------------
# extremum search


def _golden_max(fun, lo: np.ndarray, hi: np.ndarray, iters: int):
    """Vectorised golden-section maximisation of ``fun`` on the brackets [lo, hi]."""
    a, b = lo.copy(), hi.copy()
    for _ in range(iters):
        c = b - _GOLDEN * (b - a)
        e = a + _GOLDEN * (b - a)
        left = fun(c) >= fun(e)
        b = np.where(left, e, b)
        a = np.where(left, a, c)
    best = 0.5 * (a + b)
    return best, fun(best)


def _local_extrema(f: TargetFunction, poly: Polynomial, n_grid: int, golden_iters: int):
    """Refined local extrema of |f - poly| on every interval, sorted by position."""
    xs, es = [], []
    for iv in f.domain.intervals:
        grid = iv.chebyshev_points(n_grid)
        err = f(grid) - poly(grid)
        mag = np.abs(err)
        left = np.concatenate([[-np.inf], mag[:-1]])
        right = np.concatenate([mag[1:], [-np.inf]])
        idx = np.flatnonzero((mag >= left) & (mag >= right))
        if idx.size == 0:
            continue
        sgn = np.where(err[idx] >= 0, 1.0, -1.0)
        lo = grid[np.maximum(idx - 1, 0)]
        hi = grid[np.minimum(idx + 1, grid.size - 1)]

        def signed_err(z, sgn=sgn):
            return sgn * (f(z) - poly(z))

        zbest, vbest = _golden_max(signed_err, lo, hi, golden_iters)
        # golden section never probes the bracket ends; compare against them explicitly
        for cand in (grid[idx], lo, hi):
            val = signed_err(cand)
            take = val > vbest
            zbest = np.where(take, cand, zbest)
            vbest = np.where(take, val, vbest)
        xs.append(zbest)
        es.append(sgn * vbest)
    if not xs:
        return np.array([]), np.array([])
    x = np.concatenate(xs)
    e = np.concatenate(es)
    order = np.argsort(x, kind="stable")
    return x[order], e[order]


def _alternating_subset(x, e, n: int):
    """Strongest n alternating extrema, or None when fewer than n alternate.

    Works on any sequences of real scalars (float64 or mpmath numbers).
    """
    if len(x) == 0:
        return None

    def sgn(v):
        return int(v > 0) - int(v < 0)

    # collapse runs of equal sign (and duplicate positions) to their strongest member
    px, pe = [x[0]], [e[0]]
    for xi, ei in zip(x[1:], e[1:]):
        if sgn(ei) * sgn(pe[-1]) >= 0 or xi <= px[-1]:
            if abs(ei) > abs(pe[-1]):
                px[-1], pe[-1] = xi, ei
        else:
            px.append(xi)
            pe.append(ei)
    if len(px) < n:
        return None
    while len(px) > n:
        mags = [abs(v) for v in pe]
        if len(px) - n == 1:
            drop = 0 if mags[0] < mags[-1] else len(px) - 1
            del px[drop], pe[drop]
            continue
        i = min(range(len(mags)), key=mags.__getitem__)
        if i == 0 or i == len(px) - 1:
            del px[i], pe[i]
            continue
        j = i - 1 if mags[i - 1] < mags[i + 1] else i + 1
        lo = min(i, j)
        del px[lo:lo + 2], pe[lo:lo + 2]
    return px, pe


def _single_exchange(refs: np.ndarray, ref_errs: np.ndarray, x_new: float, e_new: float) -> np.ndarray:
    """Insert the global extremum, dropping a neighbour so that signs keep alternating."""
    refs = refs.copy()
    s_new = np.sign(e_new)
    signs = np.sign(ref_errs)
    if x_new < refs[0]:
        if s_new == signs[0]:
            refs[0] = x_new
        else:
            refs = np.concatenate([[x_new], refs[:-1]])
    elif x_new > refs[-1]:
        if s_new == signs[-1]:
            refs[-1] = x_new
        else:
            refs = np.concatenate([refs[1:], [x_new]])
    else:
        j = int(np.searchsorted(refs, x_new)) - 1
        j = min(max(j, 0), refs.size - 2)
        if s_new == signs[j]:
            refs[j] = x_new
        else:
            refs[j + 1] = x_new
    return np.sort(refs)


# ----------------------------------------------------------------------------
# exchange iteration


def remez(f: TargetFunction, d: int, opts: RemezOptions | None = None) -> MinimaxResult:
    """Best uniform approximation of degree <= d with its equioscillation certificate."""
    opts = opts or RemezOptions()
    if d < 0:
        raise InvalidInput("degree must be nonnegative")
    if opts.dps is not None:
        from ._precise import remez_mp

        return remez_mp(f, d, opts)

    n_ref = d + 2
    n_grid = max(opts.grid_factor * n_ref, 64)
    refs = f.domain.reference_points(n_ref)
    if np.any(np.diff(refs) <= opts.spacing_floor):
        raise DegenerateReferences("domain too small for the requested number of references")
    f_scale = float(np.max(np.abs(f(f.domain.grid(257)))))
    best = None
    for it in range(1, opts.max_iters + 1):
        delta, poly = remez_step(f, refs, opts.spacing_floor)
        level = abs(delta)
        cx, ce = _local_extrema(f, poly, n_grid, opts.golden_iters)
        k = int(np.argmax(np.abs(ce)))
        max_err = float(abs(ce[k]))
        p_scale = float(np.sum(np.abs(poly.cheb_coeffs)))
        noise = 64.0 * _EPS * (1.0 + f_scale + p_scale)
        gap = max_err - level
        current = MinimaxResult(
            degree=d, best_poly=poly, error=max(max_err, level), ref_points=refs.copy(),
            sign=1 if delta >= 0 else -1, level=level, iterations=it,
        )
        if best is None or max_err < best.error:
            best = current
        if gap <= opts.tol * max(level, 1e-14) or gap <= noise:
            log.debug("remez d=%d converged in %d iterations, E=%.3e", d, it, max_err)
            return current
        pick = _alternating_subset(list(cx), list(ce), n_ref)
        new_refs = None if pick is None else np.array(pick[0])
        if new_refs is None or np.allclose(new_refs, refs, rtol=0, atol=1e-15):
            ref_errs = f(refs) - poly(refs)
            new_refs = _single_exchange(refs, ref_errs, float(cx[k]), float(ce[k]))
        if np.min(np.diff(new_refs)) < opts.spacing_floor:
            raise DegenerateReferences(f"references collided at iteration {it} (d={d})")
        refs = new_refs
    raise NoConvergence(f"remez did not converge for d={d} in {opts.max_iters} iterations", best=best)


# ----------------------------------------------------------------------------
# dual certificate


def dual_certificate(points, form: str = "divided") -> np.ndarray:
    """Weights h with sum_i h_i x_i^k = 0 for k <= d and sum_i |h_i| = 1.

    ``form="divided"`` returns the divided-difference weights
    h_i ~ 1 / prod_{j != i} (x_i - x_j), valid for any distinct points.
    ``form="symmetric"`` returns h_i ~ 1 / (x_i prod_{j != i} (x_i^2 - x_j^2)),
    which needs nonzero points with distinct magnitudes; it annihilates the odd
    moments only.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidInput("need at least two points")
    n = x.size
    if form == "divided":
        diffs = x[:, None] - x[None, :]
        np.fill_diagonal(diffs, 1.0)
        if np.min(np.abs(diffs)) < 1e-12:
            raise DegenerateCertificate("points are not distinct")
        log_mag = np.sum(np.log(np.abs(diffs)), axis=1)
        sign = np.prod(np.sign(diffs), axis=1)
    elif form == "symmetric":
        if np.min(np.abs(x)) < 1e-12:
            raise DegenerateCertificate("a point is zero; the symmetric form divides by x_i")
        sq = x[:, None] ** 2 - x[None, :] ** 2
        np.fill_diagonal(sq, 1.0)
        if np.min(np.abs(sq)) < 1e-12:
            raise DegenerateCertificate("two points share the same magnitude")
        log_mag = np.log(np.abs(x)) + np.sum(np.log(np.abs(sq)), axis=1)
        sign = np.sign(x) * np.prod(np.sign(sq), axis=1)
    else:
        raise InvalidInput(f"unknown form {form!r}")
    # normalise in log space; products of n-1 small gaps underflow quickly
    w = sign * np.exp(-(log_mag - log_mag.min()))
    h = w / np.sum(np.abs(w))
    if n > 0 and h[np.argmax(np.abs(h))] < 0:
        h = -h
    return h


def moment_residuals(h, points, d: int) -> np.ndarray:
    """sum_i h_i x_i^k for k = 0 .. d."""
    x = np.asarray(points, dtype=float)
    return np.array([np.sum(h * x**k) for k in range(d + 1)])


# ----------------------------------------------------------------------------
# approximate degree and ratio tables


class _Cache:
    def __init__(self, f: TargetFunction, opts: RemezOptions):
        self.f, self.opts, self.results = f, opts, {}

    def __call__(self, d: int) -> MinimaxResult:
        if d not in self.results:
            self.results[d] = remez(self.f, d, self.opts)
        return self.results[d]


def approximate_degree(f: TargetFunction, epsilon: float, opts: RemezOptions | None = None) -> ApproxDegreeResult:
    """Smallest d with E_d <= epsilon (doubling, then bisection on d)."""
    if not 0 < epsilon <= 1:
        raise InvalidInput("epsilon must lie in (0, 1]")
    opts = opts or RemezOptions()
    E = _Cache(f, opts)
    if E(0).error <= epsilon:
        d = 0
    else:
        lo, hi = 0, 1
        while E(hi).error > epsilon:
            lo, hi = hi, hi * 2
            if hi > opts.max_degree:
                if E(opts.max_degree).error > epsilon:
                    raise SearchExceeded(f"E_d > {epsilon} up to d = {opts.max_degree}")
                hi = opts.max_degree
        # invariant: E(lo) > epsilon >= E(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if E(mid).error <= epsilon:
                hi = mid
            else:
                lo = mid
        d = hi
    at_d = E(d)
    at_dm1 = E(d - 1) if d >= 1 else None
    return ApproxDegreeResult(
        epsilon=epsilon,
        degree=d,
        E_d=at_d.error,
        E_dm1=at_dm1.error if at_dm1 is not None else float("inf"),
        minimax_at_d=at_d,
        minimax_at_dm1=at_dm1,
        evaluated={k: v.error for k, v in sorted(E.results.items())},
    )


@dataclass(frozen=True)
class RatioRow:
    d: int
    E_d: float
    ratio: float | None
    certified: bool
    error: str = ""


def exact_floor(opts: RemezOptions) -> float:
    """Errors below this are indistinguishable from an exact representation."""
    if opts.dps is not None:
        return 10.0 ** (-(opts.dps - 8))
    return 5e-15


def error_ratio_table(f: TargetFunction, d_max: int, opts: RemezOptions | None = None,
                      d_min: int = 0) -> list[RatioRow]:
    """Rows (d, E_d, E_d / E_{d-1}, certified) for d = d_min .. d_max."""
    if d_max < 2:
        raise InvalidInput("d_max must be at least 2")
    opts = opts or RemezOptions()
    floor = exact_floor(opts)
    rows: list[RatioRow] = []
    prev = None
    start = max(0, d_min - 1)
    for d in range(start, d_max + 1):
        try:
            res = remez(f, d, opts)
            err = res.precise_error if res.precise_error is not None else res.error
            if float(err) <= floor:
                err = 0.0
            cert = res.certificate(f).ok
            msg = ""
        except Dqc1TraceError as exc:
            err, cert, msg = float("nan"), False, f"{type(exc).__name__}: {exc}"
        if prev is None or not np.isfinite(float(prev)) or not np.isfinite(float(err)):
            ratio = None
        elif float(err) == 0.0:
            ratio = 0.0
        else:
            ratio = float(err / prev)
        if d >= d_min:
            rows.append(RatioRow(d=d, E_d=float(err), ratio=ratio, certified=cert, error=msg))
        prev = err
    return rows


__all__ = [
    "ApproxDegreeResult",
    "Certificate",
    "Domain",
    "Interval",
    "MinimaxResult",
    "RatioRow",
    "RemezOptions",
    "approximate_degree",
    "certify_tol",
    "dual_certificate",
    "error_ratio_table",
    "moment_residuals",
    "remez",
    "remez_step",
]
