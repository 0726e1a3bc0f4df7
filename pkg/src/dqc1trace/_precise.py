"""Multiprecision exchange iteration (mpmath).

Used when E_d falls below what float64 can resolve, e.g. ratio tables of
entire functions at d >= 10. The float64 solution, when available, seeds the
references, so one or two exchanges usually suffice.
"""

from __future__ import annotations

import mpmath
import numpy as np

from .errors import DegenerateReferences, Dqc1TraceError, InvalidInput, NoConvergence, SingularSystem
from .polynomial import Polynomial


def _cheb_points_mp(lo, hi, n):
    if n == 1:
        return [(lo + hi) / 2]
    return [(lo + hi) / 2 + (hi - lo) / 2 * mpmath.sin(mpmath.pi * j / (2 * (n - 1)))
            for j in range(-n + 1, n, 2)]


def _clenshaw_mp(coeffs, t):
    b1 = b2 = mpmath.mpf(0)
    for c in coeffs[:0:-1]:
        b1, b2 = c + 2 * t * b1 - b2, b1
    return coeffs[0] + t * b1 - b2


class _Problem:
    def __init__(self, f, d):
        if f.mp_eval is None:
            raise InvalidInput("multiprecision remez needs a target with mp_eval")
        self.f = f
        self.d = d
        hull = f.domain.hull
        self.lo, self.hi = mpmath.mpf(hull.lo), mpmath.mpf(hull.hi)
        self.intervals = [(mpmath.mpf(iv.lo), mpmath.mpf(iv.hi)) for iv in f.domain.intervals]

    def to_t(self, x):
        return (2 * x - (self.lo + self.hi)) / (self.hi - self.lo)

    def solve(self, refs):
        n = len(refs)
        mat = mpmath.matrix(n, n)
        rhs = mpmath.matrix(n, 1)
        for i, x in enumerate(refs):
            t = self.to_t(x)
            tk_prev, tk = mpmath.mpf(1), t
            for k in range(self.d + 1):
                if k == 0:
                    mat[i, 0] = 1
                elif k == 1:
                    mat[i, 1] = t
                else:
                    tk_prev, tk = tk, 2 * t * tk - tk_prev
                    mat[i, k] = tk
            mat[i, n - 1] = (-1) ** i
            rhs[i] = self.f.mp_eval(x)
        try:
            sol = mpmath.lu_solve(mat, rhs)
        except ZeroDivisionError as exc:
            raise SingularSystem("multiprecision alternation system is singular") from exc
        coeffs = [sol[k] for k in range(self.d + 1)]
        return sol[n - 1], coeffs

    def err(self, coeffs, x):
        return self.f.mp_eval(x) - _clenshaw_mp(coeffs, self.to_t(x))

    def extrema(self, coeffs, n_grid, golden_iters):
        xs, es = [], []
        g = (mpmath.sqrt(5) - 1) / 2
        for lo, hi in self.intervals:
            grid = _cheb_points_mp(lo, hi, n_grid)
            vals = [self.err(coeffs, x) for x in grid]
            mags = [abs(v) for v in vals]
            for j, m in enumerate(mags):
                if (j > 0 and m < mags[j - 1]) or (j + 1 < len(mags) and m < mags[j + 1]):
                    continue
                s = 1 if vals[j] >= 0 else -1
                a, b = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
                best_x, best_v = grid[j], s * vals[j]
                c, e = b - g * (b - a), a + g * (b - a)
                fc, fe = s * self.err(coeffs, c), s * self.err(coeffs, e)
                for _ in range(golden_iters):
                    if fc >= fe:
                        b, e, fe = e, c, fc
                        c = b - g * (b - a)
                        fc = s * self.err(coeffs, c)
                    else:
                        a, c, fc = c, e, fe
                        e = a + g * (b - a)
                        fe = s * self.err(coeffs, e)
                for z, v in ((c, fc), (e, fe), (a, s * self.err(coeffs, a)), (b, s * self.err(coeffs, b))):
                    if v > best_v:
                        best_x, best_v = z, v
                xs.append(best_x)
                es.append(s * best_v)
        order = sorted(range(len(xs)), key=lambda k: xs[k])
        return [xs[k] for k in order], [es[k] for k in order]


def remez_mp(f, d, opts):
    from .polyapprox import MinimaxResult, RemezOptions, _alternating_subset, _single_exchange, remez

    dps = int(opts.dps)
    with mpmath.workdps(dps):
        prob = _Problem(f, d)
        try:
            seed = remez(f, d, RemezOptions(tol=opts.tol, max_iters=opts.max_iters,
                                            grid_factor=opts.grid_factor)).ref_points
            refs = [mpmath.mpf(float(x)) for x in seed]
        except Dqc1TraceError:
            refs = []
            pts = f.domain.reference_points(d + 2)
            refs = [mpmath.mpf(float(x)) for x in pts]
        n_ref = d + 2
        n_grid = max(opts.grid_factor * n_ref // 4, 48)
        golden_iters = int(dps * 2.5) + 10
        floor = mpmath.mpf(10) ** (-(dps - 5))
        for it in range(1, opts.max_iters + 1):
            delta, coeffs = prob.solve(refs)
            level = abs(delta)
            cx, ce = prob.extrema(coeffs, n_grid, golden_iters)
            k = max(range(len(ce)), key=lambda i: abs(ce[i]))
            max_err = abs(ce[k])
            if max_err - level <= opts.tol * max(level, floor) or max_err <= floor:
                hull = f.domain.hull
                poly = Polynomial(np.array([float(c) for c in coeffs]), hull)
                return MinimaxResult(
                    degree=d, best_poly=poly, error=float(max_err),
                    ref_points=np.array([float(x) for x in refs]),
                    sign=1 if delta >= 0 else -1, level=float(level), iterations=it,
                    precise_error=max_err,
                )
            pick = _alternating_subset(cx, ce, n_ref)
            if pick is None or all(abs(a - b) == 0 for a, b in zip(pick[0], refs)):
                ref_errs = np.array([float(prob.err(coeffs, x)) for x in refs])
                new = _single_exchange(np.array([float(x) for x in refs]), ref_errs,
                                       float(cx[k]), float(ce[k]))
                pick = ([mpmath.mpf(float(x)) for x in new], None)
            refs = list(pick[0])
            if min(b - a for a, b in zip(refs, refs[1:])) < opts.spacing_floor:
                raise DegenerateReferences(f"references collided at iteration {it} (d={d})")
        raise NoConvergence(f"multiprecision remez did not converge for d={d}")
