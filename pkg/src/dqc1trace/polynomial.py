"""Intervals, unions of intervals, and Chebyshev-series polynomials."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

from . import kernels
from .errors import InvalidInput


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (-1.0 <= self.lo < self.hi <= 1.0):
            raise InvalidInput(f"need -1 <= lo < hi <= 1, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x, tol: float = 0.0):
        x = np.asarray(x)
        return (x >= self.lo - tol) & (x <= self.hi + tol)

    def chebyshev_points(self, n: int) -> np.ndarray:
        """n Chebyshev extreme points, increasing, endpoints included."""
        if n == 1:
            return np.array([0.5 * (self.lo + self.hi)])
        j = np.arange(-n + 1, n, 2)
        t = np.sin(np.pi * j / (2 * (n - 1)))
        return 0.5 * (self.lo + self.hi) + 0.5 * self.length * t


@dataclass(frozen=True)
class Domain:
    """Ordered, pairwise disjoint union of closed subintervals of [-1, 1]."""

    intervals: tuple[Interval, ...]

    def __post_init__(self):
        ivs = tuple(sorted(self.intervals, key=lambda iv: iv.lo))
        if not ivs:
            raise InvalidInput("domain needs at least one interval")
        for left, right in zip(ivs, ivs[1:]):
            if right.lo <= left.hi:
                raise InvalidInput("domain intervals must be pairwise disjoint")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def of(cls, *pairs: tuple[float, float]) -> "Domain":
        return cls(tuple(Interval(float(a), float(b)) for a, b in pairs))

    @classmethod
    def full(cls) -> "Domain":
        return cls.of((-1.0, 1.0))

    @property
    def lo(self) -> float:
        return self.intervals[0].lo

    @property
    def hi(self) -> float:
        return self.intervals[-1].hi

    @property
    def hull(self) -> Interval:
        return Interval(self.lo, self.hi)

    @property
    def total_length(self) -> float:
        return sum(iv.length for iv in self.intervals)

    def contains(self, x, tol: float = 0.0):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for iv in self.intervals:
            out |= iv.contains(x, tol)
        return out

    def clamp(self, x):
        """Project points onto the nearest point of the domain."""
        x = np.asarray(x, dtype=float)
        best = np.full(x.shape, np.inf)
        out = np.empty_like(x)
        for iv in self.intervals:
            y = np.clip(x, iv.lo, iv.hi)
            dist = np.abs(y - x)
            take = dist < best
            out = np.where(take, y, out)
            best = np.where(take, dist, best)
        return out

    def grid(self, n_per_interval: int) -> np.ndarray:
        """Chebyshev-clustered grid with ``n_per_interval`` points on every interval."""
        return np.concatenate([iv.chebyshev_points(n_per_interval) for iv in self.intervals])

    def reference_points(self, n: int) -> np.ndarray:
        """n increasing points spread over the intervals in proportion to their length."""
        lengths = np.array([iv.length for iv in self.intervals])
        share = lengths / lengths.sum() * n
        counts = np.floor(share).astype(int)
        for k in np.argsort(-(share - counts))[: n - counts.sum()]:
            counts[k] += 1
        pts = [iv.chebyshev_points(c) for iv, c in zip(self.intervals, counts) if c > 0]
        return np.concatenate(pts)

    def to_json(self):
        return [[iv.lo, iv.hi] for iv in self.intervals]


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Chebyshev series sum_k c_k T_k(t), t the affine image of x in ``ref_interval``."""

    cheb_coeffs: np.ndarray
    ref_interval: Interval = field(default_factory=lambda: Interval(-1.0, 1.0))

    def __post_init__(self):
        c = np.array(self.cheb_coeffs, dtype=float).ravel()
        if c.size == 0:
            c = np.zeros(1)
        c.setflags(write=False)
        object.__setattr__(self, "cheb_coeffs", c)

    # construction
    @classmethod
    def constant(cls, value: float, ref_interval: Interval | None = None) -> "Polynomial":
        return cls(np.array([float(value)]), ref_interval or Interval(-1.0, 1.0))

    @classmethod
    def chebyshev_t(cls, m: int) -> "Polynomial":
        c = np.zeros(m + 1)
        c[m] = 1.0
        return cls(c)

    @classmethod
    def from_monomial(cls, coeffs: Sequence[float], ref_interval: Interval | None = None) -> "Polynomial":
        """Build from power-basis coefficients in x (lowest degree first)."""
        ref = ref_interval or Interval(-1.0, 1.0)
        return cls(_power_to_cheb(coeffs, ref.lo, ref.hi), ref)

    # structure
    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.cheb_coeffs)
        return int(nz[-1]) if nz.size else 0

    def trimmed(self, tol: float = 0.0) -> "Polynomial":
        c = self.cheb_coeffs
        scale = max(np.max(np.abs(c)), 1e-300)
        keep = np.flatnonzero(np.abs(c) > tol * scale)
        n = int(keep[-1]) + 1 if keep.size else 1
        return Polynomial(c[:n], self.ref_interval)

    def _to_t(self, x):
        lo, hi = self.ref_interval.lo, self.ref_interval.hi
        return (2.0 * np.asarray(x, dtype=float) - (lo + hi)) / (hi - lo)

    def _scale(self):
        lo, hi = self.ref_interval.lo, self.ref_interval.hi
        return 2.0 / (hi - lo), -(lo + hi) / (hi - lo)

    # evaluation
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = np.ascontiguousarray(self._to_t(x).ravel())
        out = kernels.clenshaw(np.ascontiguousarray(self.cheb_coeffs), t)
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def of_matrix(self, mat: np.ndarray) -> np.ndarray:
        """Matrix polynomial p(M) by the matrix form of the Clenshaw recurrence."""
        mat = np.asarray(mat)
        eye = np.eye(mat.shape[0], dtype=mat.dtype)
        alpha, beta = self._scale()
        t = alpha * mat + beta * eye
        c = self.cheb_coeffs
        b1 = np.zeros_like(t)
        b2 = np.zeros_like(t)
        for ck in c[:0:-1]:
            b1, b2 = ck * eye + 2.0 * (t @ b1) - b2, b1
        return c[0] * eye + t @ b1 - b2

    # conversions
    def to_monomial(self) -> np.ndarray:
        """Power-basis coefficients in x, lowest degree first.

        The basis change runs in exact rational arithmetic; only the result is
        rounded, so the cancellation in T_k's power expansion costs nothing.
        """
        return _cheb_to_power(self.cheb_coeffs, self.ref_interval.lo, self.ref_interval.hi)

    def rebased(self, ref_interval: Interval) -> "Polynomial":
        """Same polynomial expressed over another reference interval."""
        if ref_interval == self.ref_interval:
            return self
        lo, hi = self.ref_interval.lo, self.ref_interval.hi
        series = np.polynomial.Chebyshev(self.cheb_coeffs, domain=[lo, hi])
        return Polynomial(series.convert(domain=[ref_interval.lo, ref_interval.hi]).coef, ref_interval)

    def leading_coefficient(self) -> float:
        """Coefficient of x^deg in the power basis."""
        d = self.degree
        alpha, _ = self._scale()
        lead = self.cheb_coeffs[d] * alpha**d
        return lead * (2.0 ** (d - 1) if d >= 1 else 1.0)

    def derivative(self) -> "Polynomial":
        alpha, _ = self._scale()
        if self.cheb_coeffs.size == 1:
            return Polynomial(np.zeros(1), self.ref_interval)
        return Polynomial(C.chebder(self.cheb_coeffs) * alpha, self.ref_interval)

    def roots(self) -> np.ndarray:
        """All complex roots in x (colleague-matrix eigenvalues)."""
        c = self.trimmed().cheb_coeffs
        if c.size <= 1:
            return np.array([])
        t = C.chebroots(c)
        lo, hi = self.ref_interval.lo, self.ref_interval.hi
        return 0.5 * (hi - lo) * t + 0.5 * (lo + hi)

    def real_roots(self, tol: float = 1e-8) -> np.ndarray:
        """Real roots, sorted, polished by a few Newton steps."""
        r = self.roots()
        scale = max(1.0, float(np.max(np.abs(r)))) if r.size else 1.0
        r = np.sort(r[np.abs(r.imag) <= tol * scale].real)
        dp = self.derivative()
        for _ in range(3):
            slope = dp(r)
            ok = np.abs(slope) > 0
            r = np.where(ok, r - np.where(ok, self(r), 0.0) / np.where(ok, slope, 1.0), r)
        return np.sort(r)

    # arithmetic
    def _aligned(self, other: "Polynomial"):
        other = other.rebased(self.ref_interval)
        n = max(self.cheb_coeffs.size, other.cheb_coeffs.size)
        a = np.zeros(n)
        b = np.zeros(n)
        a[: self.cheb_coeffs.size] = self.cheb_coeffs
        b[: other.cheb_coeffs.size] = other.cheb_coeffs
        return a, b

    def __add__(self, other):
        if isinstance(other, Polynomial):
            a, b = self._aligned(other)
            return Polynomial(a + b, self.ref_interval)
        c = self.cheb_coeffs.copy()
        c[0] += float(other)
        return Polynomial(c, self.ref_interval)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self.cheb_coeffs, self.ref_interval)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, Polynomial):
            a = scalar.rebased(self.ref_interval)
            return Polynomial(C.chebmul(self.cheb_coeffs, a.cheb_coeffs), self.ref_interval)
        return Polynomial(self.cheb_coeffs * float(scalar), self.ref_interval)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Polynomial(self.cheb_coeffs / float(scalar), self.ref_interval)

    def __repr__(self):
        return f"Polynomial(degree={self.degree}, ref=[{self.ref_interval.lo}, {self.ref_interval.hi}])"

    def to_json(self):
        return {
            "ref_interval": [self.ref_interval.lo, self.ref_interval.hi],
            "cheb_coeffs": [float(c) for c in self.cheb_coeffs],
        }

    @classmethod
    def from_json(cls, doc) -> "Polynomial":
        lo, hi = doc["ref_interval"]
        return cls(np.asarray(doc["cheb_coeffs"], dtype=float), Interval(float(lo), float(hi)))


@lru_cache(maxsize=None)
def _cheb_power_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Integer power-basis coefficients of T_0 .. T_{n-1}."""
    rows = [[1], [0, 1]]
    while len(rows) < n:
        a, b = rows[-1], rows[-2]
        nxt = [0] + [2 * v for v in a]
        for k, v in enumerate(b):
            nxt[k] -= v
        rows.append(nxt)
    return tuple(tuple(r) for r in rows[:n])


@lru_cache(maxsize=None)
def _power_cheb_table(n: int) -> tuple[tuple[Fraction, ...], ...]:
    """Chebyshev coefficients of t^0 .. t^{n-1} (from t T_j = (T_{j+1} + T_{j-1}) / 2)."""
    rows = [(Fraction(1),)]
    while len(rows) < n:
        prev = rows[-1]
        nxt = [Fraction(0)] * (len(prev) + 1)
        for j, v in enumerate(prev):
            if j == 0:
                nxt[1] += v
            else:
                nxt[j + 1] += v / 2
                nxt[j - 1] += v / 2
        rows.append(tuple(nxt))
    return tuple(rows[:n])


def _affine(lo: float, hi: float) -> tuple[Fraction, Fraction]:
    """t = alpha x + beta maps [lo, hi] onto [-1, 1]."""
    lo_f, hi_f = Fraction(lo), Fraction(hi)
    return 2 / (hi_f - lo_f), -(lo_f + hi_f) / (hi_f - lo_f)


def _compose(coeffs: Sequence[Fraction], alpha: Fraction, beta: Fraction) -> list[Fraction]:
    """Power coefficients of q(alpha y + beta) given those of q."""
    out = [Fraction(0)] * len(coeffs)
    power = [Fraction(1)]
    for c in coeffs:
        for k, v in enumerate(power):
            out[k] += c * v
        nxt = [Fraction(0)] * (len(power) + 1)
        for k, v in enumerate(power):
            nxt[k] += beta * v
            nxt[k + 1] += alpha * v
        power = nxt
    return out


def _cheb_to_power(cheb, lo: float, hi: float) -> np.ndarray:
    cheb = [Fraction(float(c)) for c in np.asarray(cheb, dtype=float)]
    table = _cheb_power_table(len(cheb))
    in_t = [Fraction(0)] * len(cheb)
    for c, row in zip(cheb, table):
        if c:
            for k, v in enumerate(row):
                in_t[k] += c * v
    alpha, beta = _affine(lo, hi)
    return np.array([float(v) for v in _compose(in_t, alpha, beta)])


def _power_to_cheb(power, lo: float, hi: float) -> np.ndarray:
    power = [Fraction(float(c)) for c in np.asarray(power, dtype=float).ravel()]
    if not power:
        return np.zeros(1)
    alpha, beta = _affine(lo, hi)
    in_t = _compose(power, 1 / alpha, -beta / alpha)
    table = _power_cheb_table(len(in_t))
    out = [Fraction(0)] * len(in_t)
    for c, row in zip(in_t, table):
        if c:
            for k, v in enumerate(row):
                out[k] += c * v
    return np.array([float(v) for v in out])


def monomial_roundtrip_error(poly: Polynomial) -> float:
    """Relative coefficient error of Chebyshev -> power -> Chebyshev."""
    back = Polynomial.from_monomial(poly.to_monomial(), poly.ref_interval)
    a, b = poly._aligned(back)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))


def chebyshev_points(n: int, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    return Interval(lo, hi).chebyshev_points(n)


def poly_from_string(expr: str) -> Polynomial:
    """Parse a power-basis polynomial such as ``"0.5 - x + 3x^2"``."""
    s = expr.replace(" ", "").replace("**", "^").replace("*", "")
    if not s:
        raise InvalidInput("empty polynomial expression")
    terms: dict[int, float] = {}
    for raw in s.replace("-", "+-").split("+"):
        if not raw:
            continue
        sign = -1.0 if raw.startswith("-") else 1.0
        body = raw.lstrip("-")
        if "x" in body:
            coef_s, _, power_s = body.partition("x")
            coef = float(coef_s) if coef_s else 1.0
            power = int(power_s[1:]) if power_s.startswith("^") else 1
            if power_s and not power_s.startswith("^"):
                raise InvalidInput(f"cannot parse term {raw!r}")
        else:
            coef, power = float(body), 0
        terms[power] = terms.get(power, 0.0) + sign * coef
    coeffs = np.zeros(max(terms) + 1)
    for k, v in terms.items():
        coeffs[k] = v
    return Polynomial.from_monomial(coeffs)

