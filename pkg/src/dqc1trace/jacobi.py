"""Periodic Jacobi matrices and their discriminants.

A periodic Jacobi matrix of size m carries a diagonal a_1..a_m, inner couplings
b_1..b_{m-1} between neighbours and a corner coupling b_m between the last and
first coordinates, twisted by a phase: entry (1, m) is b_m e^{i theta}. Its
characteristic polynomial splits as

    det(xI - A_theta) = h(x) - e cos(theta),    e = 2 b_1 ... b_m,

and Delta = h / e is the discriminant. Everything here works in the Chebyshev
basis over [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import least_squares

from .errors import (
    CoefficientOverflow,
    DegenerateGap,
    InvalidDiscriminant,
    InvalidInput,
    NoConvergence,
    RatioConditionFailed,
)
from .functions import TargetFunction
from .polyapprox import MinimaxResult, RemezOptions, approximate_degree
from .polynomial import Interval, Polynomial, chebyshev_points

UNIT = Interval(-1.0, 1.0)
EXTREMA_TOL = 1e-9
ROUNDTRIP_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class PeriodicJacobi:
    a: np.ndarray
    b: np.ndarray
    theta: float = 0.0

    def __post_init__(self):
        a = np.array(self.a, dtype=float).ravel()
        b = np.array(self.b, dtype=float).ravel()
        if a.size < 1 or a.size != b.size:
            raise InvalidInput(f"need len(a) == len(b) >= 1, got {a.size} and {b.size}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidInput("coefficients must be finite")
        if np.any(b <= 0):
            raise InvalidInput("couplings b must be strictly positive")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))

    @property
    def m(self) -> int:
        return self.a.size

    @property
    def e(self) -> float:
        return 2.0 * float(np.prod(self.b))

    def with_theta(self, theta: float) -> "PeriodicJacobi":
        return PeriodicJacobi(self.a, self.b, theta)

    def matrix(self, theta: float | None = None) -> np.ndarray:
        """Dense Hermitian A_theta (complex)."""
        th = self.theta if theta is None else float(theta)
        m = self.m
        mat = np.diag(self.a.astype(complex))
        idx = np.arange(m - 1)
        mat[idx, idx + 1] += self.b[:-1]
        mat[idx + 1, idx] += self.b[:-1]
        # for m = 1 both corner terms land on the single diagonal entry
        mat[0, m - 1] += self.b[-1] * np.exp(1j * th)
        mat[m - 1, 0] += self.b[-1] * np.exp(-1j * th)
        return mat

    def eigenvalues(self, theta: float | None = None) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix(theta))

    def to_json(self):
        return {"m": self.m, "a": self.a.tolist(), "b": self.b.tolist(), "theta": self.theta}

    @classmethod
    def from_json(cls, doc) -> "PeriodicJacobi":
        return cls(doc["a"], doc["b"], doc.get("theta", 0.0))

    @classmethod
    def chebyshev(cls, m: int, theta: float = 0.0) -> "PeriodicJacobi":
        """a = 0, b = 1/2: the discriminant is T_m."""
        return cls(np.zeros(m), np.full(m, 0.5), theta)


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    leading_positive: bool
    extrema: np.ndarray
    values: np.ndarray
    flagged: tuple = ()
    reason: str = ""


@dataclass(frozen=True, eq=False)
class Discriminant:
    poly: Polynomial
    leading_e: float = field(init=False)

    def __post_init__(self):
        p = self.poly.rebased(UNIT).trimmed()
        object.__setattr__(self, "poly", p)
        lead = p.leading_coefficient()
        object.__setattr__(self, "leading_e", 1.0 / lead if lead != 0 else math.inf)

    @property
    def m(self) -> int:
        return self.poly.degree

    @property
    def coeffs(self) -> np.ndarray:
        return self.poly.cheb_coeffs

    def __call__(self, x):
        return self.poly(x)

    def extrema(self) -> np.ndarray:
        """Critical points of Delta, descending, Newton-polished."""
        if self.m < 2:
            return np.zeros(0)
        return self.poly.derivative().real_roots(tol=1e-7)[::-1]

    def validate(self, tol: float = EXTREMA_TOL) -> ValidityReport:
        """Check leading coefficient > 0 and (-1)^j Delta(nu_j) >= 1 at the m-1 critical points."""
        lead_ok = bool(np.isfinite(self.leading_e) and self.leading_e > 0)
        nu = self.extrema()
        vals = self.poly(nu) if nu.size else np.zeros(0)
        if not lead_ok:
            return ValidityReport(False, False, nu, vals, reason="leading coefficient is not positive")
        if nu.size != self.m - 1 or (nu.size > 1 and np.min(-np.diff(nu)) <= 1e-12):
            return ValidityReport(False, True, nu, vals,
                                  reason=f"expected {self.m - 1} distinct real critical points, found {nu.size}")
        signed = vals * (-1.0) ** np.arange(1, nu.size + 1)
        if np.any(signed < 1.0 - tol):
            j = int(np.argmin(signed)) + 1
            return ValidityReport(False, True, nu, vals,
                                  reason=f"(-1)^j Delta(nu_j) = {signed[j - 1]:.3g} < 1 at j={j}")
        flagged = tuple(int(j) + 1 for j in np.flatnonzero(signed < 1.0))
        return ValidityReport(True, True, nu, vals, flagged=flagged)

    def relative_distance(self, other: "Discriminant") -> float:
        """max |c_k - c'_k| / max |c_k| over Chebyshev coefficients."""
        a, b = self.coeffs, other.coeffs
        n = max(a.size, b.size)
        a = np.pad(a, (0, n - a.size))
        b = np.pad(b, (0, n - b.size))
        return float(np.max(np.abs(a - b)) / np.max(np.abs(a)))

    def to_json(self):
        return self.poly.to_json()

    @classmethod
    def from_json(cls, doc) -> "Discriminant":
        return cls(Polynomial.from_json(doc))


def _tridiag_charpoly(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients of det(xI - T), T tridiagonal with diagonal a and off-diagonal b."""
    p_prev = np.array([1.0])
    if a.size == 0:
        return p_prev
    p = np.array([-a[0], 1.0])
    for k in range(1, a.size):
        nxt = C.chebsub(C.chebsub(C.chebmulx(p), a[k] * p), b[k - 1] ** 2 * p_prev)
        p_prev, p = p, nxt
    return p


def _h_coeffs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m = a.size
    if m == 1:
        return np.array([-a[0], 1.0])
    det_b = _tridiag_charpoly(a, b[: m - 1])
    det_c = _tridiag_charpoly(a[1 : m - 1], b[1 : m - 2])
    return C.chebsub(det_b, b[m - 1] ** 2 * det_c)


def discriminant(J: PeriodicJacobi) -> Discriminant:
    """Delta = h / e from the three-term determinant recurrences; independent of theta."""
    e = J.e
    if e == 0 or not np.isfinite(e):
        raise CoefficientOverflow("product of couplings under- or overflows; rescale b")
    coeffs = _h_coeffs(J.a, J.b) / e
    if not np.all(np.isfinite(coeffs)):
        raise CoefficientOverflow("discriminant coefficients overflow; rescale the inputs")
    return Discriminant(Polynomial(coeffs, UNIT))


def char_poly_check(J: PeriodicJacobi, theta: float | None = None) -> float:
    """max relative gap between det(xI - A_theta) and h(x) - e cos(theta) at 4m sample points."""
    th = J.theta if theta is None else float(theta)
    mat = J.matrix(th)
    xs = chebyshev_points(4 * J.m)
    eye = np.eye(J.m)
    lhs = np.array([np.linalg.det(x * eye - mat) for x in xs])
    h = Polynomial(_h_coeffs(J.a, J.b), UNIT)
    rhs = h(xs) - J.e * math.cos(th)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    return float(np.max(np.abs(lhs - rhs)) / scale)


def delta_identity_check(J: PeriodicJacobi, delta: Discriminant, theta: float | None = None) -> float:
    """max-norm of Delta(A_theta) - cos(theta) I."""
    th = J.theta if theta is None else float(theta)
    val = delta.poly.of_matrix(J.matrix(th))
    return float(np.max(np.abs(val - math.cos(th) * np.eye(J.m))))


# inverse problem


def _lanczos(nodes: np.ndarray, weights: np.ndarray):
    """Jacobi matrix with spectral measure sum_k w_k delta(nu_k), by Lanczos on diag(nodes)."""
    n = nodes.size
    q = np.sqrt(weights)
    q = q / np.linalg.norm(q)
    basis = np.zeros((n, n))
    alpha = np.zeros(n)
    beta = np.zeros(max(n - 1, 0))
    basis[:, 0] = q
    for k in range(n):
        w = nodes * basis[:, k]
        alpha[k] = basis[:, k] @ w
        if k == n - 1:
            break
        w -= basis[:, : k + 1] @ (basis[:, : k + 1].T @ w)
        w -= basis[:, : k + 1] @ (basis[:, : k + 1].T @ w)
        beta[k] = np.linalg.norm(w)
        if beta[k] <= 1e-300:
            raise InvalidDiscriminant("spectral weights are degenerate")
        basis[:, k + 1] = w / beta[k]
    return alpha, beta


def _spectral_guess(delta: Discriminant, nu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Direct construction with Dirichlet data at the critical points of Delta.

    At each eigenvalue nu_k of the matrix with the first row and column deleted,
    the residues of det(xI - A_theta) give (p + q)^2 = -e(Delta - 1)/D' and
    (p - q)^2 = -e(Delta + 1)/D' with p = b_1 u_k[first], q = b_m u_k[last].
    """
    m, e = delta.m, delta.leading_e
    t = delta.coeffs
    root_sum = -t[m - 1] / (2.0 * t[m]) if m >= 2 else -t[0] / t[1]
    if m == 1:
        return np.array([root_sum]), np.array([e / 2.0])
    dprime = np.array([np.prod(v - np.delete(nu, k)) for k, v in enumerate(nu)])
    vals = delta(nu)
    plus = np.clip(-e * (vals - 1.0) / dprime, 0.0, None)
    minus = np.clip(-e * (vals + 1.0) / dprime, 0.0, None)
    x = 0.5 * (np.sqrt(plus) + np.sqrt(minus))
    b1 = float(np.linalg.norm(x))
    if b1 <= 0:
        raise InvalidDiscriminant("all spectral weights vanish")
    inner_a, inner_b = _lanczos(nu, (x / b1) ** 2)
    a = np.concatenate([[root_sum - nu.sum()], inner_a])
    prod_inner = float(np.prod(inner_b)) if inner_b.size else 1.0
    bm = e / (2.0 * b1 * prod_inner)
    b = np.concatenate([[b1], inner_b, [bm]])
    return a, b


def _residual(params: np.ndarray, target: np.ndarray, m: int) -> np.ndarray:
    a, logb = params[:m], params[m:]
    b = np.exp(logb)
    h = _h_coeffs(a, b) / (2.0 * np.prod(b))
    return (h - target) / np.max(np.abs(target))


@dataclass(frozen=True)
class InverseReport:
    jacobi: PeriodicJacobi
    residual: float
    method: str
    restarts: int


def jacobi_from_discriminant(delta: Discriminant, tol: float = ROUNDTRIP_TOL, max_restarts: int = 32,
                             seed: int = 0, report: bool = False):
    """A periodic Jacobi matrix (theta = 0) whose discriminant is ``delta``.

    The spectral construction is exact in exact arithmetic; a least-squares
    polish on (a, log b) cleans up rounding, and seeded random restarts take
    over if the construction itself fails.
    """
    check = delta.validate()
    if not check.ok:
        raise InvalidDiscriminant(f"discriminant rejected: {check.reason}")
    m = delta.m
    target = np.zeros(m + 1)
    target[: delta.coeffs.size] = delta.coeffs[: m + 1]

    def score(a, b):
        return float(np.max(np.abs(_residual(np.concatenate([a, np.log(b)]), target, m))))

    def polish(a, b):
        x0 = np.concatenate([a, np.log(b)])
        sol = least_squares(_residual, x0, args=(target, m), method="trf", x_scale="jac",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * (2 * m))
        return sol.x[:m], np.exp(sol.x[m:])

    best = None
    method = "spectral"
    try:
        a, b = _spectral_guess(delta, check.extrema)
        if np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(b > 0):
            best = (score(a, b), a, b)
            if best[0] > 0.1 * tol:
                pa, pb = polish(a, b)
                s = score(pa, pb)
                if s < best[0]:
                    best, method = (s, pa, pb), "spectral+polish"
    except (InvalidDiscriminant, FloatingPointError, np.linalg.LinAlgError):
        best = None

    restarts = 0
    if best is None or best[0] > tol:
        rng = np.random.default_rng(seed)
        roots = delta.poly.roots().real
        mid = 0.5 * (roots.min() + roots.max())
        width = max(roots.max() - roots.min(), 1e-3)
        scale_b = (abs(delta.leading_e) / 2.0) ** (1.0 / m)
        for restarts in range(1, max_restarts + 1):
            a0 = mid + 0.1 * width * rng.standard_normal(m)
            b0 = np.full(m, 0.25 * width if m > 1 else scale_b) * np.exp(0.3 * rng.standard_normal(m))
            pa, pb = polish(a0, b0)
            s = score(pa, pb)
            if best is None or s < best[0]:
                best, method = (s, pa, pb), "restart"
            if s <= tol:
                break
    res, a, b = best
    if res > tol:
        raise NoConvergence(f"inverse problem stalled at relative residual {res:.3g}")
    J = PeriodicJacobi(a, b, 0.0)
    if report:
        return InverseReport(J, discriminant(J).relative_distance(delta), method, restarts)
    return J


# discriminants for the reduction


@dataclass(frozen=True, eq=False)
class ReductionDiscriminant:
    """Everything the reduction needs from the approximation side.

    ``sign`` is +1 or -1: Delta = sign (P*_d - P*_{d-1}) / (E_{d-1} - eta), so
    that Delta has a positive leading coefficient.
    """

    delta: Discriminant
    p_star: Polynomial
    E_dm1: float
    eta: float
    eta_prime: float
    sign: int
    degree: int
    epsilon: float
    minimax_d: MinimaxResult
    minimax_dm1: MinimaxResult

    @property
    def gap(self) -> float:
        return self.E_dm1 - self.eta

    def bound_residual(self, f: TargetFunction, n_grid: int = 4001) -> float:
        """max over the domain of |Delta - sign (f - P*_{d-1}) / (E_{d-1} - eta)| minus eta'."""
        x = f.domain.grid(n_grid)
        dev = self.delta(x) - self.sign * (f(x) - self.p_star(x)) / self.gap
        return float(np.max(np.abs(dev)) - self.eta_prime)

    def to_json(self):
        return {
            "epsilon": self.epsilon,
            "d": self.degree,
            "E_d": self.eta,
            "E_dm1": self.E_dm1,
            "eta": self.eta,
            "eta_prime": self.eta_prime,
            "sign": self.sign,
            "delta": self.delta.to_json(),
            "p_star": self.p_star.to_json(),
        }


def build_reduction_discriminant(f: TargetFunction, epsilon: float, opts: RemezOptions | None = None,
                                 min_degree: int = 1) -> ReductionDiscriminant:
    """Delta from the best approximants of degrees d and d-1, d the approximate degree at epsilon."""
    ad = approximate_degree(f, epsilon, opts)
    d = ad.degree
    if d < min_degree:
        raise RatioConditionFailed(f"approximate degree {d} is below the minimum {min_degree}")
    eta = ad.E_d
    e_dm1 = ad.E_dm1
    if eta / e_dm1 >= 0.5:
        raise RatioConditionFailed(f"E_d / E_(d-1) = {eta / e_dm1:.4g} >= 1/2 at d={d}")
    gap = e_dm1 - eta
    if gap < 1e-6:
        raise DegenerateGap(f"E_(d-1) - eta = {gap:.3g} is below 1e-6")
    g = ad.minimax_at_d.best_poly
    p = ad.minimax_at_dm1.best_poly
    raw = (g - p) / gap
    raw = Polynomial(np.pad(raw.cheb_coeffs, (0, max(0, d + 1 - raw.cheb_coeffs.size)))[: d + 1],
                     raw.ref_interval)
    sign = 1 if raw.leading_coefficient() > 0 else -1
    delta = Discriminant(raw * sign)
    if delta.m != d:
        raise DegenerateGap(f"Delta has degree {delta.m}, expected {d}")
    check = delta.validate()
    if not check.ok:
        raise InvalidDiscriminant(f"constructed Delta is not a discriminant: {check.reason}")
    return ReductionDiscriminant(
        delta=delta, p_star=p, E_dm1=e_dm1, eta=eta, eta_prime=eta / gap, sign=sign, degree=d,
        epsilon=epsilon, minimax_d=ad.minimax_at_d, minimax_dm1=ad.minimax_at_dm1,
    )


def random_jacobi(m: int, rng: np.random.Generator, b_range=(0.2, 1.0), a_scale: float = 0.5) -> PeriodicJacobi:
    """Random instance with a uniform in [-a_scale, a_scale] and b uniform in b_range."""
    a = rng.uniform(-a_scale, a_scale, m)
    b = rng.uniform(*b_range, m)
    return PeriodicJacobi(a, b, rng.uniform(0, 2 * math.pi))
