"""Circuit-to-Hamiltonian reduction.

For a circuit U = U_m ... U_1 on n qubits and coefficients (a, b), the clock
Hamiltonian on m clock states is

    A = sum_t a_t |t-1><t-1| (x) I + sum_{t=1}^{m} b_t (|t mod m><t-1| (x) U_t + h.c.).

Basis index is ``t * 2^n + s`` for clock state t in 0..m-1 and register state
s. For an eigenvector |phi> of U with eigenvalue e^{i theta}, the states
|t> (x) U_t ... U_1 |phi> span an invariant subspace on which A acts as the
periodic Jacobi matrix A_theta with entry (1, m) equal to b_m e^{i theta}.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    CircuitTooDeep,
    DomainViolation,
    FactorMismatch,
    InvalidInput,
    NonPositiveCoupling,
    TooLarge,
)
from .functions import TargetFunction
from .jacobi import PeriodicJacobi, ReductionDiscriminant, build_reduction_discriminant, jacobi_from_discriminant
from .polyapprox import RemezOptions
from .polynomial import Polynomial
from .quantum import Circuit, Gate, OracleString, apply_gate, eigenphases, gate_matrix, hadamard_matrix, materialize

MAX_DENSE_DIM = 2**14
DOMAIN_TOL = 1e-8
NNZ_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ClockHamiltonian:
    circuit: Circuit
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float).ravel()
        b = np.array(self.b, dtype=float).ravel()
        m = len(self.circuit.gates)
        if m < 1 or a.size != m or b.size != m:
            raise InvalidInput(f"need len(a) == len(b) == number of gates >= 1; got {a.size}, {b.size}, {m}")
        if np.any(b <= 0):
            raise NonPositiveCoupling("all couplings b_t must be strictly positive")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.a.size

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    @property
    def dim(self) -> int:
        return self.m * self.circuit.dim

    def jacobi(self, theta: float = 0.0) -> PeriodicJacobi:
        return PeriodicJacobi(self.a, self.b, theta)

    def dense(self) -> np.ndarray:
        if self.dim > MAX_DENSE_DIM:
            raise TooLarge(f"dense A would have dimension {self.dim} > {MAX_DENSE_DIM}")
        size = self.circuit.dim
        m = self.m
        out = np.zeros((self.dim, self.dim), dtype=complex)

        def blk(r, c):
            return out[r * size:(r + 1) * size, c * size:(c + 1) * size]

        for t in range(m):
            blk(t, t)[...] += self.a[t] * np.eye(size)
        for t in range(1, m + 1):
            u = gate_matrix(self.circuit.gates[t - 1], self.n_qubits)
            blk(t % m, t - 1)[...] += self.b[t - 1] * u
            blk(t - 1, t % m)[...] += self.b[t - 1] * u.conj().T
        return out

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """A v without forming A."""
        size, m, n = self.circuit.dim, self.m, self.n_qubits
        x = np.asarray(v, dtype=complex).reshape(m, size)
        out = self.a[:, None] * x
        for t in range(1, m + 1):
            g = self.circuit.gates[t - 1]
            out[t % m] += self.b[t - 1] * apply_gate(x[t - 1], g, n)
            out[t - 1] += self.b[t - 1] * apply_gate(x[t % m], g.dagger(), n)
        return out.ravel()

    def to_json(self):
        return {"m": self.m, "n_qubits": self.n_qubits, "a": self.a.tolist(), "b": self.b.tolist(),
                "circuit": self.circuit.to_json()}


def build_hamiltonian(c: Circuit, a, b) -> ClockHamiltonian:
    return ClockHamiltonian(c, a, b)


# locality


def clock_width(m: int, encoding: str) -> int:
    if encoding == "binary":
        return max(1, math.ceil(math.log2(m)))
    if encoding == "unary":
        return m
    raise InvalidInput(f"unknown clock encoding {encoding!r}")


def clock_state_index(t: int, m: int, encoding: str) -> int:
    return t if encoding == "binary" else 1 << t


def encoded_terms(H: ClockHamiltonian, encoding: str = "binary"):
    """Yield (label, matrix) for each term of A in the encoded clock space.

    Clock qubits sit above the register qubits. In unary encoding clock state
    t is the one-hot string with qubit t set, and |t><t-1| acts only on clock
    qubits t and t-1: sigma^+_t sigma^-_{t-1}, while a diagonal term needs
    just the projector onto qubit t.
    """
    m, n = H.m, H.n_qubits
    w = clock_width(m, encoding)
    size = 2**n
    dim_c = 2**w
    eye_r = np.eye(size)
    if encoding == "unary" and w + n > 12:
        raise TooLarge("unary term inspection is limited to 12 qubits in total")

    def unary_op(pairs):
        op = np.array([[1.0]])
        for q in range(w - 1, -1, -1):
            op = np.kron(op, pairs.get(q, np.eye(2)))
        return op

    for t in range(m):
        if encoding == "binary":
            proj = np.zeros((dim_c, dim_c))
            proj[t, t] = 1.0
        else:
            proj = unary_op({t: np.diag([0.0, 1.0])})
        yield f"a{t + 1}", H.a[t] * np.kron(proj, eye_r)
    raise_, lower = np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([[0.0, 1.0], [0.0, 0.0]])
    for t in range(1, m + 1):
        if encoding == "binary":
            hop = np.zeros((dim_c, dim_c))
            hop[t % m, t - 1] = 1.0
        elif m == 1:
            hop = np.eye(2)
        else:
            hop = unary_op({t % m: raise_, t - 1: lower})
        u = gate_matrix(H.circuit.gates[t - 1], n)
        term = np.kron(hop, u)
        yield f"b{t}", H.b[t - 1] * (term + term.conj().T)


def support(op: np.ndarray, n_total: int, tol: float = 1e-12) -> tuple:
    """Qubits on which ``op`` acts nontrivially (op = I_q (x) rest fails)."""
    out = []
    for q in range(n_total):
        hi = 2 ** (n_total - 1 - q)
        t = op.reshape(hi, 2, 2 ** q, hi, 2, 2 ** q)
        reduced = 0.5 * np.einsum("aibcid->abcd", t)
        rebuilt = np.einsum("abcd,ij->aibcjd", reduced, np.eye(2)).reshape(op.shape)
        if np.max(np.abs(op - rebuilt)) > tol * max(1.0, np.max(np.abs(op))):
            out.append(q)
    return tuple(out)


@dataclass(frozen=True)
class LocalityReport:
    encoding: str
    clock_qubits: int
    max_gate_arity: int
    max_term_locality: int
    bound: int
    inspected: bool


def locality_report(H: ClockHamiltonian, encoding: str = "binary", inspect: bool | None = None) -> LocalityReport:
    """Term locality; with ``inspect`` the supports are measured on the dense terms."""
    w = clock_width(H.m, encoding)
    arity = max(g.arity for g in H.circuit.gates)
    total = w + H.n_qubits
    if inspect is None:
        inspect = total <= 10
    if inspect:
        worst = 0
        for _, term in encoded_terms(H, encoding):
            worst = max(worst, len(support(term, total)))
    else:
        worst = (w if encoding == "binary" else 2) + arity
    clock_part = w if encoding == "binary" else 2
    return LocalityReport(encoding, w, arity, worst, clock_part + arity, bool(inspect))


def encoding_isometry(H: ClockHamiltonian, encoding: str) -> np.ndarray:
    """Columns embed the m * 2^n clock-register basis into the encoded space."""
    w = clock_width(H.m, encoding)
    size = H.circuit.dim
    iso = np.zeros((2**w * size, H.dim))
    for t in range(H.m):
        c = clock_state_index(t, H.m, encoding)
        iso[c * size:(c + 1) * size, t * size:(t + 1) * size] = np.eye(size)
    return iso


def encoded_matrix(H: ClockHamiltonian, encoding: str) -> np.ndarray:
    return sum(term for _, term in encoded_terms(H, encoding))


# blocks and traces


@dataclass(frozen=True, eq=False)
class Block:
    theta: float
    jacobi: PeriodicJacobi
    vector: np.ndarray


def block_decompose(H: ClockHamiltonian) -> list[Block]:
    """One periodic Jacobi block per eigenphase of U, with multiplicity."""
    if H.n_qubits > 10:
        raise TooLarge("block decomposition is limited to 10 qubits")
    phases = eigenphases(materialize(H.circuit))
    return [Block(float(th), H.jacobi(th), vec) for th, vec in phases]


def block_spectrum(blocks) -> np.ndarray:
    return np.sort(np.concatenate([b.jacobi.eigenvalues() for b in blocks]))


def _guarded(values: np.ndarray, f) -> np.ndarray:
    domain = getattr(f, "domain", None)
    if domain is None:
        return values
    inside = domain.contains(values, tol=DOMAIN_TOL)
    if not np.all(inside):
        bad = values[~inside]
        raise DomainViolation(f"eigenvalue {bad[0]:.12g} lies outside the domain of f beyond {DOMAIN_TOL}")
    return domain.clamp(values)


def trace_f(H: ClockHamiltonian, f: Callable, path: str = "dense", blocks=None) -> float:
    """tr f(A) by a dense eigensolve or by summing tr f(A_theta) over blocks."""
    if path == "dense":
        ev = np.linalg.eigvalsh(H.dense())
        return float(np.sum(f(_guarded(ev, f))))
    if path == "blocks":
        blocks = blocks if blocks is not None else block_decompose(H)
        total = 0.0
        for blk in blocks:
            total += float(np.sum(f(_guarded(blk.jacobi.eigenvalues(), f))))
        return total
    raise InvalidInput(f"unknown trace path {path!r}")


def trace_poly(J: PeriodicJacobi, P: Polynomial, theta: float | None = None) -> float:
    return float(np.real(np.trace(P.of_matrix(J.matrix(theta)))))


@dataclass(frozen=True)
class ThetaReport:
    spread: float
    value: float
    degree_too_high: bool
    values: tuple


def theta_independence_check(target, P: Polynomial, n_phases: int = 8) -> ThetaReport:
    """Spread of tr P(A_theta) over phases in [0, 2 pi); ``target`` is a ClockHamiltonian or PeriodicJacobi."""
    J = target.jacobi() if isinstance(target, ClockHamiltonian) else target
    thetas = 2 * math.pi * np.arange(n_phases) / n_phases
    vals = [trace_poly(J, P, th) for th in thetas]
    return ThetaReport(float(max(vals) - min(vals)), vals[0], P.degree >= J.m, tuple(vals))


# end-to-end reduction


@dataclass(frozen=True, eq=False)
class ReductionBundle:
    f: TargetFunction
    epsilon: float
    disc: ReductionDiscriminant
    jacobi: PeriodicJacobi
    hamiltonian: ClockHamiltonian
    original_gates: int

    @property
    def m(self) -> int:
        return self.hamiltonian.m

    @property
    def delta(self):
        return self.disc.delta

    @property
    def p_star(self) -> Polynomial:
        return self.disc.p_star

    @property
    def E_dm1(self) -> float:
        return self.disc.E_dm1

    @property
    def eta(self) -> float:
        return self.disc.eta

    @property
    def eta_prime(self) -> float:
        return self.disc.eta_prime

    @property
    def padded_gates(self) -> int:
        return self.m - self.original_gates

    def to_json(self):
        doc = {
            "function": self.f.to_json(),
            "epsilon": self.epsilon,
            "d": self.disc.degree,
            "m": self.m,
            "E_d": self.disc.eta,
            "E_dm1": self.E_dm1,
            "eta": self.eta,
            "eta_prime": self.eta_prime,
            "sign": self.disc.sign,
            "a": self.jacobi.a.tolist(),
            "b": self.jacobi.b.tolist(),
            "original_gates": self.original_gates,
            "padded_gates": self.padded_gates,
            "delta": self.delta.to_json(),
            "p_star": self.p_star.to_json(),
            "circuit": self.hamiltonian.circuit.to_json(),
        }
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _bundle(f, epsilon, disc, circuit, n_original) -> ReductionBundle:
    J = jacobi_from_discriminant(disc.delta)
    H = ClockHamiltonian(circuit, J.a, J.b)
    return ReductionBundle(f, epsilon, disc, J, H, n_original)


def assemble_reduction(f: TargetFunction, epsilon: float, c: Circuit,
                       opts: RemezOptions | None = None, disc: ReductionDiscriminant | None = None) -> ReductionBundle:
    """Pad the circuit to m = d gates and build the clock Hamiltonian from the inverted Delta.

    ``disc`` may be passed to reuse one discriminant across many circuits.
    """
    disc = disc or build_reduction_discriminant(f, epsilon, opts)
    d = disc.degree
    if len(c.gates) > d:
        raise CircuitTooDeep(f"circuit has {len(c.gates)} gates but the approximate degree is {d}")
    return _bundle(f, epsilon, disc, c.padded(d), len(c.gates))


@dataclass(frozen=True)
class Verdict:
    lhs: float
    predicted: float
    bound: float
    passed: bool
    re_trace: float
    p_star_term: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.predicted)


def verify_error2(bundle: ReductionBundle, path: str = "dense") -> Verdict:
    """Compare tr f(A) / (m 2^n) with the prediction from Re tr U and tr P*_{d-1}(A_0)."""
    H = bundle.hamiltonian
    lhs = trace_f(H, bundle.f, path) / H.dim
    u = materialize(H.circuit)
    re_tr = float(np.real(np.trace(u))) / H.circuit.dim
    gap = bundle.E_dm1 - bundle.eta
    p_term = trace_poly(bundle.jacobi, bundle.p_star, 0.0) / H.m
    predicted = bundle.disc.sign * gap * re_tr + p_term
    bound = gap * bundle.eta_prime + 1e-7
    return Verdict(lhs, predicted, bound, abs(lhs - predicted) <= bound, re_tr, p_term)


def block_error1_residuals(bundle: ReductionBundle, blocks=None) -> np.ndarray:
    """Per block: |tr f(A_theta) - tr P*(A_theta) - s gap m cos theta| - gap eta' m (should be <= 1e-7)."""
    blocks = blocks if blocks is not None else block_decompose(bundle.hamiltonian)
    gap = bundle.E_dm1 - bundle.eta
    m = bundle.m
    out = []
    for blk in blocks:
        ev = _guarded(blk.jacobi.eigenvalues(), bundle.f)
        lhs = float(np.sum(bundle.f(ev))) - trace_poly(blk.jacobi, bundle.p_star)
        out.append(abs(lhs - bundle.disc.sign * gap * m * math.cos(blk.theta)) - gap * bundle.eta_prime * m)
    return np.array(out)


def verdict_csv(rows) -> str:
    """CSV of (trial, lhs, predicted, bound, pass) rows from verify_error2 sweeps."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "lhs", "predicted", "bound", "gap", "pass"])
    for i, v in enumerate(rows):
        w.writerow([i, repr(v.lhs), repr(v.predicted), repr(v.bound), repr(v.gap), int(v.passed)])
    return buf.getvalue()


# sparse instance


@dataclass(frozen=True, eq=False)
class SparseHamiltonianSpec:
    """s = 2^{r+1}; n = r * ell; three oracle strings of length 2^n."""

    r: int
    ell: int
    oracles: tuple

    def __post_init__(self):
        if self.r < 1 or self.ell < 1:
            raise InvalidInput("r and ell must be positive")
        oracles = tuple(o if isinstance(o, OracleString) else OracleString(o) for o in self.oracles)
        if len(oracles) != 3:
            raise InvalidInput("the sparse instance uses exactly three oracles")
        for o in oracles:
            if o.n != self.n:
                raise FactorMismatch(f"oracle on {o.n} qubits but r * ell = {self.n}")
        object.__setattr__(self, "oracles", oracles)

    @property
    def n(self) -> int:
        return self.r * self.ell

    @property
    def sparsity(self) -> int:
        return 2 ** (self.r + 1)

    @classmethod
    def from_n(cls, n: int, r: int, oracles) -> "SparseHamiltonianSpec":
        if n % r:
            raise FactorMismatch(f"r = {r} does not divide n = {n}")
        return cls(r, n // r, tuple(oracles))

    def factors(self) -> list[Gate]:
        """U_1 .. U_{3 ell + 3}: H-blocks, O_3, H-blocks, O_2, H-blocks, O_1.

        The product is O_1 H O_2 H O_3 H with H = H^{(x)n} split into ell
        blocks of H^{(x)r}, so tr U / 2^n is Trace_3(x_1, x_2, x_3).
        """
        hr = hadamard_matrix(self.r)
        layer = [Gate.raw(hr, tuple(range(j * self.r + self.r - 1, j * self.r - 1, -1))) for j in range(self.ell)]
        x1, x2, x3 = self.oracles
        return layer + [x3.gate()] + layer + [x2.gate()] + layer + [x1.gate()]


def row_sparsity(mat: np.ndarray, tol: float = NNZ_TOL) -> int:
    scale = max(1.0, float(np.max(np.abs(mat))))
    return int(np.max(np.sum(np.abs(mat) > tol * scale, axis=1)))


@dataclass(frozen=True)
class SparsityReport:
    bound: int
    measured: int
    factor_sparsity: tuple
    n_factors: int
    max_local_arity: int

    @property
    def ok(self) -> bool:
        return self.measured <= self.bound


def build_sparse_instance(spec: SparseHamiltonianSpec, f: TargetFunction, epsilon: float,
                          opts: RemezOptions | None = None, disc: ReductionDiscriminant | None = None):
    """Clock Hamiltonian over the factored Trace_3 circuit, with a measured sparsity report."""
    if spec.n > 10:
        raise TooLarge("sparse instances are limited to n <= 10")
    factors = spec.factors()
    disc = disc or build_reduction_discriminant(f, epsilon, opts)
    if len(factors) > disc.degree:
        raise CircuitTooDeep(f"{len(factors)} factors exceed the approximate degree {disc.degree}")
    circuit = Circuit(spec.n, tuple(factors))
    bundle = _bundle(f, epsilon, disc, circuit.padded(disc.degree), len(factors))
    dense = bundle.hamiltonian.dense()
    fs = tuple(row_sparsity(gate_matrix(g, spec.n)) for g in bundle.hamiltonian.circuit.gates)
    local = max((g.arity for g in factors if not g.is_diagonal), default=0)
    report = SparsityReport(spec.sparsity, row_sparsity(dense), fs, len(factors), local)
    return bundle, report
