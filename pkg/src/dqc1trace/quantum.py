"""Small exact quantum linear algebra: circuits, unitaries, DQC1 traces, Trace_k.

Qubit ordering is little-endian throughout: qubit 0 is the least significant
bit of a basis index. Inside a gate, ``targets[0]`` is the most significant
bit of the gate-local index, so CNOT with targets ``[c, t]`` has the usual
matrix with the control as the high bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from . import kernels
from .errors import DimensionMismatch, InvalidInput, LengthMismatch, NotUnitary, TooLarge

MAX_QUBITS = 12
UNITARY_TOL = 1e-10

_SQ2 = 1.0 / math.sqrt(2.0)
_FIXED = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CCSIGN": np.diag([1, 1, 1, 1, 1, 1, 1, -1]).astype(complex),
}
ARITY = {"I": 1, "H": 1, "X": 1, "Z": 1, "S": 1, "SDG": 1, "T": 1, "RZ": 1, "CNOT": 2, "CZ": 2, "CCSIGN": 3}
KINDS = tuple(ARITY) + ("RAW",)


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    targets: tuple
    angle: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        targets = tuple(int(q) for q in self.targets)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", targets)
        if kind not in KINDS:
            raise InvalidInput(f"unknown gate kind {self.kind!r}")
        if len(set(targets)) != len(targets) or any(q < 0 for q in targets):
            raise InvalidInput(f"gate targets must be distinct and nonnegative, got {targets}")
        if kind == "RAW":
            mat = np.array(self.matrix, dtype=complex)
            if mat.shape != (2 ** len(targets),) * 2:
                raise InvalidInput(f"RAW matrix shape {mat.shape} does not fit {len(targets)} targets")
            if np.max(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0]))) > UNITARY_TOL:
                raise NotUnitary("RAW gate matrix is not unitary within 1e-10")
            mat.setflags(write=False)
            object.__setattr__(self, "matrix", mat)
        else:
            if len(targets) != ARITY[kind]:
                raise InvalidInput(f"{kind} acts on {ARITY[kind]} qubit(s), got {len(targets)}")
            if kind == "RZ" and self.angle is None:
                raise InvalidInput("RZ needs an angle")

    @classmethod
    def raw(cls, matrix, targets) -> "Gate":
        return cls("RAW", tuple(targets), matrix=np.asarray(matrix))

    @property
    def arity(self) -> int:
        return len(self.targets)

    def unitary(self) -> np.ndarray:
        """Gate-local 2^k x 2^k matrix."""
        if self.kind == "RAW":
            return self.matrix
        if self.kind == "RZ":
            half = 0.5 * float(self.angle)
            return np.diag([np.exp(-1j * half), np.exp(1j * half)])
        return _FIXED[self.kind]

    @property
    def is_diagonal(self) -> bool:
        u = self.unitary()
        return bool(np.all(u[~np.eye(u.shape[0], dtype=bool)] == 0))

    def dagger(self) -> "Gate":
        return Gate.raw(self.unitary().conj().T, self.targets)

    def to_json(self):
        doc = {"kind": self.kind, "targets": list(self.targets)}
        if self.kind == "RZ":
            doc["angle"] = float(self.angle)
        if self.kind == "RAW":
            doc["matrix_re"] = self.matrix.real.tolist()
            doc["matrix_im"] = self.matrix.imag.tolist()
        return doc

    @classmethod
    def from_json(cls, doc) -> "Gate":
        kind = str(doc["kind"]).upper()
        if kind == "RAW":
            mat = np.asarray(doc["matrix_re"], dtype=float) + 1j * np.asarray(doc.get("matrix_im", 0.0), dtype=float)
            return cls.raw(mat, doc["targets"])
        return cls(kind, tuple(doc["targets"]), angle=doc.get("angle"))


def locality_limit(n_qubits: int) -> int:
    return max(3, math.ceil(math.log2(max(n_qubits, 1))))


@dataclass(frozen=True, eq=False)
class Circuit:
    """U = U_m ... U_1 with ``gates[0]`` applied first.

    Gates wider than ``locality_limit(n)`` are accepted only when diagonal:
    those are oracle queries, not local gates.
    """

    n_qubits: int
    gates: tuple = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        if self.n_qubits < 1:
            raise InvalidInput("a circuit needs at least one qubit")
        limit = locality_limit(self.n_qubits)
        for g in gates:
            if max(g.targets) >= self.n_qubits:
                raise InvalidInput(f"gate {g.kind} targets qubit {max(g.targets)} of a {self.n_qubits}-qubit circuit")
            if g.arity > limit and not g.is_diagonal:
                raise InvalidInput(f"non-diagonal gate on {g.arity} qubits exceeds the locality limit {limit}")

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def __len__(self):
        return len(self.gates)

    def padded(self, m: int) -> "Circuit":
        """Append identity gates up to m gates in total."""
        if len(self.gates) > m:
            raise InvalidInput(f"circuit already has {len(self.gates)} > {m} gates")
        return Circuit(self.n_qubits, self.gates + tuple(Gate("I", (0,)) for _ in range(m - len(self.gates))))

    def to_json(self):
        return {"n_qubits": self.n_qubits, "gates": [g.to_json() for g in self.gates]}

    @classmethod
    def from_json(cls, doc) -> "Circuit":
        return cls(int(doc["n_qubits"]), tuple(Gate.from_json(g) for g in doc.get("gates", [])))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path) -> "Circuit":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read circuit file {path}: {exc}") from exc
        return cls.from_json(doc)


def random_circuit(n_qubits: int, n_gates: int, rng: np.random.Generator,
                   kinds: Sequence[str] = ("H", "S", "T", "X", "Z", "RZ", "CNOT", "CZ", "CCSIGN")) -> Circuit:
    kinds = [k for k in kinds if ARITY[k] <= n_qubits]
    gates = []
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        targets = tuple(int(q) for q in rng.choice(n_qubits, ARITY[kind], replace=False))
        angle = float(rng.uniform(0, 2 * math.pi)) if kind == "RZ" else None
        gates.append(Gate(kind, targets, angle=angle))
    return Circuit(n_qubits, tuple(gates))


def hadamard_matrix(n: int) -> np.ndarray:
    """H^{(x)n} as a dense real matrix."""
    return scipy.linalg.hadamard(2**n).astype(float) / math.sqrt(2**n)


# simulation


def apply_gate(state: np.ndarray, gate: Gate, n_qubits: int) -> np.ndarray:
    """Apply a gate to a state vector (N,) or to every column of an (N, K) array."""
    vec = state.ndim == 1
    psi = state.reshape(2**n_qubits, -1)
    cols = psi.shape[1]
    u = gate.unitary()
    k = gate.arity
    if gate.is_diagonal and k > 3:
        idx = np.arange(2**n_qubits)
        local = np.zeros_like(idx)
        for q in gate.targets:
            local = (local << 1) | ((idx >> q) & 1)
        out = psi * np.diag(u)[local][:, None]
        return out.ravel() if vec else out
    tensor = psi.reshape((2,) * n_qubits + (cols,))
    axes = [n_qubits - 1 - q for q in gate.targets]
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, tensor, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    out = out.reshape(2**n_qubits, cols)
    return out.ravel() if vec else out


def apply_circuit(c: Circuit, state: np.ndarray) -> np.ndarray:
    out = np.asarray(state, dtype=complex)
    for g in c.gates:
        out = apply_gate(out, g, c.n_qubits)
    return out


def gate_matrix(gate: Gate, n_qubits: int) -> np.ndarray:
    """A single gate embedded in the full 2^n space."""
    return apply_gate(np.eye(2**n_qubits, dtype=complex), gate, n_qubits)


def materialize(c: Circuit) -> np.ndarray:
    """Dense unitary of the circuit."""
    if c.n_qubits > MAX_QUBITS:
        raise TooLarge(f"dense materialization is limited to {MAX_QUBITS} qubits")
    return apply_circuit(c, np.eye(c.dim, dtype=complex))


def unitarity_residual(u: np.ndarray) -> float:
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))


@dataclass(frozen=True)
class EigenPhases:
    theta: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return self.theta.size

    def __iter__(self):
        return iter(zip(self.theta, self.vectors.T))


def eigenphases(u: np.ndarray, tol: float = 1e-8) -> EigenPhases:
    """Eigenphases in [0, 2 pi) with an orthonormal eigenbasis, from the complex Schur form.

    A normal matrix has a diagonal Schur factor, so the Schur vectors are
    eigenvectors and stay orthonormal across degenerate phases.
    """
    u = np.asarray(u, dtype=complex)
    if unitarity_residual(u) > tol:
        raise NotUnitary(f"matrix is not unitary (residual {unitarity_residual(u):.3g})")
    tri, z = scipy.linalg.schur(u, output="complex")
    theta = np.mod(np.angle(np.diag(tri)), 2 * math.pi)
    theta = np.where(theta >= 2 * math.pi - 1e-14, 0.0, theta)
    return EigenPhases(theta, z)


def normalized_trace(u: np.ndarray) -> complex:
    return complex(np.trace(u) / u.shape[0])


# DQC1


@dataclass(frozen=True)
class TraceEstimate:
    mean: float
    std_error: float
    shots: int
    exact: float | None = None
    part: str = "re"

    def to_json(self):
        return {"mean": self.mean, "std_error": self.std_error, "shots": self.shots,
                "exact": self.exact, "part": self.part}


def hadamard_test_p0(u: np.ndarray, imag: bool = False) -> float:
    """Probability of reading 0 on the clean qubit, by density-matrix simulation.

    Clean qubit in |0><0|, register maximally mixed, then H, controlled-U,
    optionally S^dagger, H on the clean qubit.
    """
    n_dim = u.shape[0]
    rho = np.kron(np.diag([1.0, 0.0]), np.eye(n_dim) / n_dim).astype(complex)
    had = np.kron(_FIXED["H"], np.eye(n_dim))
    ctrl = scipy.linalg.block_diag(np.eye(n_dim), u)
    ops = [had, ctrl]
    if imag:
        ops.append(np.kron(_FIXED["SDG"], np.eye(n_dim)))
    ops.append(had)
    for op in ops:
        rho = op @ rho @ op.conj().T
    return float(np.real(np.trace(rho[:n_dim, :n_dim])))


def dqc1_sample(target, shots: int, seed: int, imag: bool = False, batch_size: int = 4096) -> TraceEstimate:
    """Sampled Hadamard-test estimate of Re (or Im) tr U / 2^n.

    Each shot is a +/-1 outcome with P(+1) = (1 + Re tau) / 2, tau the
    normalized trace (Im tau for the S^dagger variant). Batches draw from
    seeds spawned off ``seed`` by batch index, so results do not depend on
    how batches are scheduled.
    """
    if shots < 1:
        raise InvalidInput("shots must be at least 1")
    u = materialize(target) if isinstance(target, Circuit) else np.asarray(target, dtype=complex)
    tau = normalized_trace(u)
    value = tau.imag if imag else tau.real
    p0 = min(max(0.5 * (1.0 + value), 0.0), 1.0)
    n_batches = -(-shots // batch_size)
    children = np.random.SeedSequence(seed).spawn(n_batches)
    zeros = 0
    for b, child in enumerate(children):
        size = min(batch_size, shots - b * batch_size)
        zeros += int(np.random.default_rng(child).binomial(size, p0))
    mean = (2.0 * zeros - shots) / shots
    if shots > 1:
        var = (shots - mean**2 * shots) / (shots - 1)
        std_error = math.sqrt(max(var, 0.0) / shots)
    else:
        std_error = 0.0
    return TraceEstimate(mean=mean, std_error=std_error, shots=shots, exact=float(value),
                         part="im" if imag else "re")


# oracles and Trace_k


@dataclass(frozen=True, eq=False)
class OracleString:
    """x in {+1, -1}^N with N = 2^n; O_x |i> = x_i |i>."""

    bits: np.ndarray

    def __post_init__(self):
        x = np.array(self.bits, dtype=np.int8).ravel()
        if x.size < 1 or x.size & (x.size - 1):
            raise LengthMismatch(f"oracle length {x.size} is not a power of two")
        if not np.all(np.abs(x) == 1):
            raise InvalidInput("oracle entries must be +1 or -1")
        x.setflags(write=False)
        object.__setattr__(self, "bits", x)

    @property
    def n(self) -> int:
        return int(self.bits.size).bit_length() - 1

    def __len__(self):
        return self.bits.size

    @classmethod
    def ones(cls, n: int) -> "OracleString":
        return cls(np.ones(2**n, dtype=np.int8))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "OracleString":
        return cls(rng.choice(np.array([1, -1], dtype=np.int8), 2**n))

    def to_hex(self) -> str:
        """Bit i is (1 - x_i) / 2, packed most significant bit first."""
        return np.packbits((self.bits < 0).astype(np.uint8)).tobytes().hex()

    @classmethod
    def from_hex(cls, text: str, n: int) -> "OracleString":
        raw = np.frombuffer(bytes.fromhex(text.strip()), dtype=np.uint8)
        bits = np.unpackbits(raw)
        if raw.size != -(-(2**n) // 8) or np.any(bits[2**n:]):
            raise LengthMismatch(f"hex string does not encode exactly 2^{n} bits")
        return cls(1 - 2 * bits[: 2**n].astype(np.int8))

    def gate(self) -> Gate:
        """O_x as a diagonal gate on all n qubits (qubit n-1 most significant)."""
        return Gate.raw(np.diag(self.bits.astype(complex)), tuple(range(self.n - 1, -1, -1)))


def _check_oracles(oracles, n: int):
    oracles = [o if isinstance(o, OracleString) else OracleString(o) for o in oracles]
    for o in oracles:
        if len(o) != 2**n:
            raise LengthMismatch(f"oracle has length {len(o)}, expected 2^{n} = {2 ** n}")
    return oracles


def trace_k(oracles: Sequence, n: int) -> float:
    """(1/N) tr[O_1 H O_2 H ... O_k H], H = H^{(x)n}, by fast Walsh-Hadamard transforms on columns."""
    if n > MAX_QUBITS:
        raise TooLarge(f"trace_k is limited to {MAX_QUBITS} qubits")
    oracles = _check_oracles(oracles, n)
    if not oracles:
        raise InvalidInput("need k >= 1 oracles")
    size = 2**n
    mat = np.eye(size)
    # unnormalized transforms stay integral; dividing by N after every second
    # one is exact, so all-ones inputs give exactly 1 or 0
    for j, o in enumerate(reversed(oracles)):
        kernels.fwht_rows(mat)
        if j % 2:
            mat /= size
        mat *= o.bits[:, None]
    value = float(np.trace(mat) / size)
    return value / math.sqrt(size) if len(oracles) % 2 else value


def trace_k_dense(oracles: Sequence, n: int) -> float:
    """Same quantity by dense matrix products (n <= 8)."""
    if n > 8:
        raise TooLarge("the dense Trace_k path is limited to 8 qubits")
    oracles = _check_oracles(oracles, n)
    had = hadamard_matrix(n)
    mat = np.eye(2**n)
    for o in oracles:
        mat = mat @ np.diag(o.bits.astype(float)) @ had
    return float(np.trace(mat) / 2**n)


@dataclass(frozen=True, eq=False)
class QueryUnitary:
    matrix: np.ndarray
    queries: int


def query_model_unitary(oracles: Sequence, interleave: Sequence, n: int | None = None) -> QueryUnitary:
    """O_k U_k ... O_1 U_1 with U_1 applied first; records k quantum queries."""
    if len(oracles) != len(interleave):
        raise DimensionMismatch(f"{len(oracles)} oracles but {len(interleave)} interleaving unitaries")
    if n is None:
        if not oracles:
            raise DimensionMismatch("cannot infer the dimension of an empty query sequence; pass n")
        n = OracleString(oracles[0].bits if isinstance(oracles[0], OracleString) else oracles[0]).n
    oracles = _check_oracles(oracles, n)
    size = 2**n
    out = np.eye(size, dtype=complex)
    for o, u in zip(oracles, interleave):
        u = np.asarray(u, dtype=complex)
        if u.shape != (size, size):
            raise DimensionMismatch(f"interleaving unitary has shape {u.shape}, expected {(size, size)}")
        out = o.bits[:, None] * (u @ out)
    return QueryUnitary(out, len(oracles))
