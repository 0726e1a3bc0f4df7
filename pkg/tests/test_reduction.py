import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dqc1trace.errors import CircuitTooDeep, DomainViolation, FactorMismatch, InvalidInput, NonPositiveCoupling
from dqc1trace.functions import custom_function, exp_family, log_family, sin_family
from dqc1trace.jacobi import build_reduction_discriminant, random_jacobi
from dqc1trace.polynomial import Domain, Polynomial
from dqc1trace.quantum import Circuit, Gate, OracleString, materialize, normalized_trace, random_circuit, trace_k
from dqc1trace.reduction import (
    ClockHamiltonian,
    SparseHamiltonianSpec,
    assemble_reduction,
    block_decompose,
    block_error1_residuals,
    block_spectrum,
    build_sparse_instance,
    encoded_matrix,
    encoding_isometry,
    locality_report,
    theta_independence_check,
    trace_f,
    verdict_csv,
    verify_error2,
)


@pytest.fixture(scope="module")
def sin_tight():
    # sin(3x) at eps = 1e-4 has approximate degree 9: room for nine gates
    return build_reduction_discriminant(sin_family(3.0), 1e-4)


@pytest.fixture(scope="module")
def exp_third():
    return build_reduction_discriminant(exp_family(), 1 / 3)


def identity_circuit(n, m):
    return Circuit(n, tuple(Gate("I", (0,)) for _ in range(m)))


class TestClockHamiltonian:
    @pytest.mark.parametrize("m, n", [(3, 1), (4, 2), (5, 2)])
    def test_identity_gates_give_cycle(self, m, n):
        H = ClockHamiltonian(identity_circuit(n, m), np.zeros(m), np.full(m, 0.5))
        ev = np.linalg.eigvalsh(H.dense())
        expected = np.sort(np.repeat(np.cos(2 * math.pi * np.arange(m) / m), 2**n))
        assert np.allclose(ev, expected, atol=1e-12)

    def test_matvec_matches_dense(self):
        rng = np.random.default_rng(0)
        c = random_circuit(3, 5, rng)
        H = ClockHamiltonian(c, rng.uniform(-0.3, 0.3, 5), rng.uniform(0.2, 0.5, 5))
        v = rng.standard_normal(H.dim) + 1j * rng.standard_normal(H.dim)
        assert np.allclose(H.matvec(v), H.dense() @ v)
        assert np.allclose(H.dense(), H.dense().conj().T)

    def test_validation(self):
        c = identity_circuit(1, 3)
        with pytest.raises(NonPositiveCoupling):
            ClockHamiltonian(c, np.zeros(3), [0.5, 0.0, 0.5])
        with pytest.raises(InvalidInput):
            ClockHamiltonian(c, np.zeros(2), np.ones(2))


class TestLocality:
    def test_binary_clock_touches_log_m_qubits(self):
        rng = np.random.default_rng(1)
        H = ClockHamiltonian(random_circuit(3, 6, rng), np.zeros(6), np.full(6, 0.4))
        rep = locality_report(H, "binary", inspect=True)
        assert rep.clock_qubits == 3
        assert rep.max_term_locality <= rep.bound == 3 + rep.max_gate_arity

    def test_unary_terms_are_constant_local_on_the_clock(self):
        rng = np.random.default_rng(2)
        H = ClockHamiltonian(random_circuit(2, 5, rng), np.zeros(5), np.full(5, 0.4))
        rep = locality_report(H, "unary", inspect=True)
        assert rep.max_term_locality <= 2 + rep.max_gate_arity

    @pytest.mark.parametrize("encoding", ["binary", "unary"])
    def test_encoding_restricts_to_A(self, encoding):
        rng = np.random.default_rng(3)
        H = ClockHamiltonian(random_circuit(2, 3, rng), rng.uniform(-0.2, 0.2, 3), rng.uniform(0.2, 0.5, 3))
        iso = encoding_isometry(H, encoding)
        assert np.allclose(iso.T @ encoded_matrix(H, encoding) @ iso, H.dense())


class TestBlocks:
    def test_spectrum_is_union_of_blocks(self):
        rng = np.random.default_rng(4)
        J = random_jacobi(5, rng)
        H = ClockHamiltonian(random_circuit(4, 5, rng), J.a, J.b)
        dense = np.linalg.eigvalsh(H.dense())
        assert np.allclose(block_spectrum(block_decompose(H)), dense, atol=1e-7)

    def test_square_trace_is_frobenius(self):
        rng = np.random.default_rng(5)
        J = random_jacobi(4, rng)
        H = ClockHamiltonian(random_circuit(2, 4, rng), J.a, J.b)
        fro = np.linalg.norm(H.dense(), "fro") ** 2
        assert trace_f(H, lambda x: x**2) == pytest.approx(fro, rel=1e-10)
        assert trace_f(H, lambda x: x**2, path="blocks") == pytest.approx(fro, rel=1e-10)

    def test_domain_guard(self):
        f = custom_function(lambda x: x, Domain.of((0.0, 1.0)))
        H = ClockHamiltonian(identity_circuit(1, 3), np.zeros(3), np.full(3, 0.5))
        with pytest.raises(DomainViolation):
            trace_f(H, f)

    def test_unknown_path(self):
        H = ClockHamiltonian(identity_circuit(1, 3), np.zeros(3), np.full(3, 0.5))
        with pytest.raises(InvalidInput):
            trace_f(H, np.cos, path="sideways")


class TestThetaIndependence:
    @given(st.integers(3, 10), st.integers(0, 2**31 - 1))
    def test_below_m_is_flat(self, m, seed):
        J = random_jacobi(m, np.random.default_rng(seed))
        mono = np.zeros(m)
        mono[-1] = 1.0
        rep = theta_independence_check(J, Polynomial.from_monomial(mono))
        assert rep.spread <= 1e-8 * m and not rep.degree_too_high

    @given(st.integers(3, 10), st.integers(0, 2**31 - 1))
    def test_degree_m_sees_the_corner(self, m, seed):
        J = random_jacobi(m, np.random.default_rng(seed))
        mono = np.zeros(m + 1)
        mono[-1] = 1.0
        rep = theta_independence_check(J, Polynomial.from_monomial(mono))
        # tr A_theta^m = const + m e cos(theta); eight phases hit cos = 1 and -1
        assert rep.spread == pytest.approx(2 * m * J.e, rel=1e-8)
        assert rep.degree_too_high


class TestAssemble:
    def test_padding(self, sin_tight):
        c = random_circuit(2, 4, np.random.default_rng(6))
        bundle = assemble_reduction(sin_family(3.0), 1e-4, c, disc=sin_tight)
        assert bundle.m == sin_tight.degree
        assert bundle.padded_gates == sin_tight.degree - 4
        assert np.allclose(materialize(bundle.hamiltonian.circuit), materialize(c))

    def test_too_deep(self, exp_third):
        c = random_circuit(2, exp_third.degree + 1, np.random.default_rng(7))
        with pytest.raises(CircuitTooDeep):
            assemble_reduction(exp_family(), 1 / 3, c, disc=exp_third)

    def test_identity_passes(self, sin_tight):
        bundle = assemble_reduction(sin_family(3.0), 1e-4, identity_circuit(2, 1), disc=sin_tight)
        v = verify_error2(bundle)
        assert v.re_trace == pytest.approx(1.0) and v.passed

    @pytest.mark.parametrize("seed", range(5))
    def test_random_circuits_pass(self, sin_tight, seed):
        c = random_circuit(3, sin_tight.degree, np.random.default_rng(seed))
        bundle = assemble_reduction(sin_family(3.0), 1e-4, c, disc=sin_tight)
        v = verify_error2(bundle)
        assert v.passed, (v.gap, v.bound)
        assert np.max(block_error1_residuals(bundle)) <= 1e-7
        assert verify_error2(bundle, path="blocks").lhs == pytest.approx(v.lhs, abs=1e-9)

    def test_log_bundle(self):
        f = log_family(0.9)
        c = random_circuit(4, 1, np.random.default_rng(8))
        assert verify_error2(assemble_reduction(f, 1 / 3, c)).passed

    def test_json_and_csv(self, exp_third):
        bundle = assemble_reduction(exp_family(), 1 / 3, identity_circuit(1, 1), disc=exp_third)
        doc = json.loads(bundle.dumps())
        assert doc["d"] == doc["m"] == exp_third.degree
        assert doc["padded_gates"] == exp_third.degree - 1
        text = verdict_csv([verify_error2(bundle)])
        assert text.splitlines()[0] == "trial,lhs,predicted,bound,gap,pass"


class TestSparseInstance:
    def test_factor_product_is_trace3(self):
        rng = np.random.default_rng(9)
        xs = [OracleString.random(2, rng) for _ in range(3)]
        spec = SparseHamiltonianSpec(1, 2, tuple(xs))
        u = materialize(Circuit(2, tuple(spec.factors())))
        assert normalized_trace(u).real == pytest.approx(trace_k(xs, 2), abs=1e-12)

    def test_r1_all_ones(self, sin_tight):
        spec = SparseHamiltonianSpec(1, 2, tuple(OracleString.ones(2) for _ in range(3)))
        _, rep = build_sparse_instance(spec, sin_family(3.0), 1e-4, disc=sin_tight)
        assert rep.measured <= 4 and rep.ok and rep.n_factors == 9

    def test_r2_blocks(self, sin_tight):
        rng = np.random.default_rng(10)
        spec = SparseHamiltonianSpec(2, 1, tuple(OracleString.random(2, rng) for _ in range(3)))
        _, rep = build_sparse_instance(spec, sin_family(3.0), 1e-4, disc=sin_tight)
        assert rep.factor_sparsity[0] == 4
        assert rep.measured <= 8

    def test_factor_mismatch(self):
        with pytest.raises(FactorMismatch):
            SparseHamiltonianSpec.from_n(3, 2, [OracleString.ones(3)] * 3)
        with pytest.raises(FactorMismatch):
            SparseHamiltonianSpec(1, 2, [OracleString.ones(3)] * 3)
