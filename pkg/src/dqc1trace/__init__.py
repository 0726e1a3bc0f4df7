"""Minimax approximation, periodic Jacobi matrices and the circuit-to-Hamiltonian trace reduction."""

__version__ = "0.1.0"

from .baseline import SparseOracle, WalkEstimate, query_scaling_report, walk_trace_poly, wrap_dense
from .errors import Dqc1TraceError
from .functions import TargetFunction, make_family, standard_families
from .jacobi import (
    Discriminant,
    PeriodicJacobi,
    build_reduction_discriminant,
    char_poly_check,
    delta_identity_check,
    discriminant,
    jacobi_from_discriminant,
)
from .kernels import BACKEND
from .polyapprox import (
    MinimaxResult,
    RemezOptions,
    approximate_degree,
    dual_certificate,
    error_ratio_table,
    remez,
    remez_step,
)
from .polynomial import Domain, Interval, Polynomial
from .quantum import (
    Circuit,
    Gate,
    OracleString,
    TraceEstimate,
    dqc1_sample,
    eigenphases,
    materialize,
    normalized_trace,
    query_model_unitary,
    trace_k,
)
from .reduction import (
    ClockHamiltonian,
    ReductionBundle,
    SparseHamiltonianSpec,
    assemble_reduction,
    block_decompose,
    build_hamiltonian,
    build_sparse_instance,
    theta_independence_check,
    trace_f,
    verify_error2,
)

__all__ = [
    "BACKEND",
    "Circuit",
    "ClockHamiltonian",
    "Discriminant",
    "Domain",
    "Dqc1TraceError",
    "Gate",
    "Interval",
    "MinimaxResult",
    "OracleString",
    "PeriodicJacobi",
    "Polynomial",
    "ReductionBundle",
    "RemezOptions",
    "SparseHamiltonianSpec",
    "SparseOracle",
    "TargetFunction",
    "TraceEstimate",
    "WalkEstimate",
    "__version__",
    "approximate_degree",
    "assemble_reduction",
    "block_decompose",
    "build_hamiltonian",
    "build_reduction_discriminant",
    "build_sparse_instance",
    "char_poly_check",
    "delta_identity_check",
    "discriminant",
    "dqc1_sample",
    "dual_certificate",
    "eigenphases",
    "error_ratio_table",
    "jacobi_from_discriminant",
    "make_family",
    "materialize",
    "normalized_trace",
    "query_model_unitary",
    "query_scaling_report",
    "remez",
    "remez_step",
    "standard_families",
    "theta_independence_check",
    "trace_f",
    "trace_k",
    "verify_error2",
    "walk_trace_poly",
    "wrap_dense",
]
