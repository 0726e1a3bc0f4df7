"""Command line front end.

Every report starts with a header carrying the tool version, the full run
configuration and the seed, so a report can be regenerated byte for byte.
Exit codes: 0 success, 2 invalid input, 3 violated precondition, 4 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import exact_normalized_trace, query_scaling_report, scaling_csv, walk_trace_poly, wrap_dense
from .errors import Dqc1TraceError, InvalidInput
from .functions import make_family, polynomial_function
from .jacobi import build_reduction_discriminant
from .polyapprox import RemezOptions, approximate_degree, error_ratio_table, remez
from .polynomial import Polynomial
from .quantum import Circuit, OracleString, dqc1_sample, materialize, normalized_trace, random_circuit, trace_k, trace_k_dense
from .reduction import ClockHamiltonian, assemble_reduction, verdict_csv, verify_error2

OUTPUT_DIR_ENV = "DQC1TRACE_OUTPUT_DIR"


def _fraction(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _config(args) -> dict:
    skip = {"func", "handler"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _header(args) -> list[str]:
    return [
        f"# dqc1trace {__version__}",
        f"# config: {json.dumps(_config(args), sort_keys=True)}",
        f"# seed: {args.seed}",
    ]


def _emit(args, lines: list[str], doc: dict | None = None):
    """Write a report to --out (relative paths resolve under $DQC1TRACE_OUTPUT_DIR) or stdout."""
    if args.format == "json" and doc is not None:
        body = json.dumps({"version": __version__, "config": _config(args), "seed": args.seed, **doc},
                          indent=1, sort_keys=True) + "\n"
    else:
        body = "\n".join(_header(args) + lines) + "\n"
    if args.out:
        path = Path(args.out)
        if not path.is_absolute() and os.environ.get(OUTPUT_DIR_ENV):
            path = Path(os.environ[OUTPUT_DIR_ENV]) / path
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(body)
    else:
        sys.stdout.write(body)


def _family(args):
    if args.family == "custom":
        if not args.poly:
            raise InvalidInput("--family custom needs --poly")
        return polynomial_function(args.poly)
    params = {"exp": {"beta": args.beta}, "sin": {"t": args.t}, "cos": {"t": args.t},
              "log": {"beta": args.beta if args.beta is not None else 0.9},
              "inv": {"kappa": args.kappa}}[args.family]
    params = {k: v for k, v in params.items() if v is not None}
    return make_family(args.family, **params)


def _opts(args) -> RemezOptions:
    return RemezOptions(dps=args.dps) if getattr(args, "dps", None) else RemezOptions()


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


# commands


def cmd_approx(args) -> int:
    f = _family(args)
    opts = _opts(args)
    rows = error_ratio_table(f, args.dmax, opts, d_min=args.dmin)
    degree = args.degree if args.degree is not None else args.dmax
    best = remez(f, degree, opts)
    lines = [f"# function: {f.describe()}",
             f"# minimax d={best.degree} E={best.error!r} sign={best.sign} refs={json.dumps(best.ref_points.tolist())}"]
    doc = {"function": f.to_json(), "minimax": best.to_json()}
    if args.epsilon is not None:
        ad = approximate_degree(f, args.epsilon, opts)
        lines.append(f"# approximate_degree eps={args.epsilon!r} d={ad.degree} E_d={ad.E_d!r} E_dm1={ad.E_dm1!r}")
        doc["approximate_degree"] = {"epsilon": args.epsilon, "d": ad.degree, "E_d": ad.E_d, "E_dm1": ad.E_dm1}
    lines.append("d,E_d,ratio,certified")
    lines += [f"{r.d},{r.E_d!r},{_fmt(r.ratio)},{str(r.certified).lower()}" for r in rows]
    doc["table"] = [{"d": r.d, "E_d": r.E_d, "ratio": r.ratio, "certified": r.certified, "error": r.error}
                    for r in rows]
    _emit(args, lines, doc)
    if args.plot:
        _plot_approx(args.plot, f, best, rows)
    return 0


def _plot_approx(path, f, best, rows):
    try:
        import matplotlib

        matplotlib.use("svg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise InvalidInput("--plot needs matplotlib (pip install artifact[plot])") from exc
    matplotlib.rcParams["svg.hashsalt"] = "dqc1trace"
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for iv in f.domain.intervals:
        x = np.linspace(iv.lo, iv.hi, 600)
        ax1.plot(x, f(x) - best.best_poly(x), "C0-", lw=1)
    ax1.plot(best.ref_points, f(best.ref_points) - best.best_poly(best.ref_points), "o")
    ax1.set_title(f"error of the degree-{best.degree} minimax fit")
    ds = [r.d for r in rows if r.E_d > 0]
    ax2.semilogy(ds, [r.E_d for r in rows if r.E_d > 0], "o-")
    ax2.set_xlabel("d")
    ax2.set_ylabel("E_d")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _circuit(args, rng) -> Circuit:
    if args.circuit:
        return Circuit.load(args.circuit)
    if args.random is not None:
        n, g = args.random
        return random_circuit(n, g, rng)
    return Circuit(args.qubits, ())


def cmd_reduce(args) -> int:
    f = _family(args)
    disc = build_reduction_discriminant(f, args.epsilon, _opts(args))
    rng = np.random.default_rng(args.seed)
    if args.sweep:
        verdicts = []
        for _ in range(args.sweep):
            n_gates = int(rng.integers(0, disc.degree + 1))
            c = random_circuit(args.qubits, n_gates, rng)
            verdicts.append(verify_error2(assemble_reduction(f, args.epsilon, c, disc=disc)))
        lines = verdict_csv(verdicts).rstrip("\n").split("\n")
        lines.append(f"# passed {sum(v.passed for v in verdicts)}/{len(verdicts)}")
        _emit(args, lines, {"verdicts": [v.__dict__ for v in verdicts]})
        return 0 if all(v.passed for v in verdicts) else 3
    bundle = assemble_reduction(f, args.epsilon, _circuit(args, rng), disc=disc)
    v = verify_error2(bundle)
    if args.bundle:
        Path(args.bundle).write_text(bundle.dumps() + "\n")
    line = (f"verdict: {'PASS' if v.passed else 'FAIL'} lhs={v.lhs!r} predicted={v.predicted!r} "
            f"bound={v.bound!r} d={disc.degree} m={bundle.m} E_d={disc.eta!r} E_dm1={disc.E_dm1!r} "
            f"eta={disc.eta!r} eta_prime={disc.eta_prime!r} sign={disc.sign} padded={bundle.padded_gates}")
    _emit(args, [line], {"bundle": bundle.to_json(), "verdict": v.__dict__})
    return 0 if v.passed else 3


def cmd_dqc1(args) -> int:
    rng = np.random.default_rng(args.seed)
    c = _circuit(args, rng)
    u = materialize(c)
    tau = normalized_trace(u)
    lines = [f"# exact normalized trace: {tau.real!r} {tau.imag!r}", "shots,part,mean,std_error,exact"]
    results = []
    for shots in args.shots:
        est = dqc1_sample(u, shots, args.seed, imag=args.imag)
        results.append(est.to_json())
        lines.append(f"{shots},{est.part},{est.mean!r},{est.std_error!r},{est.exact!r}")
    _emit(args, lines, {"estimates": results, "exact": [tau.real, tau.imag]})
    return 0


def cmd_forrelation(args) -> int:
    n, k = args.n, args.k
    if args.oracles:
        oracles = [OracleString.from_hex(h, n) for h in args.oracles]
        k = len(oracles)
    elif args.all_ones:
        oracles = [OracleString.ones(n) for _ in range(k)]
    else:
        rng = np.random.default_rng(args.seed)
        oracles = [OracleString.random(n, rng) for _ in range(k)]
    value = trace_k(oracles, n)
    lines = [f"trace_k: {value!r}"]
    doc = {"value": value, "oracles": [o.to_hex() for o in oracles]}
    if args.check_dense:
        dense = trace_k_dense(oracles, n)
        lines.append(f"dense: {dense!r} agreement: {abs(dense - value):.3e}")
        doc["dense"] = dense
    _emit(args, lines, doc)
    return 0


def cmd_baseline(args) -> int:
    if args.bundle:
        doc = json.loads(Path(args.bundle).read_text())
        H = ClockHamiltonian(Circuit.from_json(doc["circuit"]), doc["a"], doc["b"])
        P = Polynomial.from_json(doc["p_star"])
        A = H.dense()
        est = walk_trace_poly(wrap_dense(A), P, args.samples, args.seed, cache=not args.no_cache)
        exact = exact_normalized_trace(A, P)
        lines = ["D,samples,estimate,stderr,exact,queries_per_sample",
                 f"{H.dim},{est.samples},{est.value!r},{est.std_error!r},{exact!r},{est.queries_used / est.samples!r}"]
        _emit(args, lines, {"estimate": est.__dict__, "exact": exact})
        return 0
    rows = query_scaling_report(args.s, args.k, args.dim, args.samples, args.seed, cache=not args.no_cache)
    _emit(args, scaling_csv(rows).rstrip("\n").split("\n"), {"rows": [r.__dict__ for r in rows]})
    return 0


# parser


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=1, help="worker cap (commands currently run single-threaded)")


def _add_family(p):
    p.add_argument("--family", choices=("exp", "sin", "cos", "log", "inv", "custom"), default="exp")
    p.add_argument("--beta", type=_fraction)
    p.add_argument("--t", type=_fraction)
    p.add_argument("--kappa", type=_fraction)
    p.add_argument("--poly", help='power-basis polynomial for --family custom, e.g. "x^2"')
    p.add_argument("--dps", type=int, help="decimal digits for multiprecision Remez")


def _add_circuit(p):
    p.add_argument("--circuit", help="circuit JSON file")
    p.add_argument("--random", type=int, nargs=2, metavar=("N_QUBITS", "N_GATES"), help="seeded random circuit")
    p.add_argument("--qubits", type=int, default=2, help="register size for identity or sweep circuits")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqc1trace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dqc1trace {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", help="minimax fits and error-ratio tables")
    _add_common(p)
    _add_family(p)
    p.add_argument("--dmin", type=int, default=0)
    p.add_argument("--dmax", type=int, default=16)
    p.add_argument("--degree", type=int, help="degree of the reported minimax fit (default dmax)")
    p.add_argument("--epsilon", type=_fraction)
    p.add_argument("--plot", help="write an SVG of the error curve and E_d decay")
    p.set_defaults(handler=cmd_approx)

    p = sub.add_parser("reduce", help="build the clock Hamiltonian and check the trace identity")
    _add_common(p)
    _add_family(p)
    _add_circuit(p)
    p.add_argument("--epsilon", type=_fraction, default=1 / 3)
    p.add_argument("--bundle", help="write the bundle JSON here")
    p.add_argument("--sweep", type=int, default=0, help="number of seeded random circuits to verify")
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("dqc1", help="sampled one-clean-qubit trace estimate")
    _add_common(p)
    _add_circuit(p)
    p.add_argument("--shots", type=int, nargs="+", default=[10000])
    p.add_argument("--imag", action="store_true", help="estimate the imaginary part")
    p.set_defaults(handler=cmd_dqc1)

    p = sub.add_parser("forrelation", help="exact Trace_k of oracle sandwiches")
    _add_common(p)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--oracles", nargs="+", help="hex-packed oracle strings")
    p.add_argument("--all-ones", action="store_true")
    p.add_argument("--check-dense", action="store_true")
    p.set_defaults(handler=cmd_forrelation)

    p = sub.add_parser("baseline", help="query counts of the classical walk estimator")
    _add_common(p)
    p.add_argument("--s", type=int, nargs="+", default=[2, 4])
    p.add_argument("--k", type=int, nargs="+", default=[2, 4])
    p.add_argument("--dim", type=int, default=1024)
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--no-cache", action="store_true", help="enumerate walks one by one")
    p.add_argument("--bundle", help="reduction bundle JSON: estimate tr P*(A)/D against the exact value")
    p.set_defaults(handler=cmd_baseline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except Dqc1TraceError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
