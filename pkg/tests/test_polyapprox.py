import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dqc1trace.errors import DegenerateCertificate, InvalidInput, SingularSystem
from dqc1trace.functions import custom_function, exp_family, inv_family, polynomial_function, sin_family
from dqc1trace.polyapprox import (
    RemezOptions,
    approximate_degree,
    dual_certificate,
    error_ratio_table,
    moment_residuals,
    remez,
    remez_step,
)
from dqc1trace.polynomial import Domain, Polynomial, chebyshev_points


def within_bracket(value, bracket, rel, abs_=0.0):
    lo, hi = bracket["lower"], bracket["upper"]
    return lo * (1 - rel) - abs_ <= value <= hi * (1 + rel) + abs_


class TestRemezStep:
    def test_exp_golden(self, golden):
        g = golden["remez_step_exp_d4"]
        delta, poly = remez_step(exp_family(), g["points"])
        assert delta == pytest.approx(g["delta"], rel=1e-12)
        assert np.allclose(poly.to_monomial()[:5], g["monomial"], rtol=0, atol=1e-12)

    def test_alternation_equations_hold(self):
        f = sin_family(3.0)
        pts = chebyshev_points(8)
        delta, g = remez_step(f, pts)
        resid = f(pts) - g(pts) - delta * (-1.0) ** np.arange(8)
        assert np.max(np.abs(resid)) < 1e-13

    def test_rejects_unsorted_and_out_of_domain(self):
        f = exp_family()
        with pytest.raises(InvalidInput):
            remez_step(f, [0.0, -0.5, 0.5])
        with pytest.raises(InvalidInput):
            remez_step(inv_family(4.0), [-1.0, 0.0, 1.0])

    def test_spacing_floor(self):
        with pytest.raises(SingularSystem):
            remez_step(exp_family(), [-1.0, 0.0, 1e-14, 1.0])


class TestRemez:
    def test_exp_d4_matches_oracle(self, golden):
        res = remez(exp_family(), 4)
        assert within_bracket(res.error, golden["minimax"]["exp"]["4"], 1e-9)
        cert = res.certificate(exp_family())
        assert cert.ok and cert.n_refs == 6

    @pytest.mark.parametrize("family", ["exp", "sin", "log", "inv"])
    def test_d8_matches_oracle(self, golden, family):
        from dqc1trace.functions import make_family

        f = make_family(family)
        res = remez(f, 8)
        # float64 resolves the error level only to ~1e-15 absolute
        assert within_bracket(res.error, golden["minimax"][family]["8"], 1e-8, 1e-13)

    def test_polynomial_target_is_exact(self):
        f = polynomial_function("x^2")
        assert remez(f, 2).error < 1e-14
        # best linear approximation of x^2 is 1/2 with error 1/2
        res = remez(f, 1)
        assert res.error == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(res.best_poly.to_monomial()[:2], [0.5, 0.0], atol=1e-12)

    def test_split_domain_references_avoid_gap(self):
        f = inv_family(4.0)
        res = remez(f, 5)
        assert np.all(f.domain.contains(res.ref_points))
        assert res.certificate(f).ok

    def test_negative_degree(self):
        with pytest.raises(InvalidInput):
            remez(exp_family(), -1)

    def test_precise_path_reaches_tiny_errors(self, golden):
        res = remez(exp_family(), 16, RemezOptions(dps=40))
        assert within_bracket(float(res.precise_error), golden["minimax"]["exp"]["16"], 1e-6)

    def test_result_json(self):
        doc = remez(exp_family(), 3).to_json()
        assert doc["degree"] == 3 and len(doc["ref_points"]) == 5


class TestRemezProperties:
    @given(st.floats(0.2, 2.0), st.integers(2, 9))
    def test_equioscillation_certificate(self, beta, d):
        f = exp_family(beta)
        res = remez(f, d)
        assert res.certificate(f).ok

    @given(st.integers(1, 9), st.integers(0, 2**31 - 1))
    def test_no_perturbation_beats_minimax(self, d, seed):
        f = sin_family(3.0)
        res = remez(f, d)
        q = Polynomial(np.random.default_rng(seed).normal(scale=1e-3, size=d + 1))
        x = f.domain.grid(4001)
        assert np.max(np.abs(f(x) - res.best_poly(x) - q(x))) >= res.error - 1e-9

    @given(st.floats(0.3, 3.0))
    def test_errors_nonincreasing_in_degree(self, t):
        f = sin_family(t)
        errs = [remez(f, d).error for d in range(0, 9)]
        # at degenerate (even) degrees the exchange stops within its relative tolerance
        assert all(b <= a * (1 + 1e-8) + 1e-13 for a, b in zip(errs, errs[1:]))


class TestDualCertificate:
    def test_golden_three_points(self, golden):
        g = golden["dual_certificate"]
        h = dual_certificate(g["points"])
        assert np.allclose(h, g["h"], atol=1e-12)
        assert np.max(np.abs(moment_residuals(h, g["points"], 1))) <= 1e-8

    def test_symmetric_form_annihilates_odd_moments(self):
        x = np.array([-0.9, -0.4, 0.3, 0.8])
        h = dual_certificate(x, form="symmetric")
        assert abs(np.sum(h * x)) < 1e-12 and abs(np.sum(h * x**3)) < 1e-12

    def test_symmetric_form_degenerate(self):
        with pytest.raises(DegenerateCertificate):
            dual_certificate([-0.5, 0.0, 0.5], form="symmetric")
        with pytest.raises(DegenerateCertificate):
            dual_certificate([-0.5, 0.2, 0.5], form="symmetric")

    def test_complementary_slackness_at_references(self):
        f = exp_family()
        res = remez(f, 6)
        h = dual_certificate(res.ref_points)
        lhs = abs(np.sum(h * res.errors_at_references(f)))
        assert lhs == pytest.approx(res.error, rel=1e-8)

    @given(st.lists(st.floats(-1, 1), min_size=3, max_size=12, unique=True))
    def test_moments_vanish(self, pts):
        x = np.sort(np.array(pts))
        if np.min(np.diff(x)) < 1e-2:
            return
        h = dual_certificate(x)
        assert np.sum(np.abs(h)) == pytest.approx(1.0)
        assert np.max(np.abs(moment_residuals(h, x, x.size - 2))) <= 1e-8


class TestApproximateDegree:
    def test_sin8_against_bessel_bracket(self, golden):
        g = golden["sin8_degree"]
        res = approximate_degree(sin_family(8.0), 1 / 3)
        assert res.degree == g["degree"]
        assert res.E_d <= 1 / 3 < res.E_dm1

    @given(st.floats(1e-4, 0.9))
    def test_defining_property(self, eps):
        res = approximate_degree(exp_family(), eps)
        assert res.E_d <= eps
        assert res.degree == 0 or res.E_dm1 > eps

    def test_zero_degree_for_loose_epsilon(self):
        f = custom_function(lambda x: 0.1 * np.cos(x), Domain.full())
        assert approximate_degree(f, 0.5).degree == 0

    def test_invalid_epsilon(self):
        with pytest.raises(InvalidInput):
            approximate_degree(exp_family(), 0.0)


class TestRatioTable:
    def test_exp_ratios_float(self):
        rows = error_ratio_table(exp_family(), 10, d_min=4)
        assert [r.d for r in rows] == list(range(4, 11))
        assert all(r.ratio < 0.5 for r in rows if r.ratio is not None)

    def test_polynomial_target_hits_zero(self):
        rows = error_ratio_table(polynomial_function("x^2"), 3)
        by_d = {r.d: r for r in rows}
        assert by_d[2].E_d == 0.0 and by_d[2].ratio == 0.0

    def test_sin_even_degree_ratio_is_one(self):
        # odd target: E_{2k} = E_{2k-1}, so even d never halves the error
        rows = error_ratio_table(sin_family(3.0), 8, d_min=6)
        by_d = {r.d: r for r in rows}
        assert by_d[8].ratio == pytest.approx(1.0, abs=1e-6)
        assert math.isfinite(by_d[7].ratio) and by_d[7].ratio < 0.5
