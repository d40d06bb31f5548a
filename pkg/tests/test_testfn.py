"""Unit tests for the cutoff machinery: profile exactness, closed-form
derivatives, growth integrals against hand-derived values, exponent fits,
and the weak-identity coverage contract."""

import csv
import json
import math

import numpy as np
import pytest

from kgflrw.cosmology import CosmologyParams
from kgflrw.field_solver import init_field, run_until
from kgflrw.testfn import (
    CoverageError,
    II_prime,
    III_prime,
    build_cutoff,
    dtt_psi_pow,
    hypothesis_13_14,
    lap_psi_pow,
    psi_pow,
    save_scaling_fit,
    scaling_exponent,
    verify_cutoff_bounds,
    weak_identity_residual,
)


class TestCutoffProfile:
    def test_plateau_and_support(self):
        cut = build_cutoff()
        s = np.linspace(0.0, 0.5, 200)
        assert np.all(cut.eta(s) == 1.0)
        s = np.linspace(1.0, 3.0, 200)
        assert np.all(cut.eta(s) == 0.0)

    def test_midpoint_symmetry(self):
        # the descent integrand is symmetric about s = 3/4
        assert build_cutoff().eta(0.75) == pytest.approx(0.5, abs=1e-12)

    def test_monotone_descent(self):
        cut = build_cutoff()
        s = np.linspace(0.5, 1.0, 500)
        vals = cut.eta(s)
        assert np.all(np.diff(vals) <= 0.0)
        assert np.all((vals >= 0.0) & (vals <= 1.0))

    def test_derivatives_match_finite_differences(self):
        cut = build_cutoff()
        h = 1e-6
        for s in (0.6, 0.75, 0.9):
            fd1 = (cut.eta(s + h) - cut.eta(s - h)) / (2 * h)
            assert cut.eta_prime(s) == pytest.approx(fd1, rel=1e-7, abs=1e-9)
            fd2 = (cut.eta_prime(s + h) - cut.eta_prime(s - h)) / (2 * h)
            assert cut.eta_pp(s) == pytest.approx(fd2, rel=1e-6, abs=1e-9)

    def test_c2_flatness_at_junctions(self):
        cut = build_cutoff()
        for s in (0.5, 1.0):
            assert cut.eta_prime(s) == 0.0
            assert cut.eta_pp(s) == 0.0


class TestPsiPow:
    def test_plateau_interior_and_exterior_values(self):
        assert psi_pow(4.0, 2.0, 1.0, 1.5) == 1.0
        assert psi_pow(4.0, 2.0, 5.0, 1.0) == 0.0
        assert psi_pow(4.0, 2.0, 3.0, 3.0) == pytest.approx(1.0 / 16.0, abs=1e-10)

    def test_time_derivative_closed_form(self):
        R, p = 3.0, 2.5
        h = 1e-5
        for t, r in ((2.0, 0.7), (2.4, 2.2)):
            fd = (psi_pow(R, p, t + h, r) - 2 * psi_pow(R, p, t, r) + psi_pow(R, p, t - h, r)) / h**2
            assert dtt_psi_pow(R, p, t, r) == pytest.approx(fd, rel=1e-4, abs=1e-8)

    def test_laplacian_closed_form(self):
        R, p, n = 3.0, 2.0, 3
        h = 1e-5
        for t, r in ((1.0, 2.0), (2.3, 1.9)):
            f = lambda rr: psi_pow(R, p, t, rr)
            fd = (f(r + h) - 2 * f(r) + f(r - h)) / h**2 + (n - 1) / r * (f(r + h) - f(r - h)) / (2 * h)
            assert lap_psi_pow(R, p, t, r, n) == pytest.approx(fd, rel=1e-4, abs=1e-8)

    def test_laplacian_vanishes_on_plateau_and_outside(self):
        assert lap_psi_pow(4.0, 2.0, 0.0, 0.0, 3) == 0.0
        assert lap_psi_pow(4.0, 2.0, 0.0, 1.0, 3) == 0.0
        assert lap_psi_pow(4.0, 2.0, 0.0, 5.0, 3) == 0.0

    def test_bound_constants_are_scale_invariant(self):
        out = verify_cutoff_bounds([1.0, 8.0, 64.0], p=2.0, n=3, grid_size=2000)
        assert out["time_variation"] < 1e-12
        assert out["space_variation"] < 1e-12
        assert math.isfinite(out["time_constant"]) and out["time_constant"] > 0.0


class TestGrowthIntegrals:
    def test_minkowski_layer_integral_closed_form(self):
        # n=1, a=1, r(t)=r0+t: piecewise-linear integrand with a kink where
        # r(t) = R, integrated exactly by hand
        params = CosmologyParams(n=1)
        r0, R = 0.125, 4.0
        t_kink = R - r0
        exact = 2.0 * (
            r0 * (t_kink - R / 2.0) + (t_kink**2 - (R / 2.0) ** 2) / 2.0 + R * r0
        )
        assert II_prime(params, r0, R) == pytest.approx(exact, rel=1e-12)

    def test_minkowski_annulus_integral_closed_form(self):
        params = CosmologyParams(n=1)
        r0, R, p = 0.125, 4.0, 2.0
        exact = (R / 2.0) ** 2 + r0 * R
        assert III_prime(params, r0, R, p) == pytest.approx(exact, rel=1e-12)

    def test_annulus_vanishes_when_cone_saturates(self):
        # expanding de Sitter: the cone saturates at r0 + c/(a0 H) = 2, so
        # for R/2 > 2 the annulus never opens
        params = CosmologyParams(n=2, H=1.0, sigma=-1.0)
        val, truncated = III_prime(params, 1.0, 8.0, 2.0, return_flag=True)
        assert val == 0.0 and not truncated

    def test_horizon_truncation_flagged(self):
        # crunch ends at T0 = 2/3, inside the window (R/2, R) = (1/2, 1)
        params = CosmologyParams(n=3, H=-1.0, sigma=0.0)
        val, truncated = II_prime(params, 0.5, 1.0, return_flag=True)
        assert truncated
        assert math.isfinite(val) and val > 0.0

    def test_tolerance_consistency(self):
        params = CosmologyParams(n=2, H=1.0, sigma=1.0)
        for fn in (lambda tol: II_prime(params, 0.5, 16.0, tol=tol),
                   lambda tol: III_prime(params, 0.5, 16.0, 2.0, tol=tol)):
            coarse, fine = fn(1e-6), fn(1e-10)
            assert coarse == pytest.approx(fine, rel=1e-6)

    def test_rejects_nonpositive_R(self):
        params = CosmologyParams(n=1)
        with pytest.raises(ValueError):
            II_prime(params, 0.5, 0.0)
        with pytest.raises(ValueError):
            III_prime(params, 0.5, -1.0, 2.0)


class TestScalingFits:
    def test_recovers_power_law(self):
        fit = scaling_exponent(lambda R: 3.0 * R**2.5, [2.0**k for k in range(1, 9)])
        assert not fit.exponential
        assert fit.slope == pytest.approx(2.5, abs=1e-10)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-9)
        assert fit.residual < 1e-10

    def test_flags_exponential_growth(self):
        fit = scaling_exponent(lambda R: math.exp(0.3 * R), [2.0**k for k in range(1, 9)])
        assert fit.exponential
        assert fit.exp_rate == pytest.approx(0.3, rel=1e-6)

    def test_all_zero_input(self):
        fit = scaling_exponent(lambda R: 0.0, [1.0, 2.0, 4.0])
        assert fit.all_zero

    def test_log_factor_model(self):
        fit = scaling_exponent(
            lambda R: R**2 * math.log(R), [2.0**k for k in range(2, 12)],
            with_log_factor=True,
        )
        assert fit.slope == pytest.approx(2.0, abs=1e-6)
        assert fit.log_factor_power == pytest.approx(1.0, abs=1e-6)

    def test_minkowski_hypothesis_decision(self):
        # n=1 static: both limits vanish and the layer integral grows like
        # R^(n+1) = R^2
        ev = hypothesis_13_14(CosmologyParams(n=1), 0.5, 2.0,
                              R_grid=[2.0**k for k in range(3, 11)])
        assert ev.h13 and ev.h14
        assert not ev.disagreement
        assert ev.fit_II.slope == pytest.approx(2.0, abs=0.05)

    def test_save_fit_round_trip(self, tmp_path):
        fit = scaling_exponent(lambda R: R**3, [1.0, 2.0, 4.0, 8.0])
        csv_path, json_path = tmp_path / "fit.csv", tmp_path / "fit.json"
        save_scaling_fit(fit, csv_path, json_path)
        with open(csv_path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["R", "value"]
        assert float(rows[2][1]) == 8.0
        meta = json.loads(json_path.read_text())
        assert meta["slope"] == pytest.approx(3.0, abs=1e-10)


class TestWeakIdentityContract:
    def _run(self, t_end, keep=True, interval=0.25, w1=0.8):
        params = CosmologyParams(n=1, m_sq=1.0)
        nodes = max(513, int(256 * (t_end + 1.0)) + 1)
        state = init_field(n=1, r0=0.5, r_max=t_end + 1.0, num_nodes=nodes,
                           w0=1.0, w1=w1)
        return params, run_until(params, 0.0, 2.0, state, t_end, 0.5,
                                 output_interval=interval, keep_snapshots=keep)

    def test_requires_snapshots(self):
        params, diag = self._run(2.0, keep=False)
        with pytest.raises(CoverageError):
            weak_identity_residual(diag, params, 0.0, 2.0, 2.0)

    def test_requires_full_time_window(self):
        params, diag = self._run(1.0)
        with pytest.raises(CoverageError):
            weak_identity_residual(diag, params, 0.0, 2.0, 4.0)

    def test_requires_initial_snapshot(self):
        params, diag = self._run(2.0)
        diag.snapshots = diag.snapshots[1:]
        with pytest.raises(CoverageError):
            weak_identity_residual(diag, params, 0.0, 2.0, 2.0)

    def test_linear_residual_is_small(self):
        params, diag = self._run(2.0, interval=0.05)
        residual, parts = weak_identity_residual(diag, params, 0.0, 2.0, 2.0,
                                                 return_parts=True)
        assert residual < 1e-3
        # lam = 0 removes the forcing from the balance; the defect must be
        # carried entirely by the data term V against the cutoff terms
        assert parts["V"] > 0.0
        assert parts["I"] > 0.0
