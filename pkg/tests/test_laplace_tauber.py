import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tauberlab.laplace_tauber import (
    CATALOGUE_IDS,
    BoundedSignal,
    TauberParams,
    boundary_growth_check,
    boundary_statistics,
    catalogue,
    circle_kernel_identity,
    contour_reconstruction,
    finite_laplace,
    laplace,
    mollified_contour_integral,
    psi_signal,
    study_csv,
    tail_bound_check,
    tauber_convergence_study,
    theorem3_bound,
)


@pytest.fixture(scope="module")
def exp_linear():
    return catalogue("exp_linear")


class TestSignals:
    @pytest.mark.parametrize("sid", CATALOGUE_IDS)
    def test_sup_bounds_hold(self, sid):
        assert catalogue(sid).check_sup()

    def test_unknown(self):
        with pytest.raises(ValueError):
            catalogue("cosh")

    def test_boundary_closed_form(self, exp_linear):
        t = 0.7
        assert exp_linear.boundary(t) == pytest.approx(1j * t / (1 + 1j * t) ** 2)


class TestLaplace:
    def test_exp_decay(self):
        res = laplace(catalogue("exp_decay"), 1)
        assert abs(res.value - 0.5) < 1e-8 and res.error < 1e-8

    def test_against_closed_forms(self):
        rng = np.random.default_rng(4)
        for sid in ("exp_decay", "exp_linear"):
            f = catalogue(sid)
            for _ in range(10):
                z = complex(rng.uniform(0.2, 3), rng.uniform(-10, 10))
                assert abs(laplace(f, z).value - complex(f.closed_g(z))) < 1e-8

    def test_exp_linear_to_zero(self, exp_linear):
        vals = [abs(laplace(exp_linear, z).value) for z in (1.0, 0.1, 0.01)]
        assert vals[0] > vals[1] > vals[2]
        for z, v in zip((1.0, 0.1, 0.01), vals):
            assert v == pytest.approx(z / (1 + z) ** 2, abs=1e-9)

    def test_zero_signal_exact(self):
        assert laplace(catalogue("zero"), 0.3).value == 0

    def test_rejections(self):
        f = catalogue("exp_decay")
        with pytest.raises(ValueError):
            laplace(f, -0.1)
        with pytest.raises(ValueError):
            laplace(f, 1j)
        with pytest.raises(ValueError):
            laplace(f, 1, T_max=2.0, tol=1e-10)


class TestFiniteLaplace:
    def test_values(self, exp_linear):
        assert finite_laplace(exp_linear, 0, 10) == pytest.approx(10 * math.exp(-10), rel=1e-10)
        assert finite_laplace(catalogue("exp_decay"), -1, 1) == pytest.approx(1, abs=1e-14)
        assert abs(finite_laplace(exp_linear, 0.5, 1e-9)) < 2e-9

    def test_entire_in_z(self, exp_linear):
        for z in (-2 + 3j, -0.5, 4j, 2 - 1j):
            assert finite_laplace(exp_linear, z, 3) == pytest.approx(complex(exp_linear.closed_gT(z, 3)), rel=1e-10)

    def test_rejects_T(self, exp_linear):
        with pytest.raises(ValueError):
            finite_laplace(exp_linear, 0, 0)

    def test_high_precision_t1000(self, exp_linear):
        v = finite_laplace(exp_linear, 0, 1000, dps="auto")
        exact = 1000 * mp.exp(-1000)
        assert abs(v / exact - 1) < 1e-6

    def test_fixed_dps(self, exp_linear):
        v = finite_laplace(exp_linear, 0, 100, dps=80)
        with mp.workdps(80):
            assert abs(v / (100 * mp.exp(-100)) - 1) < 1e-20


class TestKernelIdentity:
    def test_special_points(self):
        lhs, rhs = circle_kernel_identity(3.0, 3.0)
        assert lhs == pytest.approx(2 / 3) and rhs == pytest.approx(2 / 3)
        lhs, rhs = circle_kernel_identity(3j, 3.0)
        assert abs(lhs) < 1e-15 and rhs == 0

    def test_random_points(self):
        rng = np.random.default_rng(0)
        for R in (0.5, 2.0, 7.0):
            for th in rng.uniform(0, 2 * np.pi, 100):
                lhs, rhs = circle_kernel_identity(R * np.exp(1j * th), R)
                assert abs(lhs - rhs) < 1e-12

    def test_rejects_off_circle(self):
        with pytest.raises(ValueError):
            circle_kernel_identity(2.1, 2.0)


class TestContour:
    @pytest.mark.parametrize("sigma", [0.1, 0.25, 0.4])
    @pytest.mark.parametrize("R", [2, 5])
    @pytest.mark.parametrize("T", [1, 10])
    def test_reconstruction(self, sigma, R, T):
        v = contour_reconstruction(lambda z: 1 / (1 + z), sigma, R, T)
        assert abs(v - 1 / (1 + sigma)) < 1e-6

    def test_zero(self):
        for path in ("right_half_circle", "imaginary_segment", "left_half_circle"):
            assert mollified_contour_integral(lambda z: 0 * z, 0.25, 2, 3, path) == 0

    def test_full_circle_entire(self, exp_linear):
        T = 10.0
        gT = lambda z: exp_linear.closed_gT(z, T)
        v = sum(mollified_contour_integral(gT, 0.0, 2.0, T, path) for path in ("right_half_circle", "left_half_circle"))
        assert abs(v - finite_laplace(exp_linear, 0, T)) < 1e-6

    def test_pole_on_segment(self):
        with pytest.raises(ValueError):
            mollified_contour_integral(lambda z: 1 / (1 + z), 0.0, 2, 1, "imaginary_segment")

    def test_rejections(self):
        g = lambda z: 1 / (1 + z)
        with pytest.raises(ValueError):
            mollified_contour_integral(g, 0.3, 0.2, 1, "right_half_circle")
        with pytest.raises(ValueError):
            mollified_contour_integral(g, 0.3, 2, 1, "spiral")

    def test_pole_distance_reported(self):
        with pytest.raises(ValueError):
            mollified_contour_integral(lambda z: 1 / (1 + z), 2 - 1e-12, 2, 1, "right_half_circle")


class TestTailBound:
    def test_example(self):
        rep = tail_bound_check(catalogue("exp_decay"), 1, 5)
        assert rep.lhs == pytest.approx(math.exp(-10) / 2, rel=1e-9)
        assert rep.rhs == pytest.approx(math.exp(-5))
        assert not rep.tags["violated"]

    def test_T_zero(self):
        rep = tail_bound_check(catalogue("exp_decay"), 1, 0)
        assert rep.lhs == pytest.approx(0.5) and rep.rhs == pytest.approx(1.0)

    def test_random_catalogue(self):
        rng = np.random.default_rng(12)
        for sid in CATALOGUE_IDS:
            f = catalogue(sid)
            for _ in range(100):
                z = complex(rng.uniform(0.05, 3), rng.uniform(-20, 20))
                T = float(rng.uniform(0, 30))
                assert not tail_bound_check(f, z, T).tags["violated"]

    def test_rejects(self):
        with pytest.raises(ValueError):
            tail_bound_check(catalogue("exp_decay"), 0, 1)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            TauberParams(1, 0.5, 2, 10)
        with pytest.raises(ValueError):
            TauberParams(2, 0.3, 2, 10)
        with pytest.raises(ValueError):
            TauberParams(0.5, 0.1, 2, 10)
        TauberParams(2, 0.2, 2, 10)

    def test_flags(self):
        assert TauberParams(1, 0.25, 3, 100, r=5).threshold_flags() == ["R <= max(r, 1)"]
        assert "T^-k >= delta2" in TauberParams(1, 0.25, 3, 16, delta2=0.4).threshold_flags()
        assert TauberParams(1, 0.25, 10, 16, delta2=0.6, r=2).threshold_flags() == []


class TestBound:
    def test_degenerate_stats(self):
        P = TauberParams(1, 0.25, 4, 16)
        assert theorem3_bound(P, 0, 0, 0, 0, 2.0, 3.0) == pytest.approx(3 * (0.5 + 0.5))

    def test_exponents(self):
        # p = 1, k = 1/4: T^{-k}, T^{-(1-2k)} = T^{-1/2}, T^{-(1-k)} = T^{-3/4}
        for T in (16.0, 256.0):
            P = TauberParams(1, 0.25, math.sqrt(T), T)
            base = theorem3_bound(P, 0, 0, 0, 0, 0)
            assert base == pytest.approx(T**-0.25)
            sup_term = theorem3_bound(P, 1.0, 0, 0, 0, 0) - base
            assert sup_term == pytest.approx(T**-0.5 + T**-0.75)
            vp_term = theorem3_bound(P, 0, 0, 1.0, 0, 0) - base
            assert vp_term == pytest.approx(T**-0.5 * T**-0.25)

    def test_boundary_statistics(self, exp_linear):
        sup, vp = boundary_statistics(exp_linear, 0.1, 10, 1)
        assert sup == pytest.approx(0.5, rel=1e-6)  # |t|/(1+t^2) peaks at t = 1


class TestStudy:
    def test_case_study(self, exp_linear):
        st = tauber_convergence_study(exp_linear, 1, 0.25, 0.5, [10, 100, 1000])
        for r in st.reports:
            exact = r.grid_point * mp.exp(-r.grid_point)
            assert abs(r.tags["lhs_mp"] / exact - 1) < 1e-6
            assert r.tags["lhs_mp"] <= r.rhs
        assert st.fitted_constant <= 10 and st.decreasing

    def test_zero_signal(self):
        st = tauber_convergence_study(catalogue("zero"), 1, 0.25, 0.5, [10, 100])
        assert all(r.lhs == 0 for r in st.reports) and st.fitted_constant == 0

    def test_sine_rejected(self):
        with pytest.raises(ValueError):
            tauber_convergence_study(catalogue("sine"), 1, 0.25, 0.5, [10])
        # partial integrals keep oscillating
        f = catalogue("sine")
        vals = [finite_laplace(f, 0, T).real for T in (math.pi, 2 * math.pi, 3 * math.pi)]
        assert vals == pytest.approx([2, 0, 2], abs=1e-9)

    def test_csv(self, exp_linear):
        st = tauber_convergence_study(exp_linear, 1, 0.25, 0.5, [10, 1000])
        lines = study_csv(st).splitlines()
        assert lines[0] == "T,lhs,rhs,ratio,fitted_constant"
        assert lines[2].split(",")[1].startswith("5.0759588975")

    def test_classical_psi_decays(self, classical_1e6):
        f = psi_signal(classical_1e6)
        assert f.g0 == pytest.approx(-1 - 0.5772156649015329)
        assert f.check_sup(t_max=f.t_max)
        st = tauber_convergence_study(f, 1, 0.25, 0.5, [2, 6, 13], samples=201)
        lhs = [r.lhs for r in st.reports]
        assert lhs[0] > lhs[1] > lhs[2]
        assert not any(r.violated() for r in st.reports)

    def test_psi_primitive_against_quadrature(self, classical_1e4):
        f = psi_signal(classical_1e4)
        T = 5.3
        t = np.linspace(0, T, 2_000_001)
        vals = f(t)
        riemann = np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(t))
        assert f.primitive(T) == pytest.approx(riemann, abs=1e-5)

    def test_psi_range_guard(self, classical_1e4):
        f = psi_signal(classical_1e4)
        with pytest.raises(ValueError):
            f(np.array([20.0]))


class TestBoundaryGrowth:
    def test_transfer(self, exp_linear):
        rep = boundary_growth_check(exp_linear, 0.1)
        assert not rep.violated()
        assert rep.rhs == pytest.approx(1 / 0.81)

    def test_explicit_K(self, exp_linear):
        assert boundary_growth_check(exp_linear, 0.2, K=1.0).lhs <= 1.0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 5), st.floats(-30, 30), st.floats(0, 40))
def test_tail_inequality_property(re, im, T):
    assert not tail_bound_check(catalogue("exp_linear"), complex(re, im), T).tags["violated"]
