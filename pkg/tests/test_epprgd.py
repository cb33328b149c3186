import numpy as np
import pytest

from irsec.channel import ChannelSet, SystemConfig, generate_channels
from irsec.epprgd import (
    EpprgdSettings,
    SmoothedObjective,
    default_init,
    euclidean_gradient,
    exact_penalty,
    penalty_terms,
    prgd_inner,
    riemannian_gradient,
    smoothed_value,
    solve,
)
from irsec.manifold import ManifoldPoint, project_tangent, tangency_error
from irsec.oracle import complex_to_real, finite_difference, real_to_complex
from irsec.secrecy import alphabet_scale, one_bit_membership
from tests.conftest import random_phases, random_unit


def random_point(rng, m, n_i):
    return ManifoldPoint(random_unit(rng, m), random_phases(rng, n_i))


def reference_value(channels, rho_r, u, x, theta):
    # Independent recomputation of the smoothed objective.
    big = np.diag(theta)
    h_b = channels.h_ib @ big @ channels.h_ai + channels.h_ab
    h_e = channels.h_ie @ big @ channels.h_ai + channels.h_ae
    val = np.log(
        (1 + np.linalg.norm(h_e @ x) ** 2) / (1 + np.linalg.norm(h_b @ x) ** 2)
    )
    a = alphabet_scale(x.shape[0])
    residuals = []
    for xm in x:
        residuals += [xm.real - a, xm.imag - a, -xm.real - a, -xm.imag - a]
    soft = [max(c, 0.0) + u * np.log1p(np.exp(-abs(c) / u)) for c in residuals]
    return float(val + rho_r * sum(soft))


class TestPenaltyTerms:
    def test_corner_point(self):
        a = alphabet_scale(1)
        got = penalty_terms(np.array([a + 1j * a]))
        np.testing.assert_allclose(got, [0.0, 0.0, -2 * a, -2 * a], atol=1e-15)

    def test_origin(self):
        a = alphabet_scale(1)
        got = penalty_terms(np.array([0.0 + 0j]))
        np.testing.assert_allclose(got, [-a] * 4, atol=1e-15)

    def test_alphabet_has_zero_max_residual(self, rng):
        from irsec.secrecy import quantize_one_bit

        for _ in range(20):
            x = quantize_one_bit(
                rng.standard_normal(5) + 1j * rng.standard_normal(5)
            ).x
            assert np.max(penalty_terms(x)) == pytest.approx(0.0, abs=1e-15)

    def test_length(self, rng):
        assert penalty_terms(random_unit(rng, 7)).shape == (28,)


class TestSmoothedValue:
    def test_log_two_at_zero_residual(self, tiny_channels):
        # A residual of exactly zero contributes u*log(2).
        u = 1.0
        term = u * np.log1p(np.exp(0.0 / u))
        assert term == pytest.approx(np.log(2.0))

    def test_tightness_as_u_vanishes(self):
        for c, want in ((-0.1, 0.0), (0.1, 0.1)):
            for u in (1e-2, 1e-4, 1e-6):
                got = max(c, 0.0) + u * np.log1p(np.exp(-abs(c) / u))
                assert got == pytest.approx(want, abs=50 * u * abs(np.log(u)))

    def test_matches_reference(self, tiny_channels, rng):
        for _ in range(10):
            pt = random_point(rng, 4, 3)
            for rho_r, u in [(1.0, 0.1), (10.0, 0.01)]:
                obj = SmoothedObjective(tiny_channels, rho_r, u)
                want = reference_value(tiny_channels, rho_r, u, pt.x, pt.theta)
                assert smoothed_value(obj, pt) == pytest.approx(want, rel=1e-10)

    def test_sandwich_bounds(self, tiny_channels, rng):
        # Smoothed penalty sits within [exact, exact + 4*M*u*log(2)].
        m = tiny_channels.m
        for _ in range(100):
            pt = random_point(rng, m, 3)
            for u in (0.5, 0.1, 0.01):
                obj = SmoothedObjective(tiny_channels, 1.0, u)
                smoothed_pen = smoothed_value(obj, pt) - obj.log_ratio(pt)
                exact = exact_penalty(pt.x)
                assert smoothed_pen >= exact - 1e-12
                assert smoothed_pen <= exact + 4 * m * u * np.log(2.0) + 1e-12

    def test_overflow_guard(self, tiny_channels):
        # Residual magnitudes far beyond u must not overflow.
        x = np.zeros(4, dtype=complex)
        x[0] = 1.0  # residual ~ 0.65 with u = 1e-9 -> c/u ~ 6.5e8
        pt = ManifoldPoint(x, np.ones(3, complex))
        obj = SmoothedObjective(tiny_channels, 1.0, 1e-9)
        val = smoothed_value(obj, pt)
        assert np.isfinite(val)

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            EpprgdSettings(c_r=1.0)
        with pytest.raises(ValueError):
            EpprgdSettings(u_min=0.2, u0=0.1)
        with pytest.raises(ValueError):
            SmoothedObjective(None, rho_r=0.0, u=0.1)


class TestEuclideanGradient:
    def test_penalty_gradient_vanishes_inside_box(self, tiny_channels):
        # Strictly interior coordinates with tiny smoothing: both logistic
        # factors are ~0, so only the log-ratio part remains.
        m = tiny_channels.m
        x = random_unit(np.random.default_rng(3), m) * 0.5
        x = x / np.linalg.norm(x)  # unit norm but coordinates near a/sqrt(2)
        pt = ManifoldPoint(x, random_phases(np.random.default_rng(4), 3))
        lo = SmoothedObjective(tiny_channels, 1e6, 1e-4)
        hi = SmoothedObjective(tiny_channels, 1e6, 1.0)
        gx_sharp, _ = lo.euclidean_gradient(pt)
        base, _ = SmoothedObjective(tiny_channels, 1e-300, 1.0).euclidean_gradient(pt)
        interior = np.max(np.abs(np.real(pt.x))) < alphabet_scale(m) - 1e-3
        if interior:
            np.testing.assert_allclose(gx_sharp, base, atol=1e-6)

    def test_equal_channels_zero_ratio_gradient(self, rng):
        # Identical Bob and Eve channels cancel the log-ratio term.
        h = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        g = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        f = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        ch = ChannelSet(
            h_ab_raw=h, h_ae_raw=h, h_ai=f, h_ib_raw=g, h_ie_raw=g,
            h_ab=h, h_ae=h, h_ib=g, h_ie=g,
        )
        pt = random_point(rng, 4, 3)
        obj = SmoothedObjective(ch, 1e-300, 0.1)
        gx, gt = obj.euclidean_gradient(pt)
        np.testing.assert_allclose(gt, 0.0, atol=1e-12)
        # x-gradient keeps only the (negligible) penalty part
        np.testing.assert_allclose(gx, 0.0, atol=1e-10)

    @pytest.mark.parametrize("rho_r", [1.0, 10.0])
    @pytest.mark.parametrize("u", [1e-1, 1e-2])
    def test_matches_finite_differences(self, tiny_channels, rng, rho_r, u):
        obj = SmoothedObjective(tiny_channels, rho_r, u)
        m, n_i = tiny_channels.m, tiny_channels.n_i
        for _ in range(5):
            pt = random_point(rng, m, n_i)

            def f(vec):
                x, theta = real_to_complex(vec, m, n_i)
                return reference_value(tiny_channels, rho_r, u, x, theta)

            fd = finite_difference(f, complex_to_real(pt.x, pt.theta), h=1e-6)
            gx, gt = euclidean_gradient(obj, pt)
            analytic = complex_to_real(gx, gt)
            rel = np.linalg.norm(fd - analytic) / np.linalg.norm(analytic)
            assert rel <= 1e-6


class TestRiemannianGradient:
    def test_projection_of_radial_gradient_vanishes(self, tiny_channels, rng):
        pt = random_point(rng, tiny_channels.m, tiny_channels.n_i)
        obj = SmoothedObjective(tiny_channels, 1.0, 0.1)
        gx, gt = obj.euclidean_gradient(pt)
        radial = (np.real(np.vdot(gx, pt.x)) * pt.x, gt)
        tv = project_tangent(pt, radial)
        np.testing.assert_allclose(tv.dx, 0.0, atol=1e-10)

    def test_always_tangent(self, tiny_channels, rng):
        obj = SmoothedObjective(tiny_channels, 2.0, 0.05)
        for _ in range(20):
            pt = random_point(rng, tiny_channels.m, tiny_channels.n_i)
            tv = riemannian_gradient(obj, pt)
            assert tangency_error(pt, tv) <= 1e-10

    def test_directional_derivative_match(self, tiny_channels, rng):
        # <grad, d> equals the numerical directional derivative for random
        # tangent directions.
        obj = SmoothedObjective(tiny_channels, 1.0, 0.1)
        m, n_i = tiny_channels.m, tiny_channels.n_i
        pt = random_point(rng, m, n_i)
        grad = riemannian_gradient(obj, pt)
        for _ in range(20):
            d = project_tangent(
                pt,
                (
                    rng.standard_normal(m) + 1j * rng.standard_normal(m),
                    rng.standard_normal(n_i) + 1j * rng.standard_normal(n_i),
                ),
            )
            h = 1e-6

            def along(t):
                return obj.value(
                    ManifoldPoint(
                        (pt.x + t * d.dx) / np.linalg.norm(pt.x + t * d.dx),
                        (pt.theta + t * d.dtheta) / np.abs(pt.theta + t * d.dtheta),
                    )
                )

            numeric = (along(h) - along(-h)) / (2 * h)
            inner = float(
                np.real(np.vdot(grad.dx, d.dx)) + np.real(np.vdot(grad.dtheta, d.dtheta))
            )
            assert numeric == pytest.approx(inner, rel=1e-5, abs=1e-7)


class TestPrgdInner:
    def test_stationary_start_terminates_immediately(self, tiny_channels):
        # Gradient below threshold: no iterations taken.
        cfg = SystemConfig.desk_scale(m=2, n_i=0, n_b=2, n_e=2)
        ch_bare = generate_channels(cfg, 1).zero_irs()
        zeroed = ChannelSet(
            h_ab_raw=np.zeros_like(ch_bare.h_ab_raw),
            h_ae_raw=np.zeros_like(ch_bare.h_ae_raw),
            h_ai=ch_bare.h_ai,
            h_ib_raw=ch_bare.h_ib_raw,
            h_ie_raw=ch_bare.h_ie_raw,
            h_ab=np.zeros_like(ch_bare.h_ab),
            h_ae=np.zeros_like(ch_bare.h_ae),
            h_ib=ch_bare.h_ib,
            h_ie=ch_bare.h_ie,
        )
        a = alphabet_scale(2)
        pt = ManifoldPoint(np.array([a + 1j * a, a + 1j * a]), np.zeros(0, complex))
        obj = SmoothedObjective(zeroed, 1e-300, 0.1)
        _, trace = prgd_inner(obj, pt, 1e-6, EpprgdSettings())
        assert trace.inner_iterations == 0

    def test_trace_non_increasing(self, tiny_channels, rng):
        obj = SmoothedObjective(tiny_channels, 0.5, 0.1)
        pt = random_point(rng, tiny_channels.m, tiny_channels.n_i)
        _, trace = prgd_inner(obj, pt, 1e-10, EpprgdSettings(max_inner=100))
        objs = np.array(trace.objectives)
        assert np.all(np.diff(objs) <= 1e-12)
        start = obj.value(pt)
        assert objs[0] <= start

    def test_gradient_norm_shrinks(self, tiny_channels, rng):
        obj = SmoothedObjective(tiny_channels, 0.5, 0.1)
        pt = random_point(rng, tiny_channels.m, tiny_channels.n_i)
        g0 = riemannian_gradient(obj, pt).norm()
        out, _ = prgd_inner(obj, pt, 1e-12, EpprgdSettings(max_inner=300))
        g1 = riemannian_gradient(obj, out).norm()
        assert g1 < g0

    def test_synthetic_sphere_objective(self, rng):
        # Separable objective with a known sphere minimizer.
        target = 2.0 * random_unit(rng, 5)

        class Quad:
            channels = None

            def value(self, point):
                return 0.5 * float(np.linalg.norm(point.x - target) ** 2)

            def riemannian_gradient(self, point):
                return project_tangent(
                    point, (point.x - target, np.zeros_like(point.theta))
                )

        pt = ManifoldPoint(random_unit(rng, 5), np.zeros(0, complex))
        out, trace = prgd_inner(Quad(), pt, 1e-14, EpprgdSettings(max_inner=2000))
        np.testing.assert_allclose(out.x, target / np.linalg.norm(target), atol=1e-4)

    def test_rejects_bad_eps(self, tiny_channels, rng):
        obj = SmoothedObjective(tiny_channels, 1.0, 0.1)
        with pytest.raises(ValueError):
            prgd_inner(obj, random_point(rng, 4, 3), 0.0, EpprgdSettings())


class TestSolve:
    def test_desk_scale_convergence(self, desk_channels):
        settings = EpprgdSettings()
        x, theta, trace = solve(desk_channels, settings, init_seed=0)
        assert trace.converged
        assert trace.final_violation <= settings.tau
        assert trace.final_smoothing <= settings.u_min
        assert one_bit_membership(x.x, tol=1e-12).ok
        assert np.max(np.abs(np.abs(theta.theta) - 1.0)) <= 1e-12

    def test_deterministic(self, desk_channels):
        x1, th1, tr1 = solve(desk_channels, init_seed=9)
        x2, th2, tr2 = solve(desk_channels, init_seed=9)
        np.testing.assert_array_equal(x1.x, x2.x)
        np.testing.assert_array_equal(th1.theta, th2.theta)

    def test_armijo_records_satisfy_contract(self, desk_channels):
        _, _, trace = solve(desk_channels, init_seed=2)
        assert trace.armijo_records
        for rec in trace.armijo_records:
            assert (
                rec.value_new - rec.value_old
                <= -0.5 * rec.alpha * rec.grad_norm_sq
            )

    def test_outer_cap_flags_nonconvergence(self, desk_channels):
        settings = EpprgdSettings(max_outer=2, max_inner=5)
        x, theta, trace = solve(desk_channels, settings, init_seed=0)
        assert not trace.converged
        assert one_bit_membership(x.x).ok

    def test_oracle_bound_on_tiny_instance(self, tiny_channels):
        from irsec.oracle import enumerate_precoders

        for seed in range(5):
            x, theta, trace = solve(tiny_channels, init_seed=seed)
            _, best = enumerate_precoders(tiny_channels, theta.theta)
            assert trace.final_rate <= best + 1e-9

    def test_default_init_feasible(self, tiny_channels):
        pt = default_init(tiny_channels, np.random.default_rng(0))
        assert abs(np.linalg.norm(pt.x) - 1.0) <= 1e-12
        assert np.max(np.abs(np.abs(pt.theta) - 1.0)) <= 1e-12
