"""Model abstraction tests: beliefs, profiles, noise specs, Jacobian checks."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cdfilt.errors import DimensionMismatch, NotPositiveDefinite, OutOfRange
from cdfilt.models import (
    GaussianBelief,
    JacobianCheckReport,
    Model,
    NoiseSpec,
    SignalProfile,
    check_jacobians,
    fd_jacobian,
)
from cdfilt.rng import RngStream

from helpers import linear_model, ou_model


class TestFdJacobian:
    def test_linear_map_recovered(self):
        a = np.array([[1.0, 2.0], [3.0, -4.0], [0.5, 0.0]])
        jac = fd_jacobian(lambda x: a @ x, np.array([0.3, -1.2]))
        np.testing.assert_allclose(jac, a, rtol=0, atol=1e-8)

    def test_quadratic_second_order_accuracy(self):
        # d/dx (x^3) = 3 x^2; central differences are O(h^2) accurate
        jac = fd_jacobian(lambda x: x**3, np.array([2.0]))
        assert jac[0, 0] == pytest.approx(12.0, rel=1e-9)

    def test_rectangular_shape(self):
        jac = fd_jacobian(lambda x: np.array([x.sum()]), np.zeros(4))
        assert jac.shape == (1, 4)
        np.testing.assert_allclose(jac, np.ones((1, 4)), atol=1e-8)


class TestModel:
    def test_jacobian_fallback_matches_analytic(self):
        a = np.array([[-1.0, 0.5], [0.0, -2.0]])
        sig = np.eye(2)
        c = np.array([[1.0, 0.0]])
        with_jac = linear_model(a, sig, c)
        without = Model(
            n_x=2, n_u=0, n_d=0, n_w=2, n_y=1, theta=np.zeros(0),
            drift=with_jac.drift, diffusion=with_jac.diffusion,
            measurement=with_jac.measurement,
        )
        x = np.array([0.7, -0.4])
        args = (0.0, x, np.zeros(0), np.zeros(0))
        np.testing.assert_allclose(without.A(*args), with_jac.A(*args), atol=1e-7)
        np.testing.assert_allclose(without.C(0.0, x), with_jac.C(0.0, x), atol=1e-7)

    def test_validate_passes_consistent_model(self):
        model = ou_model(0.5, 1.0, n=3)
        assert model.validate(0.0, np.zeros(3), np.zeros(0), np.zeros(3)) is model

    def test_validate_names_offending_callable(self):
        model = ou_model(0.5, 1.0, n=2)
        model.drift = lambda t, x, u, d, th: np.zeros(5)  # wrong width
        with pytest.raises(DimensionMismatch, match="drift"):
            model.validate(0.0, np.zeros(2), np.zeros(0), np.zeros(2))

    def test_negative_dimension_rejected(self):
        with pytest.raises(DimensionMismatch):
            Model(n_x=-1, n_u=0, n_d=0, n_w=0, n_y=0, theta=np.zeros(0),
                  drift=None, diffusion=None, measurement=None)


class TestGaussianBelief:
    def test_basic_construction(self):
        b = GaussianBelief(np.array([1.0, 2.0]), np.diag([4.0, 9.0]))
        assert b.n == 2
        np.testing.assert_array_equal(b.marginal_std(), [2.0, 3.0])

    def test_rejects_asymmetric_cov(self):
        with pytest.raises(NotPositiveDefinite, match="symmetric"):
            GaussianBelief(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_rejects_indefinite_cov(self):
        with pytest.raises(NotPositiveDefinite, match="eigenvalue"):
            GaussianBelief(np.zeros(2), np.diag([1.0, -0.5]))

    def test_validate_false_skips_checks(self):
        b = GaussianBelief(np.zeros(2), np.diag([1.0, -0.5]), validate=False)
        # clipped at zero rather than emitting NaN
        np.testing.assert_array_equal(b.marginal_std(), [1.0, 0.0])

    def test_rejects_matrix_mean(self):
        with pytest.raises(DimensionMismatch, match="mean"):
            GaussianBelief(np.zeros((2, 1)), np.eye(2))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(DimensionMismatch, match="cov shape"):
            GaussianBelief(np.zeros(3), np.eye(2))

    def test_tiny_negative_eig_within_tolerance_ok(self):
        cov = np.diag([1.0, -1e-12])  # above the -1e-9 * trace floor
        b = GaussianBelief(np.zeros(2), cov)
        assert b.marginal_std()[1] == 0.0


class TestSignalProfile:
    def test_breakpoint_owns_interval_starting_there(self):
        prof = SignalProfile(np.array([0.0, 10.0]), np.array([[1.0], [2.0]]))
        assert prof(0.0)[0] == 1.0
        assert prof(9.999)[0] == 1.0
        assert prof(10.0)[0] == 2.0  # switch instant belongs to the new value
        assert prof(1e9)[0] == 2.0  # last value extends forever

    def test_before_first_breakpoint_raises(self):
        prof = SignalProfile.constant(np.array([5.0]), start=1.0)
        with pytest.raises(OutOfRange):
            prof(0.5)
        with pytest.raises(OutOfRange):
            prof.sample(0.0, 0.1, 3)

    def test_constant_factory(self):
        prof = SignalProfile.constant(np.array([3.0, 4.0]))
        assert prof.dim == 2
        np.testing.assert_array_equal(prof(123.4), [3.0, 4.0])

    def test_scalar_values_promoted_to_column(self):
        prof = SignalProfile(np.array([0.0, 1.0]), np.array([7.0, 8.0]))
        assert prof.dim == 1
        assert prof(0.5)[0] == 7.0

    def test_rejects_decreasing_breakpoints(self):
        with pytest.raises(ValueError, match="increasing"):
            SignalProfile(np.array([0.0, 0.0]), np.array([[1.0], [2.0]]))

    def test_rejects_empty(self):
        with pytest.raises(DimensionMismatch):
            SignalProfile(np.array([]), np.zeros((0, 1)))

    @given(st.floats(0.0, 50.0), st.floats(0.01, 2.0), st.integers(0, 40))
    def test_sample_agrees_with_pointwise_evaluation(self, t0, dt, n_steps):
        prof = SignalProfile(np.array([0.0, 5.0, 20.0]),
                             np.array([[1.0, -1.0], [2.0, 0.0], [3.0, 9.0]]))
        grid = prof.sample(t0, dt, n_steps)
        assert grid.shape == (n_steps, 2)
        for j in range(n_steps):
            np.testing.assert_array_equal(grid[j], prof(t0 + dt * j))


class TestNoiseSpec:
    def test_root_squares_to_cov(self):
        cov = np.array([[4.0, 1.0], [1.0, 2.0]])
        spec = NoiseSpec(cov)
        np.testing.assert_allclose(spec.root @ spec.root.T, cov, atol=1e-12)
        assert spec.n == 2

    def test_zero_cov_is_legal_and_noiseless(self):
        spec = NoiseSpec(np.zeros((2, 2)))
        np.testing.assert_array_equal(spec.sample(RngStream(1)), np.zeros(2))

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            NoiseSpec(np.diag([1.0, -1.0]))

    def test_sample_shapes_and_reproducibility(self):
        spec = NoiseSpec(np.diag([4.0, 9.0]))
        one = spec.sample(RngStream(2))
        assert one.shape == (2,)
        np.testing.assert_array_equal(one, spec.root @ RngStream(2).standard_normal(2))
        many = spec.sample(RngStream(2), n_draws=5)
        assert many.shape == (5, 2)
        np.testing.assert_array_equal(
            many, RngStream(2).standard_normal((5, 2)) @ spec.root.T)


class TestCheckJacobians:
    def test_correct_analytic_jacobians_pass(self):
        model = ou_model(0.3, 2.0, n=2)
        report = check_jacobians(model, RngStream(5), -np.ones(2), np.ones(2),
                                 n_points=20, d=np.zeros(2))
        assert isinstance(report, JacobianCheckReport)
        assert report.passed
        assert report.max_drift_err < 1e-6

    def test_wrong_jacobian_flagged(self):
        model = ou_model(0.3, 2.0, n=2)
        model.drift_jacobian = lambda t, x, u, d, th: +0.3 * np.eye(2)  # sign flipped
        report = check_jacobians(model, RngStream(5), -np.ones(2), np.ones(2),
                                 n_points=10, d=np.zeros(2))
        assert not report.passed
        assert all(which == "drift" for which, _, _ in report.failures)

    def test_no_analytic_jacobians_trivially_pass(self):
        base = ou_model(0.3, 2.0, n=2)
        model = Model(
            n_x=2, n_u=0, n_d=2, n_w=2, n_y=2, theta=np.zeros(0),
            drift=base.drift, diffusion=base.diffusion, measurement=base.measurement,
        )
        report = check_jacobians(model, RngStream(5), -np.ones(2), np.ones(2),
                                 n_points=5, d=np.zeros(2))
        assert report.passed
        assert report.max_drift_err == 0.0
