"""Particle filter tests: weights, ESS, systematic resampling, posterior limits."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cdfilt.errors import AllWeightsZero, WeightSumMismatch
from cdfilt.models import GaussianBelief, NoiseSpec
from cdfilt.pf import (
    effective_sample_size,
    pf_estimate,
    pf_init,
    pf_likelihood_weights,
    pf_time_update,
    systematic_resample,
)
from cdfilt.rng import RngStream

from helpers import measurement_only_model
from oracles import kf_posterior


class TestLikelihoodWeights:
    def test_hand_checked_two_particles(self):
        # innovations 0 and 1 with R = 1: w ~ (1, e^{-1/2}), normalized
        model = measurement_only_model(np.eye(1))
        particles = np.array([[0.0], [1.0]])
        w = pf_likelihood_weights(particles, model, 0.0, np.array([0.0]),
                                  NoiseSpec(np.eye(1)))
        q = np.exp(-0.5)
        np.testing.assert_allclose(w, [1.0 / (1.0 + q), q / (1.0 + q)], rtol=1e-14)
        assert w[0] == pytest.approx(0.6224593312018546)
        assert w[1] == pytest.approx(0.3775406687981454)

    def test_sum_to_one_and_nonnegative(self):
        model = measurement_only_model(np.array([[1.0, -0.5]]))
        rng = RngStream(1)
        particles = rng.standard_normal((200, 2))
        w = pf_likelihood_weights(particles, model, 0.0, np.array([0.4]),
                                  NoiseSpec(np.array([[0.3]])))
        assert w.min() >= 0.0
        assert math.fsum(w.tolist()) == pytest.approx(1.0, abs=1e-12)

    def test_tiny_noise_does_not_underflow(self):
        # distances of hundreds of sigma: naive exp() would underflow every
        # weight; max-subtraction keeps the relative weights exact
        model = measurement_only_model(np.eye(1))
        particles = np.array([[1000.0], [1000.1], [1005.0]])
        w = pf_likelihood_weights(particles, model, 0.0, np.array([0.0]),
                                  NoiseSpec(np.array([[1e-2]])))
        assert w[0] > 0.99
        assert w.argmax() == 0
        assert math.fsum(w.tolist()) == pytest.approx(1.0)

    def test_nan_measurement_raises(self):
        model = measurement_only_model(np.eye(1))
        particles = np.array([[np.nan], [1.0]])
        with pytest.raises(AllWeightsZero):
            pf_likelihood_weights(particles, model, 0.0, np.array([0.0]),
                                  NoiseSpec(np.eye(1)))

    def test_correlated_noise_whitening(self):
        # R with strong correlation: equidistant-in-euclidean particles get
        # different weights once whitened
        model = measurement_only_model(np.eye(2))
        r = np.array([[1.0, 0.9], [0.9, 1.0]])
        particles = np.array([[1.0, 1.0], [1.0, -1.0]])
        w = pf_likelihood_weights(particles, model, 0.0, np.zeros(2), NoiseSpec(r))
        # (1,1) lies along the high-variance eigenvector: more likely
        assert w[0] > w[1]
        maha = lambda e: e @ np.linalg.solve(r, e)
        want = np.exp(-0.5 * (maha(np.array([1.0, 1.0])) - maha(np.array([1.0, -1.0]))))
        assert w[0] / w[1] == pytest.approx(want, rel=1e-10)


class TestEffectiveSampleSize:
    def test_uniform_weights(self):
        assert effective_sample_size(np.full(50, 1 / 50)) == pytest.approx(50.0)

    def test_degenerate_weights(self):
        w = np.zeros(50)
        w[3] = 1.0
        assert effective_sample_size(w) == pytest.approx(1.0)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 100))
    def test_bounded_between_one_and_n(self, seed, n):
        rng = np.random.default_rng(seed)
        w = rng.uniform(0.0, 1.0, n) + 1e-12
        w /= w.sum()
        ess = effective_sample_size(w)
        assert 1.0 - 1e-9 <= ess <= n * (1.0 + 1e-9)


class TestSystematicResample:
    def test_uniform_weights_identity_permutation(self):
        # every particle receives exactly one copy for any interior offset
        particles = np.arange(10.0).reshape(5, 2)
        w = np.full(5, 0.2)
        for q1 in (1e-6, 0.2, 0.5, 0.999):
            out = systematic_resample(particles, w, q1)
            np.testing.assert_array_equal(out, particles)

    def test_degenerate_weights_all_copies(self):
        particles = np.arange(8.0).reshape(4, 2)
        for j in range(4):
            w = np.zeros(4)
            w[j] = 1.0
            out = systematic_resample(particles, w, 0.25)
            np.testing.assert_array_equal(out, np.tile(particles[j], (4, 1)))

    def test_offset_zero_boundary(self):
        # q1 = 0 puts points exactly on cumulative-weight edges; a point on
        # the edge s_i selects particle i (the interval is (s_{i-1}, s_i])
        particles = np.array([[1.0], [2.0]])
        out = systematic_resample(particles, np.array([0.5, 0.5]), 0.0)
        np.testing.assert_array_equal(out, [[1.0], [1.0]])

    def test_copy_counts_within_one_of_expectation(self):
        rng = RngStream(21)
        n = 64
        w = rng.uniform(n)
        w = w / math.fsum(w.tolist())
        particles = np.arange(float(n)).reshape(n, 1)
        out = systematic_resample(particles, w, rng.uniform())
        counts = np.bincount(out[:, 0].astype(int), minlength=n)
        np.testing.assert_array_less(np.abs(counts - n * w), 1.0 + 1e-9)

    def test_rejects_bad_offset(self):
        particles = np.zeros((2, 1))
        w = np.array([0.5, 0.5])
        for q1 in (-0.1, 1.0, 1.5):
            with pytest.raises(ValueError, match="q1"):
                systematic_resample(particles, w, q1)

    def test_rejects_negative_weights(self):
        with pytest.raises(WeightSumMismatch, match="negative"):
            systematic_resample(np.zeros((2, 1)), np.array([1.5, -0.5]), 0.3)

    def test_rejects_unnormalized_weights(self):
        with pytest.raises(WeightSumMismatch, match="sum"):
            systematic_resample(np.zeros((2, 1)), np.array([0.5, 0.6]), 0.3)

    def test_rows_are_input_rows(self):
        rng = RngStream(22)
        particles = rng.standard_normal((30, 3))
        w = rng.uniform(30)
        w = w / math.fsum(w.tolist())
        out = systematic_resample(particles, w, rng.uniform())
        in_rows = {row.tobytes() for row in particles}
        assert all(row.tobytes() in in_rows for row in out)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40)
    def test_copy_count_property_random_weights(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 40))
        w = rng.dirichlet(np.ones(n))
        w = w / math.fsum(w.tolist())
        out = systematic_resample(np.arange(float(n)).reshape(n, 1), w,
                                  float(rng.uniform(0.0, 1.0 - 1e-12)))
        counts = np.bincount(out[:, 0].astype(int), minlength=n)
        # systematic resampling guarantees floor/ceil of the expected count
        assert np.all(counts >= np.floor(n * w) - 1e-9)
        assert np.all(counts <= np.ceil(n * w) + 1e-9)


class TestEstimate:
    def test_gaussian_summary(self):
        particles = np.array([[0.0, 0.0], [2.0, 2.0], [4.0, 1.0]])
        belief = pf_estimate(particles)
        assert isinstance(belief, GaussianBelief)
        np.testing.assert_array_equal(belief.mean, [2.0, 1.0])
        np.testing.assert_allclose(belief.cov, np.cov(particles.T, ddof=1),
                                   atol=1e-14)


class TestOneStepPosterior:
    def test_converges_to_kalman_posterior(self):
        # prior N(0,1), y = x + v, R = 1, y = 0.8: posterior N(0.4, 0.5)
        model = measurement_only_model(np.eye(1))
        prior = GaussianBelief(np.zeros(1), np.eye(1))
        noise = NoiseSpec(np.eye(1))
        y = np.array([0.8])
        exact_mean, exact_cov = kf_posterior(prior.mean, prior.cov,
                                             np.eye(1), np.eye(1), y)
        n_p = 50_000
        rng = RngStream(23)
        particles = pf_init(prior, n_p, rng)
        w = pf_likelihood_weights(particles, model, 0.0, y, noise)
        particles = systematic_resample(particles, w, rng.uniform())
        belief = pf_estimate(particles)
        # resampling keeps the MC error at the same 1/sqrt(N) order
        assert abs(belief.mean[0] - exact_mean[0]) < 6.0 * np.sqrt(exact_cov[0, 0] / n_p)
        assert belief.cov[0, 0] == pytest.approx(exact_cov[0, 0], rel=0.05)

    def test_full_cycle_runs_deterministically(self):
        from helpers import ou_model, zero_profile
        from cdfilt.models import SignalProfile
        model = ou_model(0.4, 0.8, n=2)
        prior = GaussianBelief(np.zeros(2), np.eye(2))
        noise = NoiseSpec(0.25 * np.eye(2))
        d = SignalProfile.constant(np.zeros(2))

        def run():
            rng = RngStream(24)
            particles = pf_init(prior, 300, rng)
            for k in range(3):
                particles = pf_time_update(particles, model, k * 1.0, (k + 1) * 1.0,
                                           zero_profile(0), d, 10, rng)
                w = pf_likelihood_weights(particles, model, (k + 1) * 1.0,
                                          np.array([0.3, -0.2]), noise)
                particles = systematic_resample(particles, w, rng.uniform())
            return pf_estimate(particles)

        a, b = run(), run()
        np.testing.assert_array_equal(a.mean, b.mean)
        np.testing.assert_array_equal(a.cov, b.cov)
