"""Bootstrap particle filter with systematic resampling.

Particles move under the prior dynamics (shared propagation with the
ensemble filter); weights are Gaussian measurement likelihoods computed in
log space with max-subtraction, so small measurement noise cannot underflow
a whole weight vector whose relative likelihoods are fine.  Resampling is
systematic -- one uniform draw, ``N_p`` equally spaced points against the
cumulative weights -- and runs at every measurement update; the effective
sample size is reported as a diagnostic but never gates resampling.
"""

import math

import numpy as np

from .ensemble import ensemble_mean_cov, propagate_members, sample_members
from .errors import AllWeightsZero, WeightSumMismatch
from .linalg import _solve_spd_fast
from .models import GaussianBelief

__all__ = [
    "pf_init",
    "pf_time_update",
    "pf_likelihood_weights",
    "systematic_resample",
    "pf_estimate",
    "effective_sample_size",
]


def pf_init(belief, n_particles, rng):
    """Sample the initial particle cloud from N(mean, P0)."""
    return sample_members(belief, n_particles, rng)


def pf_time_update(particles, model, t0, t1, u, d, internal_steps, rng):
    """Propagate every particle over ``[t0, t1]`` (bootstrap proposal)."""
    return propagate_members(particles, model, t0, t1, u, d, internal_steps, rng)


def pf_likelihood_weights(particles, model, t, y, noise):
    """Normalized weights ``w_i propto exp(-e_i^T R^-1 e_i / 2)``.

    The density constant cancels under normalization and is omitted.
    Raises :class:`AllWeightsZero` if the weight vector degenerates to
    NaN/zero even after max-subtraction (a sign of non-finite particles or
    measurements, not of legitimately unlikely ones).
    """
    n_p = particles.shape[0]
    meas = model.measurement
    theta = model.theta
    z = np.empty((n_p, model.n_y))
    for i in range(n_p):
        z[i] = meas(t, particles[i], theta)

    err = y - z
    white = _solve_spd_fast(noise.cov, err.T, "PF measurement covariance is not positive definite")
    logw = -0.5 * np.einsum("ji,ji->i", white, err.T)
    top = np.max(logw)
    if not np.isfinite(top):
        raise AllWeightsZero("all particle log-likelihoods are non-finite")
    w = np.exp(logw - top)
    total = w.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise AllWeightsZero("particle weights vanished after normalization")
    return w / total


def effective_sample_size(weights):
    """ESS = 1 / sum(w^2); equals N_p for uniform weights, 1 for degenerate ones."""
    return 1.0 / float(np.sum(np.square(weights)))


def systematic_resample(particles, weights, q1):
    """Resample with points ``q_l = (l - 1 + q1)/N_p`` against cumulative weights.

    Point ``q_l`` selects particle ``i`` when it falls in ``(s_{i-1}, s_i]``
    with ``s_i`` the cumulative weight sum.  The output always holds exactly
    ``N_p`` rows, each bit-identical to some input particle.
    """
    w = np.asarray(weights, dtype=float)
    n_p = w.shape[0]
    if not 0.0 <= q1 < 1.0:
        raise ValueError(f"q1 must lie in [0, 1), got {q1}")
    if np.any(w < 0.0):
        raise WeightSumMismatch("negative weights")
    if abs(math.fsum(w.tolist()) - 1.0) > 1e-9:
        raise WeightSumMismatch(f"weights sum to {math.fsum(w.tolist())!r}, not 1")
    points = (np.arange(n_p) + q1) / n_p
    cum = np.cumsum(w)
    idx = np.searchsorted(cum, points, side="left")
    return particles[np.minimum(idx, n_p - 1)]


def pf_estimate(particles):
    """Gaussian summary of a resampled (uniform-weight) cloud: 1/N mean, 1/(N-1) cov."""
    mean, cov = ensemble_mean_cov(particles)
    return GaussianBelief(mean, cov)
