"""Ensemble Kalman filter with perturbed observations.

The belief is carried by ``N_p`` equally weighted members.  The time update
propagates each member through the SDE with independent noise; the
measurement update computes one gain from ensemble statistics,

    R_e  = R_zz + R,          K = R_xy R_e^{-1},

and shifts every member by its own perturbed innovation
``e_i = (y + v_i) - z_i`` with ``v_i ~ N(0, R)``.  Cross- and innovation
covariances are taken about the predicted-measurement ensemble mean with
the 1/(N_p - 1) normalization.
"""

import numpy as np

from .ensemble import ensemble_mean_cov, exact_crosscov, exact_mean, propagate_members, sample_members
from .linalg import _solve_spd_fast

__all__ = ["enkf_init", "enkf_time_update", "enkf_measurement_update", "ensemble_mean_cov"]


def enkf_init(belief, n_members, rng):
    """Sample the initial ensemble from N(mean, P0); P0 may be singular."""
    return sample_members(belief, n_members, rng)


def enkf_time_update(members, model, t0, t1, u, d, internal_steps, rng):
    """Propagate every ensemble member over ``[t0, t1]``."""
    return propagate_members(members, model, t0, t1, u, d, internal_steps, rng)


def enkf_measurement_update(members, model, t, y, noise, rng):
    """Perturbed-observation update; returns the shifted ensemble."""
    n_m = members.shape[0]
    meas = model.measurement
    theta = model.theta
    z = np.empty((n_m, model.n_y))
    for i in range(n_m):
        z[i] = meas(t, members[i], theta)

    dz = z - exact_mean(z)
    dx = members - exact_mean(members)
    r_e = exact_crosscov(dz, dz) + noise.cov
    r_e = 0.5 * (r_e + r_e.T)
    r_xy = exact_crosscov(dx, dz)

    k = _solve_spd_fast(r_e, r_xy.T, "EnKF innovation covariance is not positive definite").T
    innov = (y + noise.sample(rng, n_m)) - z
    return members + innov @ k.T
