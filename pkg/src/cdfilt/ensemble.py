"""Shared machinery for sample-based filters (ensemble Kalman, particle).

Propagation advances each member independently by Euler-Maruyama with its
own Brownian increments; statistics use exactly-rounded column sums
(``math.fsum``) so that mean, covariance, and anything derived from them are
bit-identical under any permutation of the members.
"""

import math

import numpy as np

from .errors import NonFiniteState
from .integrate import em_path, em_path_const
from .linalg import psd_sqrt

__all__ = ["sample_members", "propagate_members", "ensemble_mean_cov", "exact_mean", "exact_crosscov"]


def exact_mean(arr):
    """Column means with exactly-rounded summation (permutation invariant)."""
    n = arr.shape[0]
    return np.array([math.fsum(col.tolist()) for col in arr.T]) / n


def exact_crosscov(dev_a, dev_b):
    """``dev_a.T @ dev_b / (N-1)`` with exactly-rounded entry sums.

    Both arguments are deviation matrices (rows already centered).
    """
    n = dev_a.shape[0]
    out = np.empty((dev_a.shape[1], dev_b.shape[1]))
    for i in range(dev_a.shape[1]):
        col = dev_a[:, i]
        for j in range(dev_b.shape[1]):
            out[i, j] = math.fsum((col * dev_b[:, j]).tolist())
    return out / (n - 1)


def ensemble_mean_cov(members):
    """Sample mean (1/N) and covariance (1/(N-1)) of a member matrix.

    Permutation invariant bit-for-bit thanks to exact summation; the
    covariance is symmetric by construction.
    """
    mean = exact_mean(members)
    dev = members - mean
    n_x = members.shape[1]
    cov = np.empty((n_x, n_x))
    for i in range(n_x):
        col = dev[:, i]
        for j in range(i, n_x):
            s = math.fsum((col * dev[:, j]).tolist())
            cov[i, j] = cov[j, i] = s
    return mean, cov / (members.shape[0] - 1)


def sample_members(belief, n_members, rng):
    """Draw ``n_members`` rows from N(mean, cov); PSD covariances allowed.

    A zero covariance collapses every member onto the mean, which is the
    documented degenerate case, so the square root is the PSD one rather
    than a strict Cholesky.
    """
    if n_members < 2:
        raise ValueError("sample covariance needs at least 2 members")
    root = psd_sqrt(belief.cov)
    xi = rng.standard_normal((n_members, belief.n))
    return belief.mean + xi @ root.T


def propagate_members(members, model, t0, t1, u, d, internal_steps, rng):
    """Advance every member by Euler-Maruyama with independent noise.

    Increments are ``dw ~ N(0, I dt)`` per internal step, drawn in one block
    so the stream consumption is independent of member loop order.  A
    non-finite excursion reports the offending member index.
    """
    members = np.asarray(members, dtype=float)
    n_m = members.shape[0]
    dt = (t1 - t0) / internal_steps
    us = u.sample(t0, dt, internal_steps)
    ds = d.sample(t0, dt, internal_steps)
    dW = rng.standard_normal((n_m, internal_steps, model.n_w)) * np.sqrt(dt)

    drift = model.drift
    theta = model.theta
    out = np.empty_like(members)
    if model.constant_diffusion:
        sig_t = model.diffusion(t0, members[0], us[0], ds[0], theta).T
        for i in range(n_m):
            try:
                out[i] = em_path_const(drift, theta, members[i], t0, dt, us, ds, dW[i] @ sig_t)
            except NonFiniteState as exc:
                raise NonFiniteState(f"member {i}: {exc}") from None
    else:
        diffusion = model.diffusion
        for i in range(n_m):
            try:
                out[i] = em_path(drift, diffusion, theta, members[i], t0, dt, us, ds, dW[i])
            except NonFiniteState as exc:
                raise NonFiniteState(f"member {i}: {exc}") from None
    return out
