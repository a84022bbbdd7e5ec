"""Small model factories shared across test modules.

Everything here builds plain :class:`cdfilt.models.Model` instances with
linear dynamics so filters can be checked against closed-form references.
"""

import numpy as np

from cdfilt.models import Model, SignalProfile


def zero_profile(dim=0):
    """Constant all-zero signal of the given width (width 0 is legal)."""
    return SignalProfile.constant(np.zeros(dim))


def linear_model(a, sig, c):
    """``dx = A x dt + sig dw``, ``y = C x``; Jacobians supplied analytically.

    ``sig`` may have zero columns (``n_w = 0``) for a deterministic drift.
    """
    a = np.asarray(a, dtype=float)
    sig = np.asarray(sig, dtype=float)
    c = np.asarray(c, dtype=float)
    n_x = a.shape[0]
    return Model(
        n_x=n_x,
        n_u=0,
        n_d=0,
        n_w=sig.shape[1],
        n_y=c.shape[0],
        theta=np.zeros(0),
        drift=lambda t, x, u, d, th: a @ x,
        diffusion=lambda t, x, u, d, th: sig,
        measurement=lambda t, x, th: c @ x,
        drift_jacobian=lambda t, x, u, d, th: a,
        measurement_jacobian=lambda t, x, th: c,
        constant_diffusion=True,
    )


def measurement_only_model(c):
    """Static-state model (zero drift/diffusion) with measurement ``y = C x``.

    Used for one-step measurement-update problems where the time update is
    irrelevant.
    """
    c = np.asarray(c, dtype=float)
    n_y, n_x = c.shape
    return Model(
        n_x=n_x,
        n_u=0,
        n_d=0,
        n_w=0,
        n_y=n_y,
        theta=np.zeros(0),
        drift=lambda t, x, u, d, th: np.zeros(n_x),
        diffusion=lambda t, x, u, d, th: np.zeros((n_x, 0)),
        measurement=lambda t, x, th: c @ x,
        drift_jacobian=lambda t, x, u, d, th: np.zeros((n_x, n_x)),
        measurement_jacobian=lambda t, x, th: c,
        constant_diffusion=True,
    )


def ou_model(rate, diffusion_scale, n=2):
    """``n`` independent mean-reverting channels driven by the disturbance input.

    ``dx_i = rate (d_i - x_i) dt + diffusion_scale dw_i``, ``y = x``.
    """
    sig = diffusion_scale * np.eye(n)
    return Model(
        n_x=n,
        n_u=0,
        n_d=n,
        n_w=n,
        n_y=n,
        theta=np.zeros(0),
        drift=lambda t, x, u, d, th: rate * (d - x),
        diffusion=lambda t, x, u, d, th: sig,
        measurement=lambda t, x, th: x.copy(),
        drift_jacobian=lambda t, x, u, d, th: -rate * np.eye(n),
        measurement_jacobian=lambda t, x, th: np.eye(n),
        constant_diffusion=True,
    )


def random_stable_linear(rng, n_x, n_w, n_y):
    """Random strictly stable (Hurwitz) linear model with SPD ingredients.

    Returns ``(model, a, sig, c)``; the spectral abscissa of ``a`` is shifted
    below -0.3 so covariances stay bounded over long horizons.
    """
    a = rng.standard_normal((n_x, n_x))
    shift = max(np.linalg.eigvals(a).real.max(), 0.0) + 0.3
    a = a - shift * np.eye(n_x)
    sig = 0.5 * rng.standard_normal((n_x, n_w))
    c = rng.standard_normal((n_y, n_x))
    return linear_model(a, sig, c), a, sig, c
