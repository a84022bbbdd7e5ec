"""Ground-truth simulation: one Euler-Maruyama path plus noisy sampling.

Noise increments are drawn per internal step (``dw ~ N(0, I dt)`` with
``dt = Ts/internal_steps``) so the simulated path law converges as the step
count grows.  Measurements ``y_k = h(t_k, x_k) + v_k`` are taken at the
sample grid, ``k = 1..N``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteState
from .linalg import psd_sqrt

__all__ = ["SimConfig", "TruthRecord", "simulate", "sample_initial_state"]


@dataclass(frozen=True)
class SimConfig:
    """Time grid for one simulation: ``n_samples`` intervals on [t0, tf]."""

    t0: float
    tf: float
    n_samples: int
    internal_steps: int

    def __post_init__(self):
        if not self.tf > self.t0:
            raise ValueError("tf must exceed t0")
        if self.n_samples < 1 or self.internal_steps < 1:
            raise ValueError("n_samples and internal_steps must be >= 1")

    @property
    def sample_dt(self):
        return (self.tf - self.t0) / self.n_samples

    @property
    def inner_dt(self):
        return self.sample_dt / self.internal_steps

    def times(self):
        return self.t0 + self.sample_dt * np.arange(self.n_samples + 1)


@dataclass
class TruthRecord:
    """One realization: states on the sample grid and measurements at k >= 1.

    ``states`` has ``n_samples + 1`` rows (including the initial state);
    ``measurements`` has ``n_samples`` rows, row ``k-1`` taken at
    ``times[k]``.
    """

    times: np.ndarray
    states: np.ndarray
    measurements: np.ndarray

    def __post_init__(self):
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("states must have one row per grid time")
        if self.measurements.shape[0] != self.times.shape[0] - 1:
            raise ValueError("measurements must have one row per sampling instant")

    @property
    def n_samples(self):
        return self.measurements.shape[0]


def sample_initial_state(belief, rng):
    """Draw x0 ~ N(mean, cov); PSD covariances (including zero) are accepted."""
    root = psd_sqrt(belief.cov)
    return belief.mean + root @ rng.standard_normal(belief.n)


def simulate(model, cfg, x0, u, d, noise, rng, measurement_rng=None):
    """Simulate one truth trajectory and its measurement sequence.

    Parameters
    ----------
    model : Model
    cfg : SimConfig
    x0 : ndarray, shape (n_x,)
        Fixed initial state (draw one with :func:`sample_initial_state` if a
        random start is wanted).
    u, d : SignalProfile
        Manipulated inputs and true nominal disturbance levels.
    noise : NoiseSpec
        Measurement noise; ``v_k ~ N(0, R)``.
    rng : RngStream
        Process-noise stream.
    measurement_rng : RngStream, optional
        Separate stream for measurement noise.  Defaults to drawing from
        ``rng`` after each interval's process noise, which is still fully
        deterministic but couples the two sequences.

    Returns
    -------
    TruthRecord

    Raises
    ------
    NonFiniteState
        If the state leaves the finite domain; the message carries the
        offending time.
    """
    x = np.asarray(x0, dtype=float).copy()
    model.validate(cfg.t0, x, u(cfg.t0), d(cfg.t0))
    meas_rng = rng if measurement_rng is None else measurement_rng

    n_x, n_w, n_y = model.n_x, model.n_w, model.n_y
    times = cfg.times()
    states = np.empty((cfg.n_samples + 1, n_x))
    measurements = np.empty((cfg.n_samples, n_y))
    states[0] = x

    drift = model.drift
    diffusion = model.diffusion
    meas = model.measurement
    constrain = model.constrain
    theta = model.theta
    dti = cfg.inner_dt
    sqdt = np.sqrt(dti)
    steps = cfg.internal_steps

    for k in range(cfg.n_samples):
        t_k = times[k]
        us = u.sample(t_k, dti, steps)
        ds = d.sample(t_k, dti, steps)
        dW = rng.standard_normal((steps, n_w)) * sqdt
        if model.constant_diffusion:
            incr = dW @ diffusion(t_k, x, us[0], ds[0], theta).T
            for j in range(steps):
                t = t_k + j * dti
                x = x + drift(t, x, us[j], ds[j], theta) * dti + incr[j]
                if not np.isfinite(x).all():
                    raise NonFiniteState(f"simulation produced non-finite state at t={t + dti!r}")
                if constrain is not None:
                    x = constrain(x)
        else:
            for j in range(steps):
                t = t_k + j * dti
                x = x + drift(t, x, us[j], ds[j], theta) * dti \
                    + diffusion(t, x, us[j], ds[j], theta) @ dW[j]
                if not np.isfinite(x).all():
                    raise NonFiniteState(f"simulation produced non-finite state at t={t + dti!r}")
                if constrain is not None:
                    x = constrain(x)
        states[k + 1] = x
        measurements[k] = meas(times[k + 1], x, theta) + noise.root @ meas_rng.standard_normal(n_y)

    return TruthRecord(times, states, measurements)
