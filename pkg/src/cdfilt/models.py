"""Model abstraction for continuous-discrete stochastic systems.

A :class:`Model` bundles the Ito SDE

    dx = f(t, x, u, d, theta) dt + sigma(t, x, u, d, theta) dw

with a discrete measurement map ``y_k = h(t_k, x_k, theta) + v_k``.  All
callables take the flat parameter vector ``theta`` explicitly so that one
structural model can be instantiated with several parameterizations (e.g. a
truth tuning and an estimator tuning).

Jacobians ``A = df/dx`` and ``C = dh/dx`` are part of the contract: if a
model does not supply analytic ones, :meth:`Model.A` / :meth:`Model.C` fall
back to central finite differences automatically, and
:func:`check_jacobians` cross-validates any analytic Jacobian against that
same fallback over random states.
"""

from dataclasses import dataclass, field, InitVar
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite, OutOfRange
from .linalg import psd_sqrt, symmetrize

__all__ = [
    "Model",
    "GaussianBelief",
    "SignalProfile",
    "NoiseSpec",
    "fd_jacobian",
    "check_jacobians",
    "JacobianCheckReport",
]


def fd_jacobian(fun, x, rel_step=None):
    """Central-difference Jacobian of ``fun`` at ``x``.

    Step per coordinate is ``rel_step * max(1, |x_i|)`` with the usual
    ``sqrt(eps)`` default; accuracy is O(step^2).
    """
    x = np.asarray(x, dtype=float)
    h = (rel_step or np.sqrt(np.finfo(float).eps)) * np.maximum(1.0, np.abs(x))
    f0 = np.asarray(fun(x), dtype=float)
    jac = np.empty((f0.shape[0], x.shape[0]))
    for i in range(x.shape[0]):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        jac[:, i] = (np.asarray(fun(xp)) - np.asarray(fun(xm))) / (xp[i] - xm[i])
    return jac


@dataclass
class Model:
    """Continuous-discrete stochastic model.

    Attributes
    ----------
    n_x, n_u, n_d, n_w, n_y : int
        State, manipulated-input, disturbance-input, Brownian, and
        measurement dimensions.
    theta : ndarray
        Flat parameter vector handed to every callable.
    drift, diffusion, measurement : callable
        ``f(t, x, u, d, theta) -> (n_x,)``,
        ``sigma(t, x, u, d, theta) -> (n_x, n_w)``,
        ``h(t, x, theta) -> (n_y,)``.
    drift_jacobian, measurement_jacobian : callable, optional
        Analytic ``A(t, x, u, d, theta)``/``C(t, x, theta)``; finite
        differences are used when absent.
    constant_diffusion : bool
        Set when ``sigma`` does not depend on ``(t, x)``; propagators then
        evaluate it once per interval.
    constrain : callable, optional
        ``g(x) -> x`` projection applied after each internal step of *truth*
        simulation only (e.g. clamping physical non-negativity).  Filters
        never apply it.
    """

    n_x: int
    n_u: int
    n_d: int
    n_w: int
    n_y: int
    theta: np.ndarray
    drift: Callable
    diffusion: Callable
    measurement: Callable
    drift_jacobian: Optional[Callable] = None
    measurement_jacobian: Optional[Callable] = None
    constant_diffusion: bool = False
    constrain: Optional[Callable] = None

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        for name in ("n_x", "n_u", "n_d", "n_w", "n_y"):
            if getattr(self, name) < 0:
                raise DimensionMismatch(f"{name} must be non-negative")

    # Thin evaluation wrappers; hot loops bypass these and call the raw
    # attributes with self.theta hoisted into locals.
    def f(self, t, x, u, d):
        return self.drift(t, x, u, d, self.theta)

    def sig(self, t, x, u, d):
        return self.diffusion(t, x, u, d, self.theta)

    def h(self, t, x):
        return self.measurement(t, x, self.theta)

    def A(self, t, x, u, d):
        if self.drift_jacobian is not None:
            return self.drift_jacobian(t, x, u, d, self.theta)
        return fd_jacobian(lambda z: self.drift(t, z, u, d, self.theta), x)

    def C(self, t, x):
        if self.measurement_jacobian is not None:
            return self.measurement_jacobian(t, x, self.theta)
        return fd_jacobian(lambda z: self.measurement(t, z, self.theta), x)

    def validate(self, t, x, u, d):
        """Probe every callable once and check the declared dimensions.

        Run this at construction of any simulation or filter so shape
        errors surface immediately with a message naming the offender,
        rather than as a broadcast surprise mid-propagation.
        """
        x = np.asarray(x, dtype=float)
        checks = [
            ("drift", self.f(t, x, u, d), (self.n_x,)),
            ("diffusion", self.sig(t, x, u, d), (self.n_x, self.n_w)),
            ("measurement", self.h(t, x), (self.n_y,)),
            ("drift jacobian", self.A(t, x, u, d), (self.n_x, self.n_x)),
            ("measurement jacobian", self.C(t, x), (self.n_y, self.n_x)),
        ]
        for name, value, want in checks:
            got = np.asarray(value).shape
            if got != want:
                raise DimensionMismatch(f"{name} returned shape {got}, expected {want}")
        return self


@dataclass
class GaussianBelief:
    """Gaussian state belief (mean, covariance).

    Construction validates the invariants every filter relies on: the
    covariance is square, matches the mean dimension, is symmetric to a
    relative 1e-9, and has no eigenvalue below ``-1e-9 * trace``.  Pass
    ``validate=False`` only on hot paths that have just symmetrized and
    eigenvalue-checked the matrix themselves.
    """

    mean: np.ndarray
    cov: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        self.mean = np.asarray(self.mean, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        if self.mean.ndim != 1:
            raise DimensionMismatch(f"mean must be 1-D, got shape {self.mean.shape}")
        n = self.mean.shape[0]
        if self.cov.shape != (n, n):
            raise DimensionMismatch(
                f"cov shape {self.cov.shape} does not match mean dimension {n}"
            )
        if validate:
            scale = max(1.0, float(np.max(np.abs(self.cov))) if n else 1.0)
            if float(np.max(np.abs(self.cov - self.cov.T))) > 1e-9 * scale:
                raise NotPositiveDefinite("covariance is not symmetric within 1e-9 (relative)")
            w = np.linalg.eigvalsh(symmetrize(self.cov))
            if n and w[0] < -1e-9 * max(float(np.trace(self.cov)), 0.0):
                raise NotPositiveDefinite(
                    f"covariance has eigenvalue {w[0]:.3e} below PSD tolerance"
                )

    @property
    def n(self):
        return self.mean.shape[0]

    def marginal_std(self):
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))


@dataclass(frozen=True)
class SignalProfile:
    """Piecewise-constant vector signal.

    ``breakpoints[i]`` is the time at which interval ``i`` begins;
    ``values[i]`` holds on ``[breakpoints[i], breakpoints[i+1])``.  The last
    value extends to infinity.  Evaluation exactly at a breakpoint returns
    the value of the interval *starting* there.  Evaluating before the first
    breakpoint raises :class:`OutOfRange`.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.atleast_1d(np.asarray(self.breakpoints, dtype=float))
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if bp.ndim != 1 or vals.ndim != 2 or bp.shape[0] != vals.shape[0]:
            raise DimensionMismatch(
                f"breakpoints {bp.shape} and values {vals.shape} are inconsistent"
            )
        if bp.shape[0] == 0:
            raise DimensionMismatch("profile needs at least one breakpoint")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value, start=0.0):
        return cls(np.array([start]), np.atleast_1d(np.asarray(value, dtype=float))[None, :])

    @property
    def dim(self):
        return self.values.shape[1]

    def __call__(self, t):
        idx = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        if idx < 0:
            raise OutOfRange(
                f"profile evaluated at t={t!r}, before first breakpoint "
                f"{self.breakpoints[0]!r}"
            )
        return self.values[idx]

    def sample(self, t0, dt, n_steps):
        """Values at the ``n_steps`` grid times ``t0 + j*dt`` as an ``(n_steps, dim)`` array."""
        ts = t0 + dt * np.arange(n_steps)
        idx = np.searchsorted(self.breakpoints, ts, side="right") - 1
        if n_steps and idx[0] < 0:
            raise OutOfRange(
                f"profile sampled at t={ts[0]!r}, before first breakpoint "
                f"{self.breakpoints[0]!r}"
            )
        return self.values[idx]


@dataclass
class NoiseSpec:
    """Measurement-noise description: ``v_k ~ N(0, cov)``.

    A symmetric square root is computed once at construction, which also
    validates symmetry and positive *semi*definiteness (the zero matrix is a
    legal noiseless spec; anything indefinite raises).  Filter updates that
    need strict definiteness get it implicitly from their innovation-
    covariance factorizations.
    """

    cov: np.ndarray
    root: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.cov = np.asarray(self.cov, dtype=float)
        self.root = psd_sqrt(self.cov)

    @property
    def n(self):
        return self.cov.shape[0]

    def sample(self, rng, n_draws=None):
        """One draw (``(n,)``) or ``n_draws`` rows of N(0, cov) noise."""
        if n_draws is None:
            return self.root @ rng.standard_normal(self.n)
        return rng.standard_normal((n_draws, self.n)) @ self.root.T


@dataclass
class JacobianCheckReport:
    """Outcome of :func:`check_jacobians`."""

    max_drift_err: float
    max_meas_err: float
    n_points: int
    tol: float
    failures: list

    @property
    def passed(self):
        return not self.failures


def check_jacobians(model, rng, x_low, x_high, n_points=50, t=0.0, u=None, d=None, tol=1e-5):
    """Compare analytic Jacobians against central differences on random states.

    States are sampled uniformly in the box ``[x_low, x_high]``; errors are
    measured as ``max|A - A_fd| / max(1, max|A_fd|)`` per point.  Points
    exceeding ``tol`` are returned in ``failures`` as ``(which, x, err)``
    tuples.  Models without analytic Jacobians trivially pass (there is
    nothing to cross-check).
    """
    x_low = np.asarray(x_low, dtype=float)
    x_high = np.asarray(x_high, dtype=float)
    u = np.zeros(model.n_u) if u is None else np.asarray(u, dtype=float)
    d = np.zeros(model.n_d) if d is None else np.asarray(d, dtype=float)
    theta = model.theta
    failures = []
    max_a = 0.0
    max_c = 0.0
    for _ in range(n_points):
        x = x_low + (x_high - x_low) * rng.uniform(model.n_x)
        if model.drift_jacobian is not None:
            a = np.asarray(model.drift_jacobian(t, x, u, d, theta))
            a_fd = fd_jacobian(lambda z: model.drift(t, z, u, d, theta), x)
            err = float(np.max(np.abs(a - a_fd))) / max(1.0, float(np.max(np.abs(a_fd))))
            max_a = max(max_a, err)
            if err > tol:
                failures.append(("drift", x.copy(), err))
        if model.measurement_jacobian is not None:
            c = np.asarray(model.measurement_jacobian(t, x, theta))
            c_fd = fd_jacobian(lambda z: model.measurement(t, z, theta), x)
            err = float(np.max(np.abs(c - c_fd))) / max(1.0, float(np.max(np.abs(c_fd))))
            max_c = max(max_c, err)
            if err > tol:
                failures.append(("measurement", x.copy(), err))
    return JacobianCheckReport(max_a, max_c, n_points, tol, failures)
