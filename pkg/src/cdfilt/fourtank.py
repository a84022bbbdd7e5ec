"""Modified four-tank system: gravity-drained quadruple tank with stochastic inflows.

States (n_x = 6): liquid masses ``m1..m4`` [g] and the two disturbance
inflows ``F3, F4`` [cm^3/s], modelled as Ornstein-Uhlenbeck states

    dF_i = lambda_i (Fbar_i - F_i) dt + sigma_i dw_i,

so only the last two rows of the (constant) diffusion matrix are nonzero
(n_w = 2).  Inputs ``u = (F1, F2)`` are the pump flows; ``d = (Fbar3,
Fbar4)`` are the nominal disturbance levels the OU states revert to.

Mass balances with heights ``h_i = m_i/(rho A_i)`` and outflows
``q_i = a_i sqrt(2 g max(h_i, 0))``:

    dm1 = rho (gamma1 F1       + q3 - q1)        tank 3 drains into tank 1
    dm2 = rho (gamma2 F2       + q4 - q2)        tank 4 drains into tank 2
    dm3 = rho ((1-gamma2) F2 + F3 - q3)
    dm4 = rho ((1-gamma1) F1 + F4 - q4)

The ``max(h, 0)`` clamp keeps the square root defined if noise drives a
mass slightly negative between steps; truth simulation additionally clamps
masses at zero after every internal step (``constrain``).

Measurements are tank heights of a configurable subset of tanks (default
all four); the disturbance states are never measured -- estimating them is
the point of the benchmark.

``theta`` layout (flat vector, see ``THETA_INDEX``): tank areas 0-3,
outlet areas 4-7, gamma1 8, gamma2 9, gravity 10, density 11, OU rates
12-13, OU diffusions 14-15.
"""

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import SingularAtEmptyTank
from .models import Model

__all__ = [
    "FourTankParams",
    "four_tank_model",
    "steady_state",
    "THETA_INDEX",
    "MASS_TOL",
]

# Smallest mass treated as a wet tank by the strict Jacobian [g].
MASS_TOL = 1e-9

THETA_INDEX = {
    "tank_area": slice(0, 4),
    "outlet_area": slice(4, 8),
    "gamma1": 8,
    "gamma2": 9,
    "gravity": 10,
    "density": 11,
    "ou_rate": slice(12, 14),
    "ou_diffusion": slice(14, 16),
}


@dataclass(frozen=True)
class FourTankParams:
    """Physical and tuning parameters.

    Geometry defaults come from the quadruple-tank literature; they are
    benchmark configuration, not constants of nature.  ``ou_rate`` /
    ``ou_diffusion`` differ between the truth simulation and the individual
    estimators, which is how the benchmark expresses model mismatch.
    ``measured_tanks`` uses 1-based tank numbers.
    """

    tank_area: tuple = (380.1327, 380.1327, 380.1327, 380.1327)
    outlet_area: tuple = (1.2272, 1.2272, 1.2272, 1.2272)
    gamma1: float = 0.58
    gamma2: float = 0.68
    gravity: float = 981.0
    density: float = 1.0
    ou_rate: tuple = (0.1, 0.1)
    ou_diffusion: tuple = (5.0, 5.0)
    measured_tanks: tuple = (1, 2, 3, 4)

    def __post_init__(self):
        if len(self.tank_area) != 4 or len(self.outlet_area) != 4:
            raise ValueError("tank_area and outlet_area need four entries")
        if min(self.tank_area) <= 0 or min(self.outlet_area) <= 0:
            raise ValueError("geometric parameters must be positive")
        if not (0.0 < self.gamma1 < 1.0 and 0.0 < self.gamma2 < 1.0):
            raise ValueError("valve splits gamma must lie in (0, 1)")
        if self.gravity <= 0 or self.density <= 0:
            raise ValueError("gravity and density must be positive")
        if len(self.ou_rate) != 2 or len(self.ou_diffusion) != 2:
            raise ValueError("ou_rate and ou_diffusion need two entries")
        if min(self.ou_rate) < 0 or min(self.ou_diffusion) < 0:
            raise ValueError("OU parameters must be non-negative")
        tanks = tuple(int(i) for i in self.measured_tanks)
        if not tanks or any(i not in (1, 2, 3, 4) for i in tanks) or len(set(tanks)) != len(tanks):
            raise ValueError("measured_tanks must be distinct tank numbers from 1..4")
        object.__setattr__(self, "measured_tanks", tanks)

    def theta(self):
        return np.array(
            [*self.tank_area, *self.outlet_area, self.gamma1, self.gamma2,
             self.gravity, self.density, *self.ou_rate, *self.ou_diffusion]
        )


def _drift(t, x, u, d, theta):
    # Hot call: every filter and the simulator funnel tens of millions of
    # evaluations through here per benchmark, so this runs on python floats
    # (~2x faster than length-4 vector ops).  Outflow is a_i sqrt(2 g h_i)
    # with dry tanks (h <= 0) contributing zero.
    m1, m2, m3, m4, f3, f4 = x.tolist()
    (a1, a2, a3, a4, o1, o2, o3, o4, gamma1, gamma2, g, rho,
     lam1, lam2, _, _) = theta.tolist()
    two_g = 2.0 * g
    h1 = m1 / (rho * a1)
    h2 = m2 / (rho * a2)
    h3 = m3 / (rho * a3)
    h4 = m4 / (rho * a4)
    q1 = o1 * sqrt(two_g * h1) if h1 > 0.0 else 0.0
    q2 = o2 * sqrt(two_g * h2) if h2 > 0.0 else 0.0
    q3 = o3 * sqrt(two_g * h3) if h3 > 0.0 else 0.0
    q4 = o4 * sqrt(two_g * h4) if h4 > 0.0 else 0.0
    f1, f2 = u.tolist()
    d1, d2 = d.tolist()
    out = np.empty(6)
    out[0] = rho * (gamma1 * f1 + q3 - q1)
    out[1] = rho * (gamma2 * f2 + q4 - q2)
    out[2] = rho * ((1.0 - gamma2) * f2 + f3 - q3)
    out[3] = rho * ((1.0 - gamma1) * f1 + f4 - q4)
    out[4] = lam1 * (d1 - f3)
    out[5] = lam2 * (d2 - f4)
    return out


def _outflow_slopes(x, theta, strict):
    # dq_i/dm_i = a_i sqrt(2g) / (2 sqrt(h_i) rho A_i); one-sided 0 below the
    # empty-tank clamp unless the caller asked for the hard error.
    area = theta[0:4]
    rho = theta[11]
    m = x[:4]
    if strict and np.any(m <= MASS_TOL):
        raise SingularAtEmptyTank(
            f"outflow derivative undefined at masses {m!r} (tolerance {MASS_TOL:g} g)"
        )
    height = m / (rho * area)
    if np.all(m > MASS_TOL):
        return theta[4:8] * np.sqrt(2.0 * theta[10]) / (2.0 * np.sqrt(height) * rho * area)
    k = np.zeros(4)
    wet = m > MASS_TOL
    k[wet] = theta[4:8][wet] * np.sqrt(2.0 * theta[10]) / (
        2.0 * np.sqrt(height[wet]) * rho * area[wet]
    )
    return k


def _make_drift_jacobian(strict):
    def jac(t, x, u, d, theta):
        rho = theta[11]
        k = _outflow_slopes(x, theta, strict)
        j = np.zeros((6, 6))
        j[0, 0] = -rho * k[0]
        j[0, 2] = rho * k[2]
        j[1, 1] = -rho * k[1]
        j[1, 3] = rho * k[3]
        j[2, 2] = -rho * k[2]
        j[2, 4] = rho
        j[3, 3] = -rho * k[3]
        j[3, 5] = rho
        j[4, 4] = -theta[12]
        j[5, 5] = -theta[13]
        return j

    return jac


def _make_diffusion():
    def diffusion(t, x, u, d, theta):
        s = np.zeros((6, 2))
        s[4, 0] = theta[14]
        s[5, 1] = theta[15]
        return s

    return diffusion


def _make_measurement(tank_idx):
    def measurement(t, x, theta):
        return x[tank_idx] / (theta[11] * theta[tank_idx])

    def jacobian(t, x, theta):
        c = np.zeros((len(tank_idx), 6))
        c[np.arange(len(tank_idx)), tank_idx] = 1.0 / (theta[11] * theta[tank_idx])
        return c

    return measurement, jacobian


def _constrain(x):
    np.maximum(x[:4], 0.0, out=x[:4])
    return x


def four_tank_model(params=None, strict_jacobian=False):
    """Build the :class:`~cdfilt.models.Model` for given parameters.

    ``strict_jacobian=True`` makes the drift Jacobian raise
    :class:`SingularAtEmptyTank` at dry tanks instead of returning the
    one-sided (zero) outflow derivative.
    """
    params = params or FourTankParams()
    tank_idx = np.array([i - 1 for i in params.measured_tanks])
    measurement, meas_jac = _make_measurement(tank_idx)
    return Model(
        n_x=6,
        n_u=2,
        n_d=2,
        n_w=2,
        n_y=len(tank_idx),
        theta=params.theta(),
        drift=_drift,
        diffusion=_make_diffusion(),
        measurement=measurement,
        drift_jacobian=_make_drift_jacobian(strict_jacobian),
        measurement_jacobian=meas_jac,
        constant_diffusion=True,
        constrain=_constrain,
    )


def steady_state(params, u, d):
    """Closed-form fixed point of the drift for constant ``u`` and ``d``.

    At steady state the OU states sit at their nominal levels and each
    outflow balances its inflow chain:

        q3 = (1-gamma2) F2 + Fbar3,   q1 = gamma1 F1 + q3,
        q4 = (1-gamma1) F1 + Fbar4,   q2 = gamma2 F2 + q4,

    and ``h_i = (q_i/a_i)^2 / (2 g)``, ``m_i = rho A_i h_i``.
    """
    u = np.asarray(u, dtype=float)
    d = np.asarray(d, dtype=float)
    q3 = (1.0 - params.gamma2) * u[1] + d[0]
    q4 = (1.0 - params.gamma1) * u[0] + d[1]
    q1 = params.gamma1 * u[0] + q3
    q2 = params.gamma2 * u[1] + q4
    q = np.array([q1, q2, q3, q4])
    if np.any(q < 0):
        raise ValueError("steady state undefined: negative net flow")
    heights = (q / np.asarray(params.outlet_area)) ** 2 / (2.0 * params.gravity)
    masses = params.density * np.asarray(params.tank_area) * heights
    return np.concatenate((masses, d))
