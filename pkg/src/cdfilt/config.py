"""Benchmark configuration: defaults, file parsing, and model factories.

Config files are flat ``key = value`` text with dotted section prefixes::

    # lines starting with '#' are comments
    seed = 7
    filters = ekf, enkf
    ukf.alpha = 0.001
    model.measured_tanks = 1, 2

Unknown keys are errors; later assignments override earlier ones.  Values
are scalars or comma-separated lists as listed in ``SCHEMA``.

The defaults reproduce the four-filter benchmark: a 30-minute horizon with
120 samples, simulation/estimation internal steps 1000/100, truth
disturbances stepping through three equal-length nominal levels while every
estimator assumes a constant nominal level, and per-filter
disturbance-model tunings (EKF/UKF track with a non-reverting random walk,
EnKF/PF with a slowly reverting one; the UKF runs a smaller diffusion).
Measurement setup and initial covariance are benchmark configuration, not
physical truth.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fourtank import FourTankParams, steady_state
from .models import GaussianBelief, NoiseSpec, SignalProfile
from .simulate import SimConfig

__all__ = ["BenchConfig", "parse_config", "parse_config_text", "SCHEMA", "FILTER_NAMES"]

FILTER_NAMES = ("ekf", "ukf", "enkf", "pf")


@dataclass
class BenchConfig:
    seed: int = 1
    filters: tuple = FILTER_NAMES
    t0: float = 0.0
    horizon: float = 1800.0
    n_samples: int = 120
    sim_internal_steps: int = 1000
    est_internal_steps: int = 100
    pump_flow: tuple = (300.0, 300.0)
    disturbance_levels: tuple = (100.0, 200.0, 300.0)
    nominal_disturbance: float = 150.0
    sim_ou_rate: tuple = (0.1, 0.1)
    sim_ou_diffusion: tuple = (5.0, 5.0)
    ekf_ou_rate: float = 0.0
    ekf_ou_diffusion: float = 5.0
    ukf_ou_rate: float = 0.0
    ukf_ou_diffusion: float = 1.0
    enkf_ou_rate: float = 2.0e-3
    enkf_ou_diffusion: float = 5.0
    pf_ou_rate: float = 2.0e-3
    pf_ou_diffusion: float = 5.0
    ukf_alpha: float = 1e-3
    ukf_kappa: float = 0.0
    ukf_beta: float = 2.0
    enkf_members: int = 250
    pf_particles: int = 1000
    tank_area: tuple = (380.1327, 380.1327, 380.1327, 380.1327)
    outlet_area: tuple = (1.2272, 1.2272, 1.2272, 1.2272)
    gamma1: float = 0.58
    gamma2: float = 0.68
    gravity: float = 981.0
    density: float = 1.0
    measured_tanks: tuple = (1, 2)
    meas_noise_std: float = 1.0
    init_mass_std: float = 10.0
    init_flow_std: float = 5.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.horizon <= 0:
            raise ConfigError("sim.horizon must be positive")
        if self.n_samples < 1 or self.sim_internal_steps < 1 or self.est_internal_steps < 1:
            raise ConfigError("sample and internal step counts must be >= 1")
        bad = [f for f in self.filters if f not in FILTER_NAMES]
        if bad:
            raise ConfigError(f"unknown filters {bad}; choose from {list(FILTER_NAMES)}")
        if len(set(self.filters)) != len(self.filters):
            raise ConfigError("duplicate filter names")
        if len(self.disturbance_levels) < 1:
            raise ConfigError("sim.disturbance_levels needs at least one level")
        if self.enkf_members < 2 or self.pf_particles < 2:
            raise ConfigError("enkf.members and pf.particles must be >= 2")
        if self.meas_noise_std < 0 or self.init_mass_std < 0 or self.init_flow_std < 0:
            raise ConfigError("standard deviations must be non-negative")
        # geometry/valve checks are delegated to FourTankParams
        try:
            self.sim_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    # -- derived objects ---------------------------------------------------
    def _params(self, ou_rate, ou_diffusion):
        return FourTankParams(
            tank_area=tuple(self.tank_area),
            outlet_area=tuple(self.outlet_area),
            gamma1=self.gamma1,
            gamma2=self.gamma2,
            gravity=self.gravity,
            density=self.density,
            ou_rate=tuple(ou_rate),
            ou_diffusion=tuple(ou_diffusion),
            measured_tanks=tuple(self.measured_tanks),
        )

    def sim_params(self):
        return self._params(self.sim_ou_rate, self.sim_ou_diffusion)

    def est_params(self, name):
        rate = getattr(self, f"{name}_ou_rate")
        diff = getattr(self, f"{name}_ou_diffusion")
        return self._params((rate, rate), (diff, diff))

    def sim_config(self):
        return SimConfig(self.t0, self.t0 + self.horizon, self.n_samples,
                         self.sim_internal_steps)

    def u_profile(self):
        return SignalProfile.constant(np.asarray(self.pump_flow), start=self.t0)

    def d_truth_profile(self):
        """Nominal disturbance steps: equal-length segments over the horizon."""
        levels = np.asarray(self.disturbance_levels, dtype=float)
        seg = self.horizon / len(levels)
        bp = self.t0 + seg * np.arange(len(levels))
        return SignalProfile(bp, np.column_stack((levels, levels)))

    def d_est_profile(self):
        return SignalProfile.constant(
            np.array([self.nominal_disturbance, self.nominal_disturbance]), start=self.t0
        )

    def noise(self):
        n_y = len(self.measured_tanks)
        return NoiseSpec(self.meas_noise_std ** 2 * np.eye(n_y))

    def x0(self):
        """Truth start: the steady state at the initial inputs and first level."""
        return steady_state(self.sim_params(), self.pump_flow,
                            (self.disturbance_levels[0], self.disturbance_levels[0]))

    def initial_belief(self):
        p0 = np.diag([self.init_mass_std ** 2] * 4 + [self.init_flow_std ** 2] * 2)
        return GaussianBelief(self.x0(), p0)


def _float(raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}") from None


def _int(raw):
    try:
        return int(raw, 0)
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}") from None


def _float_list(n=None):
    def conv(raw):
        vals = tuple(_float(p) for p in raw.split(","))
        if n is not None and len(vals) != n:
            raise ConfigError(f"expected {n} comma-separated numbers, got {raw!r}")
        return vals

    return conv


def _int_list(raw):
    return tuple(_int(p) for p in raw.split(","))


def _name_list(raw):
    return tuple(p.strip().lower() for p in raw.split(",") if p.strip())


# key -> (BenchConfig attribute, converter)
SCHEMA = {
    "seed": ("seed", _int),
    "filters": ("filters", _name_list),
    "sim.t0": ("t0", _float),
    "sim.horizon": ("horizon", _float),
    "sim.samples": ("n_samples", _int),
    "sim.internal_steps": ("sim_internal_steps", _int),
    "sim.pump_flow": ("pump_flow", _float_list(2)),
    "sim.disturbance_levels": ("disturbance_levels", _float_list()),
    "sim.ou_rate": ("sim_ou_rate", _float_list(2)),
    "sim.ou_diffusion": ("sim_ou_diffusion", _float_list(2)),
    "est.internal_steps": ("est_internal_steps", _int),
    "est.nominal_disturbance": ("nominal_disturbance", _float),
    "ekf.ou_rate": ("ekf_ou_rate", _float),
    "ekf.ou_diffusion": ("ekf_ou_diffusion", _float),
    "ukf.ou_rate": ("ukf_ou_rate", _float),
    "ukf.ou_diffusion": ("ukf_ou_diffusion", _float),
    "enkf.ou_rate": ("enkf_ou_rate", _float),
    "enkf.ou_diffusion": ("enkf_ou_diffusion", _float),
    "pf.ou_rate": ("pf_ou_rate", _float),
    "pf.ou_diffusion": ("pf_ou_diffusion", _float),
    "ukf.alpha": ("ukf_alpha", _float),
    "ukf.kappa": ("ukf_kappa", _float),
    "ukf.beta": ("ukf_beta", _float),
    "enkf.members": ("enkf_members", _int),
    "pf.particles": ("pf_particles", _int),
    "model.tank_area": ("tank_area", _float_list(4)),
    "model.outlet_area": ("outlet_area", _float_list(4)),
    "model.gamma1": ("gamma1", _float),
    "model.gamma2": ("gamma2", _float),
    "model.gravity": ("gravity", _float),
    "model.density": ("density", _float),
    "model.measured_tanks": ("measured_tanks", _int_list),
    "model.meas_noise_std": ("meas_noise_std", _float),
    "init.mass_std": ("init_mass_std", _float),
    "init.flow_std": ("init_flow_std", _float),
}


def parse_config_text(text, base=None):
    """Parse config text into a :class:`BenchConfig`; unknown keys raise."""
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        raw = raw.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, conv = SCHEMA[key]
        overrides[attr] = conv(raw)
    fields = dataclasses.asdict(base) if base is not None else {}
    fields.update(overrides)
    return BenchConfig(**fields)


def parse_config(path, base=None):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base=base)
