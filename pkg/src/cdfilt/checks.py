"""Self-contained invariant suite behind ``cdfilt check``.

Each check is a small, fast assertion of a property the package is built
on; the CLI prints one PASS/FAIL line per check and exits nonzero on any
failure.  These complement (not replace) the test suite: they run in
seconds on an installed copy without test dependencies.
"""

import dataclasses

import numpy as np

from . import bench, linalg
from .config import BenchConfig
from .ekf import EkfState, ekf_measurement_update
from .errors import NotPositiveDefinite
from .fourtank import FourTankParams, four_tank_model, steady_state
from .integrate import euler_maruyama_step, rk4_step
from .models import GaussianBelief, NoiseSpec, SignalProfile, check_jacobians
from .pf import systematic_resample
from .rng import RngStream
from .ukf import UkfParams, ukf_weights

__all__ = ["run_checks", "CHECKS"]


def _check_cholesky_reconstruct():
    rng = RngStream(7)
    for n in (2, 5, 9):
        a = rng.standard_normal((n, n))
        m = a @ a.T + n * np.eye(n)
        ell = linalg.cholesky(m)
        rel = np.linalg.norm(ell @ ell.T - m) / np.linalg.norm(m)
        assert rel < 1e-10, f"reconstruction residual {rel:g}"
    try:
        linalg.cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
    except NotPositiveDefinite:
        pass
    else:
        raise AssertionError("indefinite matrix was accepted")


def _check_solve_spd():
    rng = RngStream(8)
    a = rng.standard_normal((6, 6))
    m = a @ a.T + 6 * np.eye(6)
    b = rng.standard_normal((6, 3))
    x = linalg.solve_spd(m, b)
    rel = np.linalg.norm(m @ x - b) / np.linalg.norm(b)
    assert rel < 1e-9, f"solve residual {rel:g}"


def _check_rk4_accuracy():
    x = np.array([1.0])
    for i in range(100):
        x = rk4_step(lambda t, z: -z, i * 0.01, x, 0.01)
    err = abs(x[0] - np.exp(-1.0))
    assert err < 1e-8, f"RK4 endpoint error {err:g}"


def _check_euler_zero_noise():
    f = lambda t, z: -2.0 * z
    s = lambda t, z: np.ones((1, 1))
    x = np.array([1.3])
    stepped = euler_maruyama_step(f, s, 0.0, x, 0.1, np.zeros(1))
    explicit = x + f(0.0, x) * 0.1
    assert np.array_equal(stepped, explicit), "zero-noise step is not explicit Euler"


def _check_profile_boundary():
    p = SignalProfile(np.array([0.0, 10.0]), np.array([[1.0], [2.0]]))
    assert p(9.999)[0] == 1.0
    assert p(10.0)[0] == 2.0


def _check_ukf_weights():
    wm, wc, c = ukf_weights(2, UkfParams(alpha=1.0, kappa=1.0, beta=0.0))
    assert abs(c - 3.0) < 1e-15 and abs(wm[0] - 1.0 / 3.0) < 1e-15
    assert abs(wm.sum() - 1.0) < 1e-12 and abs(wm[1] - 1.0 / 6.0) < 1e-15


def _check_joseph_form():
    rng = RngStream(9)
    a = rng.standard_normal((4, 4))
    p = a @ a.T + 4 * np.eye(4)
    c = rng.standard_normal((2, 4))
    r = np.diag(rng.uniform(2) + 0.5)
    model_stub = _linear_meas_model(c)
    state = ekf_measurement_update(
        EkfState(GaussianBelief(np.zeros(4), p)), model_stub, 0.0, np.ones(2), NoiseSpec(r)
    )
    k = state.gain
    standard = p - k @ state.innovation_cov @ k.T
    rel = np.linalg.norm(state.belief.cov - standard) / np.linalg.norm(standard)
    assert rel < 1e-10, f"Joseph vs standard mismatch {rel:g}"
    # Perturbed gain must keep the Joseph update PSD.
    kp = k * 1.01
    ikc = np.eye(4) - kp @ c
    joseph = ikc @ p @ ikc.T + kp @ r @ kp.T
    assert np.linalg.eigvalsh(linalg.symmetrize(joseph)).min() >= -1e-12


def _linear_meas_model(c):
    from .models import Model

    n_y, n_x = c.shape
    return Model(
        n_x=n_x, n_u=0, n_d=0, n_w=0, n_y=n_y, theta=np.zeros(0),
        drift=lambda t, x, u, d, th: np.zeros(n_x),
        diffusion=lambda t, x, u, d, th: np.zeros((n_x, 0)),
        measurement=lambda t, x, th: c @ x,
        measurement_jacobian=lambda t, x, th: c,
    )


def _check_systematic_resample():
    particles = np.arange(4.0)[:, None]
    out = systematic_resample(particles, np.full(4, 0.25), 0.5)
    assert np.array_equal(out, particles), "uniform weights must copy each particle once"
    out = systematic_resample(particles, np.array([1.0, 0.0, 0.0, 0.0]), 0.37)
    assert np.array_equal(out, np.zeros((4, 1))), "degenerate weights must clone the support"


def _check_mfts_jacobians():
    model = four_tank_model(FourTankParams())
    report = check_jacobians(
        model, RngStream(10),
        x_low=np.array([500.0] * 4 + [50.0] * 2),
        x_high=np.array([30000.0] * 4 + [300.0] * 2),
        n_points=25, u=np.array([300.0, 300.0]), d=np.array([150.0, 150.0]),
    )
    assert report.passed, f"jacobian mismatch up to {max(report.max_drift_err, report.max_meas_err):g}"


def _check_mfts_steady_state():
    params = FourTankParams()
    u = np.array([300.0, 300.0])
    d = np.array([100.0, 100.0])
    x = steady_state(params, u, d)
    f = four_tank_model(params).f(0.0, x, u, d)
    assert np.linalg.norm(f) < 1e-8, f"drift norm at steady state {np.linalg.norm(f):g}"


def _check_bench_determinism():
    # Keep the 15 s sample grid: fewer samples must shorten the horizon too.
    cfg = dataclasses.replace(
        BenchConfig(), horizon=90.0, n_samples=6, sim_internal_steps=40,
        est_internal_steps=10, enkf_members=20, pf_particles=30, seed=123,
    )
    rec1, _ = bench.run_benchmark(cfg)
    rec2, _ = bench.run_benchmark(cfg)
    assert np.array_equal(rec1.truth, rec2.truth)
    for t1, t2 in zip(rec1.traces, rec2.traces):
        assert t1.error is None and t2.error is None
        assert np.array_equal(t1.est, t2.est), f"{t1.name} differs between identical runs"


def _check_mass_balance():
    model = four_tank_model(FourTankParams())
    rng = RngStream(11)
    u = np.array([250.0, 310.0])
    d = np.array([130.0, 170.0])
    for _ in range(5):
        x = np.concatenate((1000.0 + 20000.0 * rng.uniform(4), 50.0 + 200.0 * rng.uniform(2)))
        f = model.f(0.0, x, u, d)
        theta = model.theta
        h = x[:4] / (theta[11] * theta[0:4])
        q = theta[4:8] * np.sqrt(2.0 * theta[10] * np.maximum(h, 0.0))
        expect = theta[11] * (u.sum() + x[4] + x[5] - q[0] - q[1])
        assert abs(f[:4].sum() - expect) < 1e-9 * max(1.0, abs(expect))


CHECKS = [
    ("cholesky reconstructs SPD inputs", _check_cholesky_reconstruct),
    ("SPD solve residual", _check_solve_spd),
    ("RK4 hits exp(-1) within 1e-8", _check_rk4_accuracy),
    ("Euler-Maruyama with zero noise is explicit Euler", _check_euler_zero_noise),
    ("profile breakpoint convention", _check_profile_boundary),
    ("unscented weights", _check_ukf_weights),
    ("Joseph form equals standard form at the optimal gain, stays PSD perturbed", _check_joseph_form),
    ("systematic resampling enumerations", _check_systematic_resample),
    ("four-tank analytic Jacobians match finite differences", _check_mfts_jacobians),
    ("four-tank steady state zeroes the drift", _check_mfts_steady_state),
    ("four-tank mass balance", _check_mass_balance),
    ("benchmark determinism on a reduced config", _check_bench_determinism),
]


def run_checks(write=print):
    """Run every check; returns True when all pass."""
    ok = True
    for name, fn in CHECKS:
        try:
            fn()
        except Exception as exc:  # report, keep going
            ok = False
            write(f"FAIL {name}: {exc}")
        else:
            write(f"PASS {name}")
    return ok
