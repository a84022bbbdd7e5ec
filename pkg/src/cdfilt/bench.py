"""Benchmark harness: run filters against one simulated truth and score them.

One invocation simulates a single truth realization, hands every enabled
filter the *same* measurement sequence, accumulates wall-clock time
separately for time updates and measurement updates (I/O excluded), and
scores each filter with the mean absolute percentage error, split between
the mass states (MAPE_x) and the disturbance states (MAPE_d).

Randomness is organized so results are reproducible and filters are
isolated: the truth path, the measurement noise, the EnKF, and the PF each
own a named substream of the master seed, so toggling one filter never
shifts the draws of anything else.

Artifacts (all CSV, 17-significant-digit decimals, LF endings): truth.csv,
record.csv (combined trace), estimates_<filter>.csv, summary.txt,
summary.csv.  Timing numbers appear only in the summaries -- they are
wall-clock and thus not reproducible byte-for-byte, unlike every data
trace.
"""

import contextlib
import gc
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .ekf import EkfState, ekf_measurement_update, ekf_time_update
from .enkf import enkf_init, enkf_measurement_update, enkf_time_update, ensemble_mean_cov
from .errors import CdfiltError, DivisionByZeroTruth
from .pf import (
    effective_sample_size,
    pf_estimate,
    pf_init,
    pf_likelihood_weights,
    pf_time_update,
    systematic_resample,
)
from .rng import named_stream
from .simulate import TruthRecord, simulate
from .ukf import UkfParams, ukf_measurement_update, ukf_time_update

__all__ = [
    "FilterTrace",
    "RunRecord",
    "FilterSummary",
    "BenchSummary",
    "mape",
    "MASS_IDX",
    "DIST_IDX",
    "run_benchmark",
    "run_many",
    "emit_csv",
    "read_record_csv",
    "write_truth_csv",
    "read_truth_csv",
]

# State-vector split used by the scores: masses vs disturbance flows.
MASS_IDX = (0, 1, 2, 3)
DIST_IDX = (4, 5)

_FMT = "%.17g"


@dataclass
class FilterTrace:
    """One filter's per-sample outputs plus cumulative timings."""

    name: str
    est: np.ndarray
    var: np.ndarray
    tu_cum: np.ndarray
    mu_cum: np.ndarray
    innovations: Optional[np.ndarray] = None
    ess: Optional[np.ndarray] = None
    error: Optional[str] = None
    clouds: Optional[list] = None

    @property
    def tu_seconds(self):
        return float(self.tu_cum[-1]) if self.tu_cum.size else 0.0

    @property
    def mu_seconds(self):
        return float(self.mu_cum[-1]) if self.mu_cum.size else 0.0


@dataclass
class RunRecord:
    """Combined benchmark trace on the sample grid t_1..t_N."""

    times: np.ndarray
    truth: np.ndarray
    measurements: np.ndarray
    traces: list = field(default_factory=list)

    @property
    def n_samples(self):
        return self.times.shape[0]

    def trace(self, name):
        for tr in self.traces:
            if tr.name == name:
                return tr
        raise KeyError(name)


@dataclass
class FilterSummary:
    name: str
    tu_seconds: float
    mu_seconds: float
    mape_x: float
    mape_d: float
    error: Optional[str] = None


@dataclass
class BenchSummary:
    filters: list

    def __getitem__(self, name):
        for f in self.filters:
            if f.name == name:
                return f
        raise KeyError(name)

    def text_table(self):
        lines = [
            f"{'filter':<8}{'TU [s]':>12}{'MU [s]':>12}{'MAPE_x [%]':>14}{'MAPE_d [%]':>14}"
        ]
        for f in self.filters:
            lines.append(
                f"{f.name:<8}{f.tu_seconds:>12.3e}{f.mu_seconds:>12.3e}"
                f"{f.mape_x:>14.3f}{f.mape_d:>14.3f}"
            )
            if f.error:
                lines.append(f"        ! aborted: {f.error}")
        return "\n".join(lines) + "\n"

    def csv_text(self):
        rows = ["filter,tu_seconds,mu_seconds,mape_x_pct,mape_d_pct,error"]
        for f in self.filters:
            rows.append(
                f"{f.name},{_FMT % f.tu_seconds},{_FMT % f.mu_seconds},"
                f"{_FMT % f.mape_x},{_FMT % f.mape_d},{f.error or ''}"
            )
        return "\n".join(rows) + "\n"


def mape(truth, estimates, indices):
    """Mean absolute percentage error over the given state indices.

    ``(1/(nN)) sum_k sum_i |x - xhat| / |x| * 100`` with the sums running
    over the masked indices; exactly-zero truth entries are refused with the
    offending (state, step) pairs.
    """
    truth = np.asarray(truth, dtype=float)
    estimates = np.asarray(estimates, dtype=float)
    if truth.shape != estimates.shape:
        raise ValueError(f"shape mismatch: truth {truth.shape} vs estimates {estimates.shape}")
    idx = list(indices)
    sub_t = truth[:, idx]
    sub_e = estimates[:, idx]
    zero = np.argwhere(sub_t == 0.0)
    if zero.size:
        pairs = [(idx[j], int(k)) for k, j in zero[:8]]
        raise DivisionByZeroTruth(f"zero truth entries at (state, step) pairs {pairs}")
    return float(np.mean(np.abs(sub_t - sub_e) / np.abs(sub_t))) * 100.0


# ---------------------------------------------------------------------------
# filter drivers

def _fill_after_abort(tu_cum, mu_cum, est, tu, mu):
    # Keep cumulative timings monotone on rows a filter never reached.
    missing = np.isnan(est[:, 0])
    tu_cum[missing] = tu
    mu_cum[missing] = mu


@contextlib.contextmanager
def _gc_paused():
    # The cyclic collector fires on allocation counts, so its pauses land in
    # whichever timing window happens to be open -- and they distort short
    # windows (EKF measurement updates, ~50 us) far more than long ones.
    # Pausing it while a filter runs keeps the recorded per-phase times close
    # to the actual cost of the arithmetic.  Refcounting still frees all the
    # per-step temporaries; only cycle detection is deferred.
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def _run_ekf(cfg, model, truth, u, d, noise, belief0):
    n = truth.n_samples
    n_y = model.n_y
    est = np.full((n, model.n_x), np.nan)
    var = np.full((n, model.n_x), np.nan)
    innov = np.full((n, n_y), np.nan)
    tu_cum = np.zeros(n)
    mu_cum = np.zeros(n)
    state = EkfState(belief0)
    tu = mu = 0.0
    error = None
    steps = cfg.est_internal_steps
    clock = time.perf_counter
    if n:
        # Untimed dry step: first-call overhead (bytecode specialization,
        # LAPACK wrapper setup) is comparable to a whole measurement-update
        # window for this filter and would otherwise be billed to step 1.
        # Both updates are pure functions of the state, so discarding the
        # results leaves the filter run itself untouched.
        try:
            warm = ekf_time_update(state, model, truth.times[0], truth.times[1], u, d, steps)
            ekf_measurement_update(warm, model, truth.times[1], truth.measurements[0], noise)
        except CdfiltError:
            pass  # the timed loop will hit and report the same failure
    for k in range(n):
        try:
            tic = clock()
            state = ekf_time_update(state, model, truth.times[k], truth.times[k + 1], u, d, steps)
            tu += clock() - tic
            tic = clock()
            state = ekf_measurement_update(
                state, model, truth.times[k + 1], truth.measurements[k], noise
            )
            mu += clock() - tic
        except CdfiltError as exc:
            error = f"step {k + 1}: {type(exc).__name__}: {exc}"
            break
        est[k] = state.belief.mean
        var[k] = np.diag(state.belief.cov)
        innov[k] = state.innovation
        tu_cum[k] = tu
        mu_cum[k] = mu
    _fill_after_abort(tu_cum, mu_cum, est, tu, mu)
    return FilterTrace("ekf", est, var, tu_cum, mu_cum, innovations=innov, error=error)


def _run_ukf(cfg, model, truth, u, d, noise, belief0):
    n = truth.n_samples
    params = UkfParams(cfg.ukf_alpha, cfg.ukf_kappa, cfg.ukf_beta)
    est = np.full((n, model.n_x), np.nan)
    var = np.full((n, model.n_x), np.nan)
    innov = np.full((n, model.n_y), np.nan)
    tu_cum = np.zeros(n)
    mu_cum = np.zeros(n)
    belief = belief0
    tu = mu = 0.0
    error = None
    steps = cfg.est_internal_steps
    clock = time.perf_counter
    if n:
        # Untimed dry step; see the matching comment in _run_ekf.
        try:
            warm = ukf_time_update(belief, model, params, truth.times[0], truth.times[1], u, d, steps)
            ukf_measurement_update(warm, model, params, truth.times[1], truth.measurements[0], noise)
        except CdfiltError:
            pass
    for k in range(n):
        try:
            tic = clock()
            belief = ukf_time_update(
                belief, model, params, truth.times[k], truth.times[k + 1], u, d, steps
            )
            tu += clock() - tic
            tic = clock()
            upd = ukf_measurement_update(
                belief, model, params, truth.times[k + 1], truth.measurements[k], noise
            )
            mu += clock() - tic
            belief = upd.belief
        except CdfiltError as exc:
            error = f"step {k + 1}: {type(exc).__name__}: {exc}"
            break
        est[k] = belief.mean
        var[k] = np.diag(belief.cov)
        innov[k] = upd.innovation
        tu_cum[k] = tu
        mu_cum[k] = mu
    _fill_after_abort(tu_cum, mu_cum, est, tu, mu)
    return FilterTrace("ukf", est, var, tu_cum, mu_cum, innovations=innov, error=error)


def _run_enkf(cfg, model, truth, u, d, noise, belief0, rng, dump=False):
    n = truth.n_samples
    est = np.full((n, model.n_x), np.nan)
    var = np.full((n, model.n_x), np.nan)
    tu_cum = np.zeros(n)
    mu_cum = np.zeros(n)
    members = enkf_init(belief0, cfg.enkf_members, rng)
    clouds = [] if dump else None
    tu = mu = 0.0
    error = None
    steps = cfg.est_internal_steps
    clock = time.perf_counter
    for k in range(n):
        try:
            tic = clock()
            members = enkf_time_update(
                members, model, truth.times[k], truth.times[k + 1], u, d, steps, rng
            )
            tu += clock() - tic
            tic = clock()
            members = enkf_measurement_update(
                members, model, truth.times[k + 1], truth.measurements[k], noise, rng
            )
            mean, cov = ensemble_mean_cov(members)
            mu += clock() - tic
        except CdfiltError as exc:
            error = f"step {k + 1}: {type(exc).__name__}: {exc}"
            break
        est[k] = mean
        var[k] = np.diag(cov)
        tu_cum[k] = tu
        mu_cum[k] = mu
        if dump:
            clouds.append(members.copy())
    _fill_after_abort(tu_cum, mu_cum, est, tu, mu)
    return FilterTrace("enkf", est, var, tu_cum, mu_cum, error=error, clouds=clouds)


def _run_pf(cfg, model, truth, u, d, noise, belief0, rng, dump=False):
    n = truth.n_samples
    est = np.full((n, model.n_x), np.nan)
    var = np.full((n, model.n_x), np.nan)
    ess = np.full(n, np.nan)
    tu_cum = np.zeros(n)
    mu_cum = np.zeros(n)
    particles = pf_init(belief0, cfg.pf_particles, rng)
    clouds = [] if dump else None
    tu = mu = 0.0
    error = None
    steps = cfg.est_internal_steps
    clock = time.perf_counter
    for k in range(n):
        try:
            tic = clock()
            particles = pf_time_update(
                particles, model, truth.times[k], truth.times[k + 1], u, d, steps, rng
            )
            tu += clock() - tic
            tic = clock()
            weights = pf_likelihood_weights(
                particles, model, truth.times[k + 1], truth.measurements[k], noise
            )
            sample_size = effective_sample_size(weights)
            particles = systematic_resample(particles, weights, rng.uniform())
            belief = pf_estimate(particles)
            mu += clock() - tic
        except CdfiltError as exc:
            error = f"step {k + 1}: {type(exc).__name__}: {exc}"
            break
        est[k] = belief.mean
        var[k] = np.diag(belief.cov)
        ess[k] = sample_size
        tu_cum[k] = tu
        mu_cum[k] = mu
        if dump:
            clouds.append(particles.copy())
    _fill_after_abort(tu_cum, mu_cum, est, tu, mu)
    return FilterTrace("pf", est, var, tu_cum, mu_cum, ess=ess, error=error, clouds=clouds)


# ---------------------------------------------------------------------------
# orchestration

def simulate_truth(cfg):
    """One truth realization under the benchmark config."""
    from .fourtank import four_tank_model

    model = four_tank_model(cfg.sim_params())
    return simulate(
        model,
        cfg.sim_config(),
        cfg.x0(),
        cfg.u_profile(),
        cfg.d_truth_profile(),
        cfg.noise(),
        named_stream(cfg.seed, "truth"),
        named_stream(cfg.seed, "measurement"),
    )


def run_filters(cfg, truth, dump_particles=False):
    """Run every enabled filter on an existing truth record."""
    from .fourtank import four_tank_model

    u = cfg.u_profile()
    d_est = cfg.d_est_profile()
    noise = cfg.noise()
    belief0 = cfg.initial_belief()
    traces = []
    for name in cfg.filters:
        model = four_tank_model(cfg.est_params(name))
        model.validate(cfg.t0, belief0.mean, u(cfg.t0), d_est(cfg.t0))
        with _gc_paused():
            if name == "ekf":
                traces.append(_run_ekf(cfg, model, truth, u, d_est, noise, belief0))
            elif name == "ukf":
                traces.append(_run_ukf(cfg, model, truth, u, d_est, noise, belief0))
            elif name == "enkf":
                traces.append(
                    _run_enkf(cfg, model, truth, u, d_est, noise, belief0,
                              named_stream(cfg.seed, "enkf"), dump_particles)
                )
            elif name == "pf":
                traces.append(
                    _run_pf(cfg, model, truth, u, d_est, noise, belief0,
                            named_stream(cfg.seed, "pf"), dump_particles)
                )
    record = RunRecord(truth.times[1:].copy(), truth.states[1:].copy(),
                       truth.measurements.copy(), traces)
    return record, summarize(record)


def run_benchmark(cfg, out_dir=None, dump_particles=False):
    """End-to-end: simulate, filter, score; optionally write all artifacts."""
    truth = simulate_truth(cfg)
    record, summary = run_filters(cfg, truth, dump_particles=dump_particles)
    if out_dir is not None:
        write_outputs(out_dir, truth, record, summary)
    return record, summary


def summarize(record):
    rows = []
    for tr in record.traces:
        if tr.error is None:
            mx = mape(record.truth, tr.est, MASS_IDX)
            md = mape(record.truth, tr.est, DIST_IDX)
        else:
            mx = md = float("nan")
        rows.append(FilterSummary(tr.name, tr.tu_seconds, tr.mu_seconds, mx, md, tr.error))
    return BenchSummary(rows)


def run_many(cfg, seeds, out_root=None, dump_particles=False):
    """Run the benchmark once per seed; returns [(seed, BenchSummary), ...]."""
    import dataclasses

    results = []
    for s in seeds:
        sub = Path(out_root) / f"seed_{s}" if out_root is not None else None
        cfg_s = dataclasses.replace(cfg, seed=int(s))
        _, summary = run_benchmark(cfg_s, out_dir=sub, dump_particles=dump_particles)
        results.append((int(s), summary))
    if out_root is not None:
        _write_seed_aggregate(Path(out_root), results)
    return results


# ---------------------------------------------------------------------------
# serialization (17 significant digits, UTF-8, LF)

def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _format_row(values):
    return ",".join(_FMT % v for v in values)


def write_truth_csv(truth, path):
    """Truth grid incl. the initial state; measurement cells are nan at t0."""
    n_y = truth.measurements.shape[1]
    header = ["t"] + [f"x{i+1}" for i in range(truth.states.shape[1])] \
        + [f"y{i+1}" for i in range(n_y)]
    lines = [",".join(header)]
    pad = np.full(n_y, np.nan)
    for k in range(truth.times.shape[0]):
        y = pad if k == 0 else truth.measurements[k - 1]
        lines.append(_format_row([truth.times[k], *truth.states[k], *y]))
    _write_text(path, "\n".join(lines) + "\n")


def read_truth_csv(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    n_x = sum(1 for c in names if c.startswith("x"))
    n_y = sum(1 for c in names if c.startswith("y"))
    rows = np.column_stack([data[c] for c in names])
    times = rows[:, 0]
    states = rows[:, 1:1 + n_x]
    meas = rows[1:, 1 + n_x:1 + n_x + n_y]
    return TruthRecord(times, states, meas)


def emit_csv(record, path):
    """Combined trace: t, truth, measurements, then per-filter est/var columns."""
    n_x = record.truth.shape[1]
    n_y = record.measurements.shape[1]
    header = ["t"] + [f"x{i+1}" for i in range(n_x)] + [f"y{i+1}" for i in range(n_y)]
    for tr in record.traces:
        header += [f"{tr.name}_est{i+1}" for i in range(n_x)]
        header += [f"{tr.name}_var{i+1}" for i in range(n_x)]
    lines = [",".join(header)]
    for k in range(record.n_samples):
        vals = [record.times[k], *record.truth[k], *record.measurements[k]]
        for tr in record.traces:
            vals.extend(tr.est[k])
            vals.extend(tr.var[k])
        lines.append(_format_row(vals))
    _write_text(path, "\n".join(lines) + "\n")


def read_record_csv(path):
    """Parse an emit_csv file back into a RunRecord (timings are not in the schema)."""
    with open(path, "r", encoding="utf-8") as fh:
        names = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    cols = {c: data[:, i] for i, c in enumerate(names)}
    n_x = sum(1 for c in names if c.startswith("x"))
    n_y = sum(1 for c in names if c.startswith("y") and c[1:].isdigit())
    filters = []
    for c in names:
        if c.endswith("_est1"):
            filters.append(c[: -len("_est1")])
    times = cols["t"]
    truth = np.column_stack([cols[f"x{i+1}"] for i in range(n_x)])
    meas = np.column_stack([cols[f"y{i+1}"] for i in range(n_y)])
    n = times.shape[0]
    traces = []
    for name in filters:
        est = np.column_stack([cols[f"{name}_est{i+1}"] for i in range(n_x)])
        var = np.column_stack([cols[f"{name}_var{i+1}"] for i in range(n_x)])
        traces.append(FilterTrace(name, est, var, np.zeros(n), np.zeros(n)))
    return RunRecord(times, truth, meas, traces)


def write_estimates_csv(trace, times, path):
    """Per-filter trace: estimate, covariance diagonal, and filter extras."""
    n_x = trace.est.shape[1]
    header = ["t"] + [f"est{i+1}" for i in range(n_x)] + [f"var{i+1}" for i in range(n_x)]
    if trace.innovations is not None:
        header += [f"innov{i+1}" for i in range(trace.innovations.shape[1])]
    if trace.ess is not None:
        header += ["ess"]
    lines = [",".join(header)]
    for k in range(times.shape[0]):
        vals = [times[k], *trace.est[k], *trace.var[k]]
        if trace.innovations is not None:
            vals.extend(trace.innovations[k])
        if trace.ess is not None:
            vals.append(trace.ess[k])
        lines.append(_format_row(vals))
    _write_text(path, "\n".join(lines) + "\n")


def _write_clouds_csv(trace, times, path):
    n_x = trace.clouds[0].shape[1] if trace.clouds else 0
    header = ["k", "t", "member"] + [f"x{i+1}" for i in range(n_x)]
    lines = [",".join(header)]
    for k, cloud in enumerate(trace.clouds):
        for i in range(cloud.shape[0]):
            lines.append(f"{k + 1},{_FMT % times[k]},{i}," + _format_row(cloud[i]))
    _write_text(path, "\n".join(lines) + "\n")


def write_outputs(out_dir, truth, record, summary):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_truth_csv(truth, out / "truth.csv")
    emit_csv(record, out / "record.csv")
    for tr in record.traces:
        write_estimates_csv(tr, record.times, out / f"estimates_{tr.name}.csv")
        if tr.clouds:
            _write_clouds_csv(tr, record.times, out / f"ensemble_{tr.name}.csv")
    _write_text(out / "summary.txt", summary.text_table())
    _write_text(out / "summary.csv", summary.csv_text())


def aggregate_text_table(results):
    """Cross-seed table from run_many results; timings are summed, MAPEs spread."""
    names = []
    for _, summary in results:
        for f in summary.filters:
            if f.name not in names:
                names.append(f.name)
    lines = [f"{'filter':<8}{'MAPE_x mean':>14}{'min':>10}{'max':>10}"
             f"{'MAPE_d mean':>14}{'min':>10}{'max':>10}{'TU [s]':>12}{'MU [s]':>12}"]
    for name in names:
        mx = [s[name].mape_x for _, s in results]
        md = [s[name].mape_d for _, s in results]
        tu = [s[name].tu_seconds for _, s in results]
        mu = [s[name].mu_seconds for _, s in results]
        lines.append(
            f"{name:<8}{np.mean(mx):>14.3f}{np.min(mx):>10.3f}{np.max(mx):>10.3f}"
            f"{np.mean(md):>14.3f}{np.min(md):>10.3f}{np.max(md):>10.3f}"
            f"{np.sum(tu):>12.3e}{np.sum(mu):>12.3e}"
        )
    return "\n".join(lines) + "\n"


def _write_seed_aggregate(out_root, results):
    out_root.mkdir(parents=True, exist_ok=True)
    rows = ["seed,filter,tu_seconds,mu_seconds,mape_x_pct,mape_d_pct,error"]
    for seed, summary in results:
        for f in summary.filters:
            rows.append(
                f"{seed},{f.name},{_FMT % f.tu_seconds},{_FMT % f.mu_seconds},"
                f"{_FMT % f.mape_x},{_FMT % f.mape_d},{f.error or ''}"
            )
    _write_text(out_root / "seeds_summary.csv", "\n".join(rows) + "\n")
    _write_text(out_root / "seeds_summary.txt", aggregate_text_table(results))
