"""Config parsing and the derived simulation/estimation objects."""

import dataclasses

import numpy as np
import pytest

from cdfilt.config import SCHEMA, FILTER_NAMES, BenchConfig, parse_config, parse_config_text
from cdfilt.errors import ConfigError
from cdfilt.fourtank import four_tank_model


class TestSchema:
    def test_every_key_maps_to_a_real_field(self):
        fields = {f.name for f in dataclasses.fields(BenchConfig)}
        for key, (attr, conv) in SCHEMA.items():
            assert attr in fields, key
            assert callable(conv)

    def test_every_field_is_reachable_from_some_key(self):
        mapped = {attr for attr, _ in SCHEMA.values()}
        fields = {f.name for f in dataclasses.fields(BenchConfig)}
        assert mapped == fields

    def test_filter_names(self):
        assert FILTER_NAMES == ("ekf", "ukf", "enkf", "pf")


class TestParseText:
    def test_empty_text_gives_defaults(self):
        assert parse_config_text("") == BenchConfig()

    def test_comments_and_blank_lines_skipped(self):
        text = "\n# a comment\n   # indented comment\n\nseed = 9\n"
        assert parse_config_text(text).seed == 9

    def test_scalar_and_dotted_keys(self):
        cfg = parse_config_text("seed = 7\nukf.alpha = 0.01\nsim.horizon = 600\n")
        assert cfg.seed == 7
        assert cfg.ukf_alpha == 0.01
        assert cfg.horizon == 600.0

    def test_filter_list_normalizes_case_and_whitespace(self):
        cfg = parse_config_text("filters = EKF,  pf ,\n")
        assert cfg.filters == ("ekf", "pf")

    def test_fixed_length_float_list(self):
        cfg = parse_config_text("sim.pump_flow = 250, 350\n")
        assert cfg.pump_flow == (250.0, 350.0)

    def test_fixed_length_float_list_wrong_count(self):
        with pytest.raises(ConfigError, match="expected 2"):
            parse_config_text("sim.pump_flow = 250, 350, 450\n")

    def test_variable_length_levels(self):
        cfg = parse_config_text("sim.disturbance_levels = 50, 100, 150, 200\n")
        assert cfg.disturbance_levels == (50.0, 100.0, 150.0, 200.0)

    def test_int_list(self):
        cfg = parse_config_text("model.measured_tanks = 3, 4\n")
        assert cfg.measured_tanks == (3, 4)

    def test_later_assignment_wins(self):
        assert parse_config_text("seed = 1\nseed = 5\n").seed == 5

    def test_integer_accepts_hex(self):
        assert parse_config_text("seed = 0x10\n").seed == 16

    def test_unknown_key_reports_line_number(self):
        with pytest.raises(ConfigError, match=r"line 3: unknown key 'sim\.horzon'"):
            parse_config_text("# ok\nseed = 1\nsim.horzon = 10\n")

    def test_missing_equals_reports_line_number(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config_text("just some words\n")

    def test_bad_float(self):
        with pytest.raises(ConfigError, match="expected a number"):
            parse_config_text("sim.horizon = fast\n")

    def test_bad_int(self):
        with pytest.raises(ConfigError, match="expected an integer"):
            parse_config_text("sim.samples = 10.5\n")

    def test_base_config_is_merged(self):
        base = parse_config_text("seed = 42\nukf.alpha = 0.2\n")
        cfg = parse_config_text("ukf.alpha = 0.5\n", base=base)
        assert cfg.seed == 42  # inherited
        assert cfg.ukf_alpha == 0.5  # overridden
        assert base.ukf_alpha == 0.2  # base untouched


class TestValidation:
    @pytest.mark.parametrize(
        "text, match",
        [
            ("sim.horizon = -5\n", "positive"),
            ("sim.samples = 0\n", ">= 1"),
            ("est.internal_steps = 0\n", ">= 1"),
            ("filters = ekf, zkf\n", "unknown filters"),
            ("filters = ekf, ekf\n", "duplicate"),
            ("sim.disturbance_levels = \n", "expected a number"),
            ("enkf.members = 1\n", ">= 2"),
            ("pf.particles = 1\n", ">= 2"),
            ("model.meas_noise_std = -1\n", "non-negative"),
        ],
    )
    def test_rejections(self, text, match):
        with pytest.raises(ConfigError, match=match):
            parse_config_text(text)

    def test_empty_level_tuple_rejected(self):
        with pytest.raises(ConfigError, match="at least one"):
            BenchConfig(disturbance_levels=())

    def test_geometry_errors_become_config_errors(self):
        # valve splits are checked by the model parameters; the wrapper
        # must re-raise as ConfigError so the CLI exits uniformly
        with pytest.raises(ConfigError, match="gamma"):
            parse_config_text("model.gamma1 = 1.5\n")


class TestParseFile:
    def test_round_trip_through_file(self, tmp_path):
        path = tmp_path / "bench.cfg"
        path.write_text("seed = 11\nfilters = enkf\nenkf.members = 64\n")
        cfg = parse_config(path)
        assert cfg == parse_config_text(path.read_text())
        assert (cfg.seed, cfg.filters, cfg.enkf_members) == (11, ("enkf",), 64)

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            parse_config(tmp_path / "nope.cfg")


class TestDerivedObjects:
    def test_sim_config_grid(self):
        cfg = BenchConfig()
        sc = cfg.sim_config()
        assert (sc.t0, sc.tf) == (0.0, 1800.0)
        assert (sc.n_samples, sc.internal_steps) == (120, 1000)

    def test_u_profile_constant(self):
        cfg = BenchConfig()
        for t in (0.0, 70.0, 1800.0):
            np.testing.assert_array_equal(cfg.u_profile()(t), [300.0, 300.0])

    def test_truth_disturbance_steps_are_equal_thirds(self):
        cfg = BenchConfig()
        prof = cfg.d_truth_profile()
        np.testing.assert_array_equal(prof(0.0), [100.0, 100.0])
        np.testing.assert_array_equal(prof(599.9), [100.0, 100.0])
        np.testing.assert_array_equal(prof(600.0), [200.0, 200.0])
        np.testing.assert_array_equal(prof(1199.9), [200.0, 200.0])
        np.testing.assert_array_equal(prof(1200.0), [300.0, 300.0])
        np.testing.assert_array_equal(prof(5000.0), [300.0, 300.0])

    def test_estimator_disturbance_is_flat_nominal(self):
        cfg = BenchConfig()
        for t in (0.0, 900.0, 1800.0):
            np.testing.assert_array_equal(cfg.d_est_profile()(t), [150.0, 150.0])

    def test_measurement_noise_matches_channel_count(self):
        cfg = dataclasses.replace(BenchConfig(), measured_tanks=(1, 2, 4),
                                  meas_noise_std=0.5)
        np.testing.assert_array_equal(cfg.noise().cov, 0.25 * np.eye(3))

    def test_x0_is_steady_at_first_level(self):
        cfg = BenchConfig()
        x0 = cfg.x0()
        assert x0.shape == (6,)
        np.testing.assert_array_equal(x0[4:], [100.0, 100.0])
        m = four_tank_model(cfg.sim_params())
        f = m.drift(0.0, x0, np.asarray(cfg.pump_flow), np.array([100.0, 100.0]),
                    m.theta)
        # mass balance closes; OU channels are at their (initial-level) mean
        np.testing.assert_allclose(f[:4], 0.0, atol=1e-9)

    def test_initial_belief(self):
        cfg = BenchConfig()
        bel = cfg.initial_belief()
        np.testing.assert_array_equal(bel.mean, cfg.x0())
        np.testing.assert_array_equal(
            bel.cov, np.diag([100.0, 100.0, 100.0, 100.0, 25.0, 25.0]))

    def test_sim_params_use_truth_ou(self):
        p = BenchConfig().sim_params()
        assert p.ou_rate == (0.1, 0.1)
        assert p.ou_diffusion == (5.0, 5.0)

    @pytest.mark.parametrize(
        "name, rate, diff",
        [("ekf", 0.0, 5.0), ("ukf", 0.0, 1.0), ("enkf", 2e-3, 5.0), ("pf", 2e-3, 5.0)],
    )
    def test_est_params_per_filter(self, name, rate, diff):
        p = BenchConfig().est_params(name)
        assert p.ou_rate == (rate, rate)
        assert p.ou_diffusion == (diff, diff)
