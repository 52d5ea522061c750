"""Tests for config parsing, builders, artifact writers, and runners."""

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sclrough.experiments import (
    Config,
    ConfigError,
    EXPERIMENTS,
    build_grid,
    build_initial,
    build_model,
    build_path,
    fourier_profile,
    list_experiments,
    load_config,
    run_experiment,
    write_csv,
    write_summary,
)
from sclrough.verify import Report

SOLVE_INI = """
[experiment]
name = solve

[flux]
preset = burgers

[path]
kind = linear
t = 1.0
slope = 1.0

[grid]
n_cells = 200
x_lo = -2.0
x_hi = 2.0
boundary = outflow

[initial]
kind = riemann
u_left = 1.0
u_right = -0.2
x_jump = 0.0

[solve]
check_riemann = true
"""


def cfg_from(text):
    return load_config(io.StringIO(text))


MINIMAL = "[experiment]\nname = solve\n[flux]\npreset = burgers\n[path]\nkind = linear\n"


# =====================================================================
# config validation
# =====================================================================

class TestLoadConfig:
    def test_minimal_config_loads(self):
        cfg = cfg_from(MINIMAL)
        assert cfg.name == "solve"
        assert cfg.get("flux", "preset") == "burgers"

    def test_unknown_section_named_in_error(self):
        with pytest.raises(ConfigError, match=r"\[bogus\]"):
            cfg_from(MINIMAL + "[bogus]\nx = 1\n")

    def test_unknown_key_named_in_error(self):
        with pytest.raises(ConfigError, match="dt_max"):
            cfg_from(MINIMAL + "[solver]\ndt_max = 0.1\n")

    def test_other_experiments_extra_section_rejected(self):
        # a [stability] section is only valid when name = stability
        with pytest.raises(ConfigError, match=r"\[stability\]"):
            cfg_from(MINIMAL + "[stability]\nlevels = 4\n")

    def test_missing_name_rejected(self):
        with pytest.raises(ConfigError, match="name"):
            cfg_from("[experiment]\nout = somewhere\n")

    def test_unknown_experiment_lists_known_tags(self):
        with pytest.raises(ConfigError, match="solve"):
            cfg_from("[experiment]\nname = frobnicate\n")

    def test_missing_flux_preset_rejected(self):
        with pytest.raises(ConfigError, match="preset"):
            cfg_from("[experiment]\nname = solve\n[path]\nkind = linear\n")

    def test_missing_path_kind_rejected(self):
        with pytest.raises(ConfigError, match="kind"):
            cfg_from("[experiment]\nname = solve\n[flux]\npreset = burgers\n")

    def test_missing_file_rejected(self):
        with pytest.raises(ConfigError, match="not found"):
            load_config("/nonexistent/experiment.ini")

    def test_parse_error_wrapped(self):
        with pytest.raises(ConfigError, match="parse"):
            cfg_from("this is not an ini file\n")


class TestConfigGetters:
    def test_missing_required_key_raises(self):
        cfg = cfg_from(MINIMAL)
        with pytest.raises(ConfigError, match="snapshots"):
            cfg.get("solver", "snapshots")

    def test_defaults_pass_through(self):
        cfg = cfg_from(MINIMAL)
        assert cfg.get_float("solver", "cfl", 0.4) == 0.4
        assert cfg.get("solver", "cfl", None) is None

    def test_bad_number_diagnosed(self):
        cfg = cfg_from(MINIMAL + "[solver]\ncfl = fast\n")
        with pytest.raises(ConfigError, match="cfl"):
            cfg.get_float("solver", "cfl", 0.4)

    def test_bool_spellings(self):
        cfg = cfg_from(MINIMAL + "[solve]\ncheck_riemann = YES\n")
        assert cfg.get_bool("solve", "check_riemann", False) is True
        cfg2 = cfg_from(MINIMAL + "[solve]\ncheck_riemann = off\n")
        assert cfg2.get_bool("solve", "check_riemann", True) is False

    def test_bad_bool_diagnosed(self):
        cfg = cfg_from(MINIMAL + "[solve]\ncheck_riemann = maybe\n")
        with pytest.raises(ConfigError, match="check_riemann"):
            cfg.get_bool("solve", "check_riemann", False)

    def test_float_list_parsing(self):
        cfg = cfg_from(MINIMAL + "[solver]\nsnapshots = 0.25, 0.5, 1.0\n")
        assert cfg.get_floats("solver", "snapshots") == [0.25, 0.5, 1.0]


# =====================================================================
# builders
# =====================================================================

class TestBuilders:
    def test_build_model_presets(self):
        for preset in ("burgers", "inhom_burgers", "two_phase",
                       "linear_advection"):
            cfg = cfg_from(MINIMAL.replace("burgers", preset))
            assert build_model(cfg).preset == preset

    def test_unknown_preset_rejected(self):
        cfg = cfg_from(MINIMAL.replace("burgers", "frobnicate"))
        with pytest.raises(ConfigError, match="preset"):
            build_model(cfg)

    def test_burgers_rejects_coefficient_keys(self):
        cfg = cfg_from(MINIMAL.replace("preset = burgers\n",
                                       "preset = burgers\ncoef_amp = 0.3\n"))
        with pytest.raises(ConfigError, match="coefficient"):
            build_model(cfg)

    def test_coefficient_override_changes_flux(self):
        base = cfg_from(MINIMAL.replace("burgers", "inhom_burgers"))
        tweaked = cfg_from(MINIMAL.replace(
            "preset = burgers\n",
            "preset = inhom_burgers\ncoef_amp = 0.0\ncoef_base = 2.0\n"))
        x = np.array([0.3])
        u = 0.7
        a0 = build_model(base).A(x, u)[0]
        a1 = build_model(tweaked).A(x, u)[0]
        assert a1 == pytest.approx(2.0 * u * u)
        assert a0 != pytest.approx(a1)

    def test_build_path_kinds(self):
        lin = build_path(cfg_from(MINIMAL + "t = 2.0\nslope = 0.5\n"), seed=0)
        assert lin.evaluate(2.0) == pytest.approx(1.0)
        tent = build_path(cfg_from(MINIMAL.replace("kind = linear",
                                                   "kind = tent")
                                   + "height = 2.0\n"), seed=0)
        assert tent.kind == "deterministic-test"
        assert tent.evaluate(0.5) == pytest.approx(2.0)
        assert tent.evaluate(1.0) == pytest.approx(0.0)
        bro = build_path(cfg_from(MINIMAL.replace("kind = linear",
                                                  "kind = brownian")
                                  + "n = 17\n"), seed=3)
        assert bro.n_knots == 17
        assert bro.seed == 3

    def test_unknown_path_kind_rejected(self):
        cfg = cfg_from(MINIMAL.replace("kind = linear", "kind = levy"))
        with pytest.raises(ConfigError, match="levy"):
            build_path(cfg, seed=0)

    def test_build_grid_defaults_to_model_box(self):
        cfg = cfg_from(MINIMAL)
        model = build_model(cfg)
        grid = build_grid(cfg, model)
        assert grid.x_lo == model.box.x_lo
        assert grid.x_hi == model.box.x_hi
        assert grid.n_cells == 400

    def test_bad_boundary_rejected(self):
        cfg = cfg_from(MINIMAL + "[grid]\nboundary = reflecting\n")
        with pytest.raises(ConfigError, match="reflecting"):
            build_grid(cfg, build_model(cfg))

    def test_initial_kinds(self):
        cfg = cfg_from(MINIMAL)
        grid = build_grid(cfg, build_model(cfg))
        xc = grid.centers()

        const = cfg_from(MINIMAL + "[initial]\nkind = constant\nvalue = 0.25\n")
        assert np.all(build_initial(const, grid, 0) == 0.25)

        riem = cfg_from(MINIMAL + "[initial]\nkind = riemann\n"
                        "u_left = 1.0\nu_right = -1.0\nx_jump = 0.0\n")
        u = build_initial(riem, grid, 0)
        assert np.all(u[xc < 0] == 1.0)
        assert np.all(u[xc >= 0] == -1.0)

        sine = cfg_from(MINIMAL + "[initial]\nkind = sine\n"
                        "mean = 0.1\namp = 0.4\nfreq = 2.0\n")
        v = build_initial(sine, grid, 0)
        assert v == pytest.approx(0.1 + 0.4 * np.sin(2.0 * xc))

    def test_random_initial_is_seeded_and_normalized(self):
        cfg = cfg_from(MINIMAL + "[initial]\nkind = random\namp = 0.3\n")
        grid = build_grid(cfg, build_model(cfg))
        u1 = build_initial(cfg, grid, 7)
        u2 = build_initial(cfg, grid, 7)
        u3 = build_initial(cfg, grid, 8)
        assert np.array_equal(u1, u2)
        assert not np.array_equal(u1, u3)
        assert np.max(np.abs(u1)) == pytest.approx(0.3, abs=1e-12)

    def test_unknown_initial_kind_rejected(self):
        cfg = cfg_from(MINIMAL + "[initial]\nkind = bump\n")
        grid = build_grid(cfg, build_model(cfg))
        with pytest.raises(ConfigError, match="bump"):
            build_initial(cfg, grid, 0)


class TestFourierProfile:
    @settings(max_examples=25, deadline=None)
    @given(amp=st.floats(0.05, 2.0), modes=st.integers(1, 5),
           seed=st.integers(0, 100))
    def test_sup_norm_equals_amp(self, amp, modes, seed):
        xc = np.linspace(-np.pi, np.pi, 128, endpoint=False)
        rng = np.random.default_rng(seed)
        u = fourier_profile(xc, 2.0 * np.pi, rng, amp=amp, modes=modes)
        assert np.max(np.abs(u)) == pytest.approx(amp, rel=1e-12)


# =====================================================================
# artifact writers
# =====================================================================

class TestWriters:
    def test_csv_formatting(self, tmp_path):
        dest = tmp_path / "t.csv"
        write_csv(dest, ["a", "b"], [[1, 2.5], [True, "x"]])
        assert dest.read_text() == "a,b\n1,2.5\ntrue,x\n"

    def test_csv_header_only_when_empty(self, tmp_path):
        dest = tmp_path / "t.csv"
        write_csv(dest, ["a", "b"], [])
        assert dest.read_text() == "a,b\n"

    def test_csv_floats_round_trip(self, tmp_path):
        val = 0.1 + 0.2
        dest = tmp_path / "t.csv"
        write_csv(dest, ["v"], [[val]])
        back = float(dest.read_text().splitlines()[1])
        assert back == val

    def test_summary_contains_report_lines(self, tmp_path):
        rep = Report(name="demo", inputs={"n": 3}, measured={"err": 0.5},
                     thresholds={"tol": 1.0}, flags={"ok": True})
        rep.artifacts.append("somewhere/table.csv")
        dest = tmp_path / "summary.txt"
        write_summary(dest, rep)
        text = dest.read_text()
        assert "demo.passed=true" in text
        assert "demo.measured.err=0.5" in text
        assert "artifact=somewhere/table.csv" in text


# =====================================================================
# runners and the registry
# =====================================================================

class TestRunExperiment:
    def test_solve_run_produces_artifacts(self, tmp_path):
        rep = run_experiment(cfg_from(SOLVE_INI), tmp_path / "out")
        assert rep.passed
        assert rep.flags["riemann"]
        for fname in ("trajectory.csv", "profiles.png", "summary.txt"):
            assert (tmp_path / "out" / fname).is_file()

    def test_rerun_is_byte_identical(self, tmp_path):
        run_experiment(cfg_from(SOLVE_INI), tmp_path / "a")
        run_experiment(cfg_from(SOLVE_INI), tmp_path / "b")
        ta = (tmp_path / "a" / "trajectory.csv").read_bytes()
        tb = (tmp_path / "b" / "trajectory.csv").read_bytes()
        assert ta == tb

    def test_failed_check_reported_not_raised(self, tmp_path):
        tight = SOLVE_INI + "l1_tol = 1e-9\n"
        rep = run_experiment(cfg_from(tight), tmp_path / "out")
        assert not rep.passed
        assert not rep.flags["riemann"]

    def test_seed_override_wins(self, tmp_path):
        brown = SOLVE_INI.replace("kind = linear", "kind = brownian\nn = 65")
        brown = brown.replace("check_riemann = true", "check_riemann = false")
        brown = brown.replace("n_cells = 200", "n_cells = 64")
        rep = run_experiment(cfg_from(brown), tmp_path / "out",
                             seed_override=5)
        assert rep.inputs["path_seed"] == 5


class TestRegistry:
    def test_eight_experiments_listed_sorted(self):
        assert len(EXPERIMENTS) == 8
        text = list_experiments()
        lines = text.strip().splitlines()
        tags = [ln.split()[0] for ln in lines[0::2]]
        assert tags == sorted(EXPERIMENTS)
        assert all("config:" in ln for ln in lines[1::2])
