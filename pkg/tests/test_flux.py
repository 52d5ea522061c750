"""Tests for the flux preset catalogue and its frozen-coefficient views."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sclrough import (
    Box,
    constant_coefficient,
    eval_flux,
    make_flux,
    max_wave_speed,
    sine_coefficient,
    validate_assumptions,
)

PRESETS = ("burgers", "inhom_burgers", "two_phase", "linear_advection")

xs = st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False)
us = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


class TestPresets:
    def test_unknown_preset_rejected(self):
        with pytest.raises(ValueError, match="preset"):
            make_flux("kpz")

    @pytest.mark.parametrize("preset", PRESETS)
    def test_flux_vanishes_at_zero_state(self, preset):
        m = make_flux(preset)
        x = np.linspace(-np.pi, np.pi, 41)
        assert np.max(np.abs(m.A(x, 0.0))) == 0.0

    @pytest.mark.parametrize("preset", PRESETS)
    def test_assumption_report_passes(self, preset):
        rep = validate_assumptions(make_flux(preset))
        assert rep.passed, "\n".join(rep.lines())

    def test_burgers_closed_form(self):
        m = make_flux("burgers")
        assert m.A(0.3, 2.0) == pytest.approx(2.0)
        assert m.a(0.3, 2.0) == pytest.approx(2.0)
        assert m.b(0.3, 2.0) == 0.0

    def test_inhom_burgers_coefficient(self):
        """A = c(x) u^2 with c = 1 + sin(x)/2, so A(pi/2, 1) = 3/2."""
        m = make_flux("inhom_burgers")
        assert m.A(np.pi / 2, 1.0) == pytest.approx(1.5)
        assert m.b(np.pi / 2, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_two_phase_endpoints_are_flat(self):
        m = make_flux("two_phase")
        x = np.linspace(-np.pi, np.pi, 17)
        assert np.max(np.abs(m.A(x, 0.0))) == 0.0
        assert np.max(np.abs(m.A(x, 1.0))) == 0.0

    def test_coefficient_override(self):
        m = make_flux("linear_advection", v=constant_coefficient(2.0))
        assert m.A(0.7, 1.5) == pytest.approx(3.0)
        assert m.b(0.7, 1.5) == pytest.approx(0.0, abs=1e-12)


class TestDerivativeFields:
    """The analytic derivative fields must match finite differences of A."""

    @pytest.mark.parametrize("preset", PRESETS)
    def test_a_is_du_of_A(self, preset):
        m = make_flux(preset)
        x = np.linspace(-3.0, 3.0, 23)[:, None]
        u = np.linspace(-1.5, 1.5, 19)[None, :]
        h = 1e-6
        fd = (m.A(x, u + h) - m.A(x, u - h)) / (2 * h)
        assert np.max(np.abs(fd - m.a(x, u))) < 5e-9

    @pytest.mark.parametrize("preset", PRESETS)
    def test_b_is_dx_of_A(self, preset):
        m = make_flux(preset)
        x = np.linspace(-3.0, 3.0, 23)[:, None]
        u = np.linspace(-1.5, 1.5, 19)[None, :]
        h = 1e-6
        fd = (m.A(x + h, u) - m.A(x - h, u)) / (2 * h)
        assert np.max(np.abs(fd - m.b(x, u))) < 5e-9


# ----------------------------------------------------------------------
# Engquist-Osher split
# ----------------------------------------------------------------------

class TestFrozenSplit:
    @settings(max_examples=100, deadline=None)
    @given(x=xs, u1=us, u2=us)
    @pytest.mark.parametrize("preset", PRESETS)
    def test_split_monotone(self, preset, x, u1, u2):
        """A+ never decreases in u and A- never increases in u."""
        m = make_flux(preset)
        fz = m.frozen(np.array([x]))
        lo, hi = min(u1, u2), max(u1, u2)
        assert float(np.squeeze(fz.ap(hi) - fz.ap(lo))) >= -1e-12
        assert float(np.squeeze(fz.am(hi) - fz.am(lo))) <= 1e-12

    @settings(max_examples=100, deadline=None)
    @given(x=xs, u=us)
    @pytest.mark.parametrize("preset", PRESETS)
    def test_split_sums_to_flux(self, preset, x, u):
        m = make_flux(preset)
        fz = m.frozen(np.array([x]))
        total = float(np.squeeze(fz.ap(u) + fz.am(u)))
        direct = float(m.A(x, u))
        assert total == pytest.approx(direct, abs=1e-12)

    def test_amax_bounds_wave_speed(self):
        m = make_flux("inhom_burgers")
        fz = m.frozen(np.linspace(-np.pi, np.pi, 101))
        direct = max_wave_speed(m, np.linspace(-np.pi, np.pi, 101), -1.0, 1.0)
        assert float(fz.amax(-1.0, 1.0)) == pytest.approx(direct, rel=1e-9)


class TestHelpers:
    def test_eval_flux_matches_model(self):
        m = make_flux("two_phase")
        x = np.linspace(-2, 2, 9)
        u = np.linspace(0.1, 0.9, 9)
        A, a, b = eval_flux(m, x, u)
        assert np.allclose(A, m.A(x, u))
        assert np.allclose(a, m.a(x, u))
        A0, a0, b0 = eval_flux(m, 0.5, 0.5)
        assert isinstance(A0, float) and isinstance(b0, float)

    def test_sine_coefficient_fields(self):
        c = sine_coefficient(1.0, 0.5, 1.0)
        t = np.linspace(-4, 4, 33)
        assert np.allclose(c.f(t), 1.0 + 0.5 * np.sin(t))
        h = 1e-6
        assert np.max(np.abs((c.f(t + h) - c.f(t - h)) / (2 * h) - c.df(t))) < 1e-8

    def test_box_contains(self):
        box = Box(-1.0, 1.0, -2.0, 2.0)
        assert box.x_lo == -1.0 and box.u_hi == 2.0
