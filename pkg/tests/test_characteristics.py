"""Characteristic flow tests: closed forms, inverses, invariants, scaling."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sclrough import (
    cancellation_gap,
    flow_backward,
    flow_forward,
    flow_many,
    make_flux,
    transport_solve,
)

BURGERS = make_flux("burgers")
INHOM = make_flux("inhom_burgers")

ys_st = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
etas_st = st.floats(min_value=-1.5, max_value=1.5, allow_nan=False)


class TestClosedForms:
    """For u-independent-in-x Burgers the flow is a shear: X = x + s xi."""

    def test_burgers_shear(self):
        fp = flow_forward(BURGERS, [0.0], 1.0, 2.0)
        st_ = fp.final
        assert float(st_.Y[0]) == pytest.approx(2.0, abs=1e-9)
        assert st_.zeta == pytest.approx(1.0, abs=1e-12)

    def test_burgers_jacobian_is_unit_shear(self):
        fp = flow_forward(BURGERS, [0.0], 0.7, 1.3)
        J = fp.final.J
        assert J[0, 0] == pytest.approx(1.0, abs=1e-9)
        assert J[0, -1] == pytest.approx(1.3, abs=1e-9)
        assert J[-1, 0] == pytest.approx(0.0, abs=1e-9)
        assert J[-1, -1] == pytest.approx(1.0, abs=1e-9)

    def test_zero_velocity_is_a_fixed_point(self):
        """eta = 0 freezes the velocity coordinate for every preset."""
        for model in (BURGERS, INHOM):
            fp = flow_forward(model, [0.4], 0.0, 1.0)
            assert fp.final.zeta == 0.0

    def test_backward_inverts_forward(self):
        fp = flow_forward(INHOM, [0.3], 0.8, 0.9, tol=1e-10)
        back = flow_backward(INHOM, 0.9, float(fp.final.Y[0]), fp.final.zeta,
                             tol=1e-10)
        assert float(back.Y[0]) == pytest.approx(0.3, abs=1e-8)
        assert back.zeta == pytest.approx(0.8, abs=1e-8)

    def test_group_property(self):
        a = flow_forward(INHOM, [0.1], 0.6, 0.5, tol=1e-10).final
        b = flow_forward(INHOM, [float(a.Y[0])], a.zeta, 0.5, tol=1e-10).final
        c = flow_forward(INHOM, [0.1], 0.6, 1.0, tol=1e-10).final
        assert float(b.Y[0]) == pytest.approx(float(c.Y[0]), abs=1e-8)
        assert b.zeta == pytest.approx(c.zeta, abs=1e-8)

    def test_reference_integration_at_tiny_tolerance(self):
        """Self-convergence oracle: tol 1e-12 run is the reference value.

        The reference is computed first at a much tighter tolerance; the
        default-tolerance flow must land within 1e-8 of it.
        """
        ref = flow_forward(INHOM, [0.0], 1.0, 0.5, tol=1e-12).final
        got = flow_forward(INHOM, [0.0], 1.0, 0.5, tol=1e-9).final
        assert float(got.Y[0]) == pytest.approx(float(ref.Y[0]), abs=1e-8)
        assert got.zeta == pytest.approx(ref.zeta, abs=1e-8)


class TestInvariants:
    @settings(max_examples=60, deadline=None)
    @given(y=ys_st, eta=etas_st, s=st.floats(min_value=-1.0, max_value=1.0))
    def test_sign_of_velocity_never_flips(self, y, eta, s):
        if abs(s) < 1e-6:
            s = 0.5
        fp = flow_forward(INHOM, [y], eta, s)
        if eta == 0.0:
            assert fp.final.zeta == 0.0
        else:
            assert np.sign(fp.final.zeta) == np.sign(eta)

    @settings(max_examples=40, deadline=None)
    @given(y=ys_st, eta=etas_st)
    def test_volume_preserved(self, y, eta):
        fp = flow_forward(INHOM, [y], eta, 1.0, tol=1e-10)
        det = float(np.linalg.det(fp.final.J))
        assert abs(det - 1.0) <= 1e-8

    def test_variational_columns_match_finite_differences(self):
        """The integrated sensitivities agree with a bumped-start oracle."""
        h = 1e-6
        base = flow_forward(INHOM, [0.2], 0.9, 0.8, tol=1e-11).final
        bumped = flow_forward(INHOM, [0.2], 0.9 + h, 0.8, tol=1e-11).final
        fd_dY = (float(bumped.Y[0]) - float(base.Y[0])) / h
        fd_dz = (bumped.zeta - base.zeta) / h
        assert float(base.dY_deta[0]) == pytest.approx(fd_dY, abs=5e-5)
        assert base.dzeta_deta == pytest.approx(fd_dz, abs=5e-5)


class TestBatchFlows:
    def test_matches_single_flows(self):
        ys = np.array([0.0, 0.5, -1.0])
        etas = np.array([0.8, -0.6, 1.1])
        mf = flow_many(INHOM, ys, etas, 0.7, tol=1e-11, vary="velocity")
        Y, Z, dY, dZ = mf.final
        for i in range(3):
            single = flow_forward(INHOM, [ys[i]], float(etas[i]), 0.7,
                                  tol=1e-11).final
            assert Y[i] == pytest.approx(float(single.Y[0]), abs=1e-7)
            assert Z[i] == pytest.approx(single.zeta, abs=1e-7)

    def test_negative_flow_time(self):
        mf = flow_many(INHOM, np.array([0.3]), np.array([0.5]), -0.6,
                       vary="position")
        Y, Z, _, _ = mf.final
        fwd = flow_many(INHOM, Y, Z, 0.6, vary="position")
        assert float(fwd.final[0][0]) == pytest.approx(0.3, abs=1e-7)
        assert float(fwd.final[1][0]) == pytest.approx(0.5, abs=1e-7)


class TestTransport:
    def test_zero_time_is_identity(self):
        val = transport_solve(INHOM, lambda x, xi: x * xi, 0.4, 0.9, 0.0)
        assert val == pytest.approx(0.4 * 0.9)

    def test_burgers_conserves_velocity_profile(self):
        for s in (0.3, 1.2):
            val = transport_solve(BURGERS, lambda x, xi: xi, 0.1, 0.7, s)
            assert val == pytest.approx(0.7, abs=1e-9)

    def test_matches_backward_flow(self):
        st_ = flow_backward(INHOM, 0.8, 0.2, 0.9, tol=1e-12)
        val = transport_solve(INHOM, lambda x, xi: xi, 0.2, 0.9, 0.8, tol=1e-12)
        assert val == pytest.approx(st_.zeta, abs=1e-10)


# ----------------------------------------------------------------------
# cancellation estimate
# ----------------------------------------------------------------------

class TestCancellation:
    def test_homogeneous_flux_has_zero_gap(self):
        """For Burgers dX/deta = s for every start, so the gap vanishes."""
        assert cancellation_gap(BURGERS, 0.0, 0.5, 0.1, 0.5, 5) <= 1e-9

    def test_halving_eps_halves_the_gap(self):
        sup1 = cancellation_gap(INHOM, 0.0, 0.8, 0.2, 0.5, 10, seed=1)
        sup2 = cancellation_gap(INHOM, 0.0, 0.8, 0.1, 0.5, 10, seed=1)
        assert sup1 > 0
        # the normalized sup is eps-stable, so halving eps keeps it within 20%
        assert abs(sup2 - sup1) <= 0.2 * sup1

    def test_ratio_finite_for_small_flow_times(self):
        assert np.isfinite(cancellation_gap(INHOM, 0.0, 0.8, 0.05, 0.02, 5))
