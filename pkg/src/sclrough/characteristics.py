"""Characteristic flows of the kinetic transport field (a, -b).

The flow moves a point (Y, zeta) in position-velocity space by

    dY/ds = a(Y, zeta),      dzeta/ds = -b(Y, zeta),

and carries the variational matrix J = d(Y, zeta)/d(y0, eta0) along the same
trajectory (one extended system), integrated with an adaptive Dormand-Prince
RK45 pair at rtol = atol = tol.  The field is divergence free because
d(a)/dY and d(b)/dzeta are both the mixed second derivative of A, so exact
flows preserve phase-space volume (det J = 1) and the plane zeta = 0 is
invariant; both facts are asserted, not enforced.

Backward characteristics are the same autonomous system integrated from the
terminal condition back to s = 0, in which case J holds the sensitivities of
the s = 0 point with respect to the terminal data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .flux import FluxModel

__all__ = [
    "CharState",
    "FlowPath",
    "ManyFlow",
    "IntegrationFailureError",
    "SignPreservationError",
    "flow_forward",
    "flow_backward",
    "flow_many",
    "transport_solve",
    "cancellation_gap",
    "jacobian_det",
    "divergence_defect",
]


class IntegrationFailureError(RuntimeError):
    """Adaptive integration gave up; carries the last accepted state."""

    def __init__(self, message: str, last_state: "CharState | None" = None):
        super().__init__(message)
        self.last_state = last_state


class SignPreservationError(RuntimeError):
    """The velocity component changed sign along an accepted step."""


@dataclass
class CharState:
    """Flow state: position Y (length dim), velocity zeta, variational J, time s."""

    Y: np.ndarray
    zeta: float
    J: np.ndarray
    s: float

    @property
    def dY_deta(self) -> np.ndarray:
        """Sensitivity of the position w.r.t. the velocity datum."""
        return self.J[:-1, -1]

    @property
    def dzeta_deta(self) -> float:
        """Sensitivity of the velocity w.r.t. the velocity datum."""
        return float(self.J[-1, -1])


def jacobian_det(state: CharState) -> float:
    return float(np.linalg.det(state.J))


def divergence_defect(model: FluxModel, Y, zeta: float) -> float:
    """|div_Y a - d(b)/dzeta| at a point; zero for admissible fluxes."""
    Y = np.atleast_1d(np.asarray(Y, float))
    tr = float(np.trace(model.jac_a(Y, zeta)[:, :-1].reshape(model.dim, model.dim)))
    return abs(tr - float(model.jac_b(Y, zeta)[-1]))


def _rhs_extended(model: FluxModel):
    N = model.dim

    def rhs(s, z):
        Y = z[:N]
        zeta = float(z[N])
        J = z[N + 1:].reshape(N + 1, N + 1)
        M = np.empty((N + 1, N + 1))
        M[:N, :] = model.jac_a(Y, zeta)
        M[N, :] = -model.jac_b(Y, zeta)
        dz = np.empty_like(z)
        dz[:N] = model.a_vec(Y, zeta)
        dz[N] = -model.b_val(Y, zeta)
        dz[N + 1:] = (M @ J).ravel()
        return dz

    return rhs


def _check_sign(eta: float, zrow: np.ndarray) -> None:
    if eta > 0.0 and np.min(zrow) <= 0.0:
        raise SignPreservationError(
            f"velocity started at {eta} but reached {np.min(zrow)}"
        )
    if eta < 0.0 and np.max(zrow) >= 0.0:
        raise SignPreservationError(
            f"velocity started at {eta} but reached {np.max(zrow)}"
        )
    if eta == 0.0 and np.any(zrow != 0.0):
        raise SignPreservationError("velocity left the invariant plane zeta = 0")


def _state_from(z: np.ndarray, s: float, N: int) -> CharState:
    return CharState(Y=z[:N].copy(), zeta=float(z[N]),
                     J=z[N + 1:].reshape(N + 1, N + 1).copy(), s=float(s))


@dataclass
class FlowPath:
    """A single characteristic trajectory with dense evaluation."""

    dim: int
    s_from: float
    s_to: float
    _sol: object

    @property
    def s_knots(self) -> np.ndarray:
        return self._sol.t

    def state_at(self, s: float) -> CharState:
        lo, hi = min(self.s_from, self.s_to), max(self.s_from, self.s_to)
        sf = float(s)
        if sf < lo - 1e-12 or sf > hi + 1e-12:
            raise ValueError(f"s={s} outside the integrated span [{lo}, {hi}]")
        sf = min(max(sf, lo), hi)
        return _state_from(self._sol.sol(sf), sf, self.dim)

    @property
    def final(self) -> CharState:
        return _state_from(self._sol.y[:, -1], self._sol.t[-1], self.dim)


def flow_forward(model: FluxModel, y, eta: float, s_span, tol: float = 1e-9) -> FlowPath:
    """Integrate the characteristic system with data posed at s_span start.

    ``s_span`` may be a scalar s (meaning from 0 to s, either sign) or a pair
    ``(s_from, s_to)``.  Raises :class:`IntegrationFailureError` when the
    integrator fails (carrying the last accepted state) and
    :class:`SignPreservationError` if the velocity crosses zero at an
    accepted step.
    """
    if not np.isfinite(tol) or tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if np.isscalar(s_span):
        s0, s1 = 0.0, float(s_span)
    else:
        s0, s1 = (float(v) for v in s_span)
    N = model.dim
    y = np.atleast_1d(np.asarray(y, float))
    if y.size != N:
        raise ValueError(f"position has size {y.size}, expected dim={N}")
    eta = float(eta)
    z0 = np.concatenate([y, [eta], np.eye(N + 1).ravel()])
    if s0 == s1:
        sol = None
        return _IdentityFlow(N, s0, z0)
    rhs = _rhs_extended(model)
    sol = solve_ivp(rhs, (s0, s1), z0, method="RK45", rtol=tol, atol=tol,
                    dense_output=True)
    if not sol.success:
        raise IntegrationFailureError(
            f"characteristic flow failed at s={sol.t[-1]}: {sol.message}",
            last_state=_state_from(sol.y[:, -1], sol.t[-1], N),
        )
    _check_sign(eta, sol.y[N])
    return FlowPath(dim=N, s_from=s0, s_to=s1, _sol=sol)


class _IdentityFlow(FlowPath):
    """Degenerate zero-length flow (s_from == s_to)."""

    def __init__(self, dim, s, z0):
        self.dim = dim
        self.s_from = self.s_to = s
        self._z0 = z0

    @property
    def s_knots(self):
        return np.array([self.s_from])

    def state_at(self, s):
        if abs(float(s) - self.s_from) > 1e-12:
            raise ValueError("zero-length flow only holds its anchor state")
        return _state_from(self._z0, self.s_from, self.dim)

    @property
    def final(self):
        return _state_from(self._z0, self.s_from, self.dim)


def flow_backward(model: FluxModel, s_end: float, x, xi: float,
                  tol: float = 1e-9) -> CharState:
    """Trace the characteristic through (x, xi) at time s_end back to s = 0.

    The returned state holds (X(0), Xi(0)) and J = d(X(0), Xi(0))/d(x, xi);
    in particular ``state.dY_deta`` and ``state.dzeta_deta`` are the
    sensitivities with respect to the terminal velocity datum xi.
    """
    return flow_forward(model, x, xi, (float(s_end), 0.0), tol=tol).final


@dataclass
class ManyFlow:
    """Vectorized one-dimensional flow for a batch of points."""

    m: int
    comp: int
    s_from: float
    s_to: float
    _sol: object

    def at(self, s: float):
        lo, hi = min(self.s_from, self.s_to), max(self.s_from, self.s_to)
        sf = min(max(float(s), lo), hi)
        z = self._sol.sol(sf).reshape(self.comp, self.m)
        return tuple(z[k].copy() for k in range(self.comp))

    @property
    def final(self):
        z = self._sol.y[:, -1].reshape(self.comp, self.m)
        return tuple(z[k].copy() for k in range(self.comp))


def flow_many(model: FluxModel, ys, etas, s_span, tol: float = 1e-9,
              vary: str | None = None) -> ManyFlow:
    """Flow a batch of (y, eta) points at once (dim = 1 only).

    ``vary='velocity'`` co-integrates the sensitivity pair
    (dY/deta, dzeta/deta); ``vary='position'`` the pair w.r.t. the position
    datum.  Components come back in the order (Y, zeta[, v_pos, v_vel]).
    """
    if model.dim != 1:
        raise ValueError("flow_many is specialized to one space dimension")
    if vary not in (None, "velocity", "position"):
        raise ValueError(f"vary must be None, 'velocity' or 'position', got {vary!r}")
    if np.isscalar(s_span):
        s0, s1 = 0.0, float(s_span)
    else:
        s0, s1 = (float(v) for v in s_span)
    ys = np.asarray(ys, float).ravel()
    etas = np.asarray(etas, float).ravel()
    if ys.size != etas.size:
        raise ValueError("ys and etas must have equal length")
    m = ys.size
    comp = 2 if vary is None else 4
    z0 = np.zeros((comp, m))
    z0[0], z0[1] = ys, etas
    if vary == "position":
        z0[2] = 1.0
    elif vary == "velocity":
        z0[3] = 1.0

    def rhs(s, z):
        st = z.reshape(comp, m)
        Y, Z = st[0], st[1]
        out = np.empty_like(st)
        out[0] = model.a(Y, Z)
        out[1] = -model.b(Y, Z)
        if vary is not None:
            v1, v2 = st[2], st[3]
            out[2] = model.da_dx(Y, Z) * v1 + model.da_du(Y, Z) * v2
            out[3] = -model.db_dx(Y, Z) * v1 - model.db_du(Y, Z) * v2
        return out.ravel()

    if s0 == s1:
        class _Still:
            t = np.array([s0])
            y = z0.reshape(-1, 1)
            sol = staticmethod(lambda s: z0.ravel())
        return ManyFlow(m=m, comp=comp, s_from=s0, s_to=s1, _sol=_Still())

    sol = solve_ivp(rhs, (s0, s1), z0.ravel(), method="RK45", rtol=tol, atol=tol,
                    dense_output=True)
    if not sol.success:
        raise IntegrationFailureError(f"batched flow failed: {sol.message}")
    zrows = sol.y.reshape(comp, m, -1)[1]
    pos = etas > 0.0
    neg = etas < 0.0
    zer = etas == 0.0
    if np.any(zrows[pos].min(axis=1) <= 0.0) if pos.any() else False:
        raise SignPreservationError("a positive velocity crossed zero in the batch")
    if np.any(zrows[neg].max(axis=1) >= 0.0) if neg.any() else False:
        raise SignPreservationError("a negative velocity crossed zero in the batch")
    if zer.any() and np.any(zrows[zer] != 0.0):
        raise SignPreservationError("a zero velocity left the invariant plane")
    return ManyFlow(m=m, comp=comp, s_from=s0, s_to=s1, _sol=sol)


def transport_solve(model: FluxModel, rho0, x, xi: float, s: float,
                    tol: float = 1e-9) -> float:
    """Solve the kinetic transport equation by characteristics.

    Returns rho0 evaluated at the foot (X(0), Xi(0)) of the backward
    characteristic through (x, xi) at flow time s.  For dim = 1 the position
    is passed to ``rho0`` as a plain float.
    """
    st = flow_backward(model, s, x, xi, tol=tol)
    pos = float(st.Y[0]) if model.dim == 1 else st.Y
    return float(rho0(pos, st.zeta))


def cancellation_gap(model: FluxModel, x: float, xi: float, eps: float,
                     s_max: float, n_pairs: int, seed: int = 0,
                     tol: float = 1e-9, n_eval: int = 16,
                     spread: float = 1.0) -> float:
    """Sup over pairs and s of |dY/deta - dY'/deta| / (s * eps).

    Pairs of starting points are sampled near (x, xi): a base point inside a
    box of half-width ``spread`` and a partner offset by at most ``eps`` in
    each coordinate.  The velocity-sensitivity of the position is compared
    along both forward flows at ``n_eval`` times in (0, s_max].
    """
    if eps <= 0.0 or s_max <= 0.0 or n_pairs < 1:
        raise ValueError("need eps > 0, s_max > 0, n_pairs >= 1")
    rng = np.random.default_rng(int(seed))
    svals = s_max * np.arange(1, n_eval + 1) / n_eval
    worst = 0.0
    for _ in range(int(n_pairs)):
        y0 = x + rng.uniform(-spread, spread)
        e0 = xi + rng.uniform(-spread, spread)
        y1 = y0 + rng.uniform(-eps, eps)
        e1 = e0 + rng.uniform(-eps, eps)
        fa = flow_forward(model, [y0], e0, s_max, tol=tol)
        fb = flow_forward(model, [y1], e1, s_max, tol=tol)
        for s in svals:
            gap = abs(float(fa.state_at(s).J[0, -1]) - float(fb.state_at(s).J[0, -1]))
            worst = max(worst, gap / (s * eps))
    return worst
