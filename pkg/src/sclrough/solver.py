"""Monotone finite-volume solver driven by a piecewise-linear signal.

Per linear segment of slope sigma the conservative Engquist-Osher update is
applied to the effective flux sigma * A(x, u), with the flux coefficient
frozen at each cell interface:

    F_{i+1/2} = sigma * [A_plus(x_{i+1/2}, u_L) + A_minus(x_{i+1/2}, u_R)
                         + A(x_{i+1/2}, 0)]          (sigma > 0)

and the roles of A_plus / A_minus swap for sigma < 0, which keeps the flux
monotone (nondecreasing in u_L, nonincreasing in u_R) for either slope sign.
Substeps honour |sigma| * max|a| * dt <= cfl * dx, so every substep is a
monotone scheme: discrete L1 contraction, the maximum principle for
homogeneous fluxes and exact conservation on periodic grids all hold at
machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .flux import FluxModel, FrozenFlux
from .paths import RoughPath, eval_and_slope

__all__ = [
    "Grid1D",
    "Trajectory",
    "NumericalFailureError",
    "SupportEscapeError",
    "solve",
    "step",
    "exact_riemann_burgers",
    "replay_substeps",
    "l1_norm",
    "l2_norm_sq",
    "trajectory_to_csv",
]


class NumericalFailureError(RuntimeError):
    """The update produced NaN/Inf; message carries the step context."""


class SupportEscapeError(RuntimeError):
    """Compactly supported data reached an outflow boundary."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell grid on [x_lo, x_hi] with periodic or outflow boundary."""

    x_lo: float
    x_hi: float
    n_cells: int
    boundary: str = "outflow"

    def __post_init__(self):
        if self.boundary not in ("periodic", "outflow"):
            raise ValueError(f"boundary must be periodic or outflow, got {self.boundary!r}")
        if self.n_cells < 3:
            raise ValueError(f"need at least 3 cells, got {self.n_cells}")
        if not (np.isfinite(self.x_lo) and np.isfinite(self.x_hi) and self.x_hi > self.x_lo):
            raise ValueError(f"bad extent [{self.x_lo}, {self.x_hi}]")

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.n_cells

    def centers(self) -> np.ndarray:
        return self.x_lo + (np.arange(self.n_cells) + 0.5) * self.dx

    def interfaces(self) -> np.ndarray:
        """Interface positions used for flux evaluation.

        Periodic grids use the n left edges (the wrap interface appears
        once, which makes conservation telescade exactly); outflow grids use
        all n + 1 edges.
        """
        if self.boundary == "periodic":
            return self.x_lo + np.arange(self.n_cells) * self.dx
        return self.x_lo + np.arange(self.n_cells + 1) * self.dx


@dataclass
class Trajectory:
    """Snapshots of a solve plus the substep records between them.

    ``substeps[k]`` lists the (sigma, dt) pairs that advanced snapshot k-1 to
    snapshot k; ``substeps[0]`` is empty.  Snapshots are deep copies.
    """

    grid: Grid1D
    cfl: float
    times: np.ndarray
    snapshots: list
    substeps: list
    meta: dict = field(default_factory=dict)

    def u_at(self, t: float) -> np.ndarray:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-10 * max(1.0, float(self.times[-1])):
            raise ValueError(f"no snapshot at t={t}; stored times {self.times}")
        return self.snapshots[k]

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1]


def l1_norm(grid: Grid1D, u: np.ndarray) -> float:
    return float(grid.dx * np.sum(np.abs(u)))


def l2_norm_sq(grid: Grid1D, u: np.ndarray) -> float:
    return float(grid.dx * np.sum(u * u))


def _eo_flux(fz: FrozenFlux, uL: np.ndarray, uR: np.ndarray, sigma: float) -> np.ndarray:
    if sigma > 0.0:
        return sigma * (fz.ap(uL) + fz.am(uR) + fz.a0)
    if sigma < 0.0:
        return sigma * (fz.am(uL) + fz.ap(uR) + fz.a0)
    return np.zeros_like(uL)


def _step_frozen(u: np.ndarray, fz: FrozenFlux, sigma: float, dt: float,
                 grid: Grid1D) -> np.ndarray:
    nu = dt / grid.dx
    if grid.boundary == "periodic":
        ul = np.roll(u, 1)
        F = _eo_flux(fz, ul, u, sigma)          # flux through each left edge
        return u - nu * (np.roll(F, -1) - F)
    uL = np.concatenate([u[:1], u])             # zero-order extrapolation ghosts
    uR = np.concatenate([u, u[-1:]])
    F = _eo_flux(fz, uL, uR, sigma)
    return u - nu * (F[1:] - F[:-1])


def step(u: np.ndarray, model: FluxModel, sigma: float, dt: float,
         grid: Grid1D) -> np.ndarray:
    """One conservative Engquist-Osher substep.

    The caller guarantees the CFL condition |sigma| * max|a| * dt <= cfl * dx;
    under it the update is monotone in every argument.
    """
    u = np.asarray(u, float)
    if u.shape != (grid.n_cells,):
        raise ValueError(f"state has shape {u.shape}, expected ({grid.n_cells},)")
    fz = model.frozen(grid.interfaces())
    return _step_frozen(u, fz, float(sigma), float(dt), grid)


def _merge_events(path: RoughPath, snaps: np.ndarray, t_end: float) -> list:
    tol = 1e-12 * max(1.0, t_end)
    knots = path.times[(path.times > tol) & (path.times < t_end - tol)]
    all_t = np.concatenate([knots, snaps[snaps > tol]])
    all_t = np.sort(all_t)
    events = []
    for t in all_t:
        if events and abs(t - events[-1]) <= tol:
            continue
        events.append(float(t))
    if not events or abs(events[-1] - t_end) > tol:
        events.append(t_end)
    snap_set = [float(s) for s in snaps]
    flags = [any(abs(e - s) <= tol for s in snap_set) for e in events]
    return list(zip(events, flags))


def solve(model: FluxModel, path: RoughPath, u0: np.ndarray, grid: Grid1D,
          cfl: float = 0.4, snapshot_times=(1.0,), u_range=None) -> Trajectory:
    """March the scheme along the path, recording snapshots and substeps.

    Snapshot times must lie in [0, path horizon]; t = 0 is always recorded.
    Segments with sigma = 0 advance the clock without touching the state.
    With outflow boundaries and data that is zero in the outermost cells the
    solver checks at every substep that the support has not reached the
    boundary and raises :class:`SupportEscapeError` if it has.

    By default the CFL wave speed is taken over the running solution range.
    Passing ``u_range=(lo, hi)`` freezes it over that band instead, which
    makes the substep sequence a function of (path, grid, cfl, band) alone;
    runs that should be compared substep-for-substep (contraction pairs,
    comparison-principle triples) must share a band.  The state is checked
    against the band every substep.
    """
    if model.dim != 1:
        raise ValueError("the finite-volume solver is one-dimensional")
    if not (0.0 < cfl <= 0.5):
        raise ValueError(f"cfl must lie in (0, 0.5], got {cfl}")
    u = np.array(u0, dtype=float)
    if u.shape != (grid.n_cells,):
        raise ValueError(f"u0 has shape {u.shape}, expected ({grid.n_cells},)")
    if not np.all(np.isfinite(u)):
        raise ValueError("u0 must be finite")
    snaps = np.array(sorted({float(t) for t in snapshot_times}))
    if snaps.size == 0:
        raise ValueError("need at least one snapshot time")
    tol_T = 1e-12 * max(1.0, path.horizon)
    if snaps[0] < -tol_T or snaps[-1] > path.horizon + tol_T:
        raise ValueError(
            f"snapshot times must lie in [0, {path.horizon}], got {snaps}")
    t_end = float(min(snaps[-1], path.horizon))
    if t_end <= tol_T:
        return Trajectory(grid=grid, cfl=float(cfl), times=np.asarray([0.0]),
                          snapshots=[u.copy()], substeps=[[]],
                          meta={"preset": model.preset, "path_kind": path.kind,
                                "path_seed": path.seed})
    if u_range is not None:
        rlo, rhi = float(u_range[0]), float(u_range[1])
        if not (np.isfinite(rlo) and np.isfinite(rhi) and rlo < rhi):
            raise ValueError(f"u_range must be a finite (lo, hi) pair, got {u_range}")
        if float(u.min()) < rlo or float(u.max()) > rhi:
            raise ValueError("u0 must lie inside u_range")

    scale = max(1.0, float(np.max(np.abs(u))))
    support_check = (grid.boundary == "outflow"
                     and abs(u[0]) <= 1e-13 * scale
                     and abs(u[-1]) <= 1e-13 * scale)

    fz = model.frozen(grid.interfaces())
    times = [0.0]
    snapshots = [u.copy()]
    substeps = [[]]
    records = []
    t = 0.0
    tol = 1e-13 * max(1.0, t_end)
    for target, is_snap in _merge_events(path, snaps, t_end):
        while t < target - tol:
            _, sigma = eval_and_slope(path, t)
            if sigma == 0.0:
                records.append((0.0, target - t))
                t = target
                break
            if u_range is None:
                lo, hi = float(u.min()), float(u.max())
            else:
                lo, hi = rlo, rhi
            c, half = 0.5 * (lo + hi), 0.55 * (hi - lo) + 1e-12
            amax = max(fz.amax(c - half, c + half), 1e-12)
            dt_max = cfl * grid.dx / (abs(sigma) * amax)
            remaining = target - t
            if dt_max >= remaining:
                dt, t_next = remaining, target
            else:
                dt, t_next = dt_max, t + dt_max
            u = _step_frozen(u, fz, sigma, dt, grid)
            if not np.all(np.isfinite(u)):
                raise NumericalFailureError(
                    f"non-finite state at t={t:.6g}, sigma={sigma:.6g}, dt={dt:.3g}")
            if support_check and (abs(u[0]) > 1e-10 * scale or abs(u[-1]) > 1e-10 * scale):
                raise SupportEscapeError(
                    f"support reached the outflow boundary at t={t:.6g}; widen the domain")
            if u_range is not None and (float(u.min()) < c - half
                                        or float(u.max()) > c + half):
                raise NumericalFailureError(
                    f"state left the declared u_range band at t={t:.6g}; widen u_range")
            records.append((float(sigma), float(dt)))
            t = t_next
        t = target
        if is_snap:
            times.append(t)
            snapshots.append(u.copy())
            substeps.append(records)
            records = []
    return Trajectory(grid=grid, cfl=float(cfl), times=np.asarray(times),
                      snapshots=snapshots, substeps=substeps,
                      meta={"preset": model.preset, "path_kind": path.kind,
                            "path_seed": path.seed})


def replay_substeps(traj: Trajectory, model: FluxModel):
    """Re-run the recorded substeps, yielding every intermediate state.

    Yields tuples ``(slab_index, t_start_of_slab, u_before, sigma, dt,
    u_after)``; slab k connects snapshot k to snapshot k+1.  The replay is
    bit-identical to the original solve, which is asserted against the stored
    snapshots; a mismatch means the trajectory was produced by a different
    flux or grid.
    """
    fz = model.frozen(traj.grid.interfaces())
    for k in range(len(traj.times) - 1):
        u = traj.snapshots[k].copy()
        t0 = float(traj.times[k])
        for sigma, dt in traj.substeps[k + 1]:
            u_prev = u
            if sigma != 0.0:
                u = _step_frozen(u, fz, sigma, dt, traj.grid)
            yield k, t0, u_prev, sigma, dt, u
        if not np.array_equal(u, traj.snapshots[k + 1]):
            raise ValueError(
                f"replay of slab {k} disagrees with the stored snapshot; "
                "trajectory is inconsistent with this flux/grid")


def exact_riemann_burgers(u_left: float, u_right: float, x, t: float):
    """Entropy solution of the homogeneous Burgers Riemann problem.

    Shock of speed (u_left + u_right)/2 when u_left > u_right, rarefaction
    fan x/t clamped between the states when u_left < u_right.
    """
    if t <= 0.0:
        raise ValueError(f"need t > 0, got {t}")
    xa = np.asarray(x, float)
    if u_left > u_right:
        s = 0.5 * (u_left + u_right)
        out = np.where(xa < s * t, u_left, u_right)
    elif u_left < u_right:
        out = np.clip(xa / t, u_left, u_right)
    else:
        out = np.full_like(xa, float(u_left))
    return float(out) if np.isscalar(x) or xa.ndim == 0 else out


def trajectory_to_csv(traj: Trajectory, dest) -> None:
    """Write all snapshots as CSV rows ``t,x,u`` at round-trip precision."""
    from pathlib import Path
    xs = traj.grid.centers()
    lines = ["t,x,u"]
    for t, snap in zip(traj.times, traj.snapshots):
        for x, u in zip(xs, snap):
            lines.append(f"{float(t)!r},{float(x)!r},{float(u)!r}")
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")
