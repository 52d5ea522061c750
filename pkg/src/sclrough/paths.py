"""Rough driving signals: sampling, refinement, coarsening, oscillation.

A driving path is stored as a piecewise-linear interpolant through knots
``(t_k, W_k)`` with ``W(0) = 0``.  Brownian increments are drawn by
inverse-CDF sampling: 53-bit uniforms, offset half an ulp away from zero,
mapped through ``scipy.special.ndtri``.  The draw order is fixed, so a seed
identifies one path independently of platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtri

__all__ = [
    "RoughPath",
    "UnsupportedPathKindError",
    "sample_brownian",
    "refine_bridge",
    "coarsen",
    "oscillation",
    "eval_and_slope",
    "linear_path",
    "path_from_knots",
    "path_to_csv",
    "path_from_csv",
]

_KINDS = ("brownian", "user", "deterministic-test")


class UnsupportedPathKindError(ValueError):
    """Raised when an operation requires a path kind it cannot handle."""


@dataclass(frozen=True)
class RoughPath:
    """Piecewise-linear driving path through ``(times, values)`` knots."""

    times: np.ndarray
    values: np.ndarray
    kind: str = "user"
    seed: int | None = None

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        w = np.array(self.values, dtype=float)
        if t.ndim != 1 or w.ndim != 1 or t.size != w.size or t.size < 2:
            raise ValueError("path needs matching 1-d knot arrays with >= 2 knots")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(w))):
            raise ValueError("path knots must be finite")
        if t[0] != 0.0:
            raise ValueError(f"first knot time must be 0, got {t[0]}")
        if w[0] != 0.0:
            raise ValueError(f"path must start at W(0) = 0, got {w[0]}")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("knot times must be strictly increasing")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown path kind {self.kind!r}; expected one of {_KINDS}")
        t.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", w)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def n_knots(self) -> int:
        return int(self.times.size)

    def evaluate(self, t):
        """Piecewise-linear value W(t); t may be a scalar or an array in [0, T]."""
        ta = np.asarray(t, dtype=float)
        tol = 1e-12 * max(1.0, self.horizon)
        if np.any(ta < -tol) or np.any(ta > self.horizon + tol):
            raise ValueError(f"evaluation time outside [0, {self.horizon}]")
        out = np.interp(np.clip(ta, 0.0, self.horizon), self.times, self.values)
        return float(out) if np.isscalar(t) or ta.ndim == 0 else out

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.times)


def _normal_draws(rng: np.random.Generator, size: int) -> np.ndarray:
    # 53-bit uniforms in (0, 1), then the inverse normal CDF.
    u = (rng.integers(0, 1 << 53, size=size).astype(np.float64) + 0.5) / float(1 << 53)
    return ndtri(u)


def _check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
    return int(seed)


def sample_brownian(T: float, n: int, seed: int) -> RoughPath:
    """Sample a Brownian path on n uniform knots over [0, T].

    Increments over the uniform mesh are independent N(0, dt) draws from a
    PCG64 stream keyed by ``seed``.
    """
    if not np.isfinite(T) or T <= 0.0:
        raise ValueError(f"horizon T must be positive and finite, got {T}")
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"knot count n must be an integer >= 2, got {n}")
    seed = _check_seed(seed)
    times = np.linspace(0.0, float(T), int(n))
    z = _normal_draws(np.random.default_rng(seed), int(n) - 1)
    values = np.concatenate([[0.0], np.cumsum(np.sqrt(np.diff(times)) * z)])
    return RoughPath(times, values, kind="brownian", seed=seed)


def refine_bridge(path: RoughPath, levels: int, seed: int) -> RoughPath:
    """Insert Brownian-bridge midpoints, doubling the knot count per level.

    Each midpoint is conditionally Gaussian: mean is the average of the
    endpoints, variance is a quarter of the interval length.  The draw stream
    for a level is derived from ``(seed, interval count)``, so refining twice
    by one level reproduces a single two-level call with the same seed.
    Existing knots are never touched.
    """
    if path.kind != "brownian":
        raise UnsupportedPathKindError(
            f"bridge refinement needs a brownian path, got kind {path.kind!r}"
        )
    if not isinstance(levels, (int, np.integer)) or levels < 1:
        raise ValueError(f"levels must be an integer >= 1, got {levels}")
    seed = _check_seed(seed)
    t, w = path.times, path.values
    for _ in range(int(levels)):
        n_int = t.size - 1
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(n_int,))
        z = _normal_draws(np.random.Generator(np.random.PCG64(ss)), n_int)
        tm = 0.5 * (t[:-1] + t[1:])
        wm = 0.5 * (w[:-1] + w[1:]) + np.sqrt(np.diff(t) / 4.0) * z
        t2 = np.empty(2 * t.size - 1)
        w2 = np.empty_like(t2)
        t2[0::2], t2[1::2] = t, tm
        w2[0::2], w2[1::2] = w, wm
        t, w = t2, w2
    return RoughPath(t, w, kind="brownian", seed=path.seed)


def coarsen(path: RoughPath, h: float) -> RoughPath:
    """Piecewise-linear path through the original values at {0, h, 2h, ..., T}.

    The final horizon T is always kept as the last knot.  Mesh times that
    coincide with original knots (within 1e-12 relative) are snapped to them
    so the coarse path agrees with the original there exactly.
    """
    T = path.horizon
    if not np.isfinite(h) or h <= 0.0 or h > T + 1e-12 * max(1.0, T):
        raise ValueError(f"coarsening mesh h must satisfy 0 < h <= {T}, got {h}")
    m = int(np.floor(T / h + 1e-9))
    ts = h * np.arange(m + 1, dtype=float)
    ts[-1] = min(ts[-1], T)
    tol = 1e-12 * max(1.0, T)
    if ts[-1] < T - tol:
        ts = np.append(ts, T)
    # snap to original knots where they (nearly) coincide
    idx = np.searchsorted(path.times, ts)
    for k in range(ts.size):
        for j in (idx[k] - 1, idx[k]):
            if 0 <= j < path.times.size and abs(path.times[j] - ts[k]) <= tol:
                ts[k] = path.times[j]
                break
    ts[-1] = T
    values = path.evaluate(ts)
    if ts.size > 2:
        # If the single chord through the endpoints reproduces every sampled
        # value bitwise, the interior knots carry no information; drop them so
        # coarsenings of a linear path compare equal at every mesh and the
        # solver sees identical segment structure across levels.
        chord = RoughPath(np.array([ts[0], ts[-1]]),
                          np.array([values[0], values[-1]]),
                          kind=path.kind, seed=path.seed)
        if np.array_equal(chord.evaluate(ts), values):
            return chord
    return RoughPath(ts, values, kind=path.kind, seed=path.seed)


def oscillation(path: RoughPath, h: float) -> float:
    """Exact oscillation modulus sup |W(t') - W(t)| over 0 <= t' - t <= h.

    For a piecewise-linear path the supremum is attained with a window
    endpoint at a knot, so scanning windows anchored at knots (and windows
    ending at knots) is exact.
    """
    T = path.horizon
    if not np.isfinite(h) or h <= 0.0:
        raise ValueError(f"window length h must be positive, got {h}")
    if h > T + 1e-12 * max(1.0, T):
        raise ValueError(f"window length h={h} exceeds the horizon {T}")
    t, w = path.times, path.values
    cands = np.unique(np.concatenate([t, t - h]))
    cands = cands[(cands >= 0.0) & (cands <= T)]
    best = 0.0
    for tau in cands:
        hi = min(tau + h, T)
        end_vals = np.interp([tau, hi], t, w)
        i0 = np.searchsorted(t, tau, side="left")
        i1 = np.searchsorted(t, hi, side="right")
        if i1 > i0:
            mx = max(end_vals.max(), w[i0:i1].max())
            mn = min(end_vals.min(), w[i0:i1].min())
        else:
            mx, mn = end_vals.max(), end_vals.min()
        best = max(best, mx - mn)
    return float(best)


def eval_and_slope(path: RoughPath, t: float) -> tuple[float, float]:
    """Value and right-hand segment slope at t (left-hand slope at t = T)."""
    T = path.horizon
    tol = 1e-12 * max(1.0, T)
    tf = float(t)
    if tf < -tol or tf > T + tol:
        raise ValueError(f"time {t} outside [0, {T}]")
    tf = min(max(tf, 0.0), T)
    idx = int(np.searchsorted(path.times, tf, side="right")) - 1
    idx = min(max(idx, 0), path.times.size - 2)
    sl = (path.values[idx + 1] - path.values[idx]) / (path.times[idx + 1] - path.times[idx])
    return float(np.interp(tf, path.times, path.values)), float(sl)


def linear_path(T: float, slope: float = 1.0) -> RoughPath:
    """Deterministic path W(t) = slope * t on [0, T]."""
    if not np.isfinite(T) or T <= 0.0:
        raise ValueError(f"horizon T must be positive, got {T}")
    return RoughPath(np.array([0.0, float(T)]), np.array([0.0, float(slope) * float(T)]),
                     kind="deterministic-test")


def path_from_knots(times, values, kind: str = "user") -> RoughPath:
    """Path through explicit knots (a convenience wrapper with validation)."""
    return RoughPath(np.asarray(times, float), np.asarray(values, float), kind=kind)


def path_to_csv(path: RoughPath, dest) -> None:
    """Write knots as CSV with header ``t,w`` at full round-trip precision."""
    lines = ["t,w"]
    for tk, wk in zip(path.times, path.values):
        lines.append(f"{float(tk)!r},{float(wk)!r}")
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def path_from_csv(src, kind: str = "user", seed: int | None = None) -> RoughPath:
    """Read a path written by :func:`path_to_csv`."""
    if hasattr(src, "read"):
        text = src.read()
    else:
        text = Path(src).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "t,w":
        raise ValueError("path CSV must start with header 't,w'")
    times, values = [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 2:
            raise ValueError(f"malformed path CSV row: {ln!r}")
        times.append(float(parts[0]))
        values.append(float(parts[1]))
    return RoughPath(np.asarray(times), np.asarray(values), kind=kind, seed=seed)
