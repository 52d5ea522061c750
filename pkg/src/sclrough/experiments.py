"""Config-driven experiments shared by the command line front end.

A config file is flat INI-style text: common sections ``[experiment]``,
``[flux]``, ``[path]``, ``[grid]``, ``[solver]``, ``[initial]`` plus at most
one section named after the experiment for its specific knobs.  Every key is
validated against the schema before anything runs; unknown sections or keys
are rejected with a message naming them.

Each runner writes its CSV artifacts (and companion PNG figures) into the
output directory and returns a :class:`~sclrough.verify.Report`.  CSV and
summary outputs are byte-deterministic for a fixed config and seed.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .characteristics import flow_backward, flow_many
from .flux import make_flux, sine_coefficient
from .kinetic import defect_measure, q_bar
from .paths import RoughPath, linear_path, path_from_knots, sample_brownian
from .plots import save_heatmap, save_lines
from .solver import (Grid1D, exact_riemann_burgers, l1_norm, solve,
                     trajectory_to_csv)
from .verify import (Report, check_contraction, entropy_residual,
                     linfty_supersolution, mass_bound, stability_cauchy)

__all__ = [
    "ConfigError",
    "Config",
    "load_config",
    "run_experiment",
    "list_experiments",
    "EXPERIMENTS",
    "write_csv",
    "write_summary",
]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending section/key."""


_MISSING = object()

_COMMON_SCHEMA = {
    "experiment": {"name", "out"},
    "flux": {"preset", "coef_base", "coef_amp", "coef_freq"},
    "path": {"kind", "t", "n", "seed", "slope", "height"},
    "grid": {"n_cells", "x_lo", "x_hi", "boundary"},
    "solver": {"cfl", "snapshots"},
    "initial": {"kind", "value", "u_left", "u_right", "x_jump", "mean",
                "amp", "freq", "modes"},
}

_EXTRA_SCHEMA = {
    "solve": {"check_riemann", "l1_tol"},
    "contraction": {"n_pairs", "amp", "modes", "margin_tol"},
    "linfty": {"m_bound", "tol_factor"},
    "mass_bound": {"dxi", "margin", "c_tol", "coarse_x", "coarse_xi",
                   "write_defect"},
    "entropy": {"k_list", "cell_tol", "weak_tol"},
    "stability": {"levels", "h0", "ratio_cap"},
    "qlemma": {"x", "xi", "t", "t0", "eps_list", "tol"},
    "characteristics": {"n_flows", "s_span", "tol", "eta_max", "det_tol"},
}


@dataclass
class Config:
    """Validated key-value sections with typed, diagnosing getters."""

    name: str
    sections: dict

    def get(self, section, key, default=_MISSING):
        sec = self.sections.get(section, {})
        if key in sec:
            return sec[key]
        if default is _MISSING:
            raise ConfigError(f"missing required key '{key}' in [{section}]")
        return default

    def _cast(self, section, key, default, caster, typename):
        raw = self.get(section, key, default)
        if raw is default and not isinstance(raw, str):
            return raw
        try:
            return caster(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(
                f"bad {typename} for '{key}' in [{section}]: {raw!r}") from exc

    def get_float(self, section, key, default=_MISSING):
        return self._cast(section, key, default, float, "number")

    def get_int(self, section, key, default=_MISSING):
        return self._cast(section, key, default, int, "integer")

    def get_bool(self, section, key, default=_MISSING):
        def to_bool(s):
            t = str(s).strip().lower()
            if t in ("1", "true", "yes", "on"):
                return True
            if t in ("0", "false", "no", "off"):
                return False
            raise ValueError(s)
        return self._cast(section, key, default, to_bool, "boolean")

    def get_floats(self, section, key, default=_MISSING):
        def to_list(s):
            if not isinstance(s, str):
                return [float(v) for v in s]
            return [float(tok) for tok in s.split(",") if tok.strip()]
        return self._cast(section, key, default, to_list, "number list")


def load_config(src) -> Config:
    """Parse and validate a config file; raises :class:`ConfigError`."""
    cp = configparser.ConfigParser(interpolation=None,
                                   inline_comment_prefixes=("#", ";"))
    try:
        if hasattr(src, "read"):
            cp.read_string(src.read())
        else:
            p = Path(src)
            if not p.is_file():
                raise ConfigError(f"config file not found: {src}")
            cp.read_string(p.read_text(encoding="utf-8"), source=str(src))
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    sections = {s: dict(cp.items(s)) for s in cp.sections()}
    if "experiment" not in sections or "name" not in sections["experiment"]:
        raise ConfigError("missing required key 'name' in [experiment]")
    name = sections["experiment"]["name"].strip()
    if name not in EXPERIMENTS:
        known = ", ".join(sorted(EXPERIMENTS))
        raise ConfigError(f"unknown experiment '{name}'; known: {known}")
    allowed = dict(_COMMON_SCHEMA)
    allowed[name] = _EXTRA_SCHEMA[name]
    for sec, keys in sections.items():
        if sec not in allowed:
            raise ConfigError(f"unknown section [{sec}] for experiment '{name}'")
        for key in keys:
            if key not in allowed[sec]:
                raise ConfigError(f"unknown key '{key}' in [{sec}]")
    if "flux" not in sections or "preset" not in sections["flux"]:
        raise ConfigError("missing required key 'preset' in [flux]")
    if "path" not in sections or "kind" not in sections["path"]:
        raise ConfigError("missing required key 'kind' in [path]")
    return Config(name=name, sections=sections)


# =====================================================================
# builders
# =====================================================================

_PRESETS = ("burgers", "inhom_burgers", "two_phase", "linear_advection")
_COEF_KEY = {"inhom_burgers": "c", "two_phase": "V", "linear_advection": "v"}


def build_model(cfg: Config):
    preset = cfg.get("flux", "preset").strip()
    if preset not in _PRESETS:
        raise ConfigError(f"unknown flux preset '{preset}'; known: {', '.join(_PRESETS)}")
    has_coef = any(cfg.get("flux", k, None) is not None
                   for k in ("coef_base", "coef_amp", "coef_freq"))
    if not has_coef:
        return make_flux(preset)
    if preset == "burgers":
        raise ConfigError("burgers takes no coefficient keys in [flux]")
    coef = sine_coefficient(base=cfg.get_float("flux", "coef_base", 1.0),
                            amp=cfg.get_float("flux", "coef_amp", 0.5),
                            freq=cfg.get_float("flux", "coef_freq", 1.0))
    return make_flux(preset, **{_COEF_KEY[preset]: coef})


def build_path(cfg: Config, seed: int) -> RoughPath:
    kind = cfg.get("path", "kind").strip()
    T = cfg.get_float("path", "t", 1.0)
    if kind == "brownian":
        return sample_brownian(T, cfg.get_int("path", "n", 256), seed)
    if kind == "linear":
        return linear_path(T, cfg.get_float("path", "slope", 1.0))
    if kind == "tent":
        h = cfg.get_float("path", "height", 1.0)
        return path_from_knots([0.0, 0.5 * T, T], [0.0, h, 0.0],
                               kind="deterministic-test")
    raise ConfigError(f"unknown path kind '{kind}'; known: brownian, linear, tent")


def build_grid(cfg: Config, model) -> Grid1D:
    boundary = cfg.get("grid", "boundary", "periodic").strip()
    if boundary not in ("periodic", "outflow"):
        raise ConfigError(f"unknown boundary '{boundary}'")
    return Grid1D(x_lo=cfg.get_float("grid", "x_lo", model.box.x_lo),
                  x_hi=cfg.get_float("grid", "x_hi", model.box.x_hi),
                  n_cells=cfg.get_int("grid", "n_cells", 400),
                  boundary=boundary)


def fourier_profile(xc, length, rng, amp=0.5, modes=3):
    """Random smooth periodic profile with sup norm exactly ``amp``."""
    u = np.zeros_like(xc)
    for m in range(1, modes + 1):
        k = 2.0 * np.pi * m / length
        u += rng.normal() * np.cos(k * xc) + rng.normal() * np.sin(k * xc)
    peak = float(np.max(np.abs(u)))
    return amp * u / max(peak, 1e-12)


def build_initial(cfg: Config, grid: Grid1D, seed: int):
    kind = cfg.get("initial", "kind", "sine").strip()
    xc = grid.centers()
    if kind == "constant":
        return np.full(xc.shape, cfg.get_float("initial", "value", 0.5))
    if kind == "riemann":
        ul = cfg.get_float("initial", "u_left", 1.0)
        ur = cfg.get_float("initial", "u_right", -1.0)
        xj = cfg.get_float("initial", "x_jump", 0.0)
        return np.where(xc < xj, ul, ur).astype(float)
    if kind == "sine":
        mean = cfg.get_float("initial", "mean", 0.0)
        amp = cfg.get_float("initial", "amp", 0.5)
        freq = cfg.get_float("initial", "freq", 1.0)
        return mean + amp * np.sin(freq * xc)
    if kind == "random":
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                           spawn_key=(97, 0)))
        return fourier_profile(xc, grid.x_hi - grid.x_lo, rng,
                               amp=cfg.get_float("initial", "amp", 0.5),
                               modes=cfg.get_int("initial", "modes", 3))
    raise ConfigError(f"unknown initial kind '{kind}'")


def _snapshots(cfg: Config, T: float):
    raw = cfg.get("solver", "snapshots", None)
    if raw is None:
        return tuple(T * f for f in (0.25, 0.5, 0.75, 1.0))
    vals = cfg.get_floats("solver", "snapshots")
    if not vals:
        raise ConfigError("empty 'snapshots' list in [solver]")
    return tuple(vals)


# =====================================================================
# artifact writers
# =====================================================================

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(dest, header, rows) -> str:
    body = "\n".join(",".join(_fmt(v) for v in row) for row in rows)
    text = ",".join(header) + "\n" + (body + "\n" if body else "")
    Path(dest).write_text(text, encoding="utf-8", newline="\n")
    return str(dest)


def write_summary(dest, report: Report) -> str:
    lines = report.kv_lines()
    for p in report.artifacts:
        lines.append(f"artifact={p}")
    Path(dest).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return str(dest)


def _emit_table(report: Report, out: Path, filename: str):
    if report.table is not None:
        header, rows = report.table
        report.artifacts.append(write_csv(out / filename, header, rows))


# =====================================================================
# runners
# =====================================================================

def _run_solve(cfg: Config, out: Path, seed: int) -> Report:
    model = build_model(cfg)
    path = build_path(cfg, seed)
    grid = build_grid(cfg, model)
    u0 = build_initial(cfg, grid, seed)
    snaps = _snapshots(cfg, path.horizon)
    cfl = cfg.get_float("solver", "cfl", 0.4)
    traj = solve(model, path, u0, grid, cfl=cfl, snapshot_times=snaps)
    csv_path = out / "trajectory.csv"
    trajectory_to_csv(traj, csv_path)
    xc = grid.centers()
    n_steps = sum(len(s) for s in traj.substeps)
    mass_defect = abs(float(np.sum(traj.final) - np.sum(traj.snapshots[0]))) * grid.dx
    measured = {"n_substeps": n_steps, "mass_defect": mass_defect,
                "sup_final": float(np.max(np.abs(traj.final)))}
    thresholds = {}
    flags = {}
    if grid.boundary == "periodic":
        scale = max(1.0, float(np.max(np.abs(u0))))
        thresholds["mass_tol"] = 1e-10 * scale
        flags["conservation"] = mass_defect <= thresholds["mass_tol"]
    series = [("initial", xc, u0), ("final", xc, traj.final)]
    if cfg.get_bool("solve", "check_riemann", False):
        if (model.preset != "burgers" or path.kind != "deterministic-test"
                or cfg.get("initial", "kind", "sine") != "riemann"):
            raise ConfigError(
                "check_riemann needs flux preset burgers, path kind linear, "
                "and riemann initial data")
        ul = cfg.get_float("initial", "u_left", 1.0)
        ur = cfg.get_float("initial", "u_right", -1.0)
        xj = cfg.get_float("initial", "x_jump", 0.0)
        s_end = path.evaluate(path.horizon)
        exact = exact_riemann_burgers(ul, ur, xc - xj, s_end)
        err = l1_norm(grid, traj.final - exact)
        measured["riemann_l1_error"] = err
        thresholds["l1_tol"] = cfg.get_float("solve", "l1_tol", 0.02)
        flags["riemann"] = err <= thresholds["l1_tol"]
        series.append(("exact", xc, exact))
    report = Report(name="solve",
                    inputs={"preset": model.preset, "n_cells": grid.n_cells,
                            "cfl": cfl, "path_kind": path.kind,
                            "path_seed": path.seed, "boundary": grid.boundary},
                    measured=measured, thresholds=thresholds,
                    flags=flags or {"completed": True})
    report.artifacts.append(str(csv_path))
    report.artifacts.append(save_lines(out / "profiles.png", series,
                                       xlabel="x", ylabel="u",
                                       title="solution profiles"))
    return report


def _pair_profiles(cfg: Config, grid: Grid1D, seed: int, n_pairs: int):
    amp = cfg.get_float("contraction", "amp", 0.5)
    modes = cfg.get_int("contraction", "modes", 3)
    xc = grid.centers()
    length = grid.x_hi - grid.x_lo
    pairs = []
    for i in range(n_pairs):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                           spawn_key=(97, i + 1)))
        pairs.append((fourier_profile(xc, length, rng, amp, modes),
                      fourier_profile(xc, length, rng, amp, modes)))
    return pairs


def _run_contraction(cfg: Config, out: Path, seed: int) -> Report:
    model = build_model(cfg)
    path = build_path(cfg, seed)
    grid = build_grid(cfg, model)
    snaps = _snapshots(cfg, path.horizon)
    n_pairs = cfg.get_int("contraction", "n_pairs", 20)
    pairs = _pair_profiles(cfg, grid, seed, n_pairs)
    report = check_contraction(model, path, pairs, grid, snaps,
                               cfl=cfg.get_float("solver", "cfl", 0.4),
                               margin_tol=cfg.get_float("contraction",
                                                        "margin_tol", 1e-10))
    _emit_table(report, out, "distances.csv")
    header, rows = report.table
    series = []
    for idx in sorted({r[0] for r in rows}):
        pts = [(r[1], r[2]) for r in rows if r[0] == idx]
        pts.sort()
        series.append((None, [p[0] for p in pts], [p[1] for p in pts]))
    report.artifacts.append(save_lines(out / "distances.png", series,
                                       xlabel="t", ylabel="L1 distance",
                                       title="pairwise distances"))
    return report


def _run_linfty(cfg: Config, out: Path, seed: int) -> Report:
    model = build_model(cfg)
    path = build_path(cfg, seed)
    grid = build_grid(cfg, model)
    u0 = build_initial(cfg, grid, seed)
    snaps = _snapshots(cfg, path.horizon)
    cfl = cfg.get_float("solver", "cfl", 0.4)
    traj = solve(model, path, u0, grid, cfl=cfl, snapshot_times=snaps)
    report = linfty_supersolution(
        model, path, u0, grid, snaps,
        M=cfg.get_float("linfty", "m_bound", None),
        cfl=cfl, tol_factor=cfg.get_float("linfty", "tol_factor", 10.0),
        traj=traj)
    _emit_table(report, out, "bounds.csv")
    ts = [float(t) for t in traj.times]
    sups = [float(np.max(np.abs(u))) for u in traj.snapshots]
    header, rows = report.table
    report.artifacts.append(save_lines(
        out / "bounds.png",
        [("sup |u|", ts, sups),
         ("envelope", [r[0] for r in rows], [r[1] for r in rows])],
        xlabel="t", ylabel="bound", title="sup norm vs supersolution"))
    return report


def _run_mass_bound(cfg: Config, out: Path, seed: int) -> Report:
    model = build_model(cfg)
    path = build_path(cfg, seed)
    grid = build_grid(cfg, model)
    u0 = build_initial(cfg, grid, seed)
    T = path.horizon
    raw = cfg.get("solver", "snapshots", None)
    snaps = (cfg.get_floats("solver", "snapshots") if raw is not None
             else list(np.linspace(T / 10.0, T, 10)))
    cfl = cfg.get_float("solver", "cfl", 0.4)
    traj = solve(model, path, u0, grid, cfl=cfl, snapshot_times=tuple(snaps))
    defect = defect_measure(traj, model,
                            dxi=cfg.get_float("mass_bound", "dxi", 0.05),
                            margin=cfg.get_float("mass_bound", "margin", 0.5))
    report = mass_bound(traj, defect, model, path,
                        c_tol=cfg.get_float("mass_bound", "c_tol", 4.0),
                        coarse_x=cfg.get_int("mass_bound", "coarse_x", 4),
                        coarse_xi=cfg.get_int("mass_bound", "coarse_xi", 2))
    _emit_table(report, out, "windows.csv")
    if cfg.get_bool("mass_bound", "write_defect", False):
        dest = out / "defect.csv"
        defect.to_csv(dest)
        report.artifacts.append(str(dest))
    last = len(defect.slabs) - 1
    report.artifacts.append(save_heatmap(
        out / "defect_last_slab.png", defect.xgrid, defect.xigrid,
        defect.slabs[last], xlabel="x", ylabel="xi",
        title="defect measure, last slab", clabel="m"))
    header, rows = report.table
    report.artifacts.append(save_lines(
        out / "windows.png",
        [("window mass", [r[0] for r in rows], [r[2] for r in rows]),
         ("margin", [r[0] for r in rows], [r[6] for r in rows])],
        xlabel="window start", ylabel="value", title="energy inequality",
        markers=True))
    return report


def _run_entropy(cfg: Config, out: Path, seed: int) -> Report:
    model = build_model(cfg)
    path = build_path(cfg, seed)
    grid = build_grid(cfg, model)
    u0 = build_initial(cfg, grid, seed)
    snaps = _snapshots(cfg, path.horizon)
    cfl = cfg.get_float("solver", "cfl", 0.4)
    traj = solve(model, path, u0, grid, cfl=cfl, snapshot_times=snaps)
    klist = cfg.get_floats("entropy", "k_list", [0.0])
    cell_tol = cfg.get_float("entropy", "cell_tol", 1e-11)
    weak_tol = cfg.get_float("entropy", "weak_tol", 1e-10)
    rows = []
    measured = {}
    flags = {}
    for i, k in enumerate(klist):
        sub = entropy_residual(traj, model, path, k,
                               cell_tol=cell_tol, weak_tol=weak_tol)
        rows.append([k, sub.measured["max_cell_residual"],
                     sub.measured["worst_weighted_total"]])
        measured[f"max_cell_k{i}"] = sub.measured["max_cell_residual"]
        measured[f"weak_k{i}"] = sub.measured["worst_weighted_total"]
        flags[f"cellwise_k{i}"] = sub.flags["cellwise"]
        flags[f"weak_k{i}"] = sub.flags["weak_form"]
    report = Report(name="entropy",
                    inputs={"preset": model.preset, "n_cells": grid.n_cells,
                            "k_list": ",".join(repr(k) for k in klist),
                            "path_kind": path.kind, "path_seed": path.seed},
                    measured=measured,
                    thresholds={"cell_tol": cell_tol, "weak_tol": weak_tol},
                    flags=flags,
                    table=(["k", "max_cell_residual", "worst_weighted_total"],
                           rows))
    _emit_table(report, out, "residuals.csv")
    report.artifacts.append(save_lines(
        out / "residuals.png",
        [("max cell residual", klist, [r[1] for r in rows]),
         ("weak total", klist, [r[2] for r in rows])],
        xlabel="k", ylabel="residual", title="entropy residuals",
        markers=True))
    return report


def _run_stability(cfg: Config, out: Path, seed: int) -> Report:
    model = build_model(cfg)
    path = build_path(cfg, seed)
    grid = build_grid(cfg, model)
    u0 = build_initial(cfg, grid, seed)
    T = path.horizon
    levels = cfg.get_int("stability", "levels", 5)
    h0 = cfg.get_float("stability", "h0", T / 8.0)
    h_min = h0 / (2 ** (levels - 1))
    knot_gap = float(np.max(np.diff(path.times)))
    if knot_gap > h_min + 1e-12:
        raise ConfigError(
            f"path too coarse for the ladder: knot gap {knot_gap:.4g} exceeds "
            f"finest level h={h_min:.4g}; increase [path] n")
    report = stability_cauchy(model, path, levels, u0, grid, T, h0=h0,
                              cfl=cfg.get_float("solver", "cfl", 0.4),
                              ratio_cap=cfg.get_float("stability", "ratio_cap",
                                                      10.0))
    _emit_table(report, out, "ladder.csv")
    header, rows = report.table
    report.artifacts.append(save_lines(
        out / "ladder.png",
        [("d_k", [r[0] for r in rows], [r[1] for r in rows]),
         ("omega(h_k)", [r[0] for r in rows], [r[2] for r in rows])],
        xlabel="h", ylabel="difference", title="path refinement ladder",
        logx=True, logy=True, markers=True))
    return report


def _run_qlemma(cfg: Config, out: Path, seed: int) -> Report:
    model = build_model(cfg)
    path = build_path(cfg, seed)
    x = cfg.get_float("qlemma", "x", 0.5)
    xi = cfg.get_float("qlemma", "xi", 0.03)
    t = cfg.get_float("qlemma", "t", min(0.3, path.horizon))
    t0 = cfg.get_float("qlemma", "t0", 0.0)
    eps_list = cfg.get_floats("qlemma", "eps_list", [0.2, 0.1, 0.05])
    tol = cfg.get_float("qlemma", "tol", 1e-10)
    s = path.evaluate(t) - path.evaluate(t0)
    if s == 0.0:
        xi0 = xi
    else:
        xi0 = float(flow_backward(model, s, [x], xi).zeta)
    target = 0.5 * np.sign(xi0)
    rows = []
    for eps in eps_list:
        q, dq = q_bar(model, path, eps, x, xi, t, t0)
        rows.append([eps, q, dq, abs(q - target)])
    gaps = [r[3] for r in rows]
    strict = all(gaps[i + 1] < gaps[i] for i in range(len(gaps) - 1))
    dq_min = min(r[2] for r in rows)
    q_origin, _ = q_bar(model, path, min(eps_list), x, 0.0, t0, t0)
    report = Report(
        name="qlemma",
        inputs={"preset": model.preset, "x": x, "xi": xi, "t": t, "t0": t0,
                "path_kind": path.kind, "path_seed": path.seed,
                "eps_list": ",".join(repr(e) for e in eps_list)},
        measured={"xi_backward": xi0, "gap_largest_eps": gaps[0],
                  "gap_smallest_eps": gaps[-1], "dq_min": dq_min,
                  "q_at_origin": q_origin},
        thresholds={"origin_tol": tol},
        flags={"gap_decreasing": strict, "dq_nonnegative": dq_min >= 0.0,
               "origin_zero": abs(q_origin) <= tol},
        table=(["eps", "q", "dq_dxi", "gap"], rows),
    )
    _emit_table(report, out, "qbar.csv")
    report.artifacts.append(save_lines(
        out / "qbar.png", [("gap", eps_list, gaps)], xlabel="eps",
        ylabel="|q - limit|", title="one-sided kernel convergence",
        logx=True, logy=True, markers=True))
    return report


def _run_characteristics(cfg: Config, out: Path, seed: int) -> Report:
    model = build_model(cfg)
    path = build_path(cfg, seed)   # unused by the flows; keeps configs uniform
    n_flows = cfg.get_int("characteristics", "n_flows", 1000)
    s_span = cfg.get_float("characteristics", "s_span", 1.0)
    tol = cfg.get_float("characteristics", "tol", 1e-9)
    det_tol = cfg.get_float("characteristics", "det_tol", 1e-7)
    eta_max = cfg.get_float("characteristics", "eta_max", 2.0)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(17,)))
    ys = rng.uniform(model.box.x_lo, model.box.x_hi, n_flows)
    etas = rng.uniform(-eta_max, eta_max, n_flows)
    half = n_flows // 2
    rows = []
    max_gap = 0.0
    signs_ok = True
    for sl, s_dir in ((slice(0, half), s_span), (slice(half, None), -s_span)):
        y_b, eta_b = ys[sl], etas[sl]
        mp = flow_many(model, y_b, eta_b, (0.0, s_dir), tol=tol, vary="position")
        mv = flow_many(model, y_b, eta_b, (0.0, s_dir), tol=tol, vary="velocity")
        gaps = np.zeros(y_b.size)
        for frac in (1.0 / 3.0, 2.0 / 3.0, 1.0):
            s_at = frac * s_dir
            _, _, dYy, dZy = mp.at(s_at)
            _, _, dYe, dZe = mv.at(s_at)
            det = dYy * dZe - dZy * dYe
            gaps = np.maximum(gaps, np.abs(det - 1.0))
        _, zeta_end, _, _ = mp.at(s_dir)
        ok = np.sign(zeta_end) == np.sign(eta_b)
        ok |= (eta_b == 0.0) & (zeta_end == 0.0)
        signs_ok = signs_ok and bool(np.all(ok))
        for j in range(y_b.size):
            rows.append([float(y_b[j]), float(eta_b[j]), float(s_dir),
                         float(gaps[j])])
        max_gap = max(max_gap, float(gaps.max()))
    report = Report(
        name="characteristics",
        inputs={"preset": model.preset, "n_flows": n_flows, "s_span": s_span,
                "tol": tol, "seed": seed},
        measured={"max_det_gap": max_gap},
        thresholds={"det_tol": det_tol},
        flags={"volume": max_gap <= det_tol, "signs": signs_ok},
        table=(["y", "eta", "s", "det_gap"], rows),
    )
    _emit_table(report, out, "flows.csv")
    report.artifacts.append(save_lines(
        out / "flows.png",
        [(None, [abs(r[1]) + 1e-12 for r in rows], [r[3] + 1e-18 for r in rows])],
        xlabel="|eta|", ylabel="|det J - 1|", title="volume preservation",
        logy=True, markers=True))
    return report


EXPERIMENTS = {
    "characteristics": ("sign and volume invariants of random characteristic "
                        "flows", "[flux] preset; [path] kind",
                        _run_characteristics),
    "contraction": ("L1 contraction across random data pairs",
                    "[flux] preset; [path] kind", _run_contraction),
    "entropy": ("Kruzkov entropy residual of recorded updates",
                "[flux] preset; [path] kind; [entropy] k_list", _run_entropy),
    "linfty": ("sup-norm supersolution domination",
               "[flux] preset; [path] kind; [initial]", _run_linfty),
    "mass_bound": ("windowed kinetic energy inequality",
                   "[flux] preset; [path] kind; [initial]", _run_mass_bound),
    "qlemma": ("one-sided kernel limit and monotonicity",
               "[flux] preset; [path] kind; [qlemma] x, xi, t", _run_qlemma),
    "solve": ("single finite-volume run with trajectory export",
              "[flux] preset; [path] kind; [initial]", _run_solve),
    "stability": ("Cauchy ladder over path coarsenings",
                  "[flux] preset; [path] kind brownian; [stability] levels",
                  _run_stability),
}


def run_experiment(cfg: Config, out_dir, seed_override=None) -> Report:
    """Dispatch a validated config; returns the report with artifacts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = (int(seed_override) if seed_override is not None
            else cfg.get_int("path", "seed", 0))
    runner = EXPERIMENTS[cfg.name][2]
    report = runner(cfg, out, seed)
    report.artifacts.append(write_summary(out / "summary.txt", report))
    return report


def list_experiments() -> str:
    lines = []
    for tag in sorted(EXPERIMENTS):
        desc, keys, _ = EXPERIMENTS[tag]
        lines.append(f"{tag:17s} {desc}")
        lines.append(f"{'':17s} config: {keys}")
    return "\n".join(lines) + "\n"
