"""Batch front end: parse experiment configs, dispatch subcommands, write
deterministic CSV tables.

Subcommands: simulate, picard, kernel-probe, krylov-check, admissible.
Exit codes: 0 success, 2 config error, 3 numerical error, 4 probe failure.
Every output file starts with comment lines echoing the resolved config and
the library version; numbers carry 17 significant digits so reruns with the
same (config, seed, version) are byte-identical, independent of the worker
count.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__
from .errors import GateError, LevysdeError, ModelError, NumericalError
from .kernel import (
    GridGeometry,
    bump_width_panel,
    gradient_bound_probe,
    rough_spectrum_function,
    smoothing_probe,
    strong_continuity_probe,
)
from .krylov import krylov_ratio, standard_bump_panel
from .levy_model import (
    LevyModel,
    admissible_pq,
    brownian,
    cylindrical_stable,
    general_stable,
    isotropic_stable,
    krylov_pq_check,
    superpose,
    tempered_stable,
    truncated_stable,
    SphericalMeasure,
)
from .measure import EmpiricalMeasure
from .sampler import IncrementStream, moment_scaling_probe, sample_increments
from .solver import (
    SolverConfig,
    mollify_drift,
    ou_drift,
    picard_iterate,
    sign_drift,
    singular_power_drift,
    solve_frozen,
    toward_mean_drift,
    zero_drift,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PROBE = 4

SUBCOMMANDS = ("simulate", "picard", "kernel-probe", "krylov-check", "admissible")


class ConfigError(ValueError):
    """Config parse or validation failure, named by block and field."""


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "seed": 0,
    "model": {"kind": "brownian", "dim": 1, "alpha": 1.5, "c": 1.0},
    "drift": {"kind": "zero", "rate": 1.0, "power": -0.5, "radius": 1.0, "mollify": 0},
    "solver": {
        "dt": 1.0 / 512.0,
        "horizon": 1.0,
        "particles": 1000,
        "theta": 1.0,
        "cutoff": 1e-3,
    },
    "picard": {"tol": 1e-2, "max_iter": 10},
    "probe": {
        "checks": ["gradient"],
        "p": 2.0,
        "order": 1,
        "gamma": 1.0,
        "beta": 0.0,
        "theta": 1.0,
        "t_min": 1e-2,
        "t_max": 1.0,
        "t_count": 9,
        "extent": 40.0,
        "resolution": 8192,
        "samples": 20000,
        "band_lo": 0.0,
        "band_hi": 0.0,
    },
    "krylov": {
        "p": 4.0,
        "q": 10.0,
        "paths": 2000,
        "panel": 20,
        "extent": 40.0,
        "resolution": 4096,
        "radius": 0.0,
    },
    "admissible": {"alphas": [1.5, 2.0], "dims": [1], "ps": [2.0, 4.0], "qs": [4.0, 10.0]},
    "output": {"directory": "out", "format": "csv"},
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, val in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key [{where}]")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"[{where}] must be a block")
            out[key] = _merge(base[key], val, where)
        else:
            out[key] = val
    return out


def _parse_scalar(text: str):
    try:
        doc = tomllib.loads(f"v = {text}")
        return doc["v"]
    except tomllib.TOMLDecodeError:
        return text


def _apply_override(cfg: dict, spec: str) -> None:
    if "=" not in spec:
        raise ConfigError(f"--set expects key=value, got {spec!r}")
    key, _, value = spec.partition("=")
    parts = key.strip().split(".")
    node = cfg
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"unknown config block {'.'.join(parts[:-1])!r} in --set")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config key {key.strip()!r} in --set")
    node[parts[-1]] = _parse_scalar(value.strip())


def load_config(path: str | None, overrides=(), seed: int | None = None) -> dict:
    import copy

    base = copy.deepcopy(_DEFAULTS)  # overrides must never leak into the defaults
    if path is not None:
        try:
            with open(path, "rb") as fh:
                user = tomllib.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error in {path}: {exc}") from exc
        cfg = _merge(base, user)
    else:
        cfg = base
    for spec in overrides:
        _apply_override(cfg, spec)
    if seed is not None:
        cfg["seed"] = int(seed)
    _validate(cfg)
    return cfg


def _require(cond: bool, where: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"[{where}]: {message}")


def _validate(cfg: dict) -> None:
    m = cfg["model"]
    _require(m["kind"] in (
        "brownian", "isotropic_stable", "cylindrical_stable", "general_stable",
        "tempered_stable", "truncated_stable", "brownian_plus_stable"), "model.kind", f"unknown kind {m['kind']!r}")
    _require(int(m["dim"]) >= 1, "model.dim", "must be >= 1")
    if m["kind"] != "brownian":
        _require(1.0 < float(m["alpha"]) < 2.0, "model.alpha", "must lie in (1, 2)")
    if m["kind"] in ("tempered_stable", "truncated_stable"):
        _require(float(m["c"]) > 0, "model.c", "must be > 0")
    d = cfg["drift"]
    _require(d["kind"] in ("zero", "toward_mean", "ou", "sign", "singular_power"),
             "drift.kind", f"unknown kind {d['kind']!r}")
    _require(int(d["mollify"]) >= 0, "drift.mollify", "must be >= 0")
    s = cfg["solver"]
    _require(float(s["dt"]) > 0, "solver.dt", "must be > 0")
    _require(float(s["horizon"]) > 0, "solver.horizon", "must be > 0")
    _require(int(s["particles"]) >= 2, "solver.particles", "must be >= 2")
    _require(float(s["theta"]) >= 1, "solver.theta", "must be >= 1")
    _require(0 < float(s["cutoff"]) <= 1, "solver.cutoff", "must lie in (0, 1]")
    p = cfg["probe"]
    for check in p["checks"]:
        _require(check in ("gradient", "moment", "smoothing", "continuity"),
                 "probe.checks", f"unknown check {check!r}")
    _require(0 < float(p["t_min"]) < float(p["t_max"]), "probe.t_min", "need 0 < t_min < t_max")
    _require(int(p["t_count"]) >= 4, "probe.t_count", "need at least 4 points")
    k = cfg["krylov"]
    _require(float(k["p"]) > 1 and float(k["q"]) > 1, "krylov.p", "p, q must be > 1")
    _require(int(k["paths"]) >= 2, "krylov.paths", "must be >= 2")


def build_model(cfg: dict) -> LevyModel:
    m = cfg["model"]
    kind, dim, alpha = m["kind"], int(m["dim"]), float(m["alpha"])
    if kind == "brownian":
        return brownian(dim)
    if kind == "isotropic_stable":
        return isotropic_stable(alpha, dim)
    if kind == "cylindrical_stable":
        return cylindrical_stable(alpha, dim)
    if kind == "general_stable":
        atoms = m.get("atoms")
        weights = m.get("atom_weights")
        _require(atoms is not None and weights is not None, "model.atoms", "general_stable needs atoms and atom_weights")
        return general_stable(alpha, SphericalMeasure.from_atoms(atoms, weights))
    if kind == "tempered_stable":
        return tempered_stable(alpha, float(m["c"]), dim)
    if kind == "truncated_stable":
        return truncated_stable(alpha, float(m["c"]), dim)
    if kind == "brownian_plus_stable":
        return superpose(brownian(dim), isotropic_stable(alpha, dim), label="brownian_plus_stable")
    raise ConfigError(f"[model.kind]: unknown kind {kind!r}")


def build_drift(cfg: dict):
    d = cfg["drift"]
    kind = d["kind"]
    if kind == "zero":
        base = zero_drift()
    elif kind == "toward_mean":
        base = toward_mean_drift(float(d["rate"]))
    elif kind == "ou":
        base = ou_drift(float(d["rate"]))
    elif kind == "sign":
        base = sign_drift()
    else:
        base = singular_power_drift(float(d["power"]), float(d["radius"]))
    n = int(d["mollify"])
    if n > 0:
        base = mollify_drift(base, n)
    return base


def build_solver_config(cfg: dict) -> SolverConfig:
    s = cfg["solver"]
    return SolverConfig(
        dt=float(s["dt"]),
        horizon=float(s["horizon"]),
        particles=int(s["particles"]),
        theta=float(s["theta"]),
        seed=int(cfg["seed"]),
        small_jump_cutoff=float(s["cutoff"]),
    )


# ---------------------------------------------------------------------------
# deterministic output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def _flatten(cfg: dict, prefix: str = ""):
    for key in sorted(cfg):
        val = cfg[key]
        name = f"{prefix}.{key}" if prefix else key
        if isinstance(val, dict):
            yield from _flatten(val, name)
        else:
            yield name, val


class OutputWriter:
    def __init__(self, directory: str, cfg: dict, workers: int):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.header_lines = [f"# levysde {__version__}"]
        for name, val in _flatten(cfg):
            self.header_lines.append(f"# {name} = {_fmt(val)}")
        self.header_lines.append(f"# workers = {workers} (results are worker-count independent)")
        self.files: list[str] = []

    def write_table(self, name: str, columns: list[str], rows) -> Path:
        path = self.dir / name
        with open(path, "w", newline="\n") as fh:
            for line in self.header_lines:
                fh.write(line + "\n")
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        self.files.append(str(path))
        return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_simulate(cfg: dict, out: OutputWriter) -> int:
    from scipy import stats

    model = build_model(cfg)
    drift = build_drift(cfg)
    scfg = build_solver_config(cfg)
    init = EmpiricalMeasure(np.zeros((scfg.particles, model.dim)))
    law = init if drift.measure_dependence is not None else None
    path = solve_frozen(model, drift, law, init, scfg)
    rows = []
    for k, t in enumerate(path.times):
        for i in range(path.particles):
            rows.append([t, i] + [path.states[k, i, a] for a in range(model.dim)])
    out.write_table("ensembles.csv", ["t", "particle"] + [f"x{a+1}" for a in range(model.dim)], rows)
    summary = []
    drift_free = cfg["drift"]["kind"] == "zero"
    for k, t in enumerate(path.times):
        row = [t]
        for a in range(model.dim):
            row += [float(path.states[k, :, a].mean()), float(path.states[k, :, a].std())]
        if drift_free and k > 0:
            ref_stream = IncrementStream(model, seed=scfg.seed, stream_id=90_000 + k,
                                         small_jump_cutoff=scfg.small_jump_cutoff)
            ref = sample_increments(ref_stream, float(t), path.particles)
            ks_pass = True
            stat = 0.0
            for a in range(model.dim):
                res = stats.ks_2samp(path.states[k, :, a], ref[:, a])
                stat = max(stat, float(res.statistic))
                ks_pass &= res.pvalue >= 0.01
            row += [stat, ks_pass]
        elif drift_free:
            row += [0.0, True]
        summary.append(row)
    cols = ["t"]
    for a in range(model.dim):
        cols += [f"mean_x{a+1}", f"std_x{a+1}"]
    if drift_free:
        cols += ["ks_stat", "ks_pass"]
    out.write_table("simulate_summary.csv", cols, summary)
    return EXIT_OK


def _cmd_picard(cfg: dict, out: OutputWriter) -> int:
    model = build_model(cfg)
    drift = build_drift(cfg)
    scfg = build_solver_config(cfg)
    rng = np.random.default_rng(cfg["seed"])
    init = EmpiricalMeasure(rng.standard_normal((scfg.particles, model.dim)))
    state = picard_iterate(model, drift, init, scfg, tol=float(cfg["picard"]["tol"]),
                           max_iter=int(cfg["picard"]["max_iter"]))
    gaps = state.gap_history
    rows = [[n + 1, gaps[n], gaps[n] / gaps[n - 1] if n > 0 and gaps[n - 1] > 0 else math.nan]
            for n in range(len(gaps))]
    out.write_table("picard_gaps.csv", ["iteration", "sup_gap", "ratio"], rows)
    out.write_table(
        "picard_summary.csv",
        ["iterations", "contraction_estimate", "fitted_k1", "window_t0", "converged", "diverged", "final_gap"],
        [[state.iteration, state.contraction_estimate, state.fitted_k1, state.window_t0,
          state.converged, state.diverged, gaps[-1]]],
    )
    return EXIT_OK if not state.diverged else EXIT_PROBE


def _cmd_kernel_probe(cfg: dict, out: OutputWriter) -> int:
    model = build_model(cfg)
    p = cfg["probe"]
    ts = np.geomspace(float(p["t_min"]), float(p["t_max"]), int(p["t_count"]))
    geom = GridGeometry((float(p["extent"]),) * model.dim, (int(p["resolution"]),) * model.dim)
    rows = []
    ok = True
    for check in p["checks"]:
        if check == "moment":
            rep = moment_scaling_probe(model, ts, int(p["samples"]), seed=int(cfg["seed"]),
                                       small_jump_cutoff=float(cfg["solver"]["cutoff"]))
            rows.append(["moment", f"alpha={model.alpha:g}", rep.slope, rep.target, rep.passed])
            ok &= rep.passed
        elif check == "gradient":
            panel = bump_width_panel(geom, model.alpha, ts)
            rep = gradient_bound_probe(model, float(p["p"]), ts, panel, order=int(p["order"]))
            rows.append([f"gradient{int(p['order'])}", f"p={p['p']:g}", rep.slope, rep.target, rep.passed])
            ok &= rep.passed
        else:
            band = _probe_band(model, geom, ts, p)
            if check == "smoothing":
                f = rough_spectrum_function(geom, float(p["beta"]), band, seed=int(cfg["seed"]))
                rep = smoothing_probe(model, float(p["p"]), float(p["gamma"]), float(p["beta"]), ts, f)
                rows.append(["smoothing", f"gamma={p['gamma']:g}", rep.slope, rep.target, rep.passed])
            else:
                f = rough_spectrum_function(geom, float(p["theta"]), band, seed=int(cfg["seed"]))
                rep = strong_continuity_probe(model, float(p["p"]), float(p["theta"]), ts, f)
                rows.append(["continuity", f"theta={p['theta']:g}", rep.slope, rep.target, rep.passed])
            ok &= rep.passed
    out.write_table("kernel_probe.csv", ["check", "params", "slope", "target", "passed"], rows)
    return EXIT_OK if ok else EXIT_PROBE


def _probe_band(model, geom, ts, p):
    if float(p["band_lo"]) > 0 and float(p["band_hi"]) > 0:
        return (float(p["band_lo"]), float(p["band_hi"]))
    from .levy_model import symbol_grid

    # frequency scale where exp(-t Phi) turns over, per the model symbol
    probe = np.zeros((2, geom.dim))
    probe[1, 0] = 1.0
    k_eff = max(float(symbol_grid(model, probe)[1]), 1e-12)
    alpha = model.alpha
    xs_min = (2.0 * ts.max() * k_eff) ** (-1.0 / alpha)
    xs_max = (2.0 * ts.min() * k_eff) ** (-1.0 / alpha)
    nyquist = math.pi / max(geom.dx)
    return (xs_min / 4.0, min(4.0 * xs_max, 0.7 * nyquist))


def _cmd_krylov(cfg: dict, out: OutputWriter) -> int:
    model = build_model(cfg)
    drift = build_drift(cfg)
    k = cfg["krylov"]
    scfg = SolverConfig(
        dt=float(cfg["solver"]["dt"]),
        horizon=float(cfg["solver"]["horizon"]),
        particles=int(k["paths"]),
        theta=float(cfg["solver"]["theta"]),
        seed=int(cfg["seed"]),
        small_jump_cutoff=float(cfg["solver"]["cutoff"]),
    )
    geom = GridGeometry((float(k["extent"]),), (int(k["resolution"]),))
    panel = standard_bump_panel(geom, scfg.horizon, count=int(k["panel"]), seed=int(cfg["seed"]))
    radius = float(k["radius"]) if float(k["radius"]) > 0 else None
    report = krylov_ratio(model, drift, panel, scfg, float(k["p"]), float(k["q"]), stop_radius=radius)
    rows = [[e.label, report.p, report.q, report.gate_ok, e.lhs, report.drift_mass, e.f_norm, e.ratio]
            for e in report.panel]
    out.write_table("krylov.csv", ["f_id", "p", "q", "gate", "lhs", "drift_mass", "f_norm", "ratio"], rows)
    bounded = report.panel_max <= 10.0 * report.panel_median
    return EXIT_OK if bounded else EXIT_PROBE


def _cmd_admissible(cfg: dict, out: OutputWriter) -> int:
    a = cfg["admissible"]
    rows = []
    for alpha in a["alphas"]:
        for d in a["dims"]:
            for p in a["ps"]:
                for q in a["qs"]:
                    res = admissible_pq(float(alpha), int(d), float(p), float(q))
                    lo, hi = res.gamma_window if res.gamma_window else (math.nan, math.nan)
                    rows.append([alpha, d, p, q, res.admissible, lo, hi,
                                 krylov_pq_check(float(alpha), int(d), float(p), float(q))])
    out.write_table(
        "admissible.csv",
        ["alpha", "d", "p", "q", "admissible", "gamma_lo", "gamma_hi", "krylov_gate"],
        rows,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def run(subcommand: str, config_path: str | None, overrides=(), seed: int | None = None,
        out_dir: str | None = None, workers: int | None = None) -> int:
    """Programmatic entry point; returns the exit status."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    cfg = load_config(config_path, overrides, seed)
    if out_dir is not None:
        cfg["output"]["directory"] = out_dir
    if workers is None:
        workers = int(os.environ.get("LEVYSDE_WORKERS", "1"))
    out = OutputWriter(cfg["output"]["directory"], cfg, workers)
    dispatch = {
        "simulate": _cmd_simulate,
        "picard": _cmd_picard,
        "kernel-probe": _cmd_kernel_probe,
        "krylov-check": _cmd_krylov,
        "admissible": _cmd_admissible,
    }
    return dispatch[subcommand](cfg, out)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="levysde", description=__doc__)
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", default=None, help="TOML experiment config")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--workers", type=int, default=None,
                        help="parallelism hint (outputs are worker-count independent)")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted config override, e.g. solver.particles=500")
    args = parser.parse_args(argv)
    try:
        code = run(args.subcommand, args.config, args.set, args.seed, args.out, args.workers)
    except (ConfigError, ModelError, GateError, ValueError) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except LevysdeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return code


if __name__ == "__main__":
    sys.exit(main())
