"""Batch front-end: ``python3 -m mutualfront <command> --config FILE --out DIR``.

Commands: simulate, eigen, critical-length, speed, semiwave, critical-mu,
sweep, compare.  Configurations are JSON objects; every default is filled in
and echoed to ``manifest.json``.  Data files (CSV/JSON) contain no timestamps,
so identical configurations give byte-identical data.  Failures exit nonzero
and write ``error.json`` with a stable error code.
"""
from __future__ import annotations

import argparse
import copy
import csv
import datetime as _dt
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, spectral, waves
from .dynamics import FrontSchedule, ModelParams, default_v0, run_simulation
from .errors import ConfigError, MutualFrontError
from .kernels import make_kernel

SCHEMA_VERSION = "1.0"
COMMANDS = ("simulate", "eigen", "critical-length", "speed", "semiwave", "critical-mu", "sweep",
            "compare")
EXIT_CODES = {
    "config": 2, "contract_violation": 3, "extrapolation": 4, "no_convergence": 5,
    "rejected_step": 6, "invariant_breach": 7, "no_critical_length": 8, "no_critical_mu": 9,
    "inconclusive": 10, "light_tail_required": 11, "no_semiwave": 12, "no_profile": 13,
    "error": 1,
}
PARAM_NAMES = ("d1", "d2", "r1", "r2", "a", "b", "c", "mu", "h0")

DEFAULTS = {
    "params": {"d1": 1.0, "d2": 1.0, "r1": 1.0, "r2": 1.0, "a": 1.0, "b": 1.0, "c": 1.0,
               "mu": 1.0, "h0": 1.0},
    "kernels": {"J1": {"family": "triangle", "radius": 1.0},
                "J2": {"family": "triangle", "radius": 1.0}},
    "mode": "single",
    "schedule": None,
    "grid": {"dx": None, "x_max": None, "backend": "auto", "closure": "constant"},
    "time": {"T": 100.0, "dt_factor": 0.4, "cadence": None},
    "initial": {"amplitude": 0.5},
    "thresholds": {"eps_v": 1e-3, "eps_h": 1e-3, "margin": 5e-2, "spread_scales": 5.0,
                   "slope_floor": 1e-3},
    "eigen": {"lengths": [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0], "a0": None, "dx": None},
    "critical_length": {"tol": 1e-6},
    "semiwave": {"mu": [1.0], "L": None, "dx": None},
    "critical_mu": {"bracket": [1.0, 4.0], "rtol": 1e-2, "horizon_cap": 4.0},
    "sweep": {"axes": {}, "critical_mu": False},
    "compare": {"upper": {"params": {}}, "v0_scale": 1.0, "tol": 1e-12},
}

log = logging.getLogger(__name__)


# -- configuration ----------------------------------------------------------

def _merge(base, over, path=""):
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown field '{where}'")
        if key == "kernels":
            if not isinstance(val, dict):
                raise ConfigError("field 'kernels' must be an object")
            unknown = sorted(set(val) - {"J1", "J2"})
            if unknown:
                raise ConfigError(f"unknown field 'kernels.{unknown[0]}'")
            # each kernel spec replaces the default one as a whole
            out[key] = {**base[key], **copy.deepcopy(val)}
        elif isinstance(base[key], dict) and key not in ("axes", "upper"):
            if not isinstance(val, dict):
                raise ConfigError(f"field '{where}' must be an object")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def _positive(name, val, allow_zero=False):
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigError(f"field '{name}' must be a number")
    if val < 0 or (val == 0 and not allow_zero):
        raise ConfigError(f"field '{name}': parameters must be positive (got {val})")
    return float(val)


def validate_config(cfg: dict) -> dict:
    """Type and positivity checks on a fully merged configuration."""
    p = cfg["params"]
    for name in PARAM_NAMES:
        if name not in p or p[name] is None:
            raise ConfigError(f"missing field 'params.{name}'")
        p[name] = _positive(f"params.{name}", p[name])
    for name in ("J1", "J2"):
        if name not in cfg["kernels"]:
            raise ConfigError(f"missing field 'kernels.{name}'")
        make_kernel(cfg["kernels"][name])
    if cfg["mode"] not in ("single", "double", "prescribed"):
        raise ConfigError("field 'mode' must be one of single, double, prescribed")
    if cfg["mode"] == "prescribed":
        _schedule(cfg)
    for name in ("dx", "x_max"):
        if cfg["grid"][name] is not None:
            cfg["grid"][name] = _positive(f"grid.{name}", cfg["grid"][name])
    cfg["time"]["T"] = _positive("time.T", cfg["time"]["T"])
    cfg["time"]["dt_factor"] = _positive("time.dt_factor", cfg["time"]["dt_factor"])
    if not cfg["time"]["dt_factor"] < 1:
        raise ConfigError("field 'time.dt_factor' must be below 1")
    return cfg


def parse_config(path) -> dict:
    """Read a JSON configuration and return it with all defaults materialised."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {str(path)!r} does not exist")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return validate_config(_merge(DEFAULTS, raw))


def _schedule(cfg):
    spec = cfg.get("schedule")
    if cfg["mode"] != "prescribed":
        return None
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("prescribed mode needs field 'schedule' with a 'kind'")
    kind = spec["kind"]
    s0 = float(spec.get("s0", cfg["params"]["h0"]))
    if kind == "linear":
        k = float(spec.get("speed", 1.0))
        return FrontSchedule.prescribed(lambda t: s0 + k * t)
    if kind == "power":
        k, q = float(spec.get("coef", 1.0)), float(spec.get("power", 1.0))
        return FrontSchedule.prescribed(lambda t: s0 + k * t ** q)
    if kind == "constant":
        return FrontSchedule.prescribed(lambda t: s0 + 0.0 * t)
    raise ConfigError(f"unknown schedule kind {kind!r}; valid kinds: linear, power, constant")


def _model(cfg):
    p = ModelParams(**{k: cfg["params"][k] for k in PARAM_NAMES})
    return p, make_kernel(cfg["kernels"]["J1"]), make_kernel(cfg["kernels"]["J2"])


def _geometry(cfg):
    return "double" if cfg["mode"] == "double" else "single"


def _mass_mode(cfg):
    return "whole_line" if cfg["mode"] == "double" else "half_line"


def _sim_kw(cfg):
    g = cfg["grid"]
    return {"dx": g["dx"], "x_max": g["x_max"], "backend": g["backend"],
            "closure": g["closure"], "dt_factor": cfg["time"]["dt_factor"]}


def set_path(cfg: dict, dotted: str, value):
    """Assign ``value`` at a dotted path such as ``kernels.J2.gamma``."""
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            raise ConfigError(f"sweep axis '{dotted}' does not name a config field")
        node = node[k]
    node[keys[-1]] = value


# -- output helpers -----------------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (dict, list)):
        return json.dumps(x, sort_keys=True, separators=(",", ":"))
    return "" if x is None else str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


PLOT_SCRIPT = '''"""Plot every two-or-more column CSV in this directory against its first column."""
import csv
import glob

import matplotlib.pyplot as plt

for name in sorted(glob.glob("*.csv")):
    with open(name) as fh:
        rows = list(csv.reader(fh))
    head, data = rows[0], rows[1:]
    try:
        cols = [[float(v) for v in col] for col in zip(*data)]
    except ValueError:
        continue
    fig, ax = plt.subplots()
    for label, col in zip(head[1:], cols[1:]):
        ax.plot(cols[0], col, label=label)
    ax.set_xlabel(head[0])
    ax.legend()
    fig.savefig(name[:-4] + ".png", dpi=120)
'''


# -- commands -----------------------------------------------------------------

def cmd_simulate(cfg, out, args):
    p, ku, kv = _model(cfg)
    lstar = _lstar_or_none(cfg, kv)
    summary, traj = run_simulation(
        p, ku, kv, T=cfg["time"]["T"], geometry=_geometry(cfg), schedule=_schedule(cfg),
        amplitude=cfg["initial"]["amplitude"], cadence=cfg["time"]["cadence"], lstar=lstar,
        thresholds=cfg["thresholds"], **_sim_kw(cfg))
    probes = traj.probes
    header = (["t", "h", "g", "sup_v"] + [f"u@{x:g}" for x in probes]
              + [f"v@{x:g}" for x in probes])
    rows = [[t, h, g, s, *up, *vp] for t, h, g, s, up, vp in
            zip(traj.t, traj.h, traj.g, traj.sup_v, traj.u_probe, traj.v_probe)]
    write_csv(out / "series.csv", header, rows)
    write_json(out / "summary.json", summary.to_dict())
    return ["series.csv", "summary.json"]


def _lstar_or_none(cfg, kv):
    from .errors import NoCriticalLength

    try:
        return spectral.critical_length(kv, cfg["params"]["d2"], cfg["params"]["r2"],
                                        _mass_mode(cfg))
    except NoCriticalLength:
        return None


def cmd_eigen(cfg, out, args):
    p, _, kv = _model(cfg)
    e = cfg["eigen"]
    a0 = p.r2 if e["a0"] is None else float(e["a0"])
    rows = spectral.eigen_curve(kv, p.d2, a0, e["lengths"], _mass_mode(cfg), e["dx"])
    write_csv(out / "eigen.csv", ["length", "lambda_p"], rows)
    return ["eigen.csv"]


def cmd_critical_length(cfg, out, args):
    p, _, kv = _model(cfg)
    ell = spectral.critical_length(kv, p.d2, p.r2, _mass_mode(cfg),
                                   tol=cfg["critical_length"]["tol"])
    write_json(out / "critical_length.json", {"critical_length": ell,
                                              "mass_mode": _mass_mode(cfg)})
    return ["critical_length.json"]


def cmd_speed(cfg, out, args):
    p, _, kv = _model(cfg)
    res = waves.minimal_speed_kpp(kv, p.d2, p.r2)
    write_json(out / "speed.json", {"c_star": res.c_star, "lambda_hat": res.lambda_hat})
    write_csv(out / "dispersion.csv", ["lambda", "speed"], zip(res.lam, res.speed))
    return ["speed.json", "dispersion.csv"]


def cmd_semiwave(cfg, out, args):
    p, _, kv = _model(cfg)
    s = cfg["semiwave"]
    rows, files = [], ["semiwave.csv"]
    for i, mu in enumerate(s["mu"]):
        r = waves.semi_wave_speed(kv, p.d2, p.r2, 2.0 * p.r2, float(mu), L=s["L"], dx=s["dx"])
        rows.append([mu, r.c0, r.flux_residual, r.c_star, r.L])
        name = f"profile_{i}.csv"
        write_csv(out / name, ["x", "phi"], zip(r.x, r.phi))
        files.append(name)
    write_csv(out / "semiwave.csv", ["mu", "c0", "flux_residual", "c_star", "L"], rows)
    return files


def cmd_critical_mu(cfg, out, args):
    p, ku, kv = _model(cfg)
    c = cfg["critical_mu"]
    res = analysis.critical_mu(p, ku, kv, T=cfg["time"]["T"], geometry=_geometry(cfg),
                               bracket=tuple(c["bracket"]), rtol=c["rtol"],
                               thresholds=cfg["thresholds"], horizon_cap=c["horizon_cap"],
                               **_sim_kw(cfg))
    write_json(out / "critical_mu.json", {"mu_star": res.mu_star, "bracket": res.bracket,
                                          "critical_length": res.lstar})
    write_csv(out / "probes.csv", ["mu", "horizon", "outcome"], res.probes)
    return ["critical_mu.json", "probes.csv"]


def _sweep_cell(job):
    index, cfg, axes = job
    p, ku, kv = _model(cfg)
    lstar = _lstar_or_none(cfg, kv)
    summary, _ = run_simulation(
        p, ku, kv, T=cfg["time"]["T"], geometry=_geometry(cfg), schedule=_schedule(cfg),
        amplitude=cfg["initial"]["amplitude"], cadence=cfg["time"]["cadence"], lstar=lstar,
        thresholds=cfg["thresholds"], **_sim_kw(cfg))
    mu_star = None
    if cfg["sweep"]["critical_mu"]:
        c = cfg["critical_mu"]
        try:
            mu_star = analysis.critical_mu(
                p, ku, kv, T=cfg["time"]["T"], geometry=_geometry(cfg),
                bracket=tuple(c["bracket"]), rtol=c["rtol"], thresholds=cfg["thresholds"],
                horizon_cap=c["horizon_cap"], lstar=lstar, **_sim_kw(cfg)).mu_star
        except MutualFrontError as exc:
            mu_star = exc.code
    return [index, *axes, summary.outcome, summary.fitted_speed, summary.fitted_exponent,
            float(summary.h_series[-1]), summary.final_sup_v, mu_star]


def cmd_sweep(cfg, out, args):
    axes = cfg["sweep"]["axes"]
    if not axes:
        raise ConfigError("field 'sweep.axes' must name at least one axis")
    names = sorted(axes)
    jobs = []
    for index, values in enumerate(itertools.product(*(axes[n] for n in names))):
        cell = copy.deepcopy(cfg)
        for n, v in zip(names, values):
            set_path(cell, n, v)
        validate_config(cell)
        jobs.append((index, cell, list(values)))
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    else:
        rows = [_sweep_cell(j) for j in jobs]
    rows.sort(key=lambda r: r[0])
    header = ["cell", *names, "outcome", "fitted_speed", "fitted_exponent", "final_h",
              "final_sup_v", "mu_star"]
    write_csv(out / "sweep.csv", header, rows)
    return ["sweep.csv"]


def cmd_compare(cfg, out, args):
    p, ku, kv = _model(cfg)
    c = cfg["compare"]
    upper_cfg = _merge(cfg, {"params": c["upper"].get("params", {})})
    validate_config(upper_cfg)
    pu, _, _ = _model(upper_cfg)
    scale = float(c["v0_scale"])
    amp = cfg["initial"]["amplitude"]
    geometry = _geometry(cfg)
    h0 = p.h0

    def v0_upper(x):
        return np.minimum(scale * default_v0(x, h0, amp), max(1.0, amp))

    rep = analysis.comparison_harness(
        {"params": p, "ku": ku, "kv": kv},
        {"params": pu, "ku": ku, "kv": kv, "v0": v0_upper if scale != 1.0 else None},
        T=cfg["time"]["T"], geometry=geometry, dx=cfg["grid"]["dx"],
        cadence=cfg["time"]["cadence"], tol=c["tol"], x_max=cfg["grid"]["x_max"])
    write_json(out / "compare.json", {"ordered": rep.ordered, "checked_times": rep.checked_times,
                                      "max_excess": rep.max_excess,
                                      "first_violation": rep.first_violation})
    return ["compare.json"]


HANDLERS = {"simulate": cmd_simulate, "eigen": cmd_eigen,
            "critical-length": cmd_critical_length, "speed": cmd_speed,
            "semiwave": cmd_semiwave, "critical-mu": cmd_critical_mu, "sweep": cmd_sweep,
            "compare": cmd_compare}


def build_parser():
    ap = argparse.ArgumentParser(prog="mutualfront", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON experiment configuration")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--workers", type=int, default=1, help="worker processes for sweep")
    ap.add_argument("--seedless", action="store_true",
                    help="no-op: runs use no random numbers and are always deterministic")
    ap.add_argument("--plot-script", action="store_true",
                    help="also write a generic matplotlib script next to the CSV files")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = None
    try:
        cfg = parse_config(args.config)
        files = HANDLERS[args.command](cfg, out, args)
        if args.plot_script:
            (out / "plot.py").write_text(PLOT_SCRIPT)
            files.append("plot.py")
    except MutualFrontError as exc:
        err = {"error": exc.code, "exit_code": EXIT_CODES.get(exc.code, 1),
               "type": type(exc).__name__, "message": str(exc), "command": args.command}
        write_json(out / "error.json", err)
        print(json.dumps(err), file=sys.stderr)
        return err["exit_code"]
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "config": cfg,
        "outputs": sorted(files),
        "workers": args.workers,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    write_json(out / "manifest.json", manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
