"""Post-processing of front simulations.

Coexistence equilibrium, spreading/vanishing classification of finite-horizon
runs, front-speed and exponent fits, the critical-mu bisection and a harness
that checks the ordering of paired runs.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dynamics import (FrontSimulator, ModelParams, Trajectory, front_dt_bound,
                       positivity_dt_bound)
from .errors import (ContractViolation, ConvergenceError, InconclusiveClassification,
                     NoCriticalMu)
from .kernels import Kernel
from .spectral import critical_length, principal_eigenvalue

log = logging.getLogger(__name__)

SPREADING, VANISHING, UNDETERMINED = "Spreading", "Vanishing", "Undetermined"


@dataclass
class Equilibrium:
    u_star: float
    v_star: float
    iterations: int
    residual_f1: float
    residual_f2: float


def coexistence_equilibrium(a, b, c, tol=1e-14, max_iter=10000) -> Equilibrium:
    """Positive root of a - u - u/(1+bv) = 0, 1 - v - v/(1+cu) = 0.

    Runs the monotone lower iteration u_1 = a/2, v_n = (1+c u_n)/(2+c u_n),
    u_{n+1} = a (1+b v_n)/(2+b v_n), which increases to the root.
    """
    if not a > 0 or b < 0 or c < 0:
        raise ContractViolation("need a > 0 and b, c >= 0")
    u = 0.5 * a
    v = (1.0 + c * u) / (2.0 + c * u)
    for it in range(1, max_iter + 1):
        u_new = a * (1.0 + b * v) / (2.0 + b * v)
        v_new = (1.0 + c * u_new) / (2.0 + c * u_new)
        if u_new < u - 1e-15 or v_new < v - 1e-15 or u_new > a or v_new > 1.0:
            raise ConvergenceError("equilibrium iteration left the monotone regime")
        done = max(abs(u_new - u), abs(v_new - v)) < tol
        u, v = u_new, v_new
        if done:
            break
    else:
        raise ConvergenceError("equilibrium iteration did not converge")
    r1 = u * (a - u - u / (1.0 + b * v))
    r2 = v * (1.0 - v - v / (1.0 + c * u))
    return Equilibrium(u, v, it, abs(r1), abs(r2))


@dataclass
class Thresholds:
    """Finite-horizon stand-ins for the spreading/vanishing dichotomy."""

    eps_v: float = 1e-3
    eps_h: float = 1e-3
    margin: float = 5e-2
    spread_scales: float = 5.0
    slope_floor: float = 1e-3

    @classmethod
    def coerce(cls, th) -> "Thresholds":
        if th is None:
            return cls()
        if isinstance(th, cls):
            return th
        return cls(**th)


@dataclass
class RunSummary:
    outcome: str
    t: np.ndarray
    h_series: np.ndarray
    g_series: np.ndarray
    fitted_speed: float
    fitted_exponent: float
    final_sup_v: float
    lambda_p_final: float
    lstar: float | None
    thresholds: dict = field(default_factory=dict)
    u_probe: np.ndarray | None = None
    v_probe: np.ndarray | None = None

    def to_dict(self):
        return {"outcome": self.outcome, "final_h": float(self.h_series[-1]),
                "final_g": float(self.g_series[-1]), "final_t": float(self.t[-1]),
                "fitted_speed": self.fitted_speed, "fitted_exponent": self.fitted_exponent,
                "final_sup_v": self.final_sup_v, "lambda_p_final": self.lambda_p_final,
                "lstar": self.lstar, "thresholds": self.thresholds}


def _extent(h, g):
    h = np.asarray(h, dtype=float)
    g = np.asarray(g, dtype=float) if g is not None else None
    if g is None or np.all(np.isnan(g)):
        return h
    return h - g


def spreading_threshold(h0, scale, lstar=None, thresholds=None, double=False):
    """Occupied length beyond which a run counts as spreading."""
    th = Thresholds.coerce(thresholds)
    base = (2.0 if double else 1.0) * h0 + th.spread_scales * scale
    return max(base, 2.0 * lstar) if lstar is not None else base


def classify_outcome(t, h, sup_v, *, h0, scale, lstar=None, g=None, thresholds=None) -> str:
    """Spreading, Vanishing or Undetermined for a finite-horizon run.

    ``h`` (and ``g`` for two fronts) are logged front positions at times ``t``;
    the occupied length is h or h - g.  ``lstar`` is the critical length of the
    matching geometry, when it exists.
    """
    th = Thresholds.coerce(thresholds)
    t = np.asarray(t, dtype=float)
    double = g is not None and not np.all(np.isnan(np.asarray(g, dtype=float)))
    ext = _extent(h, g if double else None)
    T = t[-1]
    if T <= 0:
        return UNDETERMINED
    e_T = ext[-1]
    e_half = np.interp(0.5 * T, t, ext)
    if (sup_v[-1] < th.eps_v and e_T - e_half < th.eps_h
            and (lstar is None or e_T < lstar + th.margin)):
        return VANISHING
    if e_T > spreading_threshold(h0, scale, lstar, th, double):
        sel = t >= 0.75 * T
        if np.count_nonzero(sel) >= 2:
            slope = np.polyfit(t[sel], ext[sel], 1)[0]
        else:
            slope = (e_T - np.interp(0.75 * T, t, ext)) / (0.25 * T)
        if slope > th.slope_floor:
            return SPREADING
    return UNDETERMINED


def _window(t, y, window):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ContractViolation("time and value series must be 1-D and of equal length")
    if np.isscalar(window):
        if not 0 < window <= 1:
            raise ContractViolation("window fraction must lie in (0, 1]")
        t0, t1 = t[-1] - window * (t[-1] - t[0]), t[-1]
    else:
        t0, t1 = window
    sel = (t >= t0 - 1e-12) & (t <= t1 + 1e-12)
    if np.count_nonzero(sel) < 10:
        raise ContractViolation("fit window holds fewer than 10 samples")
    if np.ptp(t[sel]) == 0:
        raise ContractViolation("fit window has zero time span")
    return t[sel], y[sel]


def estimate_front_speed(t, h, window=0.5) -> float:
    """Least-squares slope of h against t over the trailing ``window``.

    ``window`` is a fraction of the time span or an explicit (t0, t1) pair.
    """
    tw, hw = _window(t, h, window)
    return float(np.polyfit(tw, hw, 1)[0])


def estimate_acceleration_exponent(t, h, window=0.5) -> float:
    """Slope of log h against log t over the trailing ``window``."""
    tw, hw = _window(t, h, window)
    if np.any(tw <= 0) or np.any(hw <= 0):
        raise ContractViolation("exponent fit needs positive times and positions")
    return float(np.polyfit(np.log(tw), np.log(hw), 1)[0])


def summarize_run(traj: Trajectory, params: ModelParams, kv: Kernel, *, lstar=None,
                  thresholds=None, geometry="single") -> RunSummary:
    th = Thresholds.coerce(thresholds)
    arr = traj.as_arrays()
    t, h, g, sup_v = arr["t"], arr["h"], arr["g"], arr["sup_v"]
    gg = g if geometry == "double" else None
    outcome = classify_outcome(t, h, sup_v, h0=params.h0, scale=kv.scale, lstar=lstar, g=gg,
                               thresholds=th)
    ext = _extent(h, gg)
    speed = exponent = math.nan
    try:
        speed = estimate_front_speed(t, ext)
        if t[0] >= 0 and np.all(ext > 0):
            exponent = estimate_acceleration_exponent(t[t > 0], ext[t > 0])
    except ContractViolation:
        pass
    lam = math.nan
    final = traj.final
    if final is not None and ext[-1] <= 60.0 * kv.scale:
        interval = (0.0, final.h) if geometry == "single" else (final.g, final.h)
        mode = "half_line" if geometry == "single" else "whole_line"
        try:
            lam = principal_eigenvalue(kv, params.d2, params.r2, interval, mode,
                                       dx=kv.scale / 16.0).lambda_p
        except ConvergenceError:
            pass
    return RunSummary(outcome, t, h, g, speed, exponent, float(sup_v[-1]), lam, lstar,
                      asdict(th), np.array(traj.u_probe), np.array(traj.v_probe))


@dataclass
class CriticalMuResult:
    mu_star: float
    bracket: tuple
    lstar: float
    probes: list
    horizon: float  # longest horizon any probe needed


def critical_mu(params: ModelParams, ku: Kernel, kv: Kernel, *, T, geometry="single",
                bracket=None, rtol=1e-2, thresholds=None, horizon_cap=4.0, lstar=None,
                max_expand=20, **sim_kw) -> CriticalMuResult:
    """Threshold mu separating vanishing from spreading, by bisection on mu.

    Each probe is a simulation of horizon ``T`` classified with
    :func:`classify_outcome`; an Undetermined probe is rerun with the horizon
    doubled, up to ``horizon_cap`` times ``T``.  Spreading probes stop as soon
    as the occupied length is well past the spreading threshold.
    """
    th = Thresholds.coerce(thresholds)
    mode = "half_line" if geometry == "single" else "whole_line"
    limit = 0.5 * params.d2 if geometry == "single" else params.d2
    if params.r2 >= limit:
        rel = "r2 >= d2/2" if geometry == "single" else "r2 >= d2"
        raise NoCriticalMu(f"no critical mu: {rel}, so spreading happens for every mu > 0")
    if lstar is None:
        lstar = critical_length(kv, params.d2, params.r2, mode)
    size0 = params.h0 if geometry == "single" else 2.0 * params.h0
    if size0 >= lstar:
        raise NoCriticalMu(f"no critical mu: the initial range {size0:g} is at least the critical "
                           f"length {lstar:g}, so spreading happens for every mu > 0")
    stop_at = spreading_threshold(params.h0, kv.scale, lstar, th, geometry == "double")
    probes = []

    def classify(mu):
        horizon = float(T)
        while True:
            p = params.with_(mu=mu)
            sim = FrontSimulator(p, ku, kv, geometry=geometry, **sim_kw)
            state = sim.initial_state()

            def stop(s):
                ext = s.h if s.g is None else s.h - s.g
                return ext > 1.5 * stop_at

            traj = sim.run(horizon, state=state, stop=stop)
            summ = summarize_run(traj, p, kv, lstar=lstar, thresholds=th, geometry=geometry)
            log.info("mu=%.6g T=%g -> %s (h=%.4g)", mu, horizon, summ.outcome, summ.h_series[-1])
            probes.append((mu, horizon, summ.outcome))
            if summ.outcome != UNDETERMINED:
                return summ.outcome
            if horizon >= horizon_cap * T:
                raise InconclusiveClassification(
                    f"run at mu={mu:g} is still undetermined at horizon {horizon:g}")
            horizon *= 2.0

    lo, hi = bracket if bracket is not None else (1.0, 4.0)
    for _ in range(max_expand):
        if classify(lo) == VANISHING:
            break
        hi, lo = lo, lo / 4.0
    else:
        raise ConvergenceError("no vanishing mu found below the bracket")
    for _ in range(max_expand):
        if classify(hi) == SPREADING:
            break
        lo, hi = hi, hi * 4.0
    else:
        raise ConvergenceError("no spreading mu found above the bracket")
    while (hi - lo) / (0.5 * (hi + lo)) >= rtol:
        mid = 0.5 * (lo + hi)
        if classify(mid) == SPREADING:
            hi = mid
        else:
            lo = mid
    horizon = max(pr[1] for pr in probes)
    return CriticalMuResult(0.5 * (lo + hi), (lo, hi), lstar, probes, horizon)


@dataclass
class ComparisonReport:
    ordered: bool
    checked_times: int
    max_excess: float
    first_violation: dict | None = None


def comparison_harness(lower: dict, upper: dict, *, T, geometry="single", dx=None, cadence=None,
                       tol=1e-12, x_max=None) -> ComparisonReport:
    """Run two configurations on a common grid and time step and check that
    the ``lower`` trajectory stays below the ``upper`` one.

    Each configuration is a dict with ``params`` (ModelParams), ``ku``, ``kv``
    and optional ``u0``, ``v0``.  Kernels must coincide.  The time step is half
    the smaller of the positivity and front-monotonicity bounds of both runs,
    and the two grids are extended in lockstep so both runs always see the
    same truncated domain.
    """
    if (lower["ku"].describe() != upper["ku"].describe()
            or lower["kv"].describe() != upper["kv"].describe()):
        raise ContractViolation("compared runs must share kernels")
    sims, states = [], []
    for cfg in (lower, upper):
        sim = FrontSimulator(cfg["params"], cfg["ku"], cfg["kv"], geometry=geometry, dx=dx,
                             x_max=x_max)
        sims.append(sim)
        states.append(sim.initial_state(u0=cfg.get("u0"), v0=cfg.get("v0")))
    bounds = []
    for sim, st in zip(sims, states):
        bounds.append(positivity_dt_bound(sim.p, st.K1, st.K2))
        bounds.append(front_dt_bound(sim.p, st.K2, sim.kv, sim.dx))
    dt = 0.5 * min(bounds)
    nsteps = max(1, int(math.ceil(T / dt - 1e-12)))
    dt = T / nsteps
    every = max(1, int(round((cadence if cadence is not None else T / 200.0) / dt)))
    logged = [[st.copy()] for st in states]
    for i in range(1, nsteps + 1):
        # both runs must see the same truncated domain, so grids grow together
        far = max(st.h if st.g is None else max(st.h, -st.g) for st in states)
        states = [sim.step(sim.ensure_extent(st, far), dt) for sim, st in zip(sims, states)]
        if i % every == 0 or i == nsteps:
            for log_, st in zip(logged, states):
                log_.append(st.copy())
    worst, first = -math.inf, None
    for sa, sb in zip(*logged):
        lo_, hi_ = max(sa.grid.offset, sb.grid.offset), min(sa.grid.offset + sa.grid.n,
                                                          sb.grid.offset + sb.grid.n)
        ia = slice(lo_ - sa.grid.offset, hi_ - sa.grid.offset)
        ib = slice(lo_ - sb.grid.offset, hi_ - sb.grid.offset)
        x = sa.grid.x[ia]
        checks = [("u", sa.u[ia] - sb.u[ib]), ("v", sa.v[ia] - sb.v[ib]),
                  ("h", np.array([sa.h - sb.h]))]
        if sa.g is not None:
            checks.append(("g", np.array([sb.g - sa.g])))
        for name, diff in checks:
            k = int(np.argmax(diff))
            worst = max(worst, float(diff[k]))
            if diff[k] > tol and first is None:
                where = float(x[k]) if name in ("u", "v") else None
                first = {"t": sa.t, "x": where, "field": name, "excess": float(diff[k])}
    return ComparisonReport(first is None, len(logged[0]), worst, first)
