"""Explicit time stepping of the mutualist free-boundary systems.

Two geometries are supported:

``single``
    u lives on the half-line [0, inf) with the half-line mass j_1(x); v lives on
    [0, h(t)) with mass j_2(x) and a single front h driven by the outward flux.
``double``
    u lives on the whole line with mass 1; v lives on (g(t), h(t)) and both
    fronts move.

Fronts are either free (driven by mu times the outward flux) or prescribed by
a schedule, which turns the v-equation into the scalar moving-domain problem
used for lower bounds.  In scalar mode the v-reaction is replaced by the
logistic term w (alpha - beta w) and u is not evolved.

The forward Euler scheme is order preserving as long as

    dt * (max(d1, d2) + L_f) < 1,

with L_f a bound on the diagonal reaction derivatives over [0, K1] x [0, K2].
Every accepted step is checked against the a priori bounds 0 <= u <= K1,
0 <= v <= K2 and against monotone motion of the fronts.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ContractViolation, InvariantBreach, RejectedStep
from .kernels import Kernel
from .nonlocal_ops import (Grid, OperatorTable, apply_nonlocal, boundary_flux_left,
                           boundary_flux_right)

log = logging.getLogger(__name__)

BOUND_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Model constants.

    ``b``, ``c`` and ``mu`` may be zero for the decoupled and frozen-front
    degenerate cases; everything else must be strictly positive.
    """

    d1: float = 1.0
    d2: float = 1.0
    r1: float = 1.0
    r2: float = 1.0
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    mu: float = 1.0
    h0: float = 1.0

    def __post_init__(self):
        for name in ("d1", "d2", "r1", "r2", "a", "h0"):
            if not getattr(self, name) > 0:
                raise ContractViolation(f"parameters must be positive: {name} = {getattr(self, name)}")
        for name in ("b", "c", "mu"):
            if not getattr(self, name) >= 0:
                raise ContractViolation(f"parameters must be positive: {name} = {getattr(self, name)}")

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)


def reaction_f1(u, v, p: ModelParams):
    return p.r1 * u * (p.a - u - u / (1.0 + p.b * v))


def reaction_f2(u, v, p: ModelParams):
    return p.r2 * v * (1.0 - v - v / (1.0 + p.c * u))


@dataclass(frozen=True)
class FrontSchedule:
    """Free fronts, or prescribed positions s(t) (and s_left(t) for two fronts)."""

    mode: str = "free"
    right: Optional[Callable[[float], float]] = None
    left: Optional[Callable[[float], float]] = None

    @classmethod
    def free(cls):
        return cls()

    @classmethod
    def prescribed(cls, right, left=None, check_until=100.0):
        sched = cls("prescribed", right, left)
        ts = np.linspace(0.0, check_until, 401)
        s = np.array([right(t) for t in ts])
        if not s[0] > 0 or np.any(np.diff(s) <= 0):
            raise ContractViolation("prescribed front must start positive and increase strictly")
        if left is not None:
            sl = np.array([left(t) for t in ts])
            if not sl[0] < 0 or np.any(np.diff(sl) >= 0):
                raise ContractViolation("prescribed left front must start negative and decrease strictly")
        return sched

    @property
    def is_free(self):
        return self.mode == "free"


@dataclass
class FrontState:
    t: float
    grid: Grid
    u: np.ndarray
    v: np.ndarray
    h: float
    g: Optional[float]
    K1: float
    K2: float
    step: int = 0

    def active(self):
        """Half-open index range of nodes strictly inside the occupied interval."""
        hi = self.grid.index_above(self.h)
        lo = 0 if self.g is None else self.grid.index_right_of(self.g)
        return lo, hi

    def copy(self):
        return replace(self, u=self.u.copy(), v=self.v.copy())


@dataclass(eq=False)
class Tables:
    """Operator tables for one grid, plus the discretisation choices."""

    grid: Grid
    ku: Kernel
    kv: Kernel
    geometry: str = "single"
    closure: str = "constant"
    backend: str = "auto"
    tu: OperatorTable = field(init=False)
    tv: OperatorTable = field(init=False)

    def __post_init__(self):
        if self.geometry not in ("single", "double"):
            raise ContractViolation(f"unknown geometry {self.geometry!r}")
        domain = "half_line" if self.geometry == "single" else "whole_line"
        self.tu = OperatorTable(self.ku, self.grid, domain, self.backend)
        self.tv = OperatorTable(self.kv, self.grid, domain, self.backend)

    def regrid(self, grid: Grid) -> "Tables":
        return Tables(grid, self.ku, self.kv, self.geometry, self.closure, self.backend)


def reaction_lipschitz(p: ModelParams, K1, K2, scalar=None) -> float:
    """Bound on |d f1/du| and |d f2/dv| over [0, K1] x [0, K2]."""
    if scalar is not None:
        alpha, beta = scalar
        return max(alpha, 2.0 * beta * K2 - alpha)
    l1 = p.r1 * max(p.a, 4.0 * K1 - p.a)
    l2 = p.r2 * max(1.0, 4.0 * K2 - 1.0)
    return max(l1, l2)


def positivity_dt_bound(p: ModelParams, K1, K2, scalar=None) -> float:
    """Supremum of admissible time steps for the order-preserving scheme."""
    d = p.d2 if scalar is not None else max(p.d1, p.d2)
    return 1.0 / (d + reaction_lipschitz(p, K1, K2, scalar))


def front_dt_bound(p: ModelParams, K2, kv: Kernel, dx) -> float:
    """Step bound keeping h -> h + dt * flux(h) nondecreasing (discrete comparison of fronts)."""
    lip = p.mu * K2 * (0.5 + dx * float(kv(0.0)))
    return math.inf if lip == 0 else 1.0 / lip


def _check_entry(state: FrontState):
    if np.any(state.u < -BOUND_TOL) or np.any(state.u > state.K1 + BOUND_TOL):
        raise ContractViolation("u outside [0, K1] on entry")
    if np.any(state.v < -BOUND_TOL) or np.any(state.v > state.K2 + BOUND_TOL):
        raise ContractViolation("v outside [0, K2] on entry")


def _check_dt(p, state, dt, scalar):
    bound = positivity_dt_bound(p, state.K1, state.K2, scalar)
    if not 0 < dt < bound:
        raise RejectedStep(f"dt = {dt:g} violates the positivity condition dt < {bound:g}")


def check_invariants(prev: FrontState, new: FrontState, scalar=None):
    """Raise :class:`InvariantBreach` if ``new`` leaves the a priori bounds."""
    if scalar is None:
        if np.any(new.u < -BOUND_TOL) or np.any(new.u > new.K1 + BOUND_TOL):
            raise InvariantBreach(f"u left [0, K1] at step {new.step}", new.step)
    if np.any(new.v < -BOUND_TOL) or np.any(new.v > new.K2 + BOUND_TOL):
        raise InvariantBreach(f"v left [0, K2] at step {new.step}", new.step)
    if new.h < prev.h:
        raise InvariantBreach(f"front h receded at step {new.step}", new.step)
    if new.g is not None and new.g > prev.g:
        raise InvariantBreach(f"front g receded at step {new.step}", new.step)
    lo, hi = new.active()
    if np.any(new.v[hi:] != 0.0) or np.any(new.v[:lo] != 0.0):
        raise InvariantBreach(f"v nonzero outside the occupied interval at step {new.step}", new.step)


def step_single_front(state: FrontState, p: ModelParams, tables: Tables,
                      schedule: FrontSchedule = FrontSchedule(), dt: float = None,
                      scalar=None) -> FrontState:
    """One forward Euler step of the half-line model."""
    _check_entry(state)
    _check_dt(p, state, dt, scalar)
    grid = state.grid
    n = grid.n
    u, v, h = state.u, state.v, state.h
    _, k = state.active()

    if scalar is None:
        Lu = apply_nonlocal(tables.tu, u, (0, n), p.d1, tables.closure)
        u_new = u + dt * (Lu + reaction_f1(u, v, p))
        react_v = reaction_f2(u[:k], v[:k], p)
    else:
        alpha, beta = scalar
        u_new = u
        react_v = v[:k] * (alpha - beta * v[:k])

    v_new = np.zeros(n)
    if k > 0:
        Lv = apply_nonlocal(tables.tv, v, (0, k), p.d2, "zero", right_end=h, rows=(0, k))
        v_new[:k] = v[:k] + dt * (Lv + react_v)

    if schedule.is_free:
        h_new = h + dt * boundary_flux_right(tables.tv, v, h, p.mu, active=(0, k))
    else:
        h_new = float(schedule.right(state.t + dt))
    # nodes the front moves over keep v = 0 until the next step
    return FrontState(state.t + dt, grid, u_new, v_new, h_new, None, state.K1, state.K2,
                      state.step + 1)


def step_double_front(state: FrontState, p: ModelParams, tables: Tables,
                      schedule: FrontSchedule = FrontSchedule(), dt: float = None,
                      scalar=None) -> FrontState:
    """One forward Euler step of the whole-line model with fronts g < h."""
    _check_entry(state)
    _check_dt(p, state, dt, scalar)
    grid = state.grid
    n = grid.n
    u, v, h, g = state.u, state.v, state.h, state.g
    lo, hi = state.active()

    if scalar is None:
        Lu = apply_nonlocal(tables.tu, u, (0, n), p.d1, tables.closure)
        u_new = u + dt * (Lu + reaction_f1(u, v, p))
        react_v = reaction_f2(u[lo:hi], v[lo:hi], p)
    else:
        alpha, beta = scalar
        u_new = u
        react_v = v[lo:hi] * (alpha - beta * v[lo:hi])

    v_new = np.zeros(n)
    if hi > lo:
        Lv = apply_nonlocal(tables.tv, v, (lo, hi), p.d2, "zero", left_end=g, right_end=h,
                            rows=(lo, hi))
        v_new[lo:hi] = v[lo:hi] + dt * (Lv + react_v)

    if schedule.is_free:
        h_new = h + dt * boundary_flux_right(tables.tv, v, h, p.mu, active=(lo, hi), left_end=g)
        g_new = g + dt * boundary_flux_left(tables.tv, v, g, p.mu, active=(lo, hi), right_end=h)
    else:
        h_new = float(schedule.right(state.t + dt))
        left = schedule.left if schedule.left is not None else (lambda t: -schedule.right(t))
        g_new = float(left(state.t + dt))
    return FrontState(state.t + dt, grid, u_new, v_new, h_new, g_new, state.K1, state.K2,
                      state.step + 1)


def default_v0(x, h0, amplitude=0.5):
    """amplitude * cos(pi x / (2 h0)) inside |x| < h0, zero outside."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) < h0, amplitude * np.cos(0.5 * math.pi * x / h0), 0.0)


@dataclass
class Trajectory:
    """Logged samples of a run plus its final state."""

    t: list = field(default_factory=list)
    h: list = field(default_factory=list)
    g: list = field(default_factory=list)
    sup_v: list = field(default_factory=list)
    u_probe: list = field(default_factory=list)
    v_probe: list = field(default_factory=list)
    probes: tuple = ()
    states: list = field(default_factory=list)
    final: Optional[FrontState] = None
    stopped_early: bool = False

    def record(self, state: FrontState, keep_state=False):
        x = state.grid.x
        self.t.append(state.t)
        self.h.append(state.h)
        self.g.append(state.g if state.g is not None else math.nan)
        self.sup_v.append(float(np.max(state.v)) if state.v.size else 0.0)
        pr = np.asarray(self.probes, dtype=float)
        self.u_probe.append(np.interp(pr, x, state.u).tolist())
        self.v_probe.append(np.interp(pr, x, state.v).tolist())
        if keep_state:
            self.states.append(state.copy())

    def as_arrays(self):
        return {"t": np.array(self.t), "h": np.array(self.h), "g": np.array(self.g),
                "sup_v": np.array(self.sup_v)}


class FrontSimulator:
    """Owns the grid, the operator tables and the stepping policy of one run.

    Parameters
    ----------
    params : ModelParams
    ku, kv : Kernel
        Dispersal kernels of u and v.
    geometry : {"single", "double"}
    schedule : FrontSchedule, optional
        Free fronts by default.
    dx : float, optional
        Node spacing; defaults to kv.scale / 20.
    x_max : float, optional
        Initial extent of the truncated u-domain (half-width for ``double``).
        Defaults to h0 + 10 kernel scales.  The grid is extended automatically
        whenever a front comes within ``margin`` of its end.
    dt : float, optional
        Time step; defaults to ``dt_factor`` times the smaller of the positivity
        bound and (for free fronts) the front-monotonicity bound.
    scalar : (alpha, beta), optional
        Replace the coupled system by the scalar v-equation with logistic
        reaction w (alpha - beta w); u is frozen.
    """

    def __init__(self, params: ModelParams, ku: Kernel, kv: Kernel, *, geometry="single",
                 schedule: FrontSchedule | None = None, dx=None, x_max=None, dt=None,
                 dt_factor=0.4, closure="constant", backend="auto", scalar=None,
                 margin=None, extend=True):
        self.p = params
        self.ku, self.kv = ku, kv
        self.geometry = geometry
        self.schedule = schedule or FrontSchedule.free()
        self.dx = float(dx) if dx is not None else kv.scale / 20.0
        scale = max(ku.scale, kv.scale)
        self.margin = float(margin) if margin is not None else 5.0 * scale
        x_max = float(x_max) if x_max is not None else params.h0 + 10.0 * scale
        if geometry == "single":
            grid = Grid.covering(0.0, x_max, self.dx)
        else:
            grid = Grid.symmetric(x_max, self.dx)
        self.tables = Tables(grid, ku, kv, geometry, closure, backend)
        self.closure = closure
        self.backend = backend
        self.scalar = tuple(scalar) if scalar is not None else None
        self.dt_factor = dt_factor
        self._dt = dt
        self.extend = extend

    @property
    def grid(self) -> Grid:
        return self.tables.grid

    def initial_state(self, u0=None, v0=None, amplitude=0.5) -> FrontState:
        """Sample initial data on the grid.

        ``u0`` / ``v0`` may be callables of x, arrays on the grid, or None for the
        defaults (u0 = a/2, v0 = amplitude cos(pi x / (2 h0))).
        """
        p, x = self.p, self.grid.x
        h0 = p.h0
        if self.schedule.is_free:
            h, g = h0, (-h0 if self.geometry == "double" else None)
        else:
            h = float(self.schedule.right(0.0))
            g = None
            if self.geometry == "double":
                g = float(self.schedule.left(0.0)) if self.schedule.left else -h
        if u0 is None:
            u = np.full(x.size, 0.5 * p.a)
        elif callable(u0):
            u = np.asarray(u0(x), dtype=float) * np.ones(x.size)
        else:
            u = np.array(u0, dtype=float)
        if v0 is None:
            v = np.where(x < h, default_v0(x, h, amplitude), 0.0)
        elif callable(v0):
            v = np.asarray(v0(x), dtype=float) * np.ones(x.size)
        else:
            v = np.array(v0, dtype=float)
        inside = (x < h) & (x > g if g is not None else x >= 0)
        v = np.where(inside, v, 0.0)
        if np.any(u < 0) or np.any(v < 0):
            raise ContractViolation("initial data must be nonnegative")
        K1 = max(float(np.max(u)), p.a)
        K2 = max(float(np.max(v)), 1.0)
        if self.scalar is not None:
            alpha, beta = self.scalar
            K2 = max(float(np.max(v)), alpha / beta)
        return FrontState(0.0, self.grid, u, v, h, g, K1, K2, 0)

    def dt_for(self, state: FrontState) -> float:
        if self._dt is not None:
            return float(self._dt)
        bound = positivity_dt_bound(self.p, state.K1, state.K2, self.scalar)
        if self.schedule.is_free:
            # large mu makes the front update the stiffest part of the scheme
            bound = min(bound, front_dt_bound(self.p, state.K2, self.kv, self.dx))
        return self.dt_factor * bound

    def ensure_extent(self, state: FrontState, far=None) -> FrontState:
        """Grow the grid when a front (or ``far``, if larger) nears its end."""
        grid = state.grid
        own = state.h if state.g is None else max(state.h, -state.g)
        far = own if far is None else max(far, own)
        if not self.schedule.is_free:
            far = max(far, abs(float(self.schedule.right(state.t + 1.0))))
        if far + self.margin <= grid.end:
            return state
        if not self.extend:
            raise InvariantBreach(f"front reached the end of the grid at step {state.step}", state.step)
        target = 2.0 * (far + self.margin) - max(grid.origin, 0.0)
        if self.geometry == "single":
            new = Grid.covering(0.0, target, grid.dx)
            pad = new.n - grid.n
            u = np.concatenate([state.u, np.full(pad, state.u[-1])])
            v = np.concatenate([state.v, np.zeros(pad)])
        else:
            new = Grid.symmetric(target, grid.dx)
            pad = (new.n - grid.n) // 2
            u = np.concatenate([np.full(pad, state.u[0]), state.u, np.full(pad, state.u[-1])])
            v = np.concatenate([np.zeros(pad), state.v, np.zeros(pad)])
        log.debug("extending grid from %d to %d nodes at t=%g", grid.n, new.n, state.t)
        self.tables = self.tables.regrid(new)
        return replace(state, grid=new, u=u, v=v)

    def step(self, state: FrontState, dt=None) -> FrontState:
        dt = self.dt_for(state) if dt is None else dt
        state = self.ensure_extent(state)
        stepper = step_single_front if self.geometry == "single" else step_double_front
        new = stepper(state, self.p, self.tables, self.schedule, dt, scalar=self.scalar)
        check_invariants(state, new, self.scalar)
        return new

    def run(self, T, cadence=None, probes=(), state=None, keep_states=False, stop=None,
            callback=None) -> Trajectory:
        """Integrate to time ``T`` logging every ``cadence`` time units.

        ``stop(state)`` may end the run early; ``callback(state)`` sees every
        accepted step.
        """
        state = state if state is not None else self.initial_state()
        traj = Trajectory(probes=tuple(probes))
        traj.record(state, keep_states)
        if T <= 0:
            traj.final = state
            return traj
        dt = self.dt_for(state)
        nsteps = int(math.ceil(T / dt - 1e-12))
        dt = T / nsteps
        cadence = cadence if cadence is not None else T / 200.0
        every = max(1, int(round(cadence / dt)))
        for i in range(1, nsteps + 1):
            state = self.step(state, dt)
            if callback is not None:
                callback(state)
            if stop is not None and stop(state):
                traj.record(state, keep_states)
                traj.stopped_early = True
                break
            if i % every == 0 or i == nsteps:
                traj.record(state, keep_states)
        traj.final = state
        return traj


def simulate_scalar(kernel: Kernel, d, alpha, beta, schedule: FrontSchedule, T, *, s0=None,
                    dx=None, w0=None, cadence=None, probes=(), geometry="single", **kw):
    """Scalar moving-domain problem w_t = d (int P w - p w) + w (alpha - beta w).

    With a prescribed schedule this is the auxiliary lower-bound problem whose
    solution tends to alpha / beta on growing windows.
    """
    h0 = s0 if s0 is not None else float(schedule.right(0.0)) if schedule.right else 1.0
    p = ModelParams(d1=d, d2=d, r1=1.0, r2=alpha, a=1.0, b=0.0, c=0.0, mu=kw.pop("mu", 1.0), h0=h0)
    sim = FrontSimulator(p, kernel, kernel, geometry=geometry, schedule=schedule, dx=dx,
                         scalar=(alpha, beta), **kw)
    state = sim.initial_state(v0=w0)
    return sim, sim.run(T, cadence=cadence, probes=probes, state=state)


def run_simulation(params: ModelParams, ku: Kernel, kv: Kernel, *, T, geometry="single",
                   schedule=None, u0=None, v0=None, amplitude=0.5, cadence=None, probes=None,
                   lstar=None, thresholds=None, stop=None, keep_states=False, **sim_kw):
    """Run one simulation and summarise it.

    Returns ``(summary, trajectory)`` where ``summary`` is an
    :class:`mutualfront.analysis.RunSummary`.
    """
    from .analysis import summarize_run

    sim = FrontSimulator(params, ku, kv, geometry=geometry, schedule=schedule, **sim_kw)
    state = sim.initial_state(u0=u0, v0=v0, amplitude=amplitude)
    if probes is None:
        probes = (0.0, params.h0, 2.0 * params.h0)
    traj = sim.run(T, cadence=cadence, probes=probes, state=state, keep_states=keep_states,
                   stop=stop)
    summary = summarize_run(traj, params, kv, lstar=lstar, thresholds=thresholds,
                            geometry=geometry)
    return summary, traj
