"""Uniform-grid discretisation of the nonlocal dispersal operator

    (L w)(x) = d * ( integral_Omega J(x - y) w(y) dy - m(x) w(x) )

and of the outward-flux integrals that drive the free boundaries.

All integrals use the composite trapezoid rule.  A moving front sitting between
two nodes is handled by one extra fractional cell in which the density is
interpolated linearly down to zero at the front, so quadrature weights vary
continuously with the front position.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg, signal

from .errors import ContractViolation
from .kernels import Kernel

DIRECT_MAX_N = 2048


@dataclass(frozen=True)
class Grid:
    """Uniform nodes x_i = (offset + i) * dx, i = 0 .. n-1.

    Coordinates are integer multiples of ``dx`` so a grid centred on 0 is
    mirror-symmetric bit for bit.
    """

    dx: float
    n: int
    offset: int = 0

    def __post_init__(self):
        if not self.dx > 0 or self.n < 1:
            raise ContractViolation("grid needs dx > 0 and at least one node")

    @classmethod
    def covering(cls, a, b, dx):
        """Grid with spacing ``dx`` from the node nearest ``a`` to at least ``b``."""
        off = int(round(a / dx))
        n = int(np.ceil(b / dx - off - 1e-9)) + 1
        return cls(float(dx), max(n, 1), off)

    @classmethod
    def symmetric(cls, half_width, dx):
        m = int(np.ceil(half_width / dx - 1e-9))
        return cls(float(dx), 2 * m + 1, -m)

    @cached_property
    def x(self) -> np.ndarray:
        return (self.offset + np.arange(self.n)) * self.dx

    @property
    def origin(self) -> float:
        return self.offset * self.dx

    @property
    def end(self) -> float:
        return (self.offset + self.n - 1) * self.dx

    def index_above(self, pos) -> int:
        """Smallest node index with x_i >= pos (n if none)."""
        return int(np.searchsorted(self.x, pos, side="left"))

    def index_right_of(self, pos) -> int:
        """Smallest node index with x_i > pos."""
        return int(np.searchsorted(self.x, pos, side="right"))


@dataclass(eq=False)
class OperatorTable:
    """Kernel samples, mass samples and cached operators for one grid.

    ``domain`` is ``"half_line"`` (integration from 0, mass j(x) as for the
    single-front model) or ``"whole_line"`` (mass identically 1).
    """

    kernel: Kernel
    grid: Grid
    domain: str = "half_line"
    backend: str = "auto"
    quadrature: str = field(default="trapezoid", init=False)

    def __post_init__(self):
        if self.domain not in ("half_line", "whole_line"):
            raise ContractViolation(f"unknown domain {self.domain!r}")
        if self.backend not in ("auto", "direct", "fft"):
            raise ContractViolation(f"unknown backend {self.backend!r}")
        n = self.grid.n
        self.samples = np.asarray(self.kernel(self.grid.dx * np.arange(n)), dtype=float)
        if self.domain == "half_line":
            self.mass = np.asarray(self.kernel.half_line_mass(self.grid.x), dtype=float)
        else:
            self.mass = np.ones(n)
        # J(x_i - x_last) tail weights for constant extension
        self.right_tail = np.asarray(self.kernel.tail_mass(self.grid.end - self.grid.x))
        self.left_tail = np.asarray(self.kernel.tail_mass(self.grid.x - self.grid.origin))

    @property
    def use_fft(self) -> bool:
        if self.backend == "auto":
            return self.grid.n > DIRECT_MAX_N
        return self.backend == "fft"

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense symmetric Toeplitz matrix J((i - j) dx)."""
        return linalg.toeplitz(self.samples)

    @cached_property
    def _full_samples(self) -> np.ndarray:
        return np.concatenate([self.samples[:0:-1], self.samples])

    def convolve(self, q, lo, hi, rows=None):
        """sum_j J(x_i - x_j) q_j over j in [lo, hi), for the requested rows."""
        n = self.grid.n
        r0, r1 = (0, n) if rows is None else rows
        if hi <= lo or r1 <= r0:
            return np.zeros(r1 - r0)
        if not self.use_fft:
            return self.matrix[r0:r1, lo:hi] @ q[lo:hi]
        # row i needs offsets i - j in [r0 - hi + 1, r1 - lo - 1]
        return signal.fftconvolve(q[lo:hi], self._band(lo, hi, r0, r1), mode="valid")

    def _band(self, lo, hi, r0, r1):
        # samples J(k dx) for k from r0 - (hi - 1) to (r1 - 1) - lo
        n = self.grid.n
        k0, k1 = r0 - (hi - 1), (r1 - 1) - lo
        return self._full_samples[k0 + n - 1: k1 + n]


def quadrature_weights(grid: Grid, lo: int, hi: int, left_end=None, right_end=None) -> np.ndarray:
    """Trapezoid weights for nodes ``lo .. hi-1``.

    ``right_end`` (``left_end``) is a continuous front position beyond the last
    (first) active node at which the integrand is zero; the fractional cell up
    to it is included.  Without it the interval ends at the node itself.
    """
    w = np.zeros(grid.n)
    if hi <= lo:
        return w
    x = grid.x
    pts = x[lo:hi]
    prev = np.empty(hi - lo)
    nxt = np.empty(hi - lo)
    prev[1:] = pts[:-1]
    nxt[:-1] = pts[1:]
    prev[0] = pts[0] if left_end is None else min(float(left_end), pts[0])
    nxt[-1] = pts[-1] if right_end is None else max(float(right_end), pts[-1])
    w[lo:hi] = 0.5 * (nxt - prev)
    return w


def apply_nonlocal(tbl: OperatorTable, w, active, d, closure="zero", left_end=None,
                   right_end=None, rows=None) -> np.ndarray:
    """d * [ sum_{j in active} w_j J(x_i - x_j) omega_j - m_i w_i ] on every node.

    ``active`` is a half-open index interval ``(lo, hi)``.  With
    ``closure="constant"`` the density is continued past the last node at the
    value of that node (and, on the whole line, before the first node at the
    first value); the extension contributes ``w_last * T(x_last - x_i)``.
    ``rows`` restricts the output to a half-open row interval; the returned
    array then has that length.
    """
    w = np.asarray(w, dtype=float)
    n = tbl.grid.n
    if w.shape != (n,):
        raise ContractViolation(f"sample vector has shape {w.shape}, grid has {n} nodes")
    if closure not in ("zero", "constant"):
        raise ContractViolation(f"unknown far-field closure {closure!r}")
    lo, hi = int(active[0]), int(active[1])
    r0, r1 = (0, n) if rows is None else (int(rows[0]), int(rows[1]))
    if hi <= lo:
        return np.zeros(r1 - r0)
    omega = quadrature_weights(tbl.grid, lo, hi, left_end, right_end)
    q = omega * w
    out = tbl.convolve(q, lo, hi, rows=(r0, r1))
    if closure == "constant":
        if hi == n:
            out = out + w[n - 1] * tbl.right_tail[r0:r1]
        if tbl.domain == "whole_line" and lo == 0:
            out = out + w[0] * tbl.left_tail[r0:r1]
    out -= tbl.mass[r0:r1] * w[r0:r1]
    return d * out


def _check_density(v):
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ContractViolation("densities entering a boundary flux must be nonnegative")
    return v


def boundary_flux_right(tbl: OperatorTable, v, h, mu, active=None, left_end=None) -> float:
    """mu * integral of v(x) T(h - x) over the occupied interval (>= 0).

    ``active`` defaults to the nodes strictly left of ``h`` (and right of
    ``left_end`` when given).
    """
    v = _check_density(v)
    grid = tbl.grid
    if active is None:
        lo = 0 if left_end is None else grid.index_right_of(left_end)
        active = (lo, grid.index_above(h))
    lo, hi = active
    if hi <= lo:
        return 0.0
    omega = quadrature_weights(grid, lo, hi, left_end, h)
    tail = tbl.kernel.tail_mass(h - grid.x[lo:hi])
    return float(mu * np.dot(omega[lo:hi] * v[lo:hi], tail))


def boundary_flux_left(tbl: OperatorTable, v, g, mu, active=None, right_end=None) -> float:
    """-mu * integral of v(x) T(x - g) over the occupied interval (<= 0)."""
    v = _check_density(v)
    grid = tbl.grid
    if active is None:
        hi = grid.n if right_end is None else grid.index_above(right_end)
        lo = grid.index_right_of(g)
        active = (lo, hi)
    lo, hi = active
    if hi <= lo:
        return 0.0
    omega = quadrature_weights(grid, lo, hi, g, right_end)
    tail = tbl.kernel.tail_mass(grid.x[lo:hi] - g)
    return float(-mu * np.dot(omega[lo:hi] * v[lo:hi], tail))
