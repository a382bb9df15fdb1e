"""Principal eigenvalue of the truncated dispersal operator

    (L + a0) phi = d * ( integral_{l1}^{l2} J(x - y) phi(y) dy - m(x) phi ) + a0 phi

with m = j (half-line mass) or m = 1 (whole line), and the critical lengths
at which it changes sign.

The operator is discretised by the trapezoid rule on a uniform grid.  After a
diagonal shift the matrix is entrywise positive, so its Perron root is found by
power iteration; the Collatz-Wielandt quotients bracket the root at every
iterate and serve as the stopping test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, ConvergenceError, NoCriticalLength
from .kernels import Kernel

N_MIN = 65


@dataclass
class EigenResult:
    lambda_p: float
    x: np.ndarray
    phi: np.ndarray
    residual: float
    interval: tuple
    a0: float
    iterations: int


def _interval(interval):
    if np.isscalar(interval):
        return 0.0, float(interval)
    l1, l2 = map(float, interval)
    return l1, l2


def discretize(kernel: Kernel, d, a0, interval, mass_mode="half_line", dx=None, n=None):
    """Nodes, trapezoid weights and the dense matrix of L + a0."""
    l1, l2 = _interval(interval)
    if not l2 > l1:
        raise ContractViolation("eigenvalue interval must be nondegenerate")
    if mass_mode not in ("half_line", "whole_line"):
        raise ContractViolation(f"unknown mass mode {mass_mode!r}")
    if mass_mode == "half_line" and l1 < 0:
        raise ContractViolation("half-line eigenproblems live on subintervals of [0, inf)")
    if n is None:
        dx = dx if dx is not None else kernel.scale / 16.0
        n = max(N_MIN, int(math.ceil((l2 - l1) / dx - 1e-9)) + 1)
    x = np.linspace(l1, l2, n)
    h = (l2 - l1) / (n - 1)
    omega = np.full(n, h)
    omega[0] = omega[-1] = 0.5 * h
    mass = kernel.half_line_mass(x) if mass_mode == "half_line" else np.ones(n)
    K = kernel(x[:, None] - x[None, :])
    A = d * K * omega[None, :]
    A[np.diag_indices(n)] += a0 - d * mass
    return x, omega, A, np.asarray(mass)


def _collatz(B, phi):
    psi = B @ phi
    q = psi / phi
    return psi, q.min(), q.max()


def perron_power(B, phi0=None, tol=1e-10, plain_iter=300, max_squarings=64):
    """Perron root and vector of an entrywise positive matrix.

    Plain power iteration first; if the Collatz-Wielandt bracket is still wider
    than ``tol`` (relative) the iteration continues with powers B^(2^k) formed
    by repeated squaring, which is the same power method taken in larger
    strides.
    """
    n = B.shape[0]
    phi = np.ones(n) if phi0 is None else np.maximum(np.asarray(phi0, dtype=float), 1e-300)
    phi = phi / phi.max()
    lo = hi = None
    it = 0
    for it in range(1, plain_iter + 1):
        psi, lo, hi = _collatz(B, phi)
        if hi - lo <= tol * hi:
            return 0.5 * (lo + hi), psi / psi.max(), it, hi - lo
        phi = psi / psi.max()
    P = B / np.abs(B).max()
    stride = 1
    for _ in range(max_squarings):
        P = P @ P
        P /= P.max()
        stride *= 2
        phi = P @ phi
        phi /= phi.max()
        it += stride
        _, lo, hi = _collatz(B, phi)
        if hi - lo <= tol * hi:
            psi = B @ phi
            return 0.5 * (lo + hi), psi / psi.max(), it, hi - lo
    raise ConvergenceError(f"power iteration did not reach relative gap {tol:g} "
                           f"(last Collatz-Wielandt gap {hi - lo:.3e})", residual=hi - lo)


def principal_eigenvalue(kernel: Kernel, d, a0, interval, mass_mode="half_line", dx=None,
                         n=None, tol=1e-10, phi0=None) -> EigenResult:
    """Principal eigenpair of L + a0 on ``interval`` (a length or a pair (l1, l2))."""
    x, omega, A, mass = discretize(kernel, d, a0, interval, mass_mode, dx, n)
    shift = d * float(np.max(mass)) + abs(a0) + 1.0
    B = A.copy()
    B[np.diag_indices_from(B)] += shift
    rho, phi, iters, _ = perron_power(B, phi0, tol)
    # Rayleigh quotient in the omega-weighted inner product, where A is self-adjoint
    Aphi = A @ phi
    lam = float(np.dot(omega * phi, Aphi) / np.dot(omega * phi, phi))
    if abs(lam - (rho - shift)) > 10 * tol * rho + 1e-12:
        lam = rho - shift
    residual = float(np.max(np.abs(Aphi - lam * phi)))
    return EigenResult(lam, x, phi, residual, _interval(interval), float(a0), iters)


def eigen_curve(kernel: Kernel, d, a0, lengths, mass_mode="half_line", dx=None):
    """(length, lambda_p) pairs for intervals (0, length)."""
    return [(float(L), principal_eigenvalue(kernel, d, a0, L, mass_mode, dx).lambda_p)
            for L in lengths]


def critical_length(kernel: Kernel, d, r2, mass_mode="half_line", tol=1e-6, dx=None,
                    max_expand=12) -> float:
    """Length l with lambda_p(L_(0,l) + r2) = 0, by bisection on the length.

    The half-line threshold exists only for r2 < d/2, the whole-line one only
    for r2 < d; otherwise every interval is unstable and
    :class:`NoCriticalLength` is raised.
    """
    limit = 0.5 * d if mass_mode == "half_line" else d
    if not 0 < r2 < limit:
        regime = "r2 >= d/2 on the half-line" if mass_mode == "half_line" else "r2 >= d on the line"
        raise NoCriticalLength(f"no critical length: {regime}, every interval has "
                               f"lambda_p > 0 and spreading is unconditional")
    dx = dx if dx is not None else kernel.scale / 16.0

    def lam(L, n, phi0=None):
        return principal_eigenvalue(kernel, d, r2, L, mass_mode, n=n, tol=1e-13, phi0=phi0)

    lo, hi = dx, 40.0 * kernel.scale
    # coarse geometric scan to find a short bracket, then fix the node count
    grid = np.geomspace(lo, hi, 16)
    bracket = None
    for _ in range(max_expand):
        vals = [lam(L, max(N_MIN, int(math.ceil(L / dx)) + 1)).lambda_p for L in grid]
        for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
            if fa < 0 <= fb:
                bracket = (a, b)
                break
        if bracket is not None:
            break
        if vals[0] >= 0:
            grid = grid / 4.0
        else:
            grid = grid * 4.0
    if bracket is None:
        raise ConvergenceError("could not bracket the critical length")
    lo, hi = bracket
    n = max(N_MIN, int(math.ceil(hi / dx)) + 1)
    rlo, rhi = lam(lo, n), lam(hi, n)
    while rlo.lambda_p > 0:
        lo *= 0.5
        rlo = lam(lo, n)
    while rhi.lambda_p < 0:
        hi *= 1.5
        rhi = lam(hi, n)
    phi = rhi.phi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = lam(mid, n, phi)
        phi = r.phi
        if abs(r.lambda_p) <= tol:
            return mid
        if r.lambda_p < 0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError("critical length bisection did not converge")
