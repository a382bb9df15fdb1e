"""Wave speeds of the scalar equation w_t = d (J * w - w) + w (alpha - beta w).

* :func:`minimal_speed_kpp` -- the minimal travelling-wave speed from the
  linearisation at 0, c_* = inf_{lam > 0} (d (M(lam) - 1) + alpha) / lam,
  where M is the two-sided moment generating function of J.  Requires an
  exponential moment.
* :func:`solve_semiwave_profile` -- the monotone profile on (-inf, 0] with
  phi(0) = 0 and phi(-inf) = U* = alpha / beta for a given speed c.
* :func:`semi_wave_speed` -- the speed c0 at which the profile's outward flux
  times mu equals c.  Requires a finite first moment.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from .errors import ContractViolation, ConvergenceError, LightTailRequired, NoProfile, NoSemiWave
from .kernels import Kernel

log = logging.getLogger(__name__)

PROFILE_TOL = 1e-10
FAR_FIELD_TOL = 1e-3


@dataclass
class DispersionResult:
    c_star: float
    lambda_hat: float
    lam: np.ndarray
    speed: np.ndarray


@dataclass
class SemiWaveResult:
    c0: float
    x: np.ndarray
    phi: np.ndarray
    u_star: float
    flux_residual: float
    mu: float
    c_star: float | None = None
    L: float | None = None


def _speed_fn(kernel, d, r):
    def s(lam):
        m = kernel.mgf(lam)
        return math.inf if not math.isfinite(m) else (d * (m - 1.0) + r) / lam
    return s


def minimal_speed_kpp(kernel: Kernel, d, r, n_scan=4000) -> DispersionResult:
    """Minimal KPP speed from the dispersion relation (golden-section search).

    The scan over lambda doubles as the unimodality check: the sampled speed
    must decrease to a single minimum and increase afterwards.
    """
    if not kernel.satisfies_j2:
        raise LightTailRequired("the minimal wave speed needs a kernel with a finite exponential "
                                "moment; this kernel is heavy-tailed")
    if not r > 0:
        raise ContractViolation("growth rate must be positive")
    s = _speed_fn(kernel, d, r)
    sc = kernel.scale
    lam_max = kernel.lambda_sup * (1.0 - 1e-9) if math.isfinite(kernel.lambda_sup) else 60.0 / sc
    lam = np.geomspace(1e-6 / sc, lam_max, n_scan)
    vals = np.array([s(x) for x in lam])
    # drop the stretch where the moment generating function overflows
    finite = np.isfinite(vals)
    if not finite[0]:
        raise ConvergenceError("speed function is infinite at the start of the scan")
    stop = int(np.argmin(finite)) if not finite.all() else n_scan
    lam, vals = lam[:stop], vals[:stop]
    n_scan = stop
    i = int(np.argmin(vals))
    if i == 0 or i == n_scan - 1:
        raise ConvergenceError("speed function minimum not interior to the scanned range")
    dv = np.diff(vals)
    noise = 1e-12 * np.abs(vals[i])
    if np.any(dv[:i - 1] > noise) or np.any(dv[i + 1:] < -noise):
        raise ConvergenceError("speed function is not unimodal on the scanned range")
    res = optimize.minimize_scalar(s, bracket=(lam[i - 1], lam[i], lam[i + 1]), method="golden",
                                   tol=1e-10)
    return DispersionResult(float(res.fun), float(res.x), lam, vals)


class _ProfileProblem:
    """Discrete semi-wave equation on nodes x_j = -L + j dx, j = 0 .. n-1 (x_n = 0).

    Densities are U* left of the grid and 0 from x = 0 on.  The kernel samples
    are rescaled so their lattice sum is one, which makes constants exact
    solutions of the dispersal part.
    """

    def __init__(self, kernel, d, alpha, beta, L, dx):
        n = int(round(L / dx))
        if n < 4:
            raise ContractViolation("profile grid too coarse")
        self.kernel, self.d, self.alpha, self.beta = kernel, d, alpha, beta
        self.n, self.dx, self.L = n, dx, n * dx
        self.ustar = alpha / beta
        self.x = -self.L + dx * np.arange(n)
        m = 2 * n + 2
        samples = np.asarray(kernel(dx * np.arange(m)), dtype=float)
        # lattice normalisation, including the continuous tail beyond the samples
        total = dx * (samples[0] + 2.0 * samples[1:].sum()) + 2.0 * kernel.tail_mass((m - 0.5) * dx)
        jhat = samples / total
        self.K = dx * linalg.toeplitz(jhat[:n])
        # dx * sum_{k >= s} jhat_k for s = 1 .. n: mass reaching node i from left of the grid
        tail_sum = dx * (np.cumsum(jhat[::-1])[::-1]) + kernel.tail_mass((m - 0.5) * dx) / total
        self.left = self.ustar * tail_sum[np.arange(n) + 1]
        self.lip = max(alpha, 2.0 * beta * self.ustar - alpha)

    def residual(self, phi, c, central=False):
        adv = np.empty_like(phi)
        if central:
            padded = np.concatenate([[self.ustar], phi, [0.0]])
            adv[:] = 0.5 * (padded[2:] - padded[:-2])
        else:
            adv[:-1] = phi[1:] - phi[:-1]
            adv[-1] = -phi[-1]
        return (self.d * (self.K @ phi + self.left - phi) + c * adv / self.dx
                + phi * (self.alpha - self.beta * phi))

    def jacobian(self, phi, c, central=False):
        n = self.n
        Jm = self.d * self.K.copy()
        idx = np.arange(n - 1)
        diag = -self.d + self.alpha - 2.0 * self.beta * phi
        if central:
            Jm[idx, idx + 1] += 0.5 * c / self.dx
            Jm[idx + 1, idx] -= 0.5 * c / self.dx
        else:
            diag = diag - c / self.dx
            Jm[idx, idx + 1] += c / self.dx
        Jm[np.diag_indices(n)] += diag
        return Jm

    def march(self, phi, c, tol, max_iter=50000):
        tau = 0.9 / (self.d + c / self.dx + self.lip)
        for _ in range(max_iter):
            step = tau * self.residual(phi, c)
            phi = np.clip(phi + step, 0.0, self.ustar)
            if np.max(np.abs(step)) < tol:
                return phi
        raise ConvergenceError(f"pseudo-time marching did not settle at c = {c:g}")

    def newton(self, phi, c, tol, max_iter=30, central=True):
        for _ in range(max_iter):
            F = self.residual(phi, c, central)
            with warnings.catch_warnings():
                # conditioning is judged by the converged result, not the solver
                warnings.simplefilter("ignore", linalg.LinAlgWarning)
                delta = linalg.solve(self.jacobian(phi, c, central), -F)
            phi = phi + delta
            if np.max(np.abs(delta)) < tol:
                return phi
            if not np.all(np.isfinite(phi)):
                break
        raise ConvergenceError(f"Newton polish failed at c = {c:g}")


def _profile(prob: _ProfileProblem, c, guess=None):
    phi = None
    if guess is not None:
        try:
            phi = prob.newton(np.asarray(guess, dtype=float), c, PROFILE_TOL)
            ok = (np.all(phi >= -1e-9) and np.all(phi <= prob.ustar + 1e-9)
                  and np.all(np.diff(phi) <= 1e-9))
            if not ok:
                phi = None
        except (ConvergenceError, linalg.LinAlgError):
            phi = None
    if phi is None:
        phi = prob.march(np.full(prob.n, prob.ustar), c, 1e-7)
        _check_far_field(prob, phi, c)
        phi = prob.newton(phi, c, PROFILE_TOL, central=False)
        try:
            phi = prob.newton(phi, c, PROFILE_TOL)
        except (ConvergenceError, linalg.LinAlgError):
            # near c_* the leading edge is tiny and the central scheme loses the
            # solution; the first-order upwind profile is still a valid answer
            log.warning("central polish failed at c = %g; keeping the upwind profile", c)
    if np.any(np.diff(phi) > 1e-8):
        raise ConvergenceError(f"profile at c = {c:g} is not monotone")
    # clear rounding noise so the returned samples are exactly nonincreasing in x
    phi = np.minimum.accumulate(np.clip(phi, 0.0, prob.ustar))
    _check_far_field(prob, phi, c)
    return phi


def _check_far_field(prob, phi, c):
    if prob.ustar - phi[0] > FAR_FIELD_TOL:
        raise NoProfile(f"no semi-wave profile at c = {c:g} on [-{prob.L:g}, 0]: the solution "
                        f"collapses away from U* (phi(-L) = {phi[0]:.4g}, U* = {prob.ustar:.4g})")


def solve_semiwave_profile(kernel: Kernel, d, alpha, beta, c, L=None, dx=None, guess=None):
    """Monotone profile of d (J*phi - phi) + c phi' + phi (alpha - beta phi) = 0 on (-L, 0).

    Returns ``(x, phi)`` with phi(0) = 0 appended at x = 0.  Raises
    :class:`NoProfile` when the truncated solution does not reach U* at -L,
    which is what happens for c at or above the minimal wave speed.
    """
    if c < 0:
        raise ContractViolation("semi-wave speed must be nonnegative")
    L = L if L is not None else 40.0 * kernel.scale
    dx = dx if dx is not None else kernel.scale / 20.0
    if L < 40.0 * kernel.scale - 1e-12:
        raise ContractViolation("truncation length must be at least 40 kernel scales")
    prob = _ProfileProblem(kernel, d, alpha, beta, L, dx)
    phi = _profile(prob, c, guess)
    return np.append(prob.x, 0.0), np.append(phi, 0.0)


def _flux(prob: _ProfileProblem, phi):
    """integral over (-inf, 0) of phi(x) T(-x) dx; phi = U* left of -L."""
    w = np.full(prob.n, prob.dx)
    w[0] *= 0.5
    inner = float(np.dot(w * phi, prob.kernel.tail_mass(-prob.x)))
    return inner + prob.ustar * prob.kernel.tail_moment(prob.L)


def semi_wave_speed(kernel: Kernel, d, alpha, beta, mu, L=None, dx=None, tol=1e-9,
                    refine_L=True) -> SemiWaveResult:
    """Speed c0 solving c = mu * flux(phi_c), by bracketed root finding on
    Psi(c) = mu * flux(phi_c) - c.

    Psi(0) > 0 and Psi decreases; speeds without a profile count as Psi < 0.
    The bracket is [0, c_*) for light tails and grows geometrically otherwise.
    With ``refine_L`` the truncation is doubled until c0 moves by < 1e-4.
    """
    if not kernel.satisfies_j1:
        raise NoSemiWave("no semi-wave: the kernel has an infinite first moment, fronts "
                         "accelerate instead of settling to a finite speed")
    if not mu > 0:
        raise ContractViolation("mu must be positive")
    L = L if L is not None else 40.0 * kernel.scale
    c_star = minimal_speed_kpp(kernel, d, alpha).c_star if kernel.satisfies_j2 else None
    result = _semi_wave_speed_at(kernel, d, alpha, beta, mu, L, dx, tol, c_star)
    if refine_L:
        for _ in range(4):
            nxt = _semi_wave_speed_at(kernel, d, alpha, beta, mu, 2.0 * result.L, dx, tol, c_star)
            done = abs(nxt.c0 - result.c0) < 1e-4
            result = nxt
            if done:
                break
    return result


def _semi_wave_speed_at(kernel, d, alpha, beta, mu, L, dx, tol, c_star):
    dx = dx if dx is not None else kernel.scale / 20.0
    prob = _ProfileProblem(kernel, d, alpha, beta, L, dx)
    cache = {}

    def psi(c):
        if c in cache:
            return cache[c][0]
        guess = None
        if cache:
            near = min(cache, key=lambda k: abs(k - c) if cache[k][1] is not None else math.inf)
            guess = cache[near][1]
        try:
            phi = _profile(prob, c, guess)
            val = mu * _flux(prob, phi) - c
        except NoProfile:
            phi, val = None, -c
        except ConvergenceError:
            # Psi is decreasing: a smaller speed already known negative settles the sign
            if not any(k < c and v[0] < 0 for k, v in cache.items()):
                raise
            phi, val = None, -c
        cache[c] = (val, phi)
        return val

    lo = 0.0
    if psi(lo) <= 0:
        raise ConvergenceError("flux of the stationary profile vanished; cannot bracket c0")
    if c_star is not None:
        # c0 < c_* always holds, so Psi is negative at the top of the bracket.  Close to
        # c_* the truncated profile may not settle at all, so walk the upper end down
        # until it is either a computed negative value or a confirmed positive one.
        hi = c_star * (1.0 - 1e-9)
        cache[hi] = (-hi, None)
        top = hi
        for _ in range(60):
            mid = 0.5 * (lo + top)
            try:
                val = psi(mid)
            except ConvergenceError:
                top = mid
                continue
            if val > 0:
                lo = mid
            else:
                hi = mid
                break
            if top - lo < tol:
                break
        else:
            raise ConvergenceError("could not bracket c0 below the spreading speed")
        if hi > top:
            hi = top
            cache[hi] = (-hi, None)
    else:
        hi = max(1.0, mu) * kernel.scale
        while psi(hi) > 0:
            lo, hi = hi, 2.0 * hi
    c0 = optimize.brentq(psi, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
    val = psi(c0)
    phi = cache[c0][1]
    if phi is None:
        # root sits on the collapse edge; take the nearest speed with a profile
        c_ok = max(k for k in cache if cache[k][1] is not None and k <= c0)
        c0, (val, phi) = c_ok, cache[c_ok]
    return SemiWaveResult(float(c0), np.append(prob.x, 0.0), np.append(phi, 0.0),
                          prob.ustar, float(val), float(mu), c_star, prob.L)
