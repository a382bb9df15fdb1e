"""Even dispersal kernels and their tail integrals.

Every kernel is a probability density on the line: nonnegative, even,
continuous, bounded and positive at the origin.  Besides point evaluation each
kernel knows

* ``tail_mass(s)``   = integral of J over (s, inf),
* ``half_line_mass(x)`` = integral of J(x - y) over y in (0, inf) = 1 - tail_mass(x),
* ``tail_moment(s)`` = integral of tail_mass over (s, inf), the far-field part
  of the boundary flux,
* ``mgf(lam)``       = integral of J(x) exp(lam x) over the line (light tails only).

Two tail classes matter downstream: a finite first moment (``satisfies_j1``)
and a finite exponential moment (``satisfies_j2``).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, special

from .errors import ContractViolation, ExtrapolationError

QUAD_EPSABS = 1e-12


class Kernel:
    """Base class; subclasses fill in the closed forms."""

    family: str = "kernel"
    satisfies_j1: bool = True
    satisfies_j2: bool = True

    @property
    def compact_support(self) -> float | None:
        return None

    @property
    def scale(self) -> float:
        """Characteristic length used for grid and truncation defaults."""
        raise NotImplementedError

    @property
    def normalization(self) -> float:
        raise NotImplementedError

    @property
    def lambda_sup(self) -> float:
        """Abscissa of convergence of ``mgf`` (0 for heavy tails)."""
        return math.inf if self.satisfies_j2 else 0.0

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        out = self._eval_abs(x)
        return out if out.ndim else float(out)

    def tail_mass(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        t = self._tail_abs(a)
        out = np.where(s >= 0, t, 1.0 - t)
        return out if out.ndim else float(out)

    def half_line_mass(self, x):
        x = np.asarray(x, dtype=float)
        out = 1.0 - np.asarray(self.tail_mass(x))
        return out if out.ndim else float(out)

    def tail_moment(self, s):
        """Integral of ``tail_mass`` over (s, inf), s >= 0."""
        s = float(s)
        if not self.satisfies_j1:
            return math.inf
        val, _ = integrate.quad(self._tail_abs_scalar, s, math.inf, epsabs=QUAD_EPSABS, limit=200)
        return val

    def mgf(self, lam):
        lam = float(lam)
        if lam >= self.lambda_sup:
            return math.inf
        val, _ = integrate.quad(lambda z: float(self._eval_abs(np.asarray(z))) * math.cosh(lam * z),
                                0.0, math.inf, epsabs=QUAD_EPSABS, limit=200)
        return 2.0 * val

    def first_moment(self, upper=math.inf):
        """Integral of x J(x) over (0, upper)."""
        val, _ = integrate.quad(lambda z: z * float(self._eval_abs(np.asarray(z))), 0.0, upper,
                                epsabs=QUAD_EPSABS, limit=500)
        return val

    def _tail_abs_scalar(self, s):
        return float(self._tail_abs(np.asarray(s, dtype=float)))

    def _eval_abs(self, a):
        raise NotImplementedError

    def _tail_abs(self, a):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Triangle(Kernel):
    """J(x) = (1 - |x|/R)_+ / R."""

    radius: float = 1.0
    family = "triangle"

    def __post_init__(self):
        if not self.radius > 0:
            raise ContractViolation("triangle radius must be positive")

    @property
    def compact_support(self):
        return self.radius

    @property
    def scale(self):
        return self.radius

    @property
    def normalization(self):
        return 1.0 / self.radius

    def _eval_abs(self, a):
        R = self.radius
        return np.where(a < R, (1.0 - a / R) / R, 0.0)

    def _tail_abs(self, a):
        R = self.radius
        return np.where(a < R, 0.5 * (1.0 - a / R) ** 2, 0.0)

    def tail_moment(self, s):
        R = self.radius
        s = float(s)
        return (R - s) ** 3 / (6.0 * R * R) if s < R else 0.0

    def mgf(self, lam):
        z = float(lam) * self.radius
        if abs(z) < 1e-4:
            return 1.0 + z * z / 12.0 + z ** 4 / 360.0
        return 2.0 * (math.cosh(z) - 1.0) / (z * z)

    def describe(self):
        return {"family": self.family, "radius": self.radius}


@dataclass(frozen=True)
class Laplace(Kernel):
    """J(x) = exp(-|x|/s) / (2 s)."""

    length: float = 1.0
    family = "laplace"

    def __post_init__(self):
        if not self.length > 0:
            raise ContractViolation("laplace scale must be positive")

    @property
    def scale(self):
        return self.length

    @property
    def normalization(self):
        return 0.5 / self.length

    @property
    def lambda_sup(self):
        return 1.0 / self.length

    def _eval_abs(self, a):
        return np.exp(-a / self.length) / (2.0 * self.length)

    def _tail_abs(self, a):
        return 0.5 * np.exp(-a / self.length)

    def tail_moment(self, s):
        return 0.5 * self.length * math.exp(-float(s) / self.length)

    def mgf(self, lam):
        z = float(lam) * self.length
        if abs(z) >= 1.0:
            return math.inf
        return 1.0 / (1.0 - z * z)

    def describe(self):
        return {"family": self.family, "scale": self.length}


@dataclass(frozen=True)
class Gaussian(Kernel):
    """J(x) = exp(-x^2 / (2 s^2)) / (s sqrt(2 pi))."""

    length: float = 1.0
    family = "gaussian"

    def __post_init__(self):
        if not self.length > 0:
            raise ContractViolation("gaussian scale must be positive")

    @property
    def scale(self):
        return self.length

    @property
    def normalization(self):
        return 1.0 / (self.length * math.sqrt(2.0 * math.pi))

    def _eval_abs(self, a):
        return self.normalization * np.exp(-0.5 * (a / self.length) ** 2)

    def _tail_abs(self, a):
        return 0.5 * special.erfc(a / (self.length * math.sqrt(2.0)))

    def tail_moment(self, s):
        sig = self.length
        s = float(s)
        return 0.5 * (sig * math.sqrt(2.0 / math.pi) * math.exp(-0.5 * (s / sig) ** 2)
                      - s * math.erfc(s / (sig * math.sqrt(2.0))))

    def mgf(self, lam):
        e = 0.5 * (float(lam) * self.length) ** 2
        return math.exp(e) if e < 700.0 else math.inf

    def describe(self):
        return {"family": self.family, "scale": self.length}


@dataclass(frozen=True)
class Algebraic(Kernel):
    """J(x) = c (1 + |x|/s)^(-gamma) with c = (gamma - 1) / (2 s).

    ``shift`` (s) sets the width of the bounded core; the tail behaves like
    |x|^(-gamma).  The first moment is finite iff gamma > 2; no exponential
    moment exists for any gamma.
    """

    gamma: float = 3.0
    shift: float = 1.0
    family = "algebraic"
    satisfies_j2 = False

    def __post_init__(self):
        if not self.gamma > 1:
            raise ContractViolation("algebraic kernel needs gamma > 1 to be integrable")
        if not self.shift > 0:
            raise ContractViolation("algebraic shift must be positive")

    @property
    def satisfies_j1(self):
        return self.gamma > 2

    @property
    def scale(self):
        return self.shift

    @property
    def normalization(self):
        return 0.5 * (self.gamma - 1.0) / self.shift

    def _eval_abs(self, a):
        return self.normalization * (1.0 + a / self.shift) ** (-self.gamma)

    def _tail_abs(self, a):
        return 0.5 * (1.0 + a / self.shift) ** (1.0 - self.gamma)

    def tail_moment(self, s):
        if not self.satisfies_j1:
            return math.inf
        g = self.gamma
        return 0.5 * self.shift * (1.0 + float(s) / self.shift) ** (2.0 - g) / (g - 2.0)

    def mgf(self, lam):
        return 1.0 if lam == 0 else math.inf

    def describe(self):
        return {"family": self.family, "gamma": self.gamma, "shift": self.shift}


@dataclass(frozen=True, eq=False)
class Tabulated(Kernel):
    """Piecewise-linear kernel through samples (x_k, J_k), x_0 = 0 < x_1 < ...

    Samples are rescaled so the even extension integrates to one.  When the last
    sample is zero the kernel is taken to vanish beyond it; otherwise queries
    past the last abscissa raise :class:`ExtrapolationError`.  Tail flags are
    declared by the caller, never inferred.
    """

    x: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    j1: bool = True
    j2: bool = True
    family = "tabulated"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ContractViolation("tabulated kernel needs two equal-length 1-D sample arrays")
        if x[0] != 0.0 or np.any(np.diff(x) <= 0):
            raise ContractViolation("tabulated abscissae must start at 0 and increase strictly")
        if np.any(y < 0) or y[0] <= 0:
            raise ContractViolation("tabulated values must be nonnegative with J(0) > 0")
        if self.j2 and not self.j1:
            raise ContractViolation("an exponential moment implies a first moment")
        half = float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))
        y = y / (2.0 * half)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))])
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", y)
        object.__setattr__(self, "_cum", cum)

    @classmethod
    def from_csv(cls, path, j1=True, j2=True):
        rows = []
        with open(Path(path), newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    continue  # header line
        arr = np.array(rows)
        return cls(arr[:, 0], arr[:, 1], j1=j1, j2=j2)

    @property
    def satisfies_j1(self):
        return self.j1

    @property
    def satisfies_j2(self):
        return self.j2

    @property
    def compact_support(self):
        return float(self.x[-1]) if self.values[-1] == 0.0 else None

    @property
    def scale(self):
        # standard deviation of the tabulated density
        m2 = np.sum(np.diff(self.x) * 0.5 * (self.values[1:] * self.x[1:] ** 2
                                              + self.values[:-1] * self.x[:-1] ** 2))
        return float(math.sqrt(2.0 * m2))

    @property
    def normalization(self):
        return float(self.values[0])

    @property
    def lambda_sup(self):
        if self.compact_support is not None:
            return math.inf
        return super().lambda_sup

    def _check_range(self, a):
        if self.compact_support is None and np.any(a > self.x[-1]):
            raise ExtrapolationError(
                f"tabulated kernel queried at |x| = {float(np.max(a)):g} beyond its last sample "
                f"{self.x[-1]:g}")

    def _eval_abs(self, a):
        self._check_range(a)
        return np.interp(a, self.x, self.values, right=0.0)

    def _tail_abs(self, a):
        self._check_range(a)
        a = np.minimum(a, self.x[-1])
        k = np.clip(np.searchsorted(self.x, a, side="right") - 1, 0, self.x.size - 2)
        ja = np.interp(a, self.x, self.values)
        cum = self._cum[k] + 0.5 * (a - self.x[k]) * (self.values[k] + ja)
        return np.maximum(0.5 - cum, 0.0)

    def tail_moment(self, s):
        if self.compact_support is None:
            raise ExtrapolationError("tail moment of a non-compact tabulated kernel is undefined")
        s = float(s)
        if s >= self.x[-1]:
            return 0.0
        val, _ = integrate.quad(self._tail_abs_scalar, s, float(self.x[-1]), epsabs=QUAD_EPSABS,
                                limit=max(50, 4 * self.x.size))
        return val

    def mgf(self, lam):
        if self.compact_support is None:
            raise ExtrapolationError("mgf of a non-compact tabulated kernel is undefined")
        grid = np.linspace(0.0, self.x[-1], 8 * self.x.size + 1)
        return float(2.0 * integrate.simpson(self(grid) * np.cosh(lam * grid), x=grid))

    def describe(self):
        return {"family": self.family, "x": self.x.tolist(), "values": self.values.tolist(),
                "j1": self.j1, "j2": self.j2}


FAMILIES = {
    "triangle": (Triangle, {"radius"}),
    "laplace": (Laplace, {"scale"}),
    "gaussian": (Gaussian, {"scale"}),
    "algebraic": (Algebraic, {"gamma", "shift"}),
    "tabulated": (Tabulated, {"path", "x", "values", "j1", "j2"}),
}


def make_kernel(spec: dict) -> Kernel:
    """Build a kernel from a ``{"family": ..., **params}`` mapping."""
    from .errors import ConfigError

    spec = dict(spec)
    fam = str(spec.pop("family", "")).lower()
    if fam not in FAMILIES:
        raise ConfigError(f"unknown kernel family {fam!r}; valid families: {', '.join(FAMILIES)}")
    cls, allowed = FAMILIES[fam]
    extra = set(spec) - allowed
    if extra:
        raise ConfigError(f"unknown parameter(s) {sorted(extra)} for kernel family {fam!r}")
    try:
        if fam == "triangle":
            return Triangle(float(spec.get("radius", 1.0)))
        if fam in ("laplace", "gaussian"):
            return cls(float(spec.get("scale", 1.0)))
        if fam == "algebraic":
            if "gamma" not in spec:
                raise ConfigError("algebraic kernel requires field 'gamma'")
            return Algebraic(float(spec["gamma"]), float(spec.get("shift", 1.0)))
        if "j1" not in spec or "j2" not in spec:
            raise ConfigError("tabulated kernel must declare both 'j1' and 'j2' flags")
        if "path" in spec:
            return Tabulated.from_csv(spec["path"], j1=bool(spec["j1"]), j2=bool(spec["j2"]))
        return Tabulated(np.asarray(spec["x"]), np.asarray(spec["values"]),
                         j1=bool(spec["j1"]), j2=bool(spec["j2"]))
    except ContractViolation as exc:
        raise ConfigError(str(exc)) from exc


def evaluate(k: Kernel, x):
    return k(x)


def tail_mass(k: Kernel, s):
    return k.tail_mass(s)


def half_line_mass(k: Kernel, x):
    return k.half_line_mass(x)
