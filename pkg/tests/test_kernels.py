import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from mutualfront.errors import ConfigError, ExtrapolationError
from mutualfront.kernels import (Algebraic, Gaussian, Laplace, Tabulated, Triangle, half_line_mass,
                                 make_kernel, tail_mass)

KERNELS = [Triangle(1.0), Triangle(2.5), Laplace(1.0), Laplace(0.4), Gaussian(1.0),
           Algebraic(1.5), Algebraic(3.0, 2.0),
           Tabulated(np.array([0.0, 0.5, 1.0, 2.0]), np.array([1.0, 0.8, 0.3, 0.0]))]


def test_peak_values():
    assert Triangle(1.0)(0.0) == 1.0
    assert Laplace(1.0)(0.0) == 0.5
    assert Algebraic(1.5)(0.0) == pytest.approx(0.25, abs=1e-15)


def test_closed_form_tails():
    assert Laplace(1.0).tail_mass(2.0) == pytest.approx(math.exp(-2) / 2, abs=1e-15)
    assert Triangle(1.0).tail_mass(0.5) == pytest.approx(0.125, abs=1e-15)
    assert half_line_mass(Laplace(1.0), 1.0) == pytest.approx(1 - math.exp(-1) / 2, abs=1e-12)
    assert half_line_mass(Triangle(1.0), 1.0) == 1.0
    assert half_line_mass(Triangle(1.0), 7.0) == 1.0


@pytest.mark.parametrize("k", KERNELS, ids=lambda k: k.family)
def test_unit_mass_and_half_tail(k):
    assert tail_mass(k, 0.0) == pytest.approx(0.5, abs=1e-12)
    assert half_line_mass(k, 0.0) == pytest.approx(0.5, abs=1e-12)
    upper = k.compact_support or math.inf
    total, _ = integrate.quad(k, 0, upper, epsabs=1e-13, limit=400)
    assert 2 * total == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("k", KERNELS, ids=lambda k: k.family)
@pytest.mark.parametrize("s", [0.1, 0.7, 1.9, 4.0])
def test_tail_matches_quadrature(k, s):
    upper = k.compact_support or math.inf
    kinks = [x for x in getattr(k, "x", []) if s < x < upper] or None
    ref = 0.0 if s >= upper else integrate.quad(k, s, upper, epsabs=1e-13, limit=400,
                                                points=kinks)[0]
    assert k.tail_mass(s) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("k", [Triangle(1.0), Laplace(1.0), Gaussian(0.7), Algebraic(3.0)],
                         ids=lambda k: k.family)
def test_tail_moment_matches_quadrature(k):
    ref, _ = integrate.quad(lambda z: k.tail_mass(z), 0.3, math.inf, epsabs=1e-13, limit=400)
    assert k.tail_moment(0.3) == pytest.approx(ref, abs=1e-9)


def test_mgf_closed_forms():
    assert Laplace(1.0).mgf(0.5) == pytest.approx(1 / (1 - 0.25), rel=1e-10)
    assert Gaussian(1.0).mgf(0.8) == pytest.approx(math.exp(0.32), rel=1e-10)
    lam = 1.3
    assert Triangle(1.0).mgf(lam) == pytest.approx(2 * (math.cosh(lam) - 1) / lam**2, rel=1e-10)
    assert Laplace(1.0).mgf(1.0) == math.inf


def test_tail_flags():
    assert not Algebraic(1.5).satisfies_j1
    assert Algebraic(2.5).satisfies_j1 and not Algebraic(2.5).satisfies_j2
    assert Laplace(1.0).satisfies_j2 and Triangle(1.0).satisfies_j1


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(KERNELS), st.floats(-6, 6), st.floats(0, 3))
def test_even_and_monotone_tail(k, x, step):
    assert k(x) == k(-x)
    assert k(x) >= 0
    assert k.tail_mass(abs(x) + step) <= k.tail_mass(abs(x)) + 1e-15
    assert k.half_line_mass(x) + k.tail_mass(x) == pytest.approx(1.0, abs=1e-15)


def test_tabulated_extrapolation():
    k = Tabulated(np.array([0.0, 1.0, 2.0]), np.array([1.0, 0.5, 0.25]))
    k(1.5)
    with pytest.raises(ExtrapolationError):
        k(2.5)
    compact = Tabulated(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    assert compact(3.0) == 0.0
    assert compact(0.0) == pytest.approx(1.0)  # renormalised triangle


def test_tabulated_from_csv(tmp_path):
    path = tmp_path / "k.csv"
    path.write_text("x,J\n0,1\n1,0\n")
    k = Tabulated.from_csv(path, j1=True, j2=True)
    assert k(0.5) == pytest.approx(Triangle(1.0)(0.5))


def test_make_kernel():
    assert make_kernel({"family": "laplace", "scale": 2.0}) == Laplace(2.0)
    with pytest.raises(ConfigError, match="valid families"):
        make_kernel({"family": "cauchy"})
    with pytest.raises(ConfigError):
        make_kernel({"family": "triangle", "width": 1})
