import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mutualfront.errors import ContractViolation
from mutualfront.kernels import Algebraic, Gaussian, Laplace, Triangle
from mutualfront.nonlocal_ops import (Grid, OperatorTable, apply_nonlocal, boundary_flux_left,
                                      boundary_flux_right, quadrature_weights)
from oracles import dense_oracle


def test_zero_input():
    tbl = OperatorTable(Triangle(1.0), Grid(0.1, 30))
    assert np.all(apply_nonlocal(tbl, np.zeros(30), (0, 30), 1.0) == 0.0)


def test_five_node_example():
    grid = Grid(0.5, 5)
    tbl = OperatorTable(Triangle(1.0), grid)
    w = np.array([0, 0, 1.0, 0, 0])
    out = apply_nonlocal(tbl, w, (0, 5), 1.0)
    ref = dense_oracle(Triangle(1.0), grid.x, w, 0, 5, 1.0, tbl.mass)
    assert np.array_equal(out, ref) or np.max(np.abs(out - ref)) <= 1e-15


@pytest.mark.parametrize("kernel", [Triangle(1.0), Laplace(0.7), Gaussian(1.3), Algebraic(1.5)],
                         ids=lambda k: k.family)
@pytest.mark.parametrize("domain", ["half_line", "whole_line"])
def test_dense_oracle(kernel, domain):
    rng = np.random.default_rng(7)
    n = 64
    grid = Grid(0.13, n, offset=-20 if domain == "whole_line" else 0)
    tbl = OperatorTable(kernel, grid, domain)
    w = rng.random(n)
    lo, hi = 5, 50
    w[:lo] = 0
    w[hi:] = 0
    h = grid.x[hi - 1] + 0.06
    got = apply_nonlocal(tbl, w, (lo, hi), 0.8, right_end=h)
    ref = dense_oracle(kernel, grid.x, w, lo, hi, 0.8, tbl.mass, right_end=h)
    assert np.max(np.abs(got - ref)) <= 1e-13


@pytest.mark.parametrize("kernel", [Laplace(1.0), Algebraic(1.5)], ids=lambda k: k.family)
def test_fft_matches_direct(kernel):
    rng = np.random.default_rng(3)
    grid = Grid(0.05, 3000)
    w = rng.random(grid.n)
    direct = OperatorTable(kernel, grid, backend="direct")
    fast = OperatorTable(kernel, grid, backend="fft")
    for active, rows in [((0, 3000), None), ((100, 2500), (50, 2600)), ((0, 17), (0, 17))]:
        a = apply_nonlocal(direct, w, active, 1.0, "constant", rows=rows)
        b = apply_nonlocal(fast, w, active, 1.0, "constant", rows=rows)
        assert np.max(np.abs(a - b)) <= 1e-10


def test_whole_line_constant_is_nearly_stationary():
    grid = Grid.symmetric(6.0, 0.02)
    tbl = OperatorTable(Laplace(0.5), grid, "whole_line")
    out = apply_nonlocal(tbl, np.ones(grid.n), (0, grid.n), 1.0, "constant")
    assert np.max(np.abs(out)) < 1e-3  # O(dx^2) trapezoid error at the kernel cusp


def test_length_mismatch():
    tbl = OperatorTable(Triangle(1.0), Grid(0.1, 10))
    with pytest.raises(ContractViolation):
        apply_nonlocal(tbl, np.ones(9), (0, 9), 1.0)


def test_quadrature_weights_fractional_end():
    grid = Grid(0.1, 11)
    w = quadrature_weights(grid, 0, 6, right_end=0.57)
    # trapezoid on [0, 0.5] plus half of the fractional cell [0.5, 0.57]
    assert w[5] == pytest.approx(0.05 + 0.035)
    assert w.sum() == pytest.approx(0.5 + 0.035)


def test_flux_examples():
    grid = Grid(0.001, 1001)
    tbl = OperatorTable(Triangle(1.0), grid)
    assert boundary_flux_right(tbl, np.zeros(grid.n), 0.5, 1.0) == 0.0
    # v(x) = x on [0, 1], front at 1: integral of x (x^2 / 2)... with T(1 - x) = x^2 / 2
    # the scheme takes v to vanish at the front, so a density that jumps there
    # is resolved to O(dx) only
    v = grid.x.copy()
    assert boundary_flux_right(tbl, v, 1.0, 1.0, active=(0, grid.n - 1)) == pytest.approx(
        0.125, abs=grid.dx)
    tbl_l = OperatorTable(Laplace(1.0), grid)
    h = 0.8
    got = boundary_flux_right(tbl_l, np.ones(grid.n), h, 1.0)
    assert got == pytest.approx((1 - math.exp(-h)) / 2, abs=grid.dx)


def test_flux_left_mirrors_right():
    grid = Grid.symmetric(3.0, 0.01)
    tbl = OperatorTable(Laplace(1.0), grid, "whole_line")
    v = np.where(np.abs(grid.x) < 1.0, 1.0, 0.0)
    right = boundary_flux_right(tbl, v, 1.0, 1.0, left_end=-1.0)
    left = boundary_flux_left(tbl, v, -1.0, 1.0, right_end=1.0)
    assert left == pytest.approx(-right, rel=1e-14)
    # v jumps at both fronts, so the quadrature is first order here
    assert left == pytest.approx(-(1 - math.exp(-2)) / 2, abs=grid.dx)


def test_negative_density_rejected():
    tbl = OperatorTable(Triangle(1.0), Grid(0.1, 10))
    v = np.ones(10)
    v[3] = -1e-3
    with pytest.raises(ContractViolation):
        boundary_flux_right(tbl, v, 0.95, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.0, 0.99), st.floats(0.1, 5.0))
def test_flux_monotone_in_density(scale, frac, mu):
    grid = Grid(0.05, 80)
    tbl = OperatorTable(Laplace(scale), grid)
    h = grid.x[40] + frac * grid.dx
    rng = np.random.default_rng(int(scale * 1000))
    v = rng.random(grid.n)
    lo = boundary_flux_right(tbl, v, h, mu)
    hi = boundary_flux_right(tbl, v * 1.5, h, mu)
    assert 0 <= lo <= hi
