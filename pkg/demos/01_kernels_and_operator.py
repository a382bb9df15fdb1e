"""
Kernels and the discrete dispersal operator
===========================================

A short tour of the building blocks: dispersal kernels, their tail masses,
and the trapezoid discretisation of d (J * w - m w) on a uniform grid.
"""

import numpy as np

from mutualfront import Grid, Laplace, OperatorTable, Triangle, apply_nonlocal
from mutualfront.kernels import Algebraic

# Every kernel is even with unit mass.  The tail mass T(s) = int_s^inf J is what
# drives the free boundary, and j(x) = 1 - T(x) is the half-line mass.
for k in (Triangle(1.0), Laplace(1.0), Algebraic(1.5, 1.0)):
    print(f"{k.family:10s} J(0)={float(k(0.0)):.4f}  T(1)={float(k.tail_mass(1.0)):.4f}  "
          f"light tail={k.satisfies_j2}  finite first moment={k.satisfies_j1}")

# On the whole line a constant is a steady state of the dispersal operator up to
# the quadrature error at the kink of the Laplace kernel.
grid = Grid.symmetric(10.0, 0.05)
tbl = OperatorTable(Laplace(1.0), grid, "whole_line")
w = np.ones(grid.n)
out = apply_nonlocal(tbl, w, (0, grid.n), 1.0, closure="constant")
print("sup |L 1| on the whole line with constant closure:", float(np.max(np.abs(out))))

# On the half-line the mass term is j(x), so a constant is not depleted at x = 0;
# mass only leaks out near the cut at x = 4.
grid = Grid.covering(0.0, 10.0, 0.05)
tbl = OperatorTable(Triangle(1.0), grid, "half_line")
w = np.where(grid.x < 4.0, 1.0, 0.0)
out = apply_nonlocal(tbl, w, (0, grid.index_above(4.0)), 1.0, right_end=4.0)
for x in (0.0, 2.0, 3.9):
    print(f"half-line, w = 1 on [0, 4): (L w)({x}) = {np.interp(x, grid.x, out):+.4f}")
