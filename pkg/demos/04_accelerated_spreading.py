"""
Accelerated spreading
=====================

A kernel with J(x) ~ |x|^(-gamma), 1 < gamma <= 2, has an infinite first
moment.  There is no semi-wave and the front grows like t^(1/(gamma - 1)).
The fitted exponent over successive windows drifts toward that value.
"""

import numpy as np

from mutualfront import Algebraic, ModelParams, run_simulation, semi_wave_speed
from mutualfront.analysis import (coexistence_equilibrium, estimate_acceleration_exponent,
                                  estimate_front_speed)
from mutualfront.errors import NoSemiWave

k = Algebraic(1.5, 1.0)
try:
    semi_wave_speed(k, 1.0, 1.0, 2.0, 1.0)
except NoSemiWave as exc:
    print("semi-wave:", exc)

p = ModelParams(h0=10.0)
eq = coexistence_equilibrium(p.a, p.b, p.c)
# starting near equilibrium shortens the transient before the power law shows
_, traj = run_simulation(p, k, k, T=100.0, cadence=0.25, dx=1.0,
                         u0=lambda x: np.full_like(x, eq.u_star), amplitude=eq.v_star)
for t0 in (12.5, 25.0, 50.0):
    win = (t0, 2 * t0)
    print(f"window {win}: speed {estimate_front_speed(traj.t, traj.h, win):7.3f}  "
          f"exponent {estimate_acceleration_exponent(traj.t, traj.h, win):.3f}")
print("expected exponent 1/(gamma - 1) =", 1 / (1.5 - 1))
