"""
Front speeds
============

For a compact kernel the front settles to the semi-wave speed c0(mu), which
increases with mu and stays below the minimal travelling-wave speed c_*.
We compare c0 with the slope of a simulated front.
"""

from mutualfront import ModelParams, Triangle, minimal_speed_kpp, run_simulation, semi_wave_speed
from mutualfront.analysis import estimate_front_speed

kv = Triangle(1.0)
d, r = 1.0, 1.0
c_star = minimal_speed_kpp(kv, d, r).c_star
print(f"minimal KPP speed c_* = {c_star:.6f}")

# the v-equation with c = 0 is w_t = d (J*w - w) + r w (1 - 2 w)
for mu in (1.0, 10.0, 100.0):
    res = semi_wave_speed(kv, d, r, 2 * r, mu)
    print(f"mu = {mu:6.1f}: c0 = {res.c0:.6f}  c0 / c_* = {res.c0 / c_star:.3f}")

p = ModelParams(d1=1.0, d2=d, r1=1.0, r2=r, a=1.0, b=1.0, c=0.0, mu=10.0, h0=1.0)
_, traj = run_simulation(p, kv, kv, T=200.0, cadence=1.0, dx=0.05)
speed = estimate_front_speed(traj.t, traj.h, window=(100.0, 200.0))
print(f"simulated front slope at mu = 10 over [100, 200]: {speed:.6f}")
