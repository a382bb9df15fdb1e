"""
Spreading or vanishing
======================

With r2 < d2/2 a small initial range can go either way.  The critical length
l* from the principal eigenvalue separates the two: a front that stalls below
l* vanishes, one that passes it spreads.  Raising mu tips the balance.
"""

import numpy as np

from mutualfront import ModelParams, Triangle, critical_length, principal_eigenvalue, run_simulation
from mutualfront.analysis import coexistence_equilibrium

kv = ku = Triangle(1.0)
d2, r2 = 1.0, 0.25

# the eigenvalue grows with the interval length and crosses zero at l*
for L in (0.25, 0.5, 1.0, 2.0):
    print(f"lambda_p on (0, {L}) = {principal_eigenvalue(kv, d2, r2, L).lambda_p:+.4f}")
lstar = critical_length(kv, d2, r2)
print(f"critical length l* = {lstar:.6f}")

# start well inside l* and compare a small and a large mu
p = ModelParams(d1=1.0, d2=d2, r1=1.0, r2=r2, a=1.0, b=1.0, c=1.0, mu=1.0, h0=lstar / 4)
for mu in (1.0, 6.0):
    summary, _ = run_simulation(p.with_(mu=mu), ku, kv, T=300.0, lstar=lstar, dx=0.02,
                                probes=(0.0, p.h0))
    print(f"mu = {mu}: {summary.outcome:10s} h(T) = {summary.h_series[-1]:8.4f}  "
          f"sup v(T) = {summary.final_sup_v:.2e}  u at probes = {np.round(summary.u_probe[-1], 4)}")

eq = coexistence_equilibrium(p.a, p.b, p.c)
print(f"spreading runs settle near (u*, v*) = ({eq.u_star:.6f}, {eq.v_star:.6f}); "
      f"vanishing runs leave u near a/2 = {p.a / 2}")
