import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mutualfront import ModelParams, run_simulation
from mutualfront.analysis import (SPREADING, UNDETERMINED, VANISHING, classify_outcome,
                                  coexistence_equilibrium, comparison_harness, critical_mu,
                                  estimate_acceleration_exponent, estimate_front_speed)
from mutualfront.errors import ContractViolation, NoCriticalMu
from mutualfront.kernels import Laplace, Triangle
from oracles import scan_oracle


def test_equilibrium_matches_scan_oracle():
    eq = coexistence_equilibrium(1.0, 1.0, 1.0)
    u, v = scan_oracle(1.0, 1.0, 1.0)
    assert abs(eq.u_star - u) <= 1e-6 and abs(eq.v_star - v) <= 1e-6
    assert eq.residual_f1 < 1e-12 and eq.residual_f2 < 1e-12


def test_equilibrium_for_unit_parameters_is_golden_ratio():
    eq = coexistence_equilibrium(1.0, 1.0, 1.0)
    assert eq.u_star == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-12)
    assert eq.v_star == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_equilibrium_solves_reaction_system(a, b, c):
    eq = coexistence_equilibrium(a, b, c)
    assert 0 < eq.u_star <= a and 0 < eq.v_star <= 1
    assert abs(a - eq.u_star - eq.u_star / (1 + b * eq.v_star)) < 1e-12
    assert abs(1 - eq.v_star - eq.v_star / (1 + c * eq.u_star)) < 1e-12


def test_equilibrium_decoupled_cases():
    a, b, c = 1.7, 0.0, 2.0
    eq = coexistence_equilibrium(a, b, c)
    assert eq.u_star == pytest.approx(a / 2, abs=1e-14)
    assert eq.v_star == pytest.approx((1 + c * a / 2) / (2 + c * a / 2), abs=1e-14)
    a, b, c = 1.7, 3.0, 0.0
    eq = coexistence_equilibrium(a, b, c)
    assert eq.v_star == pytest.approx(0.5, abs=1e-14)
    assert eq.u_star == pytest.approx(a * (1 + b / 2) / (2 + b / 2), abs=1e-14)


def test_equilibrium_rejects_bad_input():
    with pytest.raises(ContractViolation):
        coexistence_equilibrium(0.0, 1.0, 1.0)
    with pytest.raises(ContractViolation):
        coexistence_equilibrium(1.0, -1.0, 1.0)


def test_speed_of_linear_front():
    t = np.linspace(0, 50, 101)
    assert estimate_front_speed(t, 3 * t + 1) == pytest.approx(3.0, abs=1e-12)
    assert estimate_front_speed(t, np.full_like(t, 2.0)) == pytest.approx(0.0, abs=1e-12)


def test_exponent_fits():
    t = np.linspace(1, 100, 200)
    assert estimate_acceleration_exponent(t, t ** 2) == pytest.approx(2.0, abs=1e-12)
    t = np.linspace(math.e ** 2, math.e ** 4, 200)
    p = estimate_acceleration_exponent(t, t * np.log(t), window=1.0)
    assert 1.0 < p < 1.5


def test_fit_window_errors():
    t = np.linspace(0, 1, 12)
    with pytest.raises(ContractViolation):
        estimate_front_speed(t, t, window=0.2)
    with pytest.raises(ContractViolation):
        estimate_front_speed(t, t[:-1])
    with pytest.raises(ContractViolation):
        estimate_acceleration_exponent(t, t, window=1.0)


def test_classify_extinct_density_vanishes():
    t = np.linspace(0, 100, 101)
    h = np.full_like(t, 1.0)
    assert classify_outcome(t, h, np.zeros_like(t), h0=1.0, scale=1.0, lstar=2.0) == VANISHING


def test_classify_fast_front_spreads():
    t = np.linspace(0, 100, 101)
    h = 1.0 + 0.5 * t
    sup_v = np.full_like(t, 0.6)
    assert classify_outcome(t, h, sup_v, h0=1.0, scale=1.0, lstar=2.0) == SPREADING


def test_classify_short_slow_run_is_undetermined():
    t = np.linspace(0, 2, 21)
    h = 1.0 + 0.05 * t
    sup_v = np.full_like(t, 0.4)
    assert classify_outcome(t, h, sup_v, h0=1.0, scale=1.0, lstar=2.0) == UNDETERMINED


def test_large_growth_rate_spreads_in_simulation():
    p = ModelParams(r2=0.8, mu=5.0, h0=1.0)
    summary, _ = run_simulation(p, Triangle(1.0), Triangle(1.0), T=60.0, dx=0.1)
    assert summary.outcome == SPREADING


def test_critical_mu_preconditions():
    k = Triangle(1.0)
    with pytest.raises(NoCriticalMu, match="r2 >= d2/2"):
        critical_mu(ModelParams(r2=0.6), k, k, T=10.0)
    with pytest.raises(NoCriticalMu, match="critical length"):
        critical_mu(ModelParams(r2=0.25, h0=0.6), k, k, T=10.0)
    with pytest.raises(NoCriticalMu, match="r2 >= d2"):
        critical_mu(ModelParams(r2=1.2, h0=0.1), k, k, T=10.0, geometry="double")


def _pair(mu_lo, mu_hi, scale_v, seed):
    rng = np.random.default_rng(seed)
    base = dict(d1=rng.uniform(0.5, 2), d2=rng.uniform(0.5, 2), r1=rng.uniform(0.5, 2),
                r2=rng.uniform(0.2, 1.5), a=rng.uniform(0.5, 2), b=rng.uniform(0, 2),
                c=rng.uniform(0, 2), h0=1.5)
    k = Laplace(1.0)
    lower = dict(params=ModelParams(mu=mu_lo, **base), ku=k, kv=k,
                 v0=lambda x: scale_v * np.cos(np.pi * x / 3.0))
    upper = dict(params=ModelParams(mu=mu_hi, **base), ku=k, kv=k,
                 v0=lambda x: np.cos(np.pi * x / 3.0))
    return lower, upper


def test_harness_confirms_ordered_pair():
    lower, upper = _pair(1.0, 2.0, 0.8, 0)
    rep = comparison_harness(lower, upper, T=5.0, dx=0.1, cadence=0.5)
    assert rep.ordered and rep.checked_times > 5


def test_harness_flags_reversed_pair():
    lower, upper = _pair(1.0, 2.0, 0.8, 0)
    rep = comparison_harness(upper, lower, T=5.0, dx=0.1, cadence=0.5)
    assert not rep.ordered
    assert rep.first_violation["excess"] > 1e-12


def test_harness_requires_shared_kernels():
    lower, upper = _pair(1.0, 2.0, 0.8, 0)
    upper["kv"] = Triangle(1.0)
    with pytest.raises(ContractViolation):
        comparison_harness(lower, upper, T=1.0, dx=0.1)
