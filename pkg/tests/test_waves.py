import numpy as np
import pytest

from mutualfront.errors import LightTailRequired, NoProfile, NoSemiWave
from mutualfront.kernels import Algebraic, Gaussian, Laplace, Triangle
from mutualfront.waves import minimal_speed_kpp, semi_wave_speed, solve_semiwave_profile


def test_laplace_minimal_speed_matches_grid_scan():
    lam = np.linspace(1e-5, 1 - 1e-5, 100_000)
    scan = np.min((lam ** 2 / (1 - lam ** 2) + 0.5) / lam)
    res = minimal_speed_kpp(Laplace(1.0), 1.0, 0.5)
    assert res.c_star == pytest.approx(scan, abs=1e-6)
    assert 0 < res.lambda_hat < 1


def test_gaussian_minimal_speed_matches_grid_scan():
    # M(lam) = exp(lam^2 sigma^2 / 2) for the unit-mass Gaussian of deviation sigma
    lam = np.linspace(1e-4, 10.0, 100_000)
    scan = np.min((np.exp(lam ** 2 / 2) - 1 + 1.0) / lam)
    assert minimal_speed_kpp(Gaussian(1.0), 1.0, 1.0).c_star == pytest.approx(scan, abs=1e-6)


def test_minimal_speed_decreases_to_zero_with_growth_rate():
    speeds = [minimal_speed_kpp(Triangle(1.0), 1.0, r).c_star for r in (1e-2, 1e-3, 1e-4)]
    assert speeds[0] > speeds[1] > speeds[2] > 0
    assert speeds[2] < 0.05


def test_heavy_tail_has_no_minimal_speed():
    with pytest.raises(LightTailRequired):
        minimal_speed_kpp(Algebraic(1.5, 1.0), 1.0, 1.0)
    with pytest.raises(LightTailRequired):
        minimal_speed_kpp(Algebraic(3.0, 1.0), 1.0, 1.0)


def test_infinite_first_moment_has_no_semi_wave():
    with pytest.raises(NoSemiWave):
        semi_wave_speed(Algebraic(1.5, 1.0), 1.0, 1.0, 2.0, 1.0)


def test_stationary_profile_reaches_carrying_capacity():
    x, phi = solve_semiwave_profile(Triangle(1.0), 1.0, 1.0, 2.0, 0.0)
    assert phi[-1] == 0.0 and x[-1] == 0.0
    assert abs(phi[0] - 0.5) <= 1e-3
    assert np.all(np.diff(phi) <= 0)
    assert np.all((phi >= 0) & (phi <= 0.5))


def test_profiles_decrease_with_speed():
    k = Triangle(1.0)
    profiles = [solve_semiwave_profile(k, 1.0, 1.0, 2.0, c)[1] for c in (0.0, 0.2, 0.4)]
    for slow, fast in zip(profiles, profiles[1:]):
        assert np.all(fast <= slow + 1e-9)


def test_speed_above_minimal_speed_has_no_profile():
    k = Triangle(1.0)
    c_star = minimal_speed_kpp(k, 1.0, 1.0).c_star
    with pytest.raises(NoProfile):
        solve_semiwave_profile(k, 1.0, 1.0, 2.0, 1.2 * c_star)


def test_semi_wave_residual_and_bounds():
    res = semi_wave_speed(Triangle(1.0), 1.0, 1.0, 2.0, 10.0)
    assert res.u_star == 0.5
    assert 0 < res.c0 < res.c_star
    assert abs(res.flux_residual) < 1e-6
    assert np.all(np.diff(res.phi) <= 0)


def test_semi_wave_mesh_refinement():
    k = Triangle(1.0)
    coarse = semi_wave_speed(k, 1.0, 1.0, 2.0, 10.0, dx=0.05).c0
    fine = semi_wave_speed(k, 1.0, 1.0, 2.0, 10.0, dx=0.025).c0
    assert abs(coarse - fine) <= 0.05


def test_small_mu_gives_small_speed():
    k = Laplace(1.0)
    speeds = [semi_wave_speed(k, 1.0, 1.0, 2.0, mu).c0 for mu in (1e-1, 1e-2, 1e-3)]
    assert speeds[0] > speeds[1] > speeds[2] > 0
    # the flux is linear in mu as mu -> 0
    assert speeds[2] == pytest.approx(speeds[1] / 10, rel=2e-2)


@pytest.fixture(scope="module")
def laplace_chain():
    k = Laplace(1.0)
    return {mu: semi_wave_speed(k, 1.0, 1.0, 2.0, mu) for mu in (1.0, 10.0, 100.0, 1000.0)}


@pytest.mark.slow
def test_semi_wave_speed_increases_with_mu(laplace_chain):
    c0 = [laplace_chain[mu].c0 for mu in sorted(laplace_chain)]
    assert all(b > a for a, b in zip(c0, c0[1:]))
    assert all(r.c0 < r.c_star for r in laplace_chain.values())


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason=(
    "c0 approaches c_* only logarithmically in mu for light tails; at mu = 1000 the "
    "computed ratio c0/c_* is about 0.71 for this kernel, far from the 5% band"))
def test_semi_wave_speed_near_minimal_speed_at_large_mu(laplace_chain):
    r = laplace_chain[1000.0]
    assert abs(r.c0 - r.c_star) / r.c_star < 5e-2
