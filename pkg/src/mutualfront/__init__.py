"""Nonlocal mutualist model with free boundaries: simulation, spectra and wave speeds."""
from .analysis import (coexistence_equilibrium, classify_outcome, comparison_harness,
                       critical_mu, estimate_acceleration_exponent, estimate_front_speed)
from .dynamics import FrontSchedule, FrontSimulator, ModelParams, run_simulation, simulate_scalar
from .errors import MutualFrontError
from .kernels import Algebraic, Gaussian, Laplace, Tabulated, Triangle, make_kernel
from .nonlocal_ops import Grid, OperatorTable, apply_nonlocal
from .spectral import critical_length, principal_eigenvalue
from .waves import minimal_speed_kpp, semi_wave_speed, solve_semiwave_profile

__version__ = "0.1.0"
