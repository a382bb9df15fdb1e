"""Exception types raised across the package.

Every error carries a stable ``code`` string so batch front-ends can report
failures in a machine-readable way.
"""


class MutualFrontError(Exception):
    code = "error"


class ContractViolation(MutualFrontError, ValueError):
    code = "contract_violation"


class ExtrapolationError(MutualFrontError, ValueError):
    code = "extrapolation"


class ConvergenceError(MutualFrontError, RuntimeError):
    code = "no_convergence"

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class RejectedStep(MutualFrontError, ValueError):
    code = "rejected_step"


class InvariantBreach(MutualFrontError, RuntimeError):
    code = "invariant_breach"

    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


class NoCriticalLength(MutualFrontError):
    code = "no_critical_length"


class NoCriticalMu(MutualFrontError):
    code = "no_critical_mu"


class InconclusiveClassification(MutualFrontError, RuntimeError):
    code = "inconclusive"


class LightTailRequired(MutualFrontError):
    code = "light_tail_required"


class NoSemiWave(MutualFrontError):
    code = "no_semiwave"


class NoProfile(MutualFrontError):
    code = "no_profile"


class ConfigError(MutualFrontError, ValueError):
    code = "config"
