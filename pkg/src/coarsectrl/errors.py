"""Exception hierarchy.

Configuration problems map to CLI exit code 1, numerical failures to 2.
"""


class CoarseCtrlError(Exception):
    """Base class for all package errors."""

    code = "error"


class ConfigError(CoarseCtrlError, ValueError):
    code = "config"


class InfeasibleCoarseningError(ConfigError):
    """m * r exceeds the number of fine nodes."""

    code = "infeasible_coarsening"


class PoolExhaustedError(CoarseCtrlError):
    """No community pool has unselected nodes left."""

    code = "pool_exhausted"


class NumericalError(CoarseCtrlError, ArithmeticError):
    code = "numerical"


class SpectralConditionError(NumericalError):
    """A resolvent (I - Z^2)^-1 does not exist because rho(Z) >= 1."""

    code = "spectral_condition"


class SingularSizeError(NumericalError):
    """A (relative) community size is zero, so D^{-1/2} is undefined."""

    code = "empty_community"


class RankDeficiencyError(NumericalError):
    code = "rank_deficient"


class DegenerateVectorError(NumericalError):
    """A shifted controllability vector has (numerically) zero l1 norm."""

    code = "degenerate_vector"


class ZeroDenominatorError(NumericalError):
    code = "zero_denominator"
