"""Group average controllability of stochastic block model networks
estimated from coarse (block-averaged) graph measurements."""

__version__ = "0.1.0"

from .errors import (
    CoarseCtrlError,
    ConfigError,
    DegenerateVectorError,
    InfeasibleCoarseningError,
    NumericalError,
    PoolExhaustedError,
    RankDeficiencyError,
    SingularSizeError,
    SpectralConditionError,
    ZeroDenominatorError,
)
from .sbm import BlockModel, CommunityAssignment, generate_membership, sample_fine_graph
from .coarsening import CoarseningMap, coarse_adjacency, coarse_membership, sample_coarsening
from .controllability import normalize, theta_coarse, theta_fine, theta_group, theta_group_expected
from .estimators import learned_theta, mm_community_estimate, prom_estimate
from .metrics import delta_generic, delta_learned, delta_prom

__all__ = [
    "__version__",
    "CoarseCtrlError",
    "ConfigError",
    "DegenerateVectorError",
    "InfeasibleCoarseningError",
    "NumericalError",
    "PoolExhaustedError",
    "RankDeficiencyError",
    "SingularSizeError",
    "SpectralConditionError",
    "ZeroDenominatorError",
    "BlockModel",
    "CommunityAssignment",
    "generate_membership",
    "sample_fine_graph",
    "CoarseningMap",
    "coarse_adjacency",
    "coarse_membership",
    "sample_coarsening",
    "normalize",
    "theta_coarse",
    "theta_fine",
    "theta_group",
    "theta_group_expected",
    "learned_theta",
    "mm_community_estimate",
    "prom_estimate",
    "delta_generic",
    "delta_learned",
    "delta_prom",
]
