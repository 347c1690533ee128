"""Error metrics and interpretable diagnostic terms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .coarsening import expected_coarse
from .controllability import (
    model_upsilon,
    normalize,
    theta_coarse,
    theta_fine,
    theta_fine_expected,
)
from .errors import ConfigError, DegenerateVectorError, ZeroDenominatorError
from .estimators import LearnedEstimate, MMEstimate
from .sbm import BlockModel, CommunityAssignment, expected_adjacency

__all__ = [
    "DEGENERATE_TOL",
    "PromErrorTerms",
    "EstimationErrorTerms",
    "delta_generic",
    "delta_prom",
    "delta_learned",
    "baseline_error",
    "l1_error_bound",
    "min_abs",
    "sync_bias",
    "thm1_diagnostics",
    "align_columns",
    "thm2_diagnostics",
    "alpha_empirical",
    "alpha_tilde_empirical",
]

DEGENERATE_TOL = 1e-14


def _shifted_unit(u: np.ndarray) -> np.ndarray:
    s = np.asarray(u, dtype=float) - 1.0
    norm = np.abs(s).sum()
    if norm < DEGENERATE_TOL:
        raise DegenerateVectorError("||u - 1||_1 is numerically zero")
    return s / norm


def delta_generic(u, v) -> float:
    """``|| (u-1)/||u-1||_1 - (v-1)/||v-1||_1 ||_1``; lies in [0, 2]."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ConfigError(f"shape mismatch {u.shape} vs {v.shape}")
    return float(np.abs(_shifted_unit(u) - _shifted_unit(v)).sum())


def delta_prom(theta_group, theta_coarse, r: int) -> float:
    return delta_generic(r * np.asarray(theta_group), theta_coarse)


def delta_learned(theta_hat, theta_group, r: int) -> float:
    return delta_generic(theta_hat, r * np.asarray(theta_group))


def baseline_error(mu, theta_group, r: int) -> float:
    """Error of a random guess ``mu``; same form as :func:`delta_learned`."""
    return delta_generic(mu, r * np.asarray(theta_group))


def l1_error_bound(u, v) -> float:
    """``2 ||u - v||_1 / max(||u-1||_1, ||v-1||_1)``, an upper bound on delta_generic."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    scale = max(np.abs(u - 1).sum(), np.abs(v - 1).sum())
    return float(2 * np.abs(u - v).sum() / scale)


def min_abs(x) -> float:
    """``||X||_min``, read as the smallest absolute entry."""
    return float(np.min(np.abs(x)))


def sync_bias(phi: np.ndarray, ups: np.ndarray) -> float:
    """``||Phi diag(U) - diag(Phi U Phi^T)||_1 / m``; zero under perfect sync."""
    phi = np.asarray(phi, dtype=float)
    first = phi @ np.diag(ups)
    second = np.einsum("ia,ab,ib->i", phi, ups, phi)
    return float(np.abs(first - second).sum() / phi.shape[0])


@dataclass(frozen=True)
class PromErrorTerms:
    epsilon: float
    epsilon_tilde: float
    sync_bias: float
    balancedness_gap: float


@dataclass(frozen=True)
class EstimationErrorTerms:
    e_phi_norm: float
    e_p_max: float
    e_d_max: float


def thm1_diagnostics(model: BlockModel, assign: CommunityAssignment, phi: np.ndarray,
                     delta_prob: float, a: float = 1.0) -> PromErrorTerms:
    """Computable terms of the PROM error bound: concentration widths
    ``epsilon``/``epsilon_tilde``, synchronization bias and balancedness gap.
    A single ``delta_prob`` is used for both concentration terms."""
    if not 0 < delta_prob < 1:
        raise ConfigError(f"delta_prob must lie in (0, 1), got {delta_prob}")
    phi = np.asarray(phi, dtype=float)
    n, m = assign.n, phi.shape[0]
    P = model.P
    D = np.diag(assign.relative_sizes)
    overlap = phi.T @ phi / m

    den = min_abs(P @ D @ P)
    den_tilde = min_abs(P @ overlap @ P)
    if den == 0 or den_tilde == 0:
        raise ZeroDenominatorError("||P D P||_min or ||P Phi^T Phi P / m||_min is zero")
    eps = np.sqrt(np.log(n**2 / delta_prob) / (2 * n)) / den
    eps_tilde = np.sqrt(np.log(m**2 / delta_prob) / (2 * m)) / den_tilde

    ups = model_upsilon(model, assign, a).upsilon
    gap = float(np.max(np.abs(D - overlap)))
    return PromErrorTerms(float(eps), float(eps_tilde), sync_bias(phi, ups), gap)


def align_columns(phi_hat: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Column permutation ``perm`` minimizing ``||phi_hat[:, perm] - phi||_{1,1}``."""
    cost = np.abs(phi_hat[:, :, None] - phi[:, None, :]).sum(axis=0)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(phi.shape[1], dtype=np.intp)
    perm[cols] = rows
    return perm


def thm2_diagnostics(est: MMEstimate, learned: LearnedEstimate, phi: np.ndarray,
                     P: np.ndarray, D: np.ndarray) -> EstimationErrorTerms:
    """``||E_Phi||_{1,1}/m``, ``||E_P||_max`` and ``||E_D||_max`` after aligning
    estimated community labels to the truth."""
    phi = np.asarray(phi, dtype=float)
    if est.phi_hat.shape != phi.shape:
        raise ConfigError(f"Phi_hat is {est.phi_hat.shape}, truth is {phi.shape}")
    perm = align_columns(est.phi_hat, phi)
    e_phi = np.abs(est.phi_hat[:, perm] - phi).sum() / phi.shape[0]
    e_p = np.max(np.abs(est.p_hat[np.ix_(perm, perm)] - P))
    e_d = np.max(np.abs(np.diag(learned.d_hat)[perm] - np.diag(D)))
    return EstimationErrorTerms(float(e_phi), float(e_p), float(e_d))


def alpha_empirical(a_mat: np.ndarray, model: BlockModel, assign: CommunityAssignment,
                    a: float = 1.0, theta_a=None, expected: str = "closed") -> float:
    """``||theta_fine(A) - theta_fine(A_bar)||_1``.

    ``theta_a`` may carry a precomputed ``theta_fine(A)``. The expected side
    uses the exact closed form by default, or a dense resolvent with
    ``expected="dense"``.
    """
    if theta_a is None:
        theta_a = theta_fine(normalize(a_mat, a))
    if expected == "closed":
        theta_bar = theta_fine_expected(model, assign, a)
    elif expected == "dense":
        theta_bar = theta_fine(normalize(expected_adjacency(model, assign), a))
    else:
        raise ValueError(f"unknown expected mode {expected!r}")
    return float(np.abs(theta_a - theta_bar).sum())


def alpha_tilde_empirical(a_tilde: np.ndarray, phi: np.ndarray, model: BlockModel,
                          a_tilde_const: float = 1.0) -> float:
    """``||theta_coarse(A_tilde) - theta_coarse(Phi P Phi^T)||_1``."""
    diff = theta_coarse(a_tilde, a_tilde_const) - theta_coarse(expected_coarse(phi, model), a_tilde_const)
    return float(np.abs(diff).sum())
