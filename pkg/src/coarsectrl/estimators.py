"""Estimators of the group average controllability from the coarse graph.

* PROM: nodal controllability of the coarse dynamics themselves.
* Learned: mixed-membership spectral estimate of (Phi, P) plugged into the
  closed form for expected dynamics.
* Baseline: i.i.d. uniform noise on [1, 2].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .controllability import theta_coarse, upsilon
from .errors import RankDeficiencyError, SingularSizeError, ConfigError

__all__ = [
    "MMEstimate",
    "LearnedEstimate",
    "successive_projection",
    "prune_rows",
    "mm_community_estimate",
    "learned_theta",
    "prom_estimate",
    "baseline_vector",
]

# literal e^-12 from the thresholding step of the mixed-membership algorithm
PHI_THRESHOLD = float(np.exp(-12.0))
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class MMEstimate:
    phi_hat: np.ndarray
    p_hat: np.ndarray
    pure_indices: np.ndarray
    pruned_indices: np.ndarray
    eigvals: np.ndarray

    @property
    def K(self) -> int:
        return self.p_hat.shape[0]


@dataclass(frozen=True)
class LearnedEstimate:
    d_hat: np.ndarray
    kappa_hat: float
    upsilon_hat: np.ndarray
    theta_hat: np.ndarray


def successive_projection(x: np.ndarray, K: int) -> list[int]:
    """Greedy Successive Projection Algorithm on the rows of ``x``.

    K times: pick the row of largest Euclidean norm (lowest index on ties),
    then project every row onto the orthogonal complement of the picked one.
    Returns row indices in selection order.
    """
    R = np.array(x, dtype=float, copy=True)
    if R.ndim != 2 or R.shape[0] < K:
        raise ConfigError(f"SPA needs at least K={K} rows, got {R.shape[0] if R.ndim == 2 else 0}")
    picked = []
    for _ in range(K):
        norms = np.einsum("ij,ij->i", R, R)
        j = int(np.argmax(norms))
        if norms[j] <= 0.0:
            raise RankDeficiencyError("rows span fewer than K directions")
        u = R[j] / np.sqrt(norms[j])
        R -= np.outer(R @ u, u)
        picked.append(j)
    return picked


def prune_rows(v_hat: np.ndarray, quantile: float = 1.0) -> np.ndarray:
    """Indices of rows whose norm exceeds the given empirical quantile of row norms."""
    if not 0 < quantile <= 1:
        raise ConfigError(f"prune quantile must lie in (0, 1], got {quantile}")
    if quantile >= 1.0:
        return np.empty(0, dtype=np.intp)
    norms = np.linalg.norm(v_hat, axis=1)
    return np.flatnonzero(norms > np.quantile(norms, quantile))


def mm_community_estimate(a_tilde: np.ndarray, K: int, prune_quantile: float = 1.0) -> MMEstimate:
    """Estimate coarse memberships ``Phi`` and block matrix ``P`` from ``a_tilde``."""
    a_tilde = np.asarray(a_tilde, dtype=float)
    m = a_tilde.shape[0]
    if m < K:
        raise ConfigError(f"need m >= K, got m={m}, K={K}")
    lam, vec = linalg.eigh(0.5 * (a_tilde + a_tilde.T))
    top = np.argsort(-np.abs(lam), kind="stable")[:K]
    lam, v_hat = lam[top], vec[:, top]

    pruned = prune_rows(v_hat, prune_quantile)
    kept = np.setdiff1d(np.arange(m), pruned)
    if kept.size < K:
        raise ConfigError(f"pruning left {kept.size} rows, fewer than K={K}")
    pure = kept[successive_projection(v_hat[kept], K)]

    x_pure = v_hat[pure]
    if np.linalg.cond(x_pure) > MAX_CONDITION:
        raise RankDeficiencyError("pure-node eigenvector block is numerically singular")
    phi = linalg.solve(x_pure.T, v_hat.T).T  # v_hat @ inv(x_pure)
    phi[phi < PHI_THRESHOLD] = 0.0
    rowsum = phi.sum(axis=1, keepdims=True)
    # a row thresholded to all zeros carries no membership information
    phi = np.where(rowsum > 0, phi / np.where(rowsum > 0, rowsum, 1.0), 1.0 / K)

    p_hat = x_pure @ np.diag(lam) @ x_pure.T
    return MMEstimate(phi, 0.5 * (p_hat + p_hat.T), pure, pruned, lam)


def learned_theta(est: MMEstimate, a: float, n: int) -> LearnedEstimate:
    """Direct inference of the group controllability from a mixed-membership fit.

    ``D_hat`` is the column mass of ``Phi_hat``; ``P_hat`` (an estimate of
    ``rho_n P_circ``) enters with ``kappa_hat = 1 / (a/n + rho(P_hat D_hat))``,
    so that ``kappa_hat * P_hat`` matches ``kappa * P_circ`` of the truth.
    Returns ``theta_hat = 1 + Phi_hat diag(Upsilon_hat)``.
    """
    colmass = est.phi_hat.sum(axis=0)
    if np.any(colmass <= 0):
        raise SingularSizeError(f"estimated community with no mass: {colmass}")
    d_hat = np.diag(colmass / colmass.sum())
    s = np.sqrt(np.diag(d_hat))
    rho_pd = float(np.max(np.abs(linalg.eigvalsh(s[:, None] * est.p_hat * s[None, :]))))
    kap = 1.0 / (a / n + rho_pd)
    ups = upsilon(est.p_hat, d_hat, kap)
    theta = 1.0 + est.phi_hat @ ups.diag
    return LearnedEstimate(d_hat, kap, ups.upsilon, theta)


def prom_estimate(a_tilde: np.ndarray, a_tilde_const: float = 1.0) -> np.ndarray:
    return theta_coarse(a_tilde, a_tilde_const)


def baseline_vector(m: int, rng: np.random.Generator) -> np.ndarray:
    if m < 1:
        raise ConfigError("baseline length must be >= 1")
    return rng.uniform(1.0, 2.0, size=m)
