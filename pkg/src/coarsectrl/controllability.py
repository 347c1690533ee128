"""Average controllability of normalized symmetric network dynamics.

For ``x[t+1] = Z_nom x[t] + B u[t]`` with ``Z_nom = Z / (a + rho(Z))`` the
infinite-horizon Gramian trace for a single actuated node ``i`` is
``[(I - Z_nom^2)^-1]_ii``. Group and coarse vectors are built from that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .coarsening import CoarseningMap, coarse_membership
from .errors import ConfigError, SingularSizeError, SpectralConditionError, ZeroDenominatorError
from .sbm import BlockModel, CommunityAssignment, expected_adjacency

__all__ = [
    "NormalizedDynamics",
    "UpsilonMatrix",
    "spectral_radius",
    "normalize",
    "theta_fine",
    "gramian_trace_truncated",
    "theta_group",
    "theta_coarse",
    "kappa",
    "upsilon",
    "upsilon_series_form",
    "model_upsilon",
    "theta_fine_expected",
    "theta_group_expected",
    "spectral_identity_check",
]


def _check_symmetric(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {z.shape}")
    scale = 1.0 + (np.max(np.abs(z)) if z.size else 0.0)
    if not np.allclose(z, z.T, rtol=0, atol=1e-12 * scale):
        raise ConfigError("dynamics matrix must be symmetric")
    return z


def spectral_radius(z: np.ndarray) -> float:
    """Largest absolute eigenvalue of a symmetric matrix."""
    z = _check_symmetric(z)
    if z.size == 0:
        return 0.0
    return float(np.max(np.abs(linalg.eigvalsh(z))))


@dataclass(frozen=True)
class NormalizedDynamics:
    """``z_nom = z / (a_const + spectral_radius_raw)`` with its eigendecomposition.

    ``eigvals``/``eigvecs`` refer to ``z_nom`` and are reused by every
    Gramian computation on the same dynamics.
    """

    z_nom: np.ndarray
    a_const: float
    spectral_radius_raw: float
    eigvals: np.ndarray
    eigvecs: np.ndarray

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigvals))) if self.eigvals.size else 0.0


def normalize(z: np.ndarray, a: float = 1.0) -> NormalizedDynamics:
    if a <= 0:
        raise ConfigError(f"normalization constant must be positive, got {a}")
    z = _check_symmetric(z)
    lam, vec = linalg.eigh(z, driver="evd")
    rho = float(np.max(np.abs(lam))) if lam.size else 0.0
    scale = a + rho
    return NormalizedDynamics(z / scale, float(a), rho, lam / scale, vec)


def _resolvent_weights(dyn: NormalizedDynamics) -> np.ndarray:
    lam2 = dyn.eigvals**2
    if lam2.size and lam2.max() >= 1.0:
        raise SpectralConditionError(f"rho(z_nom) = {dyn.spectral_radius} >= 1")
    return 1.0 / (1.0 - lam2)


def theta_fine(dyn: NormalizedDynamics, nodes=None, method: str = "eig") -> np.ndarray:
    """Per-node average controllability ``diag((I - z_nom^2)^-1)``.

    ``nodes`` restricts the output to a subset of node indices. ``method``
    is ``"eig"`` (reuse the eigendecomposition) or ``"solve"`` (dense
    linear solves against unit vectors).
    """
    idx = np.arange(dyn.z_nom.shape[0]) if nodes is None else np.asarray(nodes, dtype=np.intp)
    if method == "eig":
        w = _resolvent_weights(dyn)
        return (dyn.eigvecs[idx] ** 2) @ w
    if method == "solve":
        _resolvent_weights(dyn)
        n = dyn.z_nom.shape[0]
        lhs = np.eye(n) - dyn.z_nom @ dyn.z_nom
        rhs = np.zeros((n, idx.size))
        rhs[idx, np.arange(idx.size)] = 1.0
        sol = linalg.solve(lhs, rhs, assume_a="sym")
        return sol[idx, np.arange(idx.size)]
    raise ValueError(f"unknown method {method!r}")


def gramian_trace_truncated(z_nom, b_diag, T: int) -> float:
    """Trace of the T-step Gramian ``sum_{t<T} Z^t Diag(b) Diag(b)^T Z^t``.

    Brute-force power iteration; meant as an independent check of the
    closed-form resolvent expressions.
    """
    if isinstance(z_nom, NormalizedDynamics):
        z_nom = z_nom.z_nom
    z_nom = np.asarray(z_nom, dtype=float)
    b = np.asarray(b_diag, dtype=float).ravel()
    if T < 1:
        raise ValueError("horizon T must be >= 1")
    cols = np.flatnonzero(b)
    if cols.size == 0:
        return 0.0
    x = np.zeros((z_nom.shape[0], cols.size))
    x[cols, np.arange(cols.size)] = b[cols]
    total = 0.0
    for _ in range(T):
        total += float(np.sum(x * x))
        x = z_nom @ x
    return total


def theta_group(a_mat: np.ndarray, cmap: CoarseningMap, a: float = 1.0,
                dyn: NormalizedDynamics | None = None) -> np.ndarray:
    """Group average controllability with inputs ``B_i = Diag(c_i)``.

    Uses ``theta_group = C @ theta_fine / r``; only the fine nodes inside
    the supports are evaluated. Pass ``dyn`` to reuse a factorization.
    """
    if dyn is None:
        dyn = normalize(a_mat, a)
    fine = theta_fine(dyn, nodes=cmap.supports.ravel()).reshape(cmap.m, cmap.r)
    return fine.sum(axis=1) / cmap.r**2


def theta_coarse(a_tilde: np.ndarray, a_tilde_const: float = 1.0) -> np.ndarray:
    """Nodal average controllability of the coarse (PROM) dynamics."""
    return theta_fine(normalize(a_tilde, a_tilde_const))


def _spectral_radius_weighted(P_circ: np.ndarray, D: np.ndarray) -> float:
    # rho(P D) = rho(D^1/2 P D^1/2) for diagonal D >= 0; the latter is symmetric
    s = np.sqrt(np.diag(D))
    return float(np.max(np.abs(linalg.eigvalsh(s[:, None] * P_circ * s[None, :]))))


def kappa(a: float, rho_n: float, n: int, P_circ: np.ndarray, D: np.ndarray) -> float:
    """Normalization factor ``1 / (a / (rho_n n) + rho(P_circ D))``."""
    denom = a / (rho_n * n) + _spectral_radius_weighted(np.asarray(P_circ, float), np.asarray(D, float))
    if denom <= 0:
        raise ZeroDenominatorError("kappa undefined: a = 0 and rho(P_circ D) = 0")
    return 1.0 / denom


@dataclass(frozen=True)
class UpsilonMatrix:
    upsilon: np.ndarray
    kappa: float

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.upsilon).copy()


def _sqrt_sizes(D) -> np.ndarray:
    d = np.diag(np.asarray(D, dtype=float)).copy()
    if np.any(d <= 0):
        raise SingularSizeError(f"relative community sizes must be positive, got {d}")
    return np.sqrt(d)


def upsilon(P_circ: np.ndarray, D: np.ndarray, kappa: float) -> UpsilonMatrix:
    """``D^-1/2 ([I - (kappa D^1/2 P_circ D^1/2)^2]^-1 - I) D^-1/2``.

    Evaluated through the eigendecomposition of the symmetric matrix
    ``M = kappa D^1/2 P_circ D^1/2`` as ``sum_j mu_j^2 / (1 - mu_j^2) u_j u_j^T``
    (avoids subtracting the identity).
    """
    P_circ = np.asarray(P_circ, dtype=float)
    s = _sqrt_sizes(D)
    M = kappa * s[:, None] * P_circ * s[None, :]
    M = 0.5 * (M + M.T)
    mu, U = linalg.eigh(M)
    mu2 = mu**2
    if mu2.max() >= 1.0:
        raise SpectralConditionError(
            f"kappa * rho(D^1/2 P D^1/2) = {np.sqrt(mu2.max())} >= 1; resolvent does not exist")
    core = (U * (mu2 / (1.0 - mu2))) @ U.T
    ups = core / s[:, None] / s[None, :]
    return UpsilonMatrix(0.5 * (ups + ups.T), float(kappa))


def upsilon_series_form(P_circ: np.ndarray, D: np.ndarray, kappa: float) -> np.ndarray:
    """Equivalent expression ``kappa^2 (I - (kappa P_circ D)^2)^-1 P_circ D P_circ``.

    Obtained by summing the Neumann series term by term; needs no square
    roots or inverses of D. Used to cross-check :func:`upsilon`.
    """
    P_circ = np.asarray(P_circ, dtype=float)
    D = np.asarray(D, dtype=float)
    PD = kappa * P_circ @ D
    K = P_circ.shape[0]
    return linalg.solve(np.eye(K) - PD @ PD, kappa**2 * P_circ @ D @ P_circ)


def model_upsilon(model: BlockModel, assign: CommunityAssignment, a: float) -> UpsilonMatrix:
    D = np.diag(assign.relative_sizes)
    kap = kappa(a, model.rho, assign.n, model.P_circ, D)
    return upsilon(model.P_circ, D, kap)


def theta_fine_expected(model: BlockModel, assign: CommunityAssignment, a: float = 1.0) -> np.ndarray:
    """Closed form of ``theta_fine`` on the expected adjacency ``psi.T P psi``:
    ``1 + psi.T diag(Upsilon) / n``."""
    ups = model_upsilon(model, assign, a)
    return 1.0 + ups.diag[assign.labels] / assign.n


def theta_group_expected(model: BlockModel, assign: CommunityAssignment, cmap: CoarseningMap,
                         a: float = 1.0) -> np.ndarray:
    """Closed form ``(1 + Phi diag(Upsilon) / n) / r`` of the group vector on
    the expected dynamics."""
    ups = model_upsilon(model, assign, a)
    phi = coarse_membership(cmap, assign)
    return (1.0 + phi @ ups.diag / assign.n) / cmap.r


def spectral_identity_check(model: BlockModel, assign: CommunityAssignment) -> tuple[float, float]:
    """``(rho(A_bar), n * rho(P D))``; the two agree for any SBM."""
    lhs = spectral_radius(expected_adjacency(model, assign))
    rhs = assign.n * _spectral_radius_weighted(model.P, np.diag(assign.relative_sizes))
    return lhs, rhs
