"""Oracle identity suite.

Each check compares a closed-form or fast path of the library against an
independent brute-force computation on seeded random instances and
returns a :class:`CheckResult`. ``run_all`` backs the ``check`` command.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .coarsening import coarse_membership, sample_coarsening
from .controllability import (
    gramian_trace_truncated,
    model_upsilon,
    normalize,
    theta_coarse,
    theta_fine,
    theta_group,
    theta_group_expected,
    spectral_identity_check,
)
from .estimators import mm_community_estimate
from .example1 import numeric_matches_exact
from .metrics import align_columns, delta_generic, l1_error_bound, sync_bias
from .sbm import BlockModel, expected_adjacency, generate_membership, sample_fine_graph


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float
    seconds: float

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: worst={self.worst:.3e} tol={self.tol:.1e} ({self.seconds:.2f}s)"


def _result(name, worst, tol, t0):
    return CheckResult(name, bool(worst <= tol), float(worst), float(tol), time.perf_counter() - t0)


def _rel(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def random_block_model(rng, K, rho_range=(0.1, 1.0)) -> BlockModel:
    """Random symmetric block matrix with entries in (0, 1) and random proportions."""
    pc = rng.uniform(0.05, 1.0, size=(K, K))
    pc = np.triu(pc) + np.triu(pc, 1).T
    pi = rng.dirichlet(np.full(K, 3.0))
    return BlockModel(pi=pi, P_circ=pc, rho=float(rng.uniform(*rho_range)))


def series_theta(z_nom: np.ndarray, T: int) -> np.ndarray:
    """Per-node truncated Gramian traces ``sum_{t<T} ||Z^t e_v||^2`` by explicit powers."""
    x = np.eye(z_nom.shape[0])
    acc = np.zeros(z_nom.shape[0])
    for _ in range(T):
        acc += np.sum(x * x, axis=0)
        x = z_nom @ x
    return acc


def horizon_for(rho: float, target: float = 1e-12) -> int:
    """Smallest T with ``rho ** (2 T) < target``."""
    return max(1, int(np.ceil(np.log(target) / (2 * np.log(rho)))) + 1)


def _random_instance(rng, n_max, r_max, K_max=3):
    K = int(rng.integers(1, K_max + 1))
    n = int(rng.integers(max(8, 2 * K), n_max + 1))
    r = int(rng.integers(1, r_max + 1))
    m = int(rng.integers(1, n // r + 1))
    model = random_block_model(rng, K, rho_range=(0.1, 0.6))
    pi = model.pi
    while np.any(np.floor(pi * n) == 0):
        model = random_block_model(rng, K, rho_range=(0.1, 0.6))
        pi = model.pi
    assign = generate_membership(n, pi)
    a_mat = sample_fine_graph(model, assign, rng)
    cmap = sample_coarsening(assign, m, r, float(rng.uniform(0.01, 0.9)), rng)
    return model, assign, a_mat, cmap


def check_example1(**_) -> CheckResult:
    t0 = time.perf_counter()
    return _result("example-1 matrices exact", 0.0 if numeric_matches_exact(0.0) else 1.0, 0.0, t0)


def check_group_series(instances=25, n_max=64, r_max=4, T=500, seed=11) -> CheckResult:
    """Group Gramian traces by truncated power series vs ``C theta_fine / r``."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        _, _, a_mat, cmap = _random_instance(rng, n_max, r_max)
        dyn = normalize(a_mat)
        closed = theta_group(a_mat, cmap, dyn=dyn)
        c = cmap.c
        series = np.array([gramian_trace_truncated(dyn, c[i], T) for i in range(cmap.m)])
        worst = max(worst, _rel(series, closed))
    return _result(f"group trace = C theta_fine / r ({instances} instances, T={T})", worst, 1e-8, t0)


def check_group_closed_form(instances=10, n=240, K=3, seed=12) -> CheckResult:
    """Closed-form expected group vector vs dense resolvent on the expected adjacency."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        model = random_block_model(rng, K)
        assign = generate_membership(n, model.pi)
        r = int(rng.integers(1, 7))
        m = int(rng.integers(K, n // r + 1))
        cmap = sample_coarsening(assign, m, r, float(rng.uniform(0.01, 0.9)), rng)
        abar = expected_adjacency(model, assign)
        dyn = normalize(abar)
        direct = theta_fine(dyn, nodes=cmap.supports.ravel(), method="solve")
        direct = direct.reshape(cmap.m, cmap.r).sum(axis=1) / cmap.r**2
        worst = max(worst, _rel(theta_group_expected(model, assign, cmap), direct))
    return _result(f"expected group vector closed form (n={n}, K={K}, {instances} instances)", worst, 1e-8, t0)


def check_resolvent_series(instances=20, n_max=60, seed=13) -> CheckResult:
    """``theta_fine`` and ``theta_coarse`` vs truncated series with ``rho^(2T) < 1e-12``."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        _, _, a_mat, cmap = _random_instance(rng, n_max, 4)
        dyn = normalize(a_mat)
        T = horizon_for(max(dyn.spectral_radius, 1e-3))
        worst = max(worst, _rel(series_theta(dyn.z_nom, T), theta_fine(dyn)))
        a_t = cmap.c @ a_mat @ cmap.c.T
        dyn = normalize(a_t)
        T = horizon_for(max(dyn.spectral_radius, 1e-3))
        worst = max(worst, _rel(series_theta(dyn.z_nom, T), theta_coarse(a_t)))
    return _result(f"resolvent vs truncated series ({instances} instances)", worst, 1e-8, t0)


def check_spectral_identity(instances=10, seed=14) -> CheckResult:
    """``rho(A_bar) = n rho(P D)``."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        K = int(rng.integers(1, 6))
        n = int(rng.integers(20, 300))
        model = random_block_model(rng, K)
        while np.any(np.floor(model.pi * n) == 0):
            model = random_block_model(rng, K)
        lhs, rhs = spectral_identity_check(model, generate_membership(n, model.pi))
        worst = max(worst, abs(lhs - rhs))
    return _result(f"rho(A_bar) = n rho(P D) ({instances} instances)", worst, 1e-9, t0)


def noiseless_coarse_instance(rng, m=60, K=4, r=10):
    """``(Phi, P)`` with one pure coarse node per community; the other rows
    are random multiples of ``1/r``. Row order is shuffled."""
    rows = [np.eye(K)[k] for k in range(K)]
    for _ in range(m - K):
        rows.append(rng.multinomial(r, rng.dirichlet(np.full(K, 0.5))) / r)
    phi = np.array(rows)[rng.permutation(m)]
    pc = rng.uniform(0.02, 0.3, size=(K, K))
    pc = np.triu(pc) + np.triu(pc, 1).T
    np.fill_diagonal(pc, rng.uniform(0.5, 0.9, size=K))
    return phi, pc


def check_noiseless_recovery(instances=10, m=60, K=4, seed=15) -> CheckResult:
    """Mixed-membership estimation on ``Phi P Phi^T`` recovers ``(Phi, P)`` up to permutation."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        phi, pc = noiseless_coarse_instance(rng, m, K)
        est = mm_community_estimate(phi @ pc @ phi.T, K)
        perm = align_columns(est.phi_hat, phi)
        err_phi = np.max(np.abs(est.phi_hat[:, perm] - phi))
        err_p = np.max(np.abs(est.p_hat[np.ix_(perm, perm)] - pc))
        worst = max(worst, err_phi, err_p)
    return _result(f"noiseless mixed-membership recovery (m={m}, K={K}, {instances} instances)", worst, 1e-6, t0)


def check_perfect_sync_bias(instances=10, seed=16) -> CheckResult:
    """Synchronization bias vanishes on perfectly synchronized coarsenings."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        K = int(rng.integers(1, 6))
        model = random_block_model(rng, K)
        while np.any(np.floor(model.pi * 400) == 0):
            model = random_block_model(rng, K)
        assign = generate_membership(400, model.pi)
        cmap = sample_coarsening(assign, 30, 5, 0.5, rng, perfect_sync=True)
        ups = model_upsilon(model, assign, 1.0).upsilon
        worst = max(worst, sync_bias(coarse_membership(cmap, assign), ups))
    return _result(f"perfect sync gives zero sync bias ({instances} instances)", worst, 0.0, t0)


def check_metric_properties(pairs=1000, m=50, seed=17) -> CheckResult:
    """Scale invariance of the shifted-normalized error and its l1 upper bound."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        u = 1.0 + rng.normal(size=m) * rng.uniform(0.01, 10)
        v = 1.0 + rng.normal(size=m) * rng.uniform(0.01, 10)
        d = delta_generic(u, v)
        s = rng.uniform(1e-3, 1e3)
        worst = max(worst, abs(delta_generic(1.0 + s * (u - 1.0), v) - d))
        # bound violation counts as a failure of size 1
        if d > l1_error_bound(u, v) * (1 + 1e-12):
            worst = max(worst, 1.0)
    return _result(f"metric scale invariance and l1 bound ({pairs} pairs)", worst, 1e-12, t0)


ALL_CHECKS = (
    check_example1,
    check_group_series,
    check_group_closed_form,
    check_resolvent_series,
    check_spectral_identity,
    check_noiseless_recovery,
    check_perfect_sync_bias,
    check_metric_properties,
)


def run_all() -> list[CheckResult]:
    return [check() for check in ALL_CHECKS]
