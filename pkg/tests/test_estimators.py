import itertools

import numpy as np
import pytest

from coarsectrl.checks import noiseless_coarse_instance
from coarsectrl.coarsening import CoarseningMap, coarse_adjacency, coarse_membership, sample_coarsening
from coarsectrl.controllability import theta_coarse, theta_group_expected
from coarsectrl.errors import ConfigError, RankDeficiencyError
from coarsectrl.estimators import (
    MMEstimate,
    baseline_vector,
    learned_theta,
    mm_community_estimate,
    prom_estimate,
    prune_rows,
    successive_projection,
)
from coarsectrl.metrics import align_columns
from coarsectrl.sbm import BlockModel, generate_membership, sample_fine_graph


def test_spa_scaled_basis():
    x = np.diag([2.0, 5.0, 3.0])
    assert successive_projection(x, 3) == [1, 2, 0]
    assert successive_projection(x, 1) == [1]


def _residual_volume(x, idx):
    sub = x[list(idx)]
    return np.linalg.det(sub @ sub.T)


def test_spa_finds_extreme_rows(rng):
    extremes = np.array([[3.0, 0.2, 0.1], [0.1, 2.5, 0.3], [0.2, 0.1, 2.8]])
    weights = rng.dirichlet(np.ones(3), size=12)
    x = np.vstack([weights @ extremes, extremes])
    picked = successive_projection(x, 3)
    assert sorted(picked) == [12, 13, 14]
    # brute force: the extremes maximize the residual-norm (Gram volume) criterion
    best = max(itertools.combinations(range(x.shape[0]), 3), key=lambda t: _residual_volume(x, t))
    assert sorted(best) == [12, 13, 14]


def test_spa_rank_deficient():
    with pytest.raises(RankDeficiencyError):
        successive_projection(np.array([[1.0, 0.0], [2.0, 0.0]]), 2)


def test_prune_rows():
    v = np.array([[1.0, 0.0], [0.1, 0.1], [5.0, 5.0], [0.2, 0.0]])
    assert prune_rows(v, 1.0).size == 0
    assert prune_rows(v, 0.75).tolist() == [2]
    with pytest.raises(ConfigError):
        prune_rows(v, 0.0)


def test_identity_phi_recovery():
    P = np.array([[0.9, 0.2, 0.1], [0.2, 0.6, 0.05], [0.1, 0.05, 0.4]])
    est = mm_community_estimate(P, 3)
    perm = align_columns(est.phi_hat, np.eye(3))
    assert np.max(np.abs(est.phi_hat[:, perm] - np.eye(3))) < 1e-6
    assert np.max(np.abs(est.p_hat[np.ix_(perm, perm)] - P)) < 1e-6


def test_noiseless_recovery(rng):
    for _ in range(5):
        phi, P = noiseless_coarse_instance(rng, m=60, K=4)
        est = mm_community_estimate(phi @ P @ phi.T, 4)
        perm = align_columns(est.phi_hat, phi)
        assert np.max(np.abs(est.phi_hat[:, perm] - phi)) < 1e-6
        assert np.max(np.abs(est.p_hat[np.ix_(perm, perm)] - P)) < 1e-6
        assert np.allclose(est.phi_hat.sum(axis=1), 1.0)
        assert est.phi_hat.min() >= 0
        assert len(set(est.pure_indices.tolist())) == 4


def test_pruning_excludes_pure_candidates(rng):
    phi, P = noiseless_coarse_instance(rng, m=60, K=4)
    est = mm_community_estimate(phi @ P @ phi.T, 4, prune_quantile=0.95)
    assert not set(est.pure_indices.tolist()) & set(est.pruned_indices.tolist())


def test_sampled_phi_beats_random_guess():
    model = BlockModel.planted(4, 0.5, 0.1, rho=0.1)
    assign = generate_membership(2000, model.pi)
    est_err, rand_err = [], []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        a = sample_fine_graph(model, assign, rng)
        cmap = sample_coarsening(assign, 100, 10, 0.05, rng)
        phi = coarse_membership(cmap, assign)
        est = mm_community_estimate(coarse_adjacency(cmap, a), 4)
        perm = align_columns(est.phi_hat, phi)
        est_err.append(np.abs(est.phi_hat[:, perm] - phi).sum() / 100)
        guess = rng.dirichlet(np.ones(4), size=100)
        perm = align_columns(guess, phi)
        rand_err.append(np.abs(guess[:, perm] - phi).sum() / 100)
    assert np.mean(est_err) < np.mean(rand_err)


def _estimate(phi, P):
    return MMEstimate(phi, P, np.arange(P.shape[0]), np.empty(0, dtype=np.intp), np.zeros(P.shape[0]))


def test_learned_zero_p():
    est = _estimate(np.eye(3), np.zeros((3, 3)))
    assert np.array_equal(learned_theta(est, 1.0, 100).theta_hat, np.ones(3))


def test_learned_matches_expected_group_vector():
    # column mass of Phi equals the community proportions, so D_hat = D
    assign = generate_membership(12, [0.5, 0.25, 0.25])
    cmap = CoarseningMap(supports=np.arange(12).reshape(4, 3), n=12)
    phi = coarse_membership(cmap, assign)
    model = BlockModel(assign.relative_sizes, [[0.8, 0.2, 0.1], [0.2, 0.6, 0.3], [0.1, 0.3, 0.5]], rho=0.4)
    learned = learned_theta(_estimate(phi, model.P), 1.0, assign.n)
    assert np.allclose(np.diag(learned.d_hat), assign.relative_sizes)
    target = cmap.r * theta_group_expected(model, assign, cmap) - 1.0
    assert np.allclose((learned.theta_hat - 1.0) / target, assign.n, rtol=1e-10, atol=0)


def test_learned_permutation_invariant(rng):
    phi, P = noiseless_coarse_instance(rng, m=30, K=3)
    P = P * 0.3
    perm = np.array([2, 0, 1])
    base = learned_theta(_estimate(phi, P), 1.0, 500)
    permuted = learned_theta(_estimate(phi[:, perm], P[np.ix_(perm, perm)]), 1.0, 500)
    assert np.allclose(base.theta_hat, permuted.theta_hat, rtol=1e-12)
    assert np.isclose(np.trace(base.d_hat), 1.0)
    assert np.all(base.theta_hat >= 1.0)


def test_prom_delegates(rng):
    assert np.array_equal(prom_estimate(np.zeros((4, 4))), np.ones(4))
    model = BlockModel.planted(4, 0.5, 0.1, rho=0.1)
    assign = generate_membership(2000, model.pi)
    a = sample_fine_graph(model, assign, rng)
    cmap = sample_coarsening(assign, 100, 10, 0.05, rng)
    at = coarse_adjacency(cmap, a)
    theta = prom_estimate(at)
    assert np.array_equal(theta, theta_coarse(at))
    assert np.all(np.isfinite(theta)) and np.all(theta >= 1.0)


def test_baseline_vector():
    a = baseline_vector(50, np.random.default_rng(3))
    assert np.array_equal(a, baseline_vector(50, np.random.default_rng(3)))
    big = baseline_vector(100_000, np.random.default_rng(4))
    assert big.min() >= 1 and big.max() <= 2
    assert abs(big.mean() - 1.5) < 0.01
