from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarsectrl.coarsening import (
    CoarseningMap,
    coarse_adjacency,
    coarse_membership,
    expected_coarse,
    read_coarsening,
    sample_coarsening,
    sync_stats,
    write_coarsening,
)
from coarsectrl.example1 import exact_matrices
from coarsectrl.errors import ConfigError, InfeasibleCoarseningError
from coarsectrl.sbm import BlockModel, expected_adjacency, generate_membership, sample_fine_graph


def test_example_matrices(example_assign, example_cmap):
    phi = coarse_membership(example_cmap, example_assign)
    assert phi.tolist() == [[1, 0, 0], [0.5, 0.5, 0], [0, 1, 0], [0, 0.5, 0.5]]
    overlap = phi.T @ phi / 4
    expected = np.array([[5, 1, 0], [1, 6, 1], [0, 1, 1]]) / 16
    assert np.array_equal(overlap, expected)
    c = example_cmap.c
    assert np.array_equal(c, np.kron(np.eye(4), [0.5, 0.5]))


def test_example_sync_stats(example_assign, example_cmap):
    phi = coarse_membership(example_cmap, example_assign)
    stats = sync_stats(phi, np.diag(example_assign.relative_sizes))
    assert stats.support_sizes.tolist() == [1, 2, 1, 2]
    assert not stats.perfect_sync
    # exact rational oracle; the largest entry is |1/2 - 6/16| on the diagonal
    assert exact_matrices().balancedness_gap == Fraction(1, 8)
    assert stats.balancedness_gap == 0.125


def test_identity_phi_gap_zero():
    K = 4
    stats = sync_stats(np.eye(K), np.eye(K) / K)
    assert stats.balancedness_gap == 0.0 and stats.perfect_sync


def test_all_ones_adjacency(example_cmap):
    assert np.array_equal(coarse_adjacency(example_cmap, np.ones((8, 8))), np.ones((4, 4)))
    assert not coarse_adjacency(example_cmap, np.zeros((8, 8))).any()


def test_coarse_adjacency_triple_product(example_cmap, rng):
    a = np.triu((rng.random((8, 8)) < 0.5).astype(float))
    a = a + np.triu(a, 1).T
    c = example_cmap.c
    assert np.allclose(coarse_adjacency(example_cmap, a), c @ a @ c.T, atol=1e-15, rtol=0)


def test_single_row_full_support():
    assign = generate_membership(6, [1.0])
    cmap = sample_coarsening(assign, 1, 6, 0.5, np.random.default_rng(0))
    assert np.allclose(cmap.c, np.full((1, 6), 1 / 6))


def test_perfect_sync_rows_are_basis_vectors(rng):
    assign = generate_membership(400, [0.25] * 4)
    cmap = sample_coarsening(assign, 30, 10, 0.05, rng, perfect_sync=True)
    phi = coarse_membership(cmap, assign)
    assert np.all(np.sort(phi, axis=1)[:, -1] == 1.0)
    assert sync_stats(phi, np.eye(4) / 4).perfect_sync


def test_defaults_overlap_level():
    assign = generate_membership(5000, [0.25] * 4)
    sizes, overlaps = [], []
    for seed in range(20):
        cmap = sample_coarsening(assign, 100, 10, 0.05, np.random.default_rng(seed))
        phi = coarse_membership(cmap, assign)
        sizes.append(np.count_nonzero(cmap.c, axis=1).mean())
        overlaps.append(np.count_nonzero(phi, axis=1).mean())
    assert np.all(np.array(sizes) == 10)
    assert 1 <= np.mean(overlaps) <= 2


def test_infeasible_coarsening(example_assign):
    with pytest.raises(InfeasibleCoarseningError):
        sample_coarsening(example_assign, 5, 2, 0.1, np.random.default_rng(0))
    with pytest.raises(ConfigError):
        sample_coarsening(example_assign, 2, 2, 1.5, np.random.default_rng(0))


def test_overlapping_supports_rejected():
    with pytest.raises(ConfigError):
        CoarseningMap(supports=np.array([[0, 1], [1, 2]]), n=4)


@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 20), r=st.integers(1, 8),
       omega=st.floats(0.001, 0.999), K=st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_coarsening_invariants(seed, m, r, omega, K):
    n = 200
    assign = generate_membership(n, np.full(K, 1 / K))
    cmap = sample_coarsening(assign, m, r, omega, np.random.default_rng(seed))
    c = cmap.c
    assert np.all(np.count_nonzero(c, axis=1) == r)
    assert np.allclose(c.sum(axis=1), 1.0)
    assert np.allclose(c @ c.T, np.eye(m) / r)
    phi = coarse_membership(cmap, assign)
    assert np.allclose(phi, c @ assign.psi.T)
    assert np.allclose(phi.sum(axis=1), 1.0)


def test_coarse_adjacency_range(rng):
    model = BlockModel.planted(2, 0.6, 0.2)
    assign = generate_membership(100, [0.5, 0.5])
    a = sample_fine_graph(model, assign, rng)
    cmap = sample_coarsening(assign, 10, 5, 0.2, rng)
    at = coarse_adjacency(cmap, a)
    assert np.array_equal(at, at.T)
    assert at.min() >= 0 and at.max() <= 1


def test_expected_coarse(rng):
    K = 3
    P = np.array([[0.7, 0.1, 0.2], [0.1, 0.5, 0.3], [0.2, 0.3, 0.9]])
    model = BlockModel([0.2, 0.3, 0.5], P)
    assert np.array_equal(expected_coarse(np.eye(K), model), P)
    assert not expected_coarse(np.eye(K), BlockModel(model.pi, np.zeros((K, K)))).any()
    assign = generate_membership(60, model.pi)
    cmap = sample_coarsening(assign, 12, 4, 0.3, rng)
    c = cmap.c
    direct = c @ expected_adjacency(model, assign) @ c.T
    assert np.max(np.abs(expected_coarse(coarse_membership(cmap, assign), model) - direct)) < 1e-12


def test_coarsening_roundtrip(tmp_path, rng):
    assign = generate_membership(50, [0.5, 0.5])
    cmap = sample_coarsening(assign, 7, 3, 0.2, rng)
    write_coarsening(tmp_path / "c.txt", cmap)
    back = read_coarsening(tmp_path / "c.txt")
    assert np.array_equal(back.supports, cmap.supports) and back.n == 50
