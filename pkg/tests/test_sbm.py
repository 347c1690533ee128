import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarsectrl.errors import ConfigError
from coarsectrl.sbm import (
    BlockModel,
    CommunityAssignment,
    expected_adjacency,
    generate_membership,
    read_coordinate,
    relative_size_matrix,
    sample_fine_graph,
    write_coordinate,
)


def test_example_membership(example_assign):
    psi = example_assign.psi
    assert psi.shape == (3, 8)
    assert psi[0].tolist() == [1, 1, 1, 0, 0, 0, 0, 0]
    assert psi[1].tolist() == [0, 0, 0, 1, 1, 1, 1, 0]
    assert psi[2].tolist() == [0, 0, 0, 0, 0, 0, 0, 1]
    assert np.array_equal(relative_size_matrix(example_assign), np.diag([3 / 8, 1 / 2, 1 / 8]))


def test_single_community():
    a = generate_membership(4, [1.0])
    assert a.psi.tolist() == [[1, 1, 1, 1]]
    assert np.array_equal(relative_size_matrix(a), [[1.0]])


def test_largest_remainder_tie_goes_to_lower_index():
    assert generate_membership(5, [0.5, 0.5]).community_sizes.tolist() == [3, 2]


def test_equal_sizes():
    a = generate_membership(6, [1 / 3, 1 / 3, 1 / 3])
    assert np.allclose(relative_size_matrix(a), np.eye(3) / 3)


def test_empty_community_rejected():
    with pytest.raises(ConfigError):
        generate_membership(3, [0.9, 0.05, 0.05])


@pytest.mark.parametrize("pi", [[0.5, 0.6], [1.2, -0.2], []])
def test_bad_proportions(pi):
    with pytest.raises(ConfigError):
        generate_membership(10, pi)


def test_block_model_validation():
    with pytest.raises(ConfigError):
        BlockModel([0.5, 0.5], [[0.5, 0.1], [0.2, 0.5]])
    with pytest.raises(ConfigError):
        BlockModel([0.5, 0.5], [[1.5, 0.1], [0.1, 0.5]])
    with pytest.raises(ConfigError):
        BlockModel([1.0], [[0.5]], rho=0.0)


def test_sparse_regime_flag():
    m = BlockModel.planted(2, 0.5, 0.1, rho=0.1)
    assert m.is_sparse_regime(100)
    assert not m.is_sparse_regime(100_000)


def test_iid_membership_sizes_sum(rng):
    a = generate_membership(100, [0.3, 0.7], rng=rng, iid=True)
    assert a.community_sizes.sum() == 100


@given(n=st.integers(2, 300), weights=st.lists(st.floats(0.05, 1.0), min_size=1, max_size=6))
@settings(max_examples=100, deadline=None)
def test_membership_invariants(n, weights):
    pi = np.array(weights) / np.sum(weights)
    try:
        a = generate_membership(n, pi)
    except ConfigError:
        return
    psi = a.psi
    assert np.all(psi.sum(axis=0) == 1)
    assert np.array_equal(psi.sum(axis=1), a.community_sizes)
    assert a.community_sizes.sum() == n
    D = psi @ psi.T / n
    assert np.allclose(D, np.diag(np.diag(D))) and np.isclose(np.trace(D), 1.0)
    assert np.all(np.abs(a.community_sizes - n * pi) < 1)


def test_zero_and_one_probabilities(rng):
    a = generate_membership(12, [0.5, 0.5])
    zero = BlockModel([0.5, 0.5], np.zeros((2, 2)))
    one = BlockModel([0.5, 0.5], np.ones((2, 2)))
    assert not sample_fine_graph(zero, a, rng).any()
    assert np.all(sample_fine_graph(one, a, rng) == 1)


def test_sampled_graph_symmetric_binary(rng):
    model = BlockModel.planted(3, 0.5, 0.1)
    a = sample_fine_graph(model, generate_membership(90, [1 / 3] * 3), rng)
    assert np.array_equal(a, a.T)
    assert set(np.unique(a)) <= {0.0, 1.0}


def test_block_densities(rng):
    model = BlockModel.planted(2, 0.5, 0.1, rho=1.0)
    assign = generate_membership(400, [0.5, 0.5])
    a = sample_fine_graph(model, assign, rng)
    i0, i1 = assign.members(0), assign.members(1)
    within = np.concatenate([a[np.ix_(i0, i0)].ravel(), a[np.ix_(i1, i1)].ravel()]).mean()
    cross = a[np.ix_(i0, i1)].mean()
    assert abs(within - 0.5) < 0.02
    assert abs(cross - 0.1) < 0.02


def test_expected_adjacency_lookup(example_assign):
    P = np.array([[0.9, 0.2, 0.1], [0.2, 0.8, 0.3], [0.1, 0.3, 0.7]])
    abar = expected_adjacency(BlockModel(example_assign.relative_sizes, P), example_assign)
    assert abar[0, 3] == P[0, 1]
    assert abar[0, 0] == P[0, 0]
    assert np.allclose(abar, example_assign.psi.T @ P @ example_assign.psi)
    zero = BlockModel(example_assign.relative_sizes, np.zeros((3, 3)))
    assert not expected_adjacency(zero, example_assign).any()


def test_monte_carlo_mean_converges_to_expectation(rng):
    model = BlockModel([0.3, 0.7], [[0.6, 0.2], [0.2, 0.4]])
    assign = generate_membership(50, model.pi)
    total = np.zeros((50, 50))
    for _ in range(20_000):
        total += sample_fine_graph(model, assign, rng)
    assert np.max(np.abs(total / 20_000 - expected_adjacency(model, assign))) < 0.02


def test_coordinate_roundtrip(tmp_path, rng):
    model = BlockModel.planted(2, 0.5, 0.2)
    a = sample_fine_graph(model, generate_membership(20, [0.5, 0.5]), rng)
    path = tmp_path / "g.txt"
    write_coordinate(path, a)
    assert np.array_equal(read_coordinate(path), a)


def test_assignment_rejects_bad_labels():
    with pytest.raises(ConfigError):
        CommunityAssignment(np.array([0, 3]), K=2)
