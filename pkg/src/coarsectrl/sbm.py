"""General stochastic block model: memberships, sampling, expected quantities."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

__all__ = [
    "BlockModel",
    "CommunityAssignment",
    "generate_membership",
    "sample_fine_graph",
    "expected_adjacency",
    "relative_size_matrix",
    "write_coordinate",
    "read_coordinate",
]


def _check_pi(pi) -> np.ndarray:
    pi = np.asarray(pi, dtype=float).ravel()
    if pi.size == 0:
        raise ConfigError("pi must have at least one entry")
    if np.any(pi <= 0):
        raise ConfigError(f"community proportions must be positive, got {pi}")
    if not np.isclose(pi.sum(), 1.0, rtol=0, atol=1e-10):
        raise ConfigError(f"community proportions must sum to 1, got {pi.sum()!r}")
    return pi


@dataclass(frozen=True)
class BlockModel:
    """SBM parameters with block matrix ``P = rho * P_circ``.

    Parameters
    ----------
    pi : (K,) array
        Relative community sizes, positive and summing to one.
    P_circ : (K, K) array
        Symmetric block matrix with entries in [0, 1].
    rho : float
        Density scaling in (0, 1].
    """

    pi: np.ndarray
    P_circ: np.ndarray
    rho: float = 1.0

    def __post_init__(self):
        pi = _check_pi(self.pi)
        P_circ = np.atleast_2d(np.asarray(self.P_circ, dtype=float))
        K = pi.size
        if P_circ.shape != (K, K):
            raise ConfigError(f"P_circ must be {K}x{K}, got {P_circ.shape}")
        if not np.array_equal(P_circ, P_circ.T):
            raise ConfigError("P_circ must be symmetric")
        if np.any(P_circ < 0) or np.any(P_circ > 1):
            raise ConfigError("P_circ entries must lie in [0, 1]")
        if not 0 < self.rho <= 1:
            raise ConfigError(f"rho must lie in (0, 1], got {self.rho}")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "P_circ", P_circ)
        object.__setattr__(self, "rho", float(self.rho))

    @classmethod
    def planted(cls, K: int, p: float, q: float, rho: float = 1.0, pi=None) -> "BlockModel":
        """Planted partition: ``p`` on the diagonal of P_circ, ``q`` elsewhere."""
        if pi is None:
            pi = np.full(K, 1.0 / K)
        P_circ = np.full((K, K), float(q))
        np.fill_diagonal(P_circ, float(p))
        return cls(pi=pi, P_circ=P_circ, rho=rho)

    @property
    def K(self) -> int:
        return self.pi.size

    @property
    def P(self) -> np.ndarray:
        return self.rho * self.P_circ

    def is_sparse_regime(self, n: int) -> bool:
        """True when rho * sqrt(n) < 10, i.e. far from the dense asymptotic regime."""
        return self.rho * np.sqrt(n) < 10


@dataclass(frozen=True)
class CommunityAssignment:
    """Disjoint community labels for ``n`` fine nodes.

    ``labels[v]`` is the community of node ``v``; the binary K x n
    membership matrix is available as :attr:`psi`.
    """

    labels: np.ndarray
    K: int
    community_sizes: np.ndarray = field(init=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.intp)
        if labels.ndim != 1:
            raise ConfigError("labels must be one-dimensional")
        if labels.size and (labels.min() < 0 or labels.max() >= self.K):
            raise ConfigError("labels out of range")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "community_sizes", np.bincount(labels, minlength=self.K))

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def psi(self) -> np.ndarray:
        psi = np.zeros((self.K, self.n), dtype=np.int64)
        psi[self.labels, np.arange(self.n)] = 1
        return psi

    @property
    def relative_sizes(self) -> np.ndarray:
        return self.community_sizes / self.n

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)


def _largest_remainder(n: int, pi: np.ndarray) -> np.ndarray:
    quotas = n * pi
    sizes = np.floor(quotas).astype(np.int64)
    short = n - int(sizes.sum())
    # stable sort keeps lower indices first among equal remainders
    order = np.argsort(-(quotas - sizes), kind="stable")
    sizes[order[:short]] += 1
    return sizes


def generate_membership(n: int, pi, rng: np.random.Generator | None = None,
                        iid: bool = False) -> CommunityAssignment:
    """Assign ``n`` nodes to contiguous communities with proportions ``pi``.

    Sizes come from largest-remainder rounding of ``n * pi`` (ties go to the
    lower community index). With ``iid=True`` the sizes are instead drawn
    from a multinomial, i.e. memberships are i.i.d. draws from ``pi``; the
    layout stays contiguous and communities may come out empty.
    """
    pi = _check_pi(pi)
    if n < pi.size:
        raise ConfigError(f"need n >= K, got n={n}, K={pi.size}")
    if iid:
        if rng is None:
            raise ConfigError("iid membership needs an rng")
        sizes = rng.multinomial(n, pi)
    else:
        sizes = _largest_remainder(n, pi)
        if np.any(sizes == 0):
            raise ConfigError(f"rounding n * pi leaves an empty community (sizes {sizes.tolist()})")
    labels = np.repeat(np.arange(pi.size), sizes)
    return CommunityAssignment(labels=labels, K=pi.size)


def _check_dims(model: BlockModel, assign: CommunityAssignment):
    if model.K != assign.K:
        raise ConfigError(f"model has K={model.K} but assignment has K={assign.K}")


def sample_fine_graph(model: BlockModel, assign: CommunityAssignment,
                      rng: np.random.Generator) -> np.ndarray:
    """Draw a symmetric binary adjacency matrix from the SBM.

    Each unordered pair (u, v), u <= v, is an independent Bernoulli draw
    with probability ``P[k(u), k(v)]``; self-loops are drawn too so that
    ``E[A] = psi.T @ P @ psi`` holds on the diagonal as well.
    """
    _check_dims(model, assign)
    n = assign.n
    P = model.P
    # work on the label-sorted order so every block is a contiguous slice
    order = np.argsort(assign.labels, kind="stable")
    bounds = np.concatenate([[0], np.cumsum(assign.community_sizes)])
    upper = np.zeros((n, n), dtype=bool)
    for k in range(model.K):
        rows = slice(bounds[k], bounds[k + 1])
        for l in range(k, model.K):
            cols = slice(bounds[l], bounds[l + 1])
            shape = (bounds[k + 1] - bounds[k], bounds[l + 1] - bounds[l])
            upper[rows, cols] = rng.random(shape) < P[k, l]
    upper = np.triu(upper)
    a_sorted = upper | upper.T
    a = np.empty((n, n), dtype=float)
    a[np.ix_(order, order)] = a_sorted
    return a


def expected_adjacency(model: BlockModel, assign: CommunityAssignment) -> np.ndarray:
    """``psi.T @ P @ psi`` computed by label lookup."""
    _check_dims(model, assign)
    lab = assign.labels
    return model.P[np.ix_(lab, lab)]


def relative_size_matrix(assign: CommunityAssignment) -> np.ndarray:
    """``D = psi @ psi.T / n``."""
    return np.diag(assign.relative_sizes)


def write_coordinate(path, a: np.ndarray, symmetric: bool = True) -> None:
    """Write a matrix in 1-indexed coordinate format (``n n nnz`` header).

    Symmetric matrices store only the upper triangle plus the diagonal.
    Entries are written row-major.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if symmetric and not np.array_equal(a, a.T):
        raise ValueError("matrix is not symmetric")
    keep = np.triu(a != 0) if symmetric else (a != 0)
    rows, cols = np.nonzero(keep)  # row-major order
    vals = a[rows, cols]
    integral = np.all(vals == np.round(vals))
    n = a.shape[0]
    with open(Path(path), "w") as fh:
        fh.write(f"{n} {n} {rows.size}\n")
        for i, j, v in zip(rows, cols, vals):
            val = str(int(v)) if integral else repr(float(v))
            fh.write(f"{i + 1} {j + 1} {val}\n")


def read_coordinate(path, symmetric: bool = True) -> np.ndarray:
    """Inverse of :func:`write_coordinate`."""
    with open(Path(path)) as fh:
        header = fh.readline().split()
        n_rows, n_cols, nnz = (int(x) for x in header)
        data = np.loadtxt(fh, ndmin=2) if nnz else np.empty((0, 3))
    if data.shape[0] != nnz:
        raise ValueError(f"header announces {nnz} entries, found {data.shape[0]}")
    a = np.zeros((n_rows, n_cols))
    i = data[:, 0].astype(np.intp) - 1
    j = data[:, 1].astype(np.intp) - 1
    a[i, j] = data[:, 2]
    if symmetric:
        a[j, i] = data[:, 2]
    return a
