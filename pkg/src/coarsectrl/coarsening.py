"""Coarse measurements: sampling the coarsening map and coarse summaries."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, InfeasibleCoarseningError, PoolExhaustedError
from .sbm import BlockModel, CommunityAssignment

__all__ = [
    "CoarseningMap",
    "SyncStats",
    "sample_coarsening",
    "coarse_adjacency",
    "coarse_membership",
    "sync_stats",
    "expected_coarse",
    "write_coarsening",
    "read_coarsening",
]


@dataclass(frozen=True)
class CoarseningMap:
    """Coarse-measurement matrix with disjoint, equal-size row supports.

    ``supports[i]`` holds the ``r`` fine nodes averaged by coarse node ``i``;
    the dense matrix ``c`` has value ``1/r`` on those entries.
    """

    supports: np.ndarray
    n: int

    def __post_init__(self):
        supports = np.atleast_2d(np.asarray(self.supports, dtype=np.intp))
        if supports.size and (supports.min() < 0 or supports.max() >= self.n):
            raise ConfigError("support index out of range")
        if np.unique(supports).size != supports.size:
            raise ConfigError("coarse supports must be pairwise disjoint")
        object.__setattr__(self, "supports", supports)

    @property
    def m(self) -> int:
        return self.supports.shape[0]

    @property
    def r(self) -> int:
        return self.supports.shape[1]

    @property
    def c(self) -> np.ndarray:
        c = np.zeros((self.m, self.n))
        c[np.repeat(np.arange(self.m), self.r), self.supports.ravel()] = 1.0 / self.r
        return c

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``C @ x`` for a fine-node vector, without forming C."""
        return np.asarray(x)[self.supports].mean(axis=1)


def sample_coarsening(assign: CommunityAssignment, m: int, r: int, omega: float,
                      rng: np.random.Generator, perfect_sync: bool = False) -> CoarseningMap:
    """Sample a coarsening map with controllable community overlap.

    For each coarse node: draw a dominant community from the community
    proportions, draw mixing weights ``w ~ Dir(omega, .., 1, .., omega)``
    (1 at the dominant community) and take ``floor(r * w_k)`` unselected
    fine nodes from each community k. Slots lost to the floors, and any
    allocation a depleted community cannot serve, go to the dominant
    community, then to whichever community has the most unselected nodes.

    ``perfect_sync`` replaces the Dirichlet draw by a point mass on the
    dominant community, so every coarse node lies in a single community.
    """
    n, K = assign.n, assign.K
    if r < 1 or m < 1:
        raise ConfigError(f"need m >= 1 and r >= 1, got m={m}, r={r}")
    if m * r > n:
        raise InfeasibleCoarseningError(f"m * r = {m * r} exceeds n = {n}")
    if not perfect_sync and not 0 < omega < 1:
        raise ConfigError(f"omega must lie in (0, 1), got {omega}")

    pools = [list(rng.permutation(assign.members(k))) for k in range(K)]
    dominant = rng.choice(K, size=m, p=assign.relative_sizes)
    supports = np.empty((m, r), dtype=np.intp)
    for i in range(m):
        k0 = dominant[i]
        if perfect_sync:
            weights = np.zeros(K)
            weights[k0] = 1.0
        else:
            alpha = np.full(K, float(omega))
            alpha[k0] = 1.0
            weights = rng.dirichlet(alpha)
        alloc = np.floor(r * weights).astype(np.intp)
        alloc[k0] += r - alloc.sum()

        chosen = []
        deficit = 0
        for k in range(K):
            take = min(alloc[k], len(pools[k]))
            chosen.extend(pools[k][:take])
            del pools[k][:take]
            deficit += alloc[k] - take
        while deficit:
            k = k0 if pools[k0] else int(np.argmax([len(p) for p in pools]))
            if not pools[k]:
                raise PoolExhaustedError(f"no unselected fine nodes left for coarse node {i}")
            take = min(deficit, len(pools[k]))
            chosen.extend(pools[k][:take])
            del pools[k][:take]
            deficit -= take
        supports[i] = np.sort(chosen)
    return CoarseningMap(supports=supports, n=n)


def coarse_adjacency(cmap: CoarseningMap, a: np.ndarray) -> np.ndarray:
    """``C @ A @ C.T`` as block averages over the disjoint supports."""
    a = np.asarray(a)
    if a.shape != (cmap.n, cmap.n):
        raise ConfigError(f"adjacency is {a.shape}, coarsening map expects n={cmap.n}")
    m, r = cmap.m, cmap.r
    idx = cmap.supports.ravel()
    blocks = a[np.ix_(idx, idx)].reshape(m, r, m, r)
    at = blocks.sum(axis=(1, 3)) / r**2
    return 0.5 * (at + at.T)


def coarse_membership(cmap: CoarseningMap, assign: CommunityAssignment) -> np.ndarray:
    """``Phi = C @ psi.T``: fraction of each coarse node's group in each community."""
    if cmap.n != assign.n:
        raise ConfigError("coarsening map and assignment disagree on n")
    lab = assign.labels[cmap.supports]
    counts = np.stack([(lab == k).sum(axis=1) for k in range(assign.K)], axis=1)
    return counts / cmap.r


@dataclass(frozen=True)
class SyncStats:
    support_sizes: np.ndarray
    perfect_sync: bool
    overlap: np.ndarray
    balancedness_gap: float


def sync_stats(phi: np.ndarray, D: np.ndarray) -> SyncStats:
    """Synchronization summary of a coarse membership matrix.

    ``overlap`` is ``Phi.T @ Phi / m``; ``balancedness_gap`` is
    ``max |D - Phi.T @ Phi / m|``.
    """
    phi = np.asarray(phi, dtype=float)
    sizes = np.count_nonzero(phi, axis=1)
    overlap = phi.T @ phi / phi.shape[0]
    gap = float(np.max(np.abs(np.asarray(D) - overlap)))
    return SyncStats(sizes, bool(np.all(sizes == 1)), overlap, gap)


def expected_coarse(phi: np.ndarray, model: BlockModel) -> np.ndarray:
    """``Phi @ P @ Phi.T``, the expectation of the coarse adjacency."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape[1] != model.K:
        raise ConfigError("Phi column count must equal K")
    return phi @ model.P @ phi.T


def write_coarsening(path, cmap: CoarseningMap) -> None:
    """``m n r`` header, then one line of 1-indexed support indices per row."""
    with open(Path(path), "w") as fh:
        fh.write(f"{cmap.m} {cmap.n} {cmap.r}\n")
        for row in cmap.supports:
            fh.write(" ".join(str(v + 1) for v in row) + "\n")


def read_coarsening(path) -> CoarseningMap:
    with open(Path(path)) as fh:
        m, n, r = (int(x) for x in fh.readline().split())
        rows = [[int(x) - 1 for x in line.split()] for line in fh if line.strip()]
    supports = np.array(rows, dtype=np.intp).reshape(m, r)
    return CoarseningMap(supports=supports, n=n)
