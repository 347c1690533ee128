"""Worked 8-node, 3-community, 4-coarse-node example in exact rational arithmetic.

Communities occupy nodes {0,1,2}, {3,4,5,6}, {7}; coarse node i averages
fine nodes {2i, 2i+1}. Two coarse nodes are pure, two straddle a community
boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .coarsening import CoarseningMap, coarse_membership, sync_stats
from .sbm import CommunityAssignment, generate_membership

N_FINE = 8
COMMUNITY_SIZES = (3, 4, 1)
SUPPORTS = ((0, 1), (2, 3), (4, 5), (6, 7))

Matrix = list[list[Fraction]]


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0))
             for j in range(len(b[0]))] for i in range(len(a))]


def _transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


@dataclass(frozen=True)
class ExampleMatrices:
    psi: Matrix
    c: Matrix
    phi: Matrix
    d: Matrix
    overlap: Matrix
    balancedness_gap: Fraction


def exact_matrices() -> ExampleMatrices:
    """All example matrices as ``Fraction`` lists, built by direct products."""
    K, n, m = len(COMMUNITY_SIZES), N_FINE, len(SUPPORTS)
    bounds = np.cumsum((0,) + COMMUNITY_SIZES)
    psi = [[Fraction(int(bounds[k] <= v < bounds[k + 1])) for v in range(n)] for k in range(K)]
    c = [[Fraction(1, len(s)) if v in s else Fraction(0) for v in range(n)] for s in SUPPORTS]
    phi = _matmul(c, _transpose(psi))
    d = [[Fraction(COMMUNITY_SIZES[k], n) if k == l else Fraction(0) for l in range(K)] for k in range(K)]
    overlap = [[x / m for x in row] for row in _matmul(_transpose(phi), phi)]
    gap = max(abs(d[k][l] - overlap[k][l]) for k in range(K) for l in range(K))
    return ExampleMatrices(psi, c, phi, d, overlap, gap)


def package_objects() -> tuple[CommunityAssignment, CoarseningMap]:
    """The same example built through the library's own constructors."""
    pi = np.array(COMMUNITY_SIZES, dtype=float) / N_FINE
    assign = generate_membership(N_FINE, pi)
    return assign, CoarseningMap(supports=np.array(SUPPORTS), n=N_FINE)


def numeric_matches_exact(tol: float = 0.0) -> bool:
    """Library results (float) equal the exact fractions to within ``tol``."""
    ex = exact_matrices()
    assign, cmap = package_objects()
    phi = coarse_membership(cmap, assign)
    stats = sync_stats(phi, np.diag(assign.relative_sizes))
    pairs = [(assign.psi, ex.psi), (cmap.c, ex.c), (phi, ex.phi),
             (np.diag(assign.relative_sizes), ex.d), (stats.overlap, ex.overlap)]
    ok = all(np.max(np.abs(np.asarray(a, float) - np.array(b, dtype=float))) <= tol for a, b in pairs)
    return ok and abs(stats.balancedness_gap - float(ex.balancedness_gap)) <= tol


def format_matrix(name: str, a: Matrix) -> str:
    cells = [[str(x) for x in row] for row in a]
    width = max(len(s) for row in cells for s in row)
    lines = [f"{name} ({len(a)}x{len(a[0])}):"]
    lines += ["  [" + " ".join(s.rjust(width) for s in row) + "]" for row in cells]
    return "\n".join(lines)


def report() -> str:
    ex = exact_matrices()
    blocks = [
        format_matrix("Psi", ex.psi),
        format_matrix("C", ex.c),
        format_matrix("Phi = C Psi^T", ex.phi),
        format_matrix("D", ex.d),
        format_matrix("Phi^T Phi / m", ex.overlap),
        f"max |D - Phi^T Phi / m| = {ex.balancedness_gap}",
    ]
    return "\n\n".join(blocks)
