"""Smoothed-aggregation h-coarsening for the order-1 operator and below."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sparse
from .sparse import CooArrays, SparseMatrix, coo_to_csr

__all__ = [
    "Aggregation",
    "StrengthGraph",
    "mis_aggregate",
    "smooth_prolongation",
    "strength_graph",
    "tentative_prolongation",
]


@dataclass(frozen=True)
class StrengthGraph:
    """Symmetric, loop-free strong-coupling pattern.

    ``adjacency`` stores ``|A_ij| / sqrt(|A_ii A_jj|)`` for every kept edge,
    so the values double as connection strengths.
    """

    adjacency: SparseMatrix
    theta: float

    @property
    def n(self):
        return self.adjacency.nrows

    def neighbors(self, i):
        return self.adjacency.row(i)[0]


@dataclass(frozen=True)
class Aggregation:
    assignment: np.ndarray
    n_aggregates: int
    roots: np.ndarray

    def sizes(self):
        return np.bincount(self.assignment, minlength=self.n_aggregates)


def _checked_diag(A):
    d = A.diagonal()
    if np.any(d == 0.0):
        i = int(np.flatnonzero(d == 0.0)[0])
        raise ValueError(f"zero diagonal entry in row {i}; operator is not usable for aggregation")
    return d


def strength_graph(A: SparseMatrix, theta: float = 0.25) -> StrengthGraph:
    """Keep ``i != j`` with ``|A_ij| >= theta * sqrt(|A_ii| |A_jj|)``."""
    if A.nrows != A.ncols:
        raise ValueError("strength graph needs a square matrix")
    if not 0.0 <= theta < 1.0:
        raise ValueError("theta must lie in [0, 1)")
    d = np.abs(_checked_diag(A))
    rows, cols, vals = A.row_ids(), A.col_indices, A.values
    scaled = np.abs(vals) / np.sqrt(d[rows] * d[cols])
    keep = (rows != cols) & (scaled >= theta)
    # A is assumed symmetric; symmetrise the pattern anyway so roundoff cannot break it
    r, c, s = rows[keep], cols[keep], scaled[keep]
    adj = coo_to_csr(CooArrays(np.concatenate([r, c]), np.concatenate([c, r]), np.concatenate([s, s])),
                     A.nrows, A.ncols)
    return StrengthGraph(adj, float(theta))


def mis_aggregate(g: StrengthGraph, seed: int | None = None) -> Aggregation:
    """Greedy aggregation in ascending dof order.

    Each still-unassigned dof becomes a root and takes every unassigned strong
    neighbour into its aggregate. Roots therefore form an independent set,
    every dof is assigned in the single pass, and isolated dofs end up as
    singletons. ``seed`` is reserved for randomised orderings and ignored.
    """
    adj = g.adjacency
    agg, roots = sparse._kernels.mis_aggregate(g.n, adj.row_offsets, adj.col_indices)
    return Aggregation(agg, int(roots.size), roots)


def tentative_prolongation(agg: Aggregation) -> SparseMatrix:
    n = agg.assignment.size
    return coo_to_csr(CooArrays(np.arange(n), agg.assignment, np.ones(n)), n, agg.n_aggregates)


def smooth_prolongation(A: SparseMatrix, T: SparseMatrix, omega: float = 2.0 / 3.0,
                        method: str = "jacobi") -> SparseMatrix:
    """``P = (I - S A) T`` with a diagonal ``S``.

    ``method="jacobi"``: ``S = omega D^{-1}``. ``method="spai0"``: ``S`` is the
    diagonal sparse approximate inverse ``A_ii / sum_j A_ij^2`` (``omega`` unused).
    """
    if A.ncols != T.nrows or A.nrows != A.ncols:
        raise ValueError(f"incompatible shapes {A.shape} and {T.shape}")
    d = _checked_diag(A)
    if method == "jacobi":
        s = omega / d
    elif method == "spai0":
        s = d / np.bincount(A.row_ids(), weights=A.values ** 2, minlength=A.nrows)
    else:
        raise ValueError(f"unknown prolongation smoother '{method}'")
    if not np.any(s):
        return T
    AT = sparse.matmul(A, T)
    SAT = SparseMatrix(AT.nrows, AT.ncols, AT.row_offsets, AT.col_indices,
                       AT.values * s[AT.row_ids()], check=False)
    return sparse.add(T, SAT, -1.0)
