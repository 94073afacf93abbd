"""p-coarsening: order schedules and injection prolongation between p-levels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dofmaps import (
    CoarseSelection,
    DofMapError,
    GlobalToUniversalMap,
    LocalToGlobalMap,
    dof_next,
    extract_next_dof,
    g2u_next,
    l2g_next,
)
from .sparse import CooArrays, SparseMatrix, coo_to_csr

__all__ = ["PCoarsenPlan", "PStep", "build_p_prolongation", "p_coarsen", "plan_halving", "plan_orders"]


@dataclass(frozen=True)
class PCoarsenPlan:
    orders: tuple

    def __post_init__(self):
        o = tuple(int(v) for v in self.orders)
        if not o or o[-1] != 1:
            raise ValueError(f"plan must end at order 1: {o}")
        if any(a <= b for a, b in zip(o, o[1:])):
            raise ValueError(f"plan must be strictly decreasing: {o}")
        object.__setattr__(self, "orders", o)

    def __iter__(self):
        return iter(self.orders)

    def __len__(self):
        return len(self.orders)


def plan_orders(p_start: int, stride: int) -> PCoarsenPlan:
    """``p_start, p_start - stride, ...`` with the tail clamped to exactly 1."""
    if p_start < 1 or stride < 1:
        raise ValueError("p_start and stride must be >= 1")
    orders = list(range(p_start, 0, -stride))
    if orders[-1] != 1:
        orders.append(1)
    return PCoarsenPlan(tuple(orders))


def plan_halving(p_start: int) -> PCoarsenPlan:
    """``p -> ceil(p/2)`` until 1, e.g. 8, 4, 2, 1."""
    if p_start < 1:
        raise ValueError("p_start must be >= 1")
    orders = [p_start]
    while orders[-1] > 1:
        orders.append((orders[-1] + 1) // 2)
    return PCoarsenPlan(tuple(orders))


def build_p_prolongation(l2g_fine: LocalToGlobalMap, l2g_coarse: LocalToGlobalMap,
                         g2u_fine: GlobalToUniversalMap, g2u_coarse: GlobalToUniversalMap,
                         sel: CoarseSelection) -> SparseMatrix:
    """Injection prolongation from the coarse to the fine p-level.

    For each element and each kept mode, the entry at (universal fine dof,
    universal coarse dof) is 1. Repeats from shared dofs collapse.
    """
    if l2g_fine.n_elements != l2g_coarse.n_elements:
        raise DofMapError("fine and coarse l2g maps have different element counts")
    fine = extract_next_dof(l2g_fine.rows, l2g_fine.order, l2g_coarse.order)
    coarse = l2g_coarse.rows
    m = (fine >= 0) & (coarse >= 0)
    if np.any((fine >= 0) != (coarse >= 0)):
        raise DofMapError("constrained entries disagree between fine and coarse maps")
    if not np.array_equal(sel.collect[coarse[m]], fine[m]):
        raise DofMapError("coarse l2g does not relabel the extracted fine dofs")
    rows = g2u_fine.values[fine[m]]
    cols = g2u_coarse.values[coarse[m]]
    P = coo_to_csr(CooArrays(rows, cols, np.ones(rows.size)), len(g2u_fine), len(g2u_coarse))
    if np.any(np.diff(P.row_offsets) > 1):
        raise DofMapError("prolongation row holds more than one entry; maps are inconsistent")
    return P


@dataclass(frozen=True)
class PStep:
    """Result of coarsening one p-level."""

    P: SparseMatrix
    l2g: LocalToGlobalMap
    g2u: GlobalToUniversalMap


def p_coarsen(l2g: LocalToGlobalMap, g2u: GlobalToUniversalMap, p_coarse: int) -> PStep:
    """Coarse maps and prolongation for ``l2g.order -> p_coarse``."""
    sel = dof_next(l2g, p_coarse)
    l2g_c = l2g_next(l2g, sel, p_coarse)
    g2u_c = g2u_next(l2g_c, sel, g2u)
    return PStep(build_p_prolongation(l2g, l2g_c, g2u, g2u_c, sel), l2g_c, g2u_c)
