"""Element-to-dof maps and their reconstruction on p-coarsened levels.

Three numberings are involved: elemental (position inside an element's modal
tensor ordering), process (row/column of the process matrix; values of the
l2g map) and universal (the cross-process system; values of the g2u map). In a
single process the universal numbering is a relabelling of the process one.

An l2g entry of ``-1`` marks a constrained dof that is not part of the
system (boundary dofs under elimination). Such entries are carried through
every level and never selected.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "CoarseSelection",
    "DofMapError",
    "GlobalToUniversalMap",
    "LocalToGlobalMap",
    "dof_next",
    "dof_next_univ",
    "extract_next_dof",
    "g2u_next",
    "l2g_next",
    "next_dof_positions",
]


class DofMapError(ValueError):
    """Inconsistent maps (lookup miss, wrong row width, ...)."""


@dataclass(frozen=True, eq=False)
class LocalToGlobalMap:
    """Per-element process dof indices in modal tensor order.

    ``rows[e, (p+1)^2 i + (p+1) j + k]`` is the process dof of the mode with
    tensor indices ``(i, j, k)`` in element ``e``.
    """

    order: int
    rows: np.ndarray

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != (self.order + 1) ** 3:
            raise DofMapError(
                f"l2g rows must have (p+1)^3 = {(self.order + 1) ** 3} entries, got shape {rows.shape}"
            )
        if rows.size and rows.min() < -1:
            raise DofMapError("l2g entries must be >= -1")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def n_elements(self):
        return self.rows.shape[0]

    @property
    def n_dofs(self):
        """Number of process dofs referenced (max index + 1)."""
        return int(self.rows.max()) + 1 if self.rows.size else 0

    def validate(self, n_dofs=None):
        """Check that entries lie in ``[0, n_dofs)`` and that every dof is used."""
        n = self.n_dofs if n_dofs is None else n_dofs
        used = self.rows[self.rows >= 0]
        if used.size and used.max() >= n:
            raise DofMapError(f"l2g entry {used.max()} >= dof count {n}")
        if np.unique(used).size != n:
            raise DofMapError("some process dofs are not referenced by any element")

    def __eq__(self, other):
        return (
            isinstance(other, LocalToGlobalMap)
            and self.order == other.order
            and np.array_equal(self.rows, other.rows)
        )


@dataclass(frozen=True, eq=False)
class GlobalToUniversalMap:
    """``values[process_dof] = universal_dof``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.int64).ravel()
        if np.unique(v).size != v.size:
            raise DofMapError("g2u values must be unique")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        return isinstance(other, GlobalToUniversalMap) and np.array_equal(self.values, other.values)

    @classmethod
    def identity(cls, n):
        return cls(np.arange(n, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class CoarseSelection:
    """Sorted unique fine dofs that survive coarsening, with their coarse labels.

    ``collect[c]`` is the fine process dof that becomes coarse dof ``c``;
    :meth:`lookup` is the inverse (``hash_l2g``).
    """

    collect: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.collect, dtype=np.int64)
        if c.size > 1 and np.any(np.diff(c) <= 0):
            raise DofMapError("collect must be strictly increasing")
        c.flags.writeable = False
        object.__setattr__(self, "collect", c)

    def __len__(self):
        return self.collect.size

    def lookup(self, fine):
        """Coarse label of each fine dof in ``fine``; ``-1`` passes through."""
        fine = np.asarray(fine, dtype=np.int64)
        out = np.full(fine.shape, -1, dtype=np.int64)
        m = fine >= 0
        pos = np.searchsorted(self.collect, fine[m])
        pos_c = np.minimum(pos, max(len(self.collect) - 1, 0))
        if len(self.collect) == 0 or np.any(self.collect[pos_c] != fine[m]):
            raise DofMapError("extracted dof missing from the coarse selection")
        out[m] = pos
        return out

    @property
    def hash_l2g(self):
        """The fine-to-coarse lookup as a plain dict."""
        return {int(f): c for c, f in enumerate(self.collect.tolist())}


@lru_cache(maxsize=None)
def _positions(p_fine, p_coarse):
    s = p_fine + 1
    r = np.arange(p_coarse + 1)
    pos = (s * s * r[:, None, None] + s * r[None, :, None] + r[None, None, :]).ravel()
    pos.flags.writeable = False
    return pos


def next_dof_positions(p_fine, p_coarse):
    """Elemental positions of the modes kept when truncating ``p_fine`` to ``p_coarse``.

    Ordered by ``i, j, k`` loops over ``0..p_coarse``; the result is itself in
    order-``p_coarse`` tensor ordering.
    """
    if not 1 <= p_coarse < p_fine:
        raise DofMapError(f"need 1 <= p_coarse < p_fine, got {p_coarse}, {p_fine}")
    return _positions(p_fine, p_coarse)


def extract_next_dof(row, p_fine, p_coarse):
    row = np.asarray(row)
    if row.shape[-1] != (p_fine + 1) ** 3:
        raise DofMapError(f"row has {row.shape[-1]} entries, expected {(p_fine + 1) ** 3}")
    return row[..., next_dof_positions(p_fine, p_coarse)]


def dof_next(l2g: LocalToGlobalMap, p_coarse: int) -> CoarseSelection:
    """Sorted, de-duplicated fine dofs kept by any element."""
    sel = extract_next_dof(l2g.rows, l2g.order, p_coarse)
    collect = np.unique(sel)
    return CoarseSelection(collect[collect >= 0])


def l2g_next(l2g: LocalToGlobalMap, sel: CoarseSelection, p_coarse: int) -> LocalToGlobalMap:
    """Coarse-level l2g map: relabel each element's kept dofs through ``sel``."""
    return LocalToGlobalMap(p_coarse, sel.lookup(extract_next_dof(l2g.rows, l2g.order, p_coarse)))


def dof_next_univ(sel: CoarseSelection, g2u: GlobalToUniversalMap):
    """Universal indices of the kept dofs, sorted and de-duplicated.

    With one process the gather step is a copy of the local selection.
    """
    return np.unique(g2u.values[sel.collect])


def g2u_next(l2g_coarse: LocalToGlobalMap, sel: CoarseSelection,
             g2u: GlobalToUniversalMap) -> GlobalToUniversalMap:
    """Coarse-level g2u map.

    For every coarse process dof ``c`` appearing in ``l2g_coarse``:
    ``fine = collect[c]``, ``univ = g2u[fine]`` and the result is the position
    of ``univ`` in the sorted universal collection.
    """
    collect_univ = dof_next_univ(sel, g2u)
    coarse = l2g_coarse.rows[l2g_coarse.rows >= 0]
    if coarse.size and coarse.max() >= len(sel):
        raise DofMapError("coarse l2g entry outside the selection")
    fine_univ = g2u.values[sel.collect[coarse]]
    pos = np.searchsorted(collect_univ, fine_univ)
    if np.any(collect_univ[np.minimum(pos, len(collect_univ) - 1)] != fine_univ):
        raise DofMapError("universal dof missing from the gathered collection")
    out = np.full(len(sel), -1, dtype=np.int64)
    out[coarse] = pos
    if np.any(out < 0):
        raise DofMapError("coarse dof not referenced by any element")
    return GlobalToUniversalMap(out)
