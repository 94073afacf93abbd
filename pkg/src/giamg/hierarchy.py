"""GIAMG level hierarchy: p-levels, then smoothed-aggregation h-levels, then a
dense direct solve, applied through a recursive v-cycle."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .coarsen_h import mis_aggregate, smooth_prolongation, strength_graph, tentative_prolongation
from .coarsen_p import p_coarsen, plan_halving, plan_orders
from .dense_lu import DenseLU
from .smoothers import ChebyshevData, chebyshev_setup, chebyshev_smooth
from .sparse import SparseMatrix, galerkin_triple, residual, spmv, transpose
from .timing import NULL_TIMINGS, Timings

log = logging.getLogger(__name__)

__all__ = [
    "Hierarchy",
    "HierarchySetupError",
    "Level",
    "LevelKind",
    "Preconditioner",
    "SolveOptions",
    "VCycleWorkspace",
    "coarsest_factorize",
    "setup",
    "vcycle",
]


class HierarchySetupError(ValueError):
    pass


class LevelKind(enum.Enum):
    P_LEVEL = "p"
    H_LEVEL = "h"
    COARSEST = "coarsest"


class Preconditioner(enum.Enum):
    GIAMG = "giamg"
    DIAGONAL = "diag"
    NONE = "none"


@dataclass(frozen=True)
class SolveOptions:
    rtol: float = 1e-10
    max_iters: int = 5000
    smooth_iters: int = 2
    p_stride: int = 1
    # "stride": p, p-s, ..., 1.  "halve": p, ceil(p/2), ..., 1.
    p_schedule: str = "stride"
    theta: float = 0.25
    coarsest_max_size: int = 1000
    max_h_levels: int = 6
    preconditioner: Preconditioner = Preconditioner.GIAMG
    lo_factor: float = 8.0
    hi_factor: float = 1.1
    power_iters: int = 30
    seed: int = 0
    omega: float = 2.0 / 3.0
    prolongation_smoother: str = "jacobi"

    def __post_init__(self):
        object.__setattr__(self, "preconditioner", Preconditioner(self.preconditioner))
        if not self.rtol > 0:
            raise ValueError("rtol must be positive")
        for name in ("max_iters", "smooth_iters", "p_stride", "coarsest_max_size", "max_h_levels",
                     "power_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.p_schedule not in ("stride", "halve"):
            raise ValueError(f"unknown p_schedule '{self.p_schedule}'")

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class Level:
    kind: LevelKind
    A: SparseMatrix
    order: int | None = None
    P: SparseMatrix | None = None
    R: SparseMatrix | None = None
    smoother: ChebyshevData | None = None

    @property
    def size(self):
        return self.A.nrows

    @property
    def nnz(self):
        return self.A.nnz


def coarsest_factorize(A: SparseMatrix) -> DenseLU:
    return DenseLU(A.to_dense())


@dataclass
class Hierarchy:
    levels: list
    coarsest_factorization: DenseLU
    options: SolveOptions = field(default_factory=SolveOptions)

    def __len__(self):
        return len(self.levels)

    @property
    def coarsest(self):
        return self.levels[-1]

    def info_lines(self):
        """``level kind order size nnz nnz_per_row`` per level; ``-`` for no order."""
        out = []
        for i, lev in enumerate(self.levels):
            order = "-" if lev.order is None else str(lev.order)
            out.append(f"{i} {lev.kind.value} {order} {lev.size} {lev.nnz} {lev.nnz / lev.size:.2f}")
        return out

    def workspace(self):
        return VCycleWorkspace(self)

    def preconditioner(self, timings=None):
        """Fresh v-cycle preconditioner with its own workspace."""
        return GIAMGPreconditioner(self, timings)


def _system_parts(system):
    if isinstance(system, SparseMatrix):
        return system, None, None
    return system.A, getattr(system, "l2g", None), getattr(system, "g2u", None)


def setup(system, opts: SolveOptions | None = None, timings: Timings | None = None) -> Hierarchy:
    """Build the GIAMG hierarchy.

    Parameters
    ----------
    system : SparseMatrix or object with ``A``, ``l2g`` and ``g2u``
        Without an l2g map of order > 1, only h-coarsening is done.
    opts : SolveOptions
    """
    opts = opts or SolveOptions()
    timings = timings or NULL_TIMINGS
    A, l2g, g2u = _system_parts(system)
    if A.nrows != A.ncols:
        raise HierarchySetupError("operator must be square")

    with timings.time("setup"):
        levels = []
        order = None
        if l2g is not None:
            order = l2g.order
            if g2u is None:
                raise HierarchySetupError("an l2g map needs a matching g2u map")
            if len(g2u) != A.nrows:
                raise HierarchySetupError(f"g2u has {len(g2u)} entries, operator has {A.nrows} rows")
        if l2g is not None and l2g.order > 1:
            plan = plan_halving(l2g.order) if opts.p_schedule == "halve" else plan_orders(l2g.order, opts.p_stride)
            for p_c in plan.orders[1:]:
                step = p_coarsen(l2g, g2u, p_c)
                if step.P.nrows != A.nrows:
                    raise HierarchySetupError(
                        f"prolongation has {step.P.nrows} rows, operator has {A.nrows}"
                    )
                R = transpose(step.P)
                levels.append(Level(LevelKind.P_LEVEL, A, order, step.P, R, _smoother(A, opts)))
                A = galerkin_triple(R, A, step.P)
                l2g, g2u, order = step.l2g, step.g2u, p_c

        n_h = 0
        while A.nrows > opts.coarsest_max_size and n_h < opts.max_h_levels:
            agg = mis_aggregate(strength_graph(A, opts.theta), opts.seed)
            if agg.n_aggregates >= A.nrows:
                log.info("h-coarsening stalled at %d dofs", A.nrows)
                break
            P = smooth_prolongation(A, tentative_prolongation(agg), opts.omega, opts.prolongation_smoother)
            R = transpose(P)
            levels.append(Level(LevelKind.H_LEVEL, A, order, P, R, _smoother(A, opts)))
            A = galerkin_triple(R, A, P)
            order = None
            n_h += 1

        if A.nrows > opts.coarsest_max_size:
            log.warning("coarsest level has %d dofs (> coarsest_max_size=%d)", A.nrows, opts.coarsest_max_size)
        levels.append(Level(LevelKind.COARSEST, A, order))
        lu = coarsest_factorize(A)
    return Hierarchy(levels, lu, opts)


def _smoother(A, opts):
    return chebyshev_setup(A, opts.smooth_iters, opts.lo_factor, opts.hi_factor, opts.power_iters, opts.seed)


class VCycleWorkspace:
    """Per-solve scratch vectors; one instance per concurrent solve."""

    def __init__(self, h: Hierarchy):
        sizes = [lev.size for lev in h.levels]
        self.r = [np.empty(n) for n in sizes]
        self.b = [np.empty(n) for n in sizes]
        self.x = [np.empty(n) for n in sizes]
        self.cheb = [(np.empty(n), np.empty(n)) for n in sizes]


def vcycle(h: Hierarchy, level: int, b, x, ws: VCycleWorkspace | None = None,
           timings: Timings | None = None):
    """One v-cycle on ``A_level x = b`` starting from (and updating) ``x``."""
    timings = timings or NULL_TIMINGS
    ws = ws or VCycleWorkspace(h)
    lev = h.levels[level]
    if len(b) != lev.size or len(x) != lev.size:
        raise ValueError(f"level {level} has size {lev.size}; got vectors of {len(b)} and {len(x)}")
    if lev.kind is LevelKind.COARSEST:
        with timings.time("coarsest_solve"):
            h.coarsest_factorization.solve(b, out=x)
        return x

    _smooth(lev, level, b, x, ws, timings)
    r = ws.r[level]
    with timings.time("residual"):
        residual(lev.A, x, b, out=r)
    bc, xc = ws.b[level + 1], ws.x[level + 1]
    with timings.time("transfer"):
        spmv(lev.R, r, out=bc)
    xc[:] = 0.0
    vcycle(h, level + 1, bc, xc, ws, timings)
    with timings.time("transfer"):
        spmv(lev.P, xc, out=r)
        x += r
    _smooth(lev, level, b, x, ws, timings)
    return x


def _smooth(lev, level, b, x, ws, timings):
    with timings.time("smooth"):
        if level == 0:
            with timings.time("first_level_smooth"):
                chebyshev_smooth(lev.A, lev.smoother, b, x, ws.cheb[level])
        else:
            chebyshev_smooth(lev.A, lev.smoother, b, x, ws.cheb[level])


class GIAMGPreconditioner:
    """``z = M^{-1} r``: one v-cycle from a zero initial guess."""

    def __init__(self, h: Hierarchy, timings: Timings | None = None):
        self.hierarchy = h
        self.timings = timings or NULL_TIMINGS
        self.ws = VCycleWorkspace(h)

    def __call__(self, r, out=None):
        out = np.zeros(len(r)) if out is None else out
        out[:] = 0.0
        with self.timings.time("vcycle"):
            vcycle(self.hierarchy, 0, r, out, self.ws, self.timings)
        return out
