"""Preconditioned conjugate gradients with convergence and timing logs."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .hierarchy import Preconditioner, SolveOptions, setup
from .sparse import SparseMatrix, residual, spmv
from .timing import Timings

log = logging.getLogger(__name__)

__all__ = [
    "ConvergenceLog",
    "IndefinitePreconditionerError",
    "PCGBreakdownError",
    "diagonal_preconditioner",
    "identity_preconditioner",
    "make_preconditioner",
    "pcg_solve",
    "solve",
]


class PCGBreakdownError(ArithmeticError):
    pass


class IndefinitePreconditionerError(PCGBreakdownError):
    pass


@dataclass
class ConvergenceLog:
    relres: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    timings: Timings = field(default_factory=Timings)

    def to_csv(self):
        lines = ["iter,relres"]
        lines += [f"{i},{r:.17g}" for i, r in enumerate(self.relres)]
        return "\n".join(lines) + "\n"


def identity_preconditioner(r, out=None):
    if out is None:
        return np.array(r, dtype=float)
    out[:] = r
    return out


def diagonal_preconditioner(A: SparseMatrix):
    """``z = D^{-1} r``; requires a strictly positive diagonal."""
    d = A.diagonal()
    if np.any(d <= 0):
        i = int(np.flatnonzero(d <= 0)[0])
        raise ValueError(f"diagonal preconditioner needs a positive diagonal; row {i} has {d[i]}")
    dinv = 1.0 / d

    def apply(r, out=None):
        if out is None:
            return dinv * r
        np.multiply(dinv, r, out=out)
        return out

    return apply


def pcg_solve(A: SparseMatrix, b, x0=None, precond=None, opts: SolveOptions | None = None, *,
              rtol=None, max_iters=None, timings: Timings | None = None):
    """Solve ``A x = b`` with preconditioned CG.

    Convergence is judged on the true residual ``||b - A x|| / ||b||``,
    recomputed every iteration. ``x0`` defaults to zero; ``precond`` to the
    identity.

    Returns
    -------
    x : ndarray
    log : ConvergenceLog
    """
    opts = opts or SolveOptions()
    rtol = opts.rtol if rtol is None else rtol
    max_iters = opts.max_iters if max_iters is None else max_iters
    M = precond or identity_preconditioner
    tm = timings or Timings()
    clog = ConvergenceLog(timings=tm)
    n = A.nrows
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise ValueError(f"right-hand side of length {b.shape} for a {n}x{n} system")
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)

    t_start = time.perf_counter()
    bnorm = np.linalg.norm(b)
    r = residual(A, x, b)
    if bnorm == 0.0:
        x[:] = 0.0
        clog.relres.append(0.0)
        clog.converged = True
        tm.add("total_solve", time.perf_counter() - t_start)
        return x, clog
    true_r = np.empty(n)
    clog.relres.append(np.linalg.norm(r) / bnorm)
    if clog.relres[0] <= rtol:
        clog.converged = True
        tm.add("total_solve", time.perf_counter() - t_start)
        return x, clog

    z = M(r, np.empty(n))
    rz = float(r @ z)
    if rz <= 0:
        raise IndefinitePreconditionerError("r^T M^{-1} r <= 0 at iteration 0")
    pdir = z.copy()
    Ap = np.empty(n)
    for it in range(1, max_iters + 1):
        t_it = time.perf_counter()
        with tm.time("cg_matvec"):
            spmv(A, pdir, out=Ap)
        with tm.time("cg_dot"):
            pAp = float(pdir @ Ap)
        if pAp <= 0:
            raise PCGBreakdownError(f"p^T A p <= 0 at iteration {it}; operator not positive definite")
        alpha = rz / pAp
        x += alpha * pdir
        r -= alpha * Ap
        with tm.time("cg_matvec"):
            residual(A, x, b, out=true_r)
        with tm.time("cg_dot"):
            rel = float(np.linalg.norm(true_r)) / bnorm
        clog.relres.append(rel)
        clog.iterations = it
        if rel <= rtol:
            clog.converged = True
            tm.add("per_iteration", time.perf_counter() - t_it)
            break
        M(r, z)
        with tm.time("cg_dot"):
            rz_new = float(r @ z)
        if rz_new <= 0:
            raise IndefinitePreconditionerError(f"r^T M^{{-1}} r <= 0 at iteration {it}")
        pdir *= rz_new / rz
        pdir += z
        rz = rz_new
        tm.add("per_iteration", time.perf_counter() - t_it)
    tm.add("total_solve", time.perf_counter() - t_start)
    if not clog.converged:
        log.info("PCG stopped after %d iterations at relres %.3e", clog.iterations, clog.relres[-1])
    return x, clog


def make_preconditioner(system, opts: SolveOptions, timings: Timings | None = None):
    """Preconditioner callable for ``opts.preconditioner`` (builds the hierarchy for GIAMG)."""
    A = system if isinstance(system, SparseMatrix) else system.A
    kind = opts.preconditioner
    if kind is Preconditioner.GIAMG:
        h = setup(system, opts, timings)
        return h.preconditioner(timings), h
    if kind is Preconditioner.DIAGONAL:
        return diagonal_preconditioner(A), None
    return identity_preconditioner, None


def solve(system, opts: SolveOptions | None = None, b=None):
    """Set up the configured preconditioner and run PCG on ``system``.

    Returns ``(x, log, hierarchy_or_None)``.
    """
    opts = opts or SolveOptions()
    tm = Timings()
    M, h = make_preconditioner(system, opts, tm)
    A = system if isinstance(system, SparseMatrix) else system.A
    rhs = system.b if b is None else b
    x, clog = pcg_solve(A, rhs, precond=M, opts=opts, timings=tm)
    return x, clog, h
