"""Command-line front end.

Exit codes: 0 converged / success, 2 not converged, 3 input error.
Set ``GIAMG_LOG`` (e.g. ``INFO``, ``DEBUG``) for log output on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import fileio
from .dofmaps import DofMapError, GlobalToUniversalMap, LocalToGlobalMap
from .fem import BoundaryPolicy, HexMesh, assemble_helmholtz
from .hierarchy import HierarchySetupError, Preconditioner, SolveOptions, setup
from .krylov import PCGBreakdownError, make_preconditioner, pcg_solve
from .sparse import SparseFormatError, SparseMatrix
from .timing import Timings

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_INPUT_ERROR = 3

log = logging.getLogger("giamg")


@dataclass
class LinearSystem:
    """A system loaded from files."""

    A: SparseMatrix
    b: np.ndarray | None
    l2g: LocalToGlobalMap | None = None
    g2u: GlobalToUniversalMap | None = None


def _int_list(text):
    """``"3"``, ``"1,2,4"`` or ``"1..4"``."""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(t) for t in text.split(",") if t]


def _add_problem_args(p, with_bc=True):
    g = p.add_argument_group("problem")
    g.add_argument("--n", type=int, default=2, help="elements per axis of the unit cube (default 2)")
    g.add_argument("--p", type=int, default=None, help="polynomial order")
    g.add_argument("--lambda", dest="lam", type=float, default=1.0, help="Helmholtz coefficient")
    if with_bc:
        g.add_argument("--bc", choices=[b.value for b in BoundaryPolicy], default="penalty")
    g.add_argument("--matrix", help="Matrix Market file (import instead of assembling)")
    g.add_argument("--rhs", help="right-hand side vector file")
    g.add_argument("--l2g", help="l2g map file")
    g.add_argument("--g2u", help="g2u map file")


def _add_solver_args(p, lists=False):
    g = p.add_argument_group("solver")
    g.add_argument("--rtol", type=float, default=1e-10)
    g.add_argument("--max-iters", type=int, default=5000)
    if lists:
        g.add_argument("--smooth-iters", type=_int_list, default=[2], help="e.g. 2, 1,2,4 or 1..4")
        g.add_argument("--p-stride", type=_int_list, default=[1], help="e.g. 1 or 1,2")
    else:
        g.add_argument("--smooth-iters", type=int, default=2)
        g.add_argument("--p-stride", type=int, default=1)
    g.add_argument("--p-schedule", choices=["stride", "halve"], default="stride")
    g.add_argument("--theta", type=float, default=0.25)
    g.add_argument("--coarsest-max", type=int, default=1000)
    g.add_argument("--max-h-levels", type=int, default=6)
    g.add_argument("--precond", choices=[v.value for v in Preconditioner], default="giamg")
    g.add_argument("--lo-factor", type=float, default=8.0)
    g.add_argument("--hi-factor", type=float, default=1.1)
    g.add_argument("--power-iters", type=int, default=30)
    g.add_argument("--prolongation-smoother", choices=["jacobi", "spai0"], default="jacobi")
    g.add_argument("--seed", type=int, default=0)


def _options(args, smooth_iters=None, p_stride=None):
    return SolveOptions(
        rtol=args.rtol,
        max_iters=args.max_iters,
        smooth_iters=args.smooth_iters if smooth_iters is None else smooth_iters,
        p_stride=args.p_stride if p_stride is None else p_stride,
        p_schedule=args.p_schedule,
        theta=args.theta,
        coarsest_max_size=args.coarsest_max,
        max_h_levels=args.max_h_levels,
        preconditioner=args.precond,
        lo_factor=args.lo_factor,
        hi_factor=args.hi_factor,
        power_iters=args.power_iters,
        seed=args.seed,
        prolongation_smoother=args.prolongation_smoother,
    )


def build_parser():
    ap = argparse.ArgumentParser(prog="giamg", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assemble", help="assemble the Helmholtz benchmark and write it to files")
    _add_problem_args(p)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("solve", help="solve a benchmark or imported system")
    _add_problem_args(p)
    _add_solver_args(p)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--json", action="store_true", help="also write timings.json")

    p = sub.add_parser("hierarchy-info", help="print the multigrid hierarchy")
    _add_problem_args(p)
    _add_solver_args(p)

    p = sub.add_parser("bench", help="time v-cycles and PCG for one or more configurations")
    _add_problem_args(p)
    _add_solver_args(p, lists=True)
    p.add_argument("--warmup", type=int, default=2)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--out-dir", default=None, help="write bench.csv here")
    return ap


def _load_system(args, project_exact=False):
    if args.matrix:
        A = fileio.read_matrix_market(args.matrix)
        b = fileio.read_vector(args.rhs) if args.rhs else None
        if b is not None and len(b) != A.nrows:
            raise fileio.InputFormatError(args.rhs, len(b), f"vector has {len(b)} entries, matrix {A.nrows} rows")
        l2g = fileio.read_l2g(args.l2g) if args.l2g else None
        g2u = fileio.read_g2u(args.g2u) if args.g2u else None
        if l2g is not None and l2g.order > 1 and g2u is None:
            raise DofMapError("--l2g with order > 1 requires --g2u")
        if l2g is not None:
            l2g.validate(A.nrows)
        return LinearSystem(A, b, l2g, g2u)
    if args.p is None:
        raise ValueError("either --matrix or --p is required")
    mesh = HexMesh(args.n)
    return assemble_helmholtz(mesh, args.p, args.lam, BoundaryPolicy(args.bc), project_exact=project_exact)


def cmd_assemble(args):
    sys_ = _load_system(args, project_exact=True)
    os.makedirs(args.out_dir, exist_ok=True)
    d = args.out_dir
    fileio.write_matrix_market(os.path.join(d, "A.mtx"), sys_.A, symmetric=True,
                               comment=f"helmholtz n={args.n} p={args.p} lambda={args.lam} bc={args.bc}")
    fileio.write_vector(os.path.join(d, "b.vec"), sys_.b)
    fileio.write_vector(os.path.join(d, "exact.vec"), sys_.exact_coeffs)
    fileio.write_l2g(os.path.join(d, "map.l2g"), sys_.l2g)
    fileio.write_g2u(os.path.join(d, "map.g2u"), sys_.g2u)
    print(f"assembled {sys_.A.nrows} dofs, {sys_.A.nnz} nonzeros -> {d}")
    return EXIT_OK


def cmd_solve(args):
    system = _load_system(args)
    if system.b is None:
        raise ValueError("--rhs is required when importing a matrix")
    opts = _options(args)
    tm = Timings()
    M, h = make_preconditioner(system, opts, tm)
    x, clog = pcg_solve(system.A, system.b, precond=M, opts=opts, timings=tm)
    os.makedirs(args.out_dir, exist_ok=True)
    d = args.out_dir
    fileio.write_vector(os.path.join(d, "solution.vec"), x)
    with fileio.atomic_write(os.path.join(d, "convergence.csv")) as fh:
        fh.write(clog.to_csv())
    with fileio.atomic_write(os.path.join(d, "timings.txt")) as fh:
        fh.write(tm.report() + "\n")
    if args.json:
        with fileio.atomic_write(os.path.join(d, "timings.json")) as fh:
            json.dump({"iterations": clog.iterations, "converged": clog.converged,
                       "final_relres": clog.relres[-1], "timings": tm.as_dict()}, fh, indent=2)
    status = "converged" if clog.converged else "NOT converged"
    print(f"{status} in {clog.iterations} iterations, relres {clog.relres[-1]:.3e} "
          f"(precond={opts.preconditioner.value}, n={system.A.nrows})")
    print(tm.report())
    return EXIT_OK if clog.converged else EXIT_NOT_CONVERGED


def cmd_hierarchy_info(args):
    system = _load_system(args)
    h = setup(system, _options(args))
    print("level kind order size nnz nnz_per_row")
    for line in h.info_lines():
        print(line)
    return EXIT_OK


BENCH_COLUMNS = ("smooth_iters", "p_stride", "levels", "pcg_iters", "converged", "vcycle", "smooth",
                 "first_level_smooth", "residual", "transfer", "coarsest_solve", "per_iteration")


def run_bench(system, opts, warmup=2, repeats=10):
    """Mean per-v-cycle timings over ``repeats`` cycles plus one full PCG solve."""
    h = setup(system, opts)
    rng = np.random.default_rng(opts.seed)
    r = rng.standard_normal(system.A.nrows)
    M = h.preconditioner()
    for _ in range(warmup):
        M(r)
    tm = Timings()
    M = h.preconditioner(tm)
    for _ in range(repeats):
        M(r)
    row = {"smooth_iters": opts.smooth_iters, "p_stride": opts.p_stride, "levels": len(h)}
    for k in ("vcycle", "smooth", "first_level_smooth", "residual", "transfer", "coarsest_solve"):
        row[k] = tm.totals.get(k, 0.0) / repeats
    b = system.b if system.b is not None else system.A @ np.ones(system.A.nrows)
    ptm = Timings()
    _, clog = pcg_solve(system.A, b, precond=h.preconditioner(ptm), opts=opts, timings=ptm)
    row["pcg_iters"] = clog.iterations
    row["converged"] = int(clog.converged)
    row["per_iteration"] = ptm.mean("per_iteration")
    return row


def cmd_bench(args):
    system = _load_system(args)
    rows = []
    for stride in args.p_stride:
        for k in args.smooth_iters:
            rows.append(run_bench(system, _options(args, smooth_iters=k, p_stride=stride),
                                  args.warmup, args.repeats))
    header = " ".join(BENCH_COLUMNS)
    lines = [header]
    for row in rows:
        lines.append(" ".join(f"{row[c]:.6f}" if isinstance(row[c], float) else str(row[c])
                              for c in BENCH_COLUMNS))
    print("\n".join(lines))
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with fileio.atomic_write(os.path.join(args.out_dir, "bench.csv")) as fh:
            fh.write("\n".join(l.replace(" ", ",") for l in lines) + "\n")
    return EXIT_OK


COMMANDS = {
    "assemble": cmd_assemble,
    "solve": cmd_solve,
    "hierarchy-info": cmd_hierarchy_info,
    "bench": cmd_bench,
}


def main(argv=None):
    level = os.environ.get("GIAMG_LOG")
    if level:
        logging.basicConfig(level=level.upper(), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (fileio.InputFormatError, SparseFormatError, DofMapError, HierarchySetupError,
            FileNotFoundError, ValueError) as exc:
        print(f"giamg: error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except PCGBreakdownError as exc:
        print(f"giamg: solver breakdown: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
