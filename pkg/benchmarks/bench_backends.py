"""Compare the compiled kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_backends.py [--p 6] [--repeats 5]

Each kernel is timed on operators taken from the Helmholtz benchmark; the
best of ``--repeats`` runs is reported in milliseconds, followed by the
speedup of the compiled core.
"""
import argparse
import time

import numpy as np

import giamg.sparse as sparse
from giamg import _pykernels
from giamg.coarsen_h import mis_aggregate, strength_graph
from giamg.coarsen_p import p_coarsen
from giamg.fem import HexMesh, assemble_helmholtz
from giamg.hierarchy import SolveOptions
from giamg.krylov import solve

try:
    from giamg import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times) * 1e3


def cases(p):
    s = assemble_helmholtz(HexMesh(2), p, project_exact=False)
    A = s.A
    P = p_coarsen(s.l2g, s.g2u, p - 1).P
    R = sparse.transpose(P)
    coo = A.to_coo()
    x = np.random.default_rng(0).standard_normal(A.nrows)
    out = np.empty(A.nrows)
    lap = assemble_helmholtz(HexMesh(12), 1, bc="eliminate", project_exact=False).A
    g = strength_graph(lap, 0.05)
    return {
        f"spmv ({A.nnz} nnz)": lambda: sparse.spmv(A, x, out=out),
        "residual": lambda: sparse.residual(A, x, x, out=out),
        "transpose": lambda: sparse.transpose(A),
        "coo_to_csr (summed)": lambda: sparse.coo_to_csr_summed(coo, A.nrows, A.ncols),
        "galerkin_triple": lambda: sparse.galerkin_triple(R, A, P),
        f"mis_aggregate ({g.n} dofs)": lambda: mis_aggregate(g),
        f"setup + solve p={p}": lambda: solve(s, SolveOptions()),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=6)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        raise SystemExit("compiled core not built; run `pip install -e .` first")

    results = {}
    for name, mod in (("cython", _ckernels), ("python", _pykernels)):
        sparse._kernels = mod
        for case, fn in cases(args.p).items():
            fn()  # warm up
            results.setdefault(case, {})[name] = best_of(fn, args.repeats)

    width = max(len(c) for c in results)
    print(f"{'kernel':<{width}}  {'cython ms':>10}  {'python ms':>10}  {'speedup':>8}")
    for case, r in results.items():
        print(f"{case:<{width}}  {r['cython']:>10.3f}  {r['python']:>10.3f}  {r['python'] / r['cython']:>7.1f}x")


if __name__ == "__main__":
    main()
