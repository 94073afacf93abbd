"""Acceptance criteria for the GIAMG package.

Each test prints one ``PASS``/``FAIL`` line (also collected into the pytest
terminal summary) and then asserts the criterion at its stated tolerance and
runtime limit. Run standalone with ``python3 tests/test_acceptance.py``.
"""
import time

import numpy as np
import pytest

from giamg.coarsen_h import mis_aggregate, tentative_prolongation
from giamg.coarsen_p import p_coarsen
from giamg.dofmaps import GlobalToUniversalMap, LocalToGlobalMap, dof_next, g2u_next, l2g_next
from giamg.fem import evaluate_solution, manufactured_solution
from giamg.hierarchy import SolveOptions, setup
from giamg.krylov import solve
from giamg.smoothers import ChebyshevData, chebyshev_smooth
from giamg.sparse import CooArrays, coo_to_csr, coo_to_csr_summed, galerkin_triple, matmul, residual, spmv, transpose

from conftest import ACCEPTANCE_LINES, cube, laplace_1d, random_sparse
from test_coarsen_h import random_graph
from test_dofmaps import brute_force_coarse_maps
from test_sparse import assert_csr_invariants


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def test_criterion_1_four_level_hierarchy():
    with Clock() as c:
        h = setup(cube(8), SolveOptions(p_schedule="halve"))
    coarse = h.coarsest
    ok = len(h) == 4 and (coarse.size, coarse.nnz) == (27, 343) and c.seconds < 10
    report(1, ok, f"p=8 8-element cube, p-levels {[l.order for l in h.levels]}: {len(h)} levels, "
                  f"coarsest {coarse.size}/{coarse.nnz} (want 4, 27/343), {c.seconds:.1f}s (< 10s)")
    assert ok


def test_criterion_2_convergence_family():
    iters, conv = {}, {}
    with Clock() as c:
        for p in range(3, 11):
            _, log, _ = solve(cube(p), SolveOptions(rtol=1e-10, max_iters=200))
            iters[p], conv[p] = log.iterations, log.converged
    growth = iters[10] / iters[3]
    within = all(conv.values()) and max(iters.values()) <= 200
    ok = within and growth <= 3.0 and c.seconds < 120
    report(2, ok, f"iterations {iters}; all <= 200 and converged: {within}; "
                  f"growth p=3->10 {growth:.2f}x (want <= 3x); {c.seconds:.0f}s (< 120s)")
    assert within
    assert c.seconds < 120
    assert growth <= 3.0


def test_criterion_3_giamg_vs_dcg():
    s = cube(8)
    with Clock() as c:
        _, lg, _ = solve(s, SolveOptions(rtol=1e-10))
        _, ld, _ = solve(s, SolveOptions(rtol=1e-10, preconditioner="diag"))
    ratio = lg.iterations / ld.iterations
    ok = lg.converged and ld.converged and ratio <= 0.5 and c.seconds < 60
    report(3, ok, f"p=8 GIAMG {lg.iterations} vs DCG {ld.iterations} iterations, ratio {ratio:.2f} "
                  f"(want <= 0.5), {c.seconds:.1f}s (< 60s)")
    assert ok


def test_criterion_4_smoothing_sweep():
    s = cube(5)
    counts = []
    with Clock() as c:
        for k in range(1, 5):
            _, log, _ = solve(s, SolveOptions(smooth_iters=k))
            assert log.converged
            counts.append(log.iterations)
    inversions = [(a, b) for a, b in zip(counts, counts[1:]) if b > a]
    trend = len(inversions) <= 1 and all(b - a <= 2 for a, b in inversions)
    ok = counts[3] <= counts[0] and trend and c.seconds < 120
    report(4, ok, f"p=5 iterations for 1..4 smoothing sweeps {counts}, "
                  f"inversions {inversions}, {c.seconds:.1f}s (< 120s)")
    assert ok


def test_criterion_5_stride_comparison():
    s = cube(5)
    with Clock() as c:
        _, l1, h1 = solve(s, SolveOptions(p_stride=1))
        _, l2, h2 = solve(s, SolveOptions(p_stride=2))
    ratio = l2.iterations / l1.iterations
    ok = l1.converged and l2.converged and ratio <= 1.5 and len(h2) < len(h1) and c.seconds < 60
    report(5, ok, f"p=5 stride 2: {l2.iterations} iterations / {len(h2)} levels, stride 1: "
                  f"{l1.iterations} / {len(h1)}, ratio {ratio:.2f} (want <= 1.5), {c.seconds:.1f}s (< 60s)")
    assert ok


def test_criterion_6_discretization_error():
    s = cube(8)
    pts = [(x, y, z) for x in (0.25, 0.5, 0.75) for y in (0.25, 0.5, 0.75) for z in (0.25, 0.5, 0.75)]
    with Clock() as c:
        x, log, _ = solve(s)
        err = max(abs(evaluate_solution(s, x, pt) - manufactured_solution(*pt)) for pt in pts)
    ok = log.converged and err <= 1e-6 and c.seconds < 60
    report(6, ok, f"p=8 max error at 27 points {err:.2e} (want <= 1e-6), {c.seconds:.1f}s (< 60s)")
    assert ok


def test_criterion_7_preconditioner_validity():
    s = cube(4)
    M = setup(s).preconditioner()
    rng = np.random.default_rng(7)
    n = s.A.nrows
    lin_err = sym_err = 0.0
    for _ in range(10):
        v, w = rng.standard_normal(n), rng.standard_normal(n)
        a = rng.standard_normal()
        Mv, Mw = M(v).copy(), M(w).copy()
        lin = M(a * v + w)
        lin_err = max(lin_err, np.linalg.norm(lin - a * Mv - Mw) / np.linalg.norm(lin))
        sym_err = max(sym_err, abs(w @ Mv - v @ Mw) / abs(w @ Mv))
    ok = lin_err <= 1e-10 and sym_err <= 1e-10
    report(7, ok, f"p=4 v-cycle linearity error {lin_err:.1e}, symmetry error {sym_err:.1e} (want <= 1e-10)")
    assert ok


def test_criterion_8_oracle_equivalences():
    # (a) injection Galerkin product versus submatrix extraction
    s = cube(2)
    step = p_coarsen(s.l2g, s.g2u, 1)
    sel = dof_next(s.l2g, 1)
    Ac = galerkin_triple(transpose(step.P), s.A, step.P).to_dense()
    a_ok = np.array_equal(Ac, s.A.to_dense()[np.ix_(sel.collect, sel.collect)])

    # (b) map reconstruction versus brute-force composition on single elements
    rng = np.random.default_rng(8)
    b_ok = True
    for p in range(2, 7):
        for pc in range(1, p):
            m = (p + 1) ** 3
            l2g = LocalToGlobalMap(p, rng.permutation(m)[None])
            g2u = GlobalToUniversalMap(rng.permutation(m))
            sel_e = dof_next(l2g, pc)
            coarse = l2g_next(l2g, sel_e, pc)
            collect, rows, g2u_c = brute_force_coarse_maps(l2g, g2u, pc)
            b_ok &= (sel_e.collect.tolist() == collect and coarse.rows.tolist() == rows
                     and g2u_next(coarse, sel_e, g2u).values.tolist() == g2u_c)

    # (c) sparse kernels versus dense products
    worst = 0.0
    for seed in range(100):
        r = np.random.default_rng(seed)
        n = int(r.integers(10, 51))
        A, Ad = random_sparse(r, n, n)
        B, Bd = random_sparse(r, n, n)
        x, y = r.standard_normal(n), r.standard_normal(n)
        worst = max(
            worst,
            np.abs(spmv(A, x) - Ad @ x).max(),
            np.abs(residual(A, x, y) - (y - Ad @ x)).max(),
            np.abs(transpose(A).to_dense() - Ad.T).max(),
            np.abs(matmul(A, B).to_dense() - Ad @ Bd).max(),
        )
    c_ok = worst <= 1e-13
    ok = a_ok and b_ok and c_ok
    report(8, ok, f"(a) Galerkin = submatrix exactly: {a_ok}; (b) maps = brute force: {b_ok}; "
                  f"(c) max kernel deviation {worst:.1e} (want <= 1e-13)")
    assert ok


def test_criterion_9_property_suites():
    cases = 100
    failures = {}

    # aggregation partition laws
    bad = 0
    for seed in range(cases):
        r = np.random.default_rng(seed)
        n = int(r.integers(1, 80))
        g = random_graph(r, n, float(r.uniform(0, 0.4)))
        agg = mis_aggregate(g)
        sizes = agg.sizes()
        dense = g.adjacency.to_dense() != 0
        T = tentative_prolongation(agg)
        bad += not (
            sizes.sum() == n and np.all(sizes >= 1)
            and not dense[np.ix_(agg.roots, agg.roots)].any()
            and np.array_equal(T @ np.ones(T.ncols), np.ones(n))
            and (g.adjacency.nnz == 0 or agg.n_aggregates < n)
        )
    failures["aggregation partition"] = bad

    # injection columns are orthonormal
    bad = 0
    for seed in range(cases):
        r = np.random.default_rng(seed)
        p = int(r.integers(2, 6))
        pc = int(r.integers(1, p))
        m = (p + 1) ** 3
        step = p_coarsen(LocalToGlobalMap(p, r.permutation(m)[None]), GlobalToUniversalMap(r.permutation(m)), pc)
        bad += not np.array_equal((transpose(step.P) @ step.P).to_dense(), np.eye(step.P.ncols))
    failures["P^T P = I"] = bad

    # CSR invariants after construction from random triplets
    bad = 0
    for seed in range(cases):
        r = np.random.default_rng(seed)
        m, n = (int(v) for v in r.integers(1, 40, 2))
        k = int(r.integers(0, 2 * m * n))
        trip = CooArrays(r.integers(0, m, k), r.integers(0, n, k), r.choice([0.0, 1.0, -0.5], k))
        for build in (coo_to_csr, coo_to_csr_summed):
            A = build(trip, m, n)
            try:
                assert_csr_invariants(A)
                assert build(A.to_coo(), m, n).equals(A)
            except AssertionError:
                bad += 1
    failures["CSR invariants"] = bad

    # Chebyshev damping versus closed-form 1D Laplacian spectrum
    bad = 0
    Tk = np.polynomial.chebyshev.Chebyshev.basis
    for seed in range(cases):
        r = np.random.default_rng(seed)
        n, k = int(r.integers(5, 60)), int(r.integers(1, 6))
        mode = int(r.integers(1, n + 1))
        lam_max = 1 - np.cos(n * np.pi / (n + 1))
        data = ChebyshevData(np.full(n, 0.5), lam_max, lo_factor=float(r.uniform(2, 30)), iterations=k)
        lo, hi = data.interval
        theta, delta = (lo + hi) / 2, (hi - lo) / 2
        mu = 1 - np.cos(mode * np.pi / (n + 1))
        v = np.sin(mode * np.arange(1, n + 1) * np.pi / (n + 1))
        x = chebyshev_smooth(laplace_1d(n), data, np.zeros(n), v.copy())
        predicted = Tk(k)((theta - mu) / delta) / Tk(k)(theta / delta)
        in_band = not (lo <= mu <= hi) or abs(predicted) <= 1 / np.cosh(k * np.arccosh(theta / delta)) + 1e-12
        bad += not (np.abs(x - predicted * v).max() <= 1e-10 and in_band)
    failures["Chebyshev damping"] = bad

    ok = not any(failures.values())
    report(9, ok, f"{cases} seeded cases per suite, failures {failures}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
