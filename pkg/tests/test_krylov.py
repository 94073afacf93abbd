import numpy as np
import pytest
from hypothesis import given, strategies as st

from giamg.hierarchy import SolveOptions
from giamg.krylov import (
    IndefinitePreconditionerError,
    PCGBreakdownError,
    diagonal_preconditioner,
    identity_preconditioner,
    pcg_solve,
    solve,
)
from giamg.sparse import SparseMatrix

from conftest import cube, random_spd


def test_identity_system():
    b = np.array([1.0, -2.0, 3.0])
    x, log = pcg_solve(SparseMatrix.identity(3), b)
    assert log.converged and log.iterations == 1
    np.testing.assert_allclose(x, b)


def test_zero_rhs():
    x, log = pcg_solve(cube(2).A, np.zeros(125))
    assert log.converged and log.iterations == 0 and not x.any()
    assert len(log.relres) == 1


def test_diagonal_preconditioner_examples():
    r = np.array([4.0, 8.0])
    np.testing.assert_array_equal(diagonal_preconditioner(SparseMatrix.identity(2))(r), r)
    np.testing.assert_array_equal(diagonal_preconditioner(SparseMatrix.diag([4.0, 4.0]))(r), [1.0, 2.0])
    with pytest.raises(ValueError):
        diagonal_preconditioner(SparseMatrix.diag([1.0, -1.0]))
    out = np.empty(2)
    assert identity_preconditioner(r, out) is out


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 40))
def test_energy_norm_monotone_and_log_complete(seed, n):
    rng = np.random.default_rng(seed)
    A, dense = random_spd(rng, n)
    b = rng.standard_normal(n)
    xs = np.linalg.solve(dense, b)
    energies = []
    x, log = pcg_solve(A, b, rtol=1e-12, max_iters=10 * n)
    assert len(log.relres) == log.iterations + 1
    assert log.converged
    assert np.linalg.norm(A @ x - b) <= 10 * 1e-12 * np.linalg.norm(b)
    # iterate k is reproduced by rerunning with a budget of k iterations
    for k in range(log.iterations + 1):
        xk = pcg_solve(A, b, rtol=1e-12, max_iters=k)[0] if k else np.zeros(n)
        e = xk - xs
        energies.append(np.sqrt(max(e @ dense @ e, 0.0)))
    scale = np.sqrt(xs @ dense @ xs)
    assert all(b <= a + 1e-12 * scale for a, b in zip(energies, energies[1:]))


def test_preconditioners_agree():
    s = cube(4)
    sols = {}
    for kind in ("giamg", "diag", "none"):
        x, log, _ = solve(s, SolveOptions(preconditioner=kind, rtol=1e-12, max_iters=20000))
        assert log.converged, kind
        assert np.linalg.norm(s.A @ x - s.b) <= 10 * 1e-12 * np.linalg.norm(s.b)
        sols[kind] = x
    assert np.abs(sols["giamg"] - sols["diag"]).max() <= 1e-8
    assert np.abs(sols["giamg"] - sols["none"]).max() <= 1e-8


def test_giamg_beats_diagonal_at_p5():
    s = cube(5)
    _, lg, _ = solve(s, SolveOptions(rtol=1e-6))
    _, ld, _ = solve(s, SolveOptions(rtol=1e-6, preconditioner="diag"))
    assert lg.converged and ld.converged
    assert 2 * lg.iterations <= ld.iterations


def test_not_converged_is_reported():
    s = cube(3)
    _, log = pcg_solve(s.A, s.b, max_iters=2)
    assert not log.converged and log.iterations == 2 and len(log.relres) == 3


def test_indefinite_preconditioner_detected():
    s = cube(2)
    with pytest.raises(IndefinitePreconditionerError, match="iteration 0"):
        pcg_solve(s.A, s.b, precond=lambda r, out: np.negative(r, out=out))


def test_indefinite_operator_detected():
    A = SparseMatrix.diag([1.0, -1.0])
    with pytest.raises(PCGBreakdownError):
        pcg_solve(A, np.array([1.0, 3.0]))


def test_timings_recorded():
    s = cube(3)
    x, log, h = solve(s)
    t = log.timings.as_dict()
    for k in ("setup", "total_solve", "vcycle", "smooth", "coarsest_solve", "cg_matvec"):
        assert t[k] > 0, k
    assert t["smooth"] + t["residual"] + t["transfer"] + t["coarsest_solve"] <= t["vcycle"]
    assert log.to_csv().splitlines()[0] == "iter,relres"


def test_bad_rhs_length():
    with pytest.raises(ValueError):
        pcg_solve(SparseMatrix.identity(3), np.ones(2))
