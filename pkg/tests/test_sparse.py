import numpy as np
import pytest
from hypothesis import given, strategies as st

from giamg.sparse import (
    CooArrays,
    CooTriplet,
    SparseFormatError,
    SparseMatrix,
    add,
    coo_to_csr,
    coo_to_csr_summed,
    galerkin_triple,
    is_symmetric,
    matmul,
    residual,
    spmv,
    transpose,
)

from conftest import cube, random_sparse, random_spd

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 50)


def assert_csr_invariants(A):
    ptr, idx, val = A.row_offsets, A.col_indices, A.values
    assert len(ptr) == A.nrows + 1 and ptr[0] == 0 and ptr[-1] == A.nnz
    assert np.all(np.diff(ptr) >= 0)
    for i in range(A.nrows):
        cols = idx[ptr[i]:ptr[i + 1]]
        assert np.all(np.diff(cols) > 0)
        assert np.all((cols >= 0) & (cols < A.ncols))
    assert not np.any(val == 0.0)


# -- construction ----------------------------------------------------------

def test_duplicate_identical_value_collapses(backend):
    A = coo_to_csr([CooTriplet(0, 0, 1.0), CooTriplet(0, 0, 1.0), CooTriplet(1, 1, 1.0)], 2, 2)
    assert A.nnz == 2
    np.testing.assert_array_equal(A.to_dense(), np.eye(2))


def test_empty_triplets(backend):
    A = coo_to_csr([], 3, 3)
    assert A.nnz == 0
    np.testing.assert_array_equal(A.row_offsets, np.zeros(4))


def test_explicit_zero_dropped(backend):
    A = coo_to_csr([(1, 0, 2.0), (0, 1, 3.0), (1, 2, 0.0)], 2, 3)
    assert A.nnz == 2
    assert A.to_dense()[1, 2] == 0.0


def test_keep_first_versus_summed(backend):
    trip = [(0, 0, 1.0), (0, 0, 5.0)]
    assert coo_to_csr(trip, 1, 1).values.tolist() == [1.0]
    assert coo_to_csr_summed(trip, 1, 1).values.tolist() == [6.0]


def test_summed_cancellation_drops_entry(backend):
    A = coo_to_csr_summed([(0, 1, 2.0), (0, 1, -2.0), (1, 1, 1.0)], 2, 2)
    assert A.nnz == 1


@pytest.mark.parametrize("trip", [[(2, 0, 1.0)], [(0, 3, 1.0)], [(-1, 0, 1.0)]])
def test_out_of_range_index(trip):
    with pytest.raises(SparseFormatError):
        coo_to_csr(trip, 2, 3)


def test_invalid_csr_rejected():
    with pytest.raises(SparseFormatError):
        SparseMatrix(2, 2, [0, 2, 2], [1, 0], [1.0, 1.0])
    with pytest.raises(SparseFormatError):
        SparseMatrix(1, 1, [0, 1], [0], [0.0])


def test_matrix_is_read_only():
    A = SparseMatrix.identity(3)
    with pytest.raises(ValueError):
        A.values[0] = 2.0


# -- products --------------------------------------------------------------

def test_spmv_examples(backend):
    x = np.arange(5.0)
    np.testing.assert_array_equal(spmv(SparseMatrix.identity(5), x), x)
    np.testing.assert_array_equal(spmv(SparseMatrix.diag([2.0, 3.0]), np.ones(2)), [2.0, 3.0])


def test_spmv_dimension_mismatch():
    with pytest.raises(ValueError):
        spmv(SparseMatrix.identity(3), np.ones(4))


def test_spmv_p1_helmholtz_matches_dense(backend):
    s = cube(1)
    A = s.A
    dense = np.zeros(A.shape)
    r, c, v = A.to_coo()
    np.add.at(dense, (r, c), v)
    x = np.ones(A.ncols)
    np.testing.assert_allclose(spmv(A, x), dense @ x, rtol=0, atol=1e-13 * np.abs(dense).max())


def test_transpose_examples(backend):
    s = cube(1).A
    assert transpose(s).equals(s)
    P = coo_to_csr([(0, 0, 1.0), (2, 1, 1.0), (3, 2, 1.0)], 4, 3)
    assert np.all(np.diff(transpose(P).row_offsets) == 1)


def test_galerkin_examples(backend):
    A = cube(1).A
    assert galerkin_triple(SparseMatrix.identity(27), A, SparseMatrix.identity(27)).equals(A)
    P = coo_to_csr([(0, 0, 1.0), (1, 0, 1.0)], 2, 1)
    Ac = galerkin_triple(transpose(P), SparseMatrix.identity(2), P)
    assert Ac.to_dense().tolist() == [[2.0]]


def test_matmul_shape_mismatch():
    with pytest.raises(ValueError):
        matmul(SparseMatrix.identity(2), SparseMatrix.identity(3))


@given(seed=seeds, n=st.integers(10, 50))
def test_kernels_match_dense_oracle(backend, seed, n):
    rng = np.random.default_rng(seed)
    A, Ad = random_sparse(rng, n, n)
    B, Bd = random_sparse(rng, n, n)
    x = rng.standard_normal(n)
    b = rng.standard_normal(n)
    scale = max(1.0, np.abs(Ad).max())
    np.testing.assert_allclose(spmv(A, x), Ad @ x, atol=1e-13 * scale * n, rtol=0)
    np.testing.assert_allclose(residual(A, x, b), b - Ad @ x, atol=1e-13 * scale * n, rtol=0)
    np.testing.assert_array_equal(transpose(A).to_dense(), Ad.T)
    C = matmul(A, B)
    assert_csr_invariants(C)
    np.testing.assert_allclose(C.to_dense(), Ad @ Bd, atol=1e-13 * n, rtol=1e-13)


@given(seed=seeds, m=dims, n=dims)
def test_csr_invariants_and_round_trip(backend, seed, m, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, 3 * m * n // 2 + 1))
    rows = rng.integers(0, m, k)
    cols = rng.integers(0, n, k)
    vals = rng.choice([0.0, 1.0, -2.5, 3.25], k)
    for build in (coo_to_csr, coo_to_csr_summed):
        A = build(CooArrays(rows, cols, vals), m, n)
        assert_csr_invariants(A)
        assert build(A.to_coo(), m, n).equals(A)


@given(seed=seeds, m=dims, n=dims)
def test_transpose_consistency(backend, seed, m, n):
    rng = np.random.default_rng(seed)
    A, _ = random_sparse(rng, m, n)
    x, y = rng.standard_normal(n), rng.standard_normal(m)
    lhs = y @ spmv(A, x)
    rhs = spmv(transpose(A), y) @ x
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, np.abs(y).sum() * A.max_abs() * np.abs(x).sum())
    assert transpose(transpose(A)).equals(A)


@given(seed=seeds, n=st.integers(2, 30), k=st.integers(1, 30))
def test_galerkin_symmetric(backend, seed, n, k):
    rng = np.random.default_rng(seed)
    A, _ = random_spd(rng, n)
    P, _ = random_sparse(rng, n, k, 0.4)
    Ac = galerkin_triple(transpose(P), A, P).to_dense()
    assert np.abs(Ac - Ac.T).max() <= 1e-12 * max(np.abs(Ac).max(), 1e-300)


@given(seed=seeds, n=st.integers(2, 20))
def test_matmul_associative(backend, seed, n):
    rng = np.random.default_rng(seed)
    A, _ = random_sparse(rng, n, n)
    B, _ = random_sparse(rng, n, n)
    C, _ = random_sparse(rng, n, n)
    left = matmul(matmul(A, B), C).to_dense()
    right = matmul(A, matmul(B, C)).to_dense()
    scale = max(np.abs(left).max(), 1.0)
    assert np.abs(left - right).max() <= 1e-11 * scale


def test_backends_bitwise_identical():
    from conftest import BACKENDS

    if len(BACKENDS) < 2:
        pytest.skip("compiled core not built")
    rng = np.random.default_rng(7)
    A, _ = random_sparse(rng, 40, 40)
    B, _ = random_sparse(rng, 40, 40)
    x = rng.standard_normal(40)
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    args = (A.row_offsets, A.col_indices, A.values)
    o1, o2 = np.empty(40), np.empty(40)
    py.csr_matvec(*args, x, o1)
    cy.csr_matvec(*args, x, o2)
    np.testing.assert_allclose(o1, o2, rtol=1e-15, atol=1e-15)
    bargs = (B.row_offsets, B.col_indices, B.values)
    for a, b in zip(py.csr_matmul(40, 40, *args, *bargs), cy.csr_matmul(40, 40, *args, *bargs)):
        np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-14)
    for a, b in zip(py.csr_transpose(40, 40, *args), cy.csr_transpose(40, 40, *args)):
        np.testing.assert_array_equal(a, b)


def test_is_symmetric_and_add():
    A = cube(2).A
    assert is_symmetric(A)
    N = SparseMatrix.from_dense([[1.0, 2.0], [0.0, 1.0]])
    assert not is_symmetric(N)
    assert add(N, N, -1.0).nnz == 0


def test_pure_python_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, GIAMG_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import giamg; print(giamg.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
