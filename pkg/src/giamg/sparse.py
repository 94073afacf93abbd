"""Compressed-sparse-row matrices and the kernels built on them.

The hot loops live in a compiled core (``giamg._ckernels``). When it is not
built, or when the environment variable ``GIAMG_PURE_PYTHON`` is set to a
non-empty value other than ``0``, the numpy implementations in
``giamg._pykernels`` are used instead. :data:`BACKEND` names the active one.
"""
from __future__ import annotations

import os
from typing import Iterable, NamedTuple

import numpy as np

from . import _pykernels

if os.environ.get("GIAMG_PURE_PYTHON", "0") not in ("", "0"):
    _kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _kernels
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _kernels = _pykernels
        BACKEND = "python"

__all__ = [
    "BACKEND",
    "CooArrays",
    "CooTriplet",
    "SparseMatrix",
    "SparseFormatError",
    "coo_to_csr",
    "add",
    "coo_to_csr_summed",
    "galerkin_triple",
    "matmul",
    "residual",
    "spmv",
    "transpose",
]


class SparseFormatError(ValueError):
    """Raised for malformed CSR data, out-of-range indices or shape mismatches."""


class CooTriplet(NamedTuple):
    row: int
    col: int
    value: float


class CooArrays(NamedTuple):
    """Triplets stored column-wise as three equal-length arrays."""

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.flags.writeable = False
    return a


class SparseMatrix:
    """Immutable CSR matrix with sorted, duplicate-free rows and no stored zeros.

    Parameters
    ----------
    nrows, ncols : int
        Shape.
    row_offsets : array_like of int, length ``nrows + 1``
    col_indices : array_like of int
    values : array_like of float
    check : bool
        Validate the CSR invariants. Kernels in this module produce valid
        output and skip the check.

    Notes
    -----
    ``SparseMatrix.instances_created`` counts every construction; the solver
    tests use it to show that a solve allocates no new operators.
    """

    __slots__ = ("nrows", "ncols", "row_offsets", "col_indices", "values", "_diag", "_rowids")
    instances_created = 0

    def __init__(self, nrows, ncols, row_offsets, col_indices, values, *, check=True):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.row_offsets = _frozen(row_offsets, np.int64)
        self.col_indices = _frozen(col_indices, np.int64)
        self.values = _frozen(values, np.float64)
        self._diag = None
        self._rowids = None
        if check:
            self._validate()
        SparseMatrix.instances_created += 1

    def _validate(self):
        ptr, idx, val = self.row_offsets, self.col_indices, self.values
        if self.nrows < 0 or self.ncols < 0:
            raise SparseFormatError("negative dimension")
        if len(ptr) != self.nrows + 1 or ptr[0] != 0:
            raise SparseFormatError("row_offsets must have length nrows+1 and start at 0")
        if np.any(np.diff(ptr) < 0):
            raise SparseFormatError("row_offsets must be non-decreasing")
        if ptr[-1] != len(idx) or len(idx) != len(val):
            raise SparseFormatError("row_offsets[-1], len(col_indices), len(values) disagree")
        if len(idx):
            if idx.min() < 0 or idx.max() >= self.ncols:
                raise SparseFormatError("column index out of range")
            inc = np.diff(idx) > 0
            # positions where a new row starts are exempt from the ordering test
            row_start = np.zeros(len(idx), dtype=bool)
            row_start[ptr[1:-1][ptr[1:-1] < len(idx)]] = True
            if not np.all(inc | row_start[1:]):
                raise SparseFormatError("column indices must be strictly increasing within rows")
            if np.any(val == 0.0):
                raise SparseFormatError("explicit zeros are not allowed")

    # -- basic properties --------------------------------------------------
    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self):
        return len(self.values)

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"

    def row_ids(self):
        """Row index of every stored entry."""
        if self._rowids is None:
            r = np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.row_offsets))
            r.flags.writeable = False
            self._rowids = r
        return self._rowids

    def diagonal(self):
        if self._diag is None:
            d = np.zeros(min(self.nrows, self.ncols))
            rows = self.row_ids()
            on = rows == self.col_indices
            d[rows[on]] = self.values[on]
            d.flags.writeable = False
            self._diag = d
        return self._diag

    def to_dense(self):
        out = np.zeros(self.shape)
        out[self.row_ids(), self.col_indices] = self.values
        return out

    def to_coo(self):
        return CooArrays(self.row_ids().copy(), self.col_indices.copy(), self.values.copy())

    def max_abs(self):
        return float(np.abs(self.values).max()) if self.nnz else 0.0

    def row(self, i):
        s, e = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[s:e], self.values[s:e]

    @property
    def T(self):
        return transpose(self)

    def __matmul__(self, other):
        if isinstance(other, SparseMatrix):
            return matmul(self, other)
        return spmv(self, other)

    def equals(self, other):
        """Bitwise structural and numerical equality."""
        return (
            self.shape == other.shape
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
            and np.array_equal(self.values, other.values)
        )

    # -- alternative constructors -----------------------------------------
    @classmethod
    def identity(cls, n, scale=1.0):
        if scale == 0.0:
            return cls(n, n, np.zeros(n + 1, dtype=np.int64), [], [], check=False)
        return cls(n, n, np.arange(n + 1), np.arange(n), np.full(n, float(scale)), check=False)

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense, dtype=float)
        r, c = np.nonzero(dense)
        return coo_to_csr(CooArrays(r, c, dense[r, c]), *dense.shape)

    @classmethod
    def diag(cls, d):
        d = np.asarray(d, dtype=float)
        n = len(d)
        return coo_to_csr(CooArrays(np.arange(n), np.arange(n), d), n, n)


def _as_arrays(triplets):
    if isinstance(triplets, CooArrays):
        rows, cols, vals = triplets
    else:
        triplets = list(triplets)
        if triplets:
            rows, cols, vals = zip(*triplets)
        else:
            rows, cols, vals = (), (), ()
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    vals = np.asarray(vals, dtype=np.float64).ravel()
    if not (len(rows) == len(cols) == len(vals)):
        raise SparseFormatError("triplet arrays differ in length")
    return rows, cols, vals


def _build(triplets, nrows, ncols, sum_duplicates):
    rows, cols, vals = _as_arrays(triplets)
    if len(rows):
        if rows.min() < 0 or rows.max() >= nrows:
            raise SparseFormatError(f"row index out of range for {nrows} rows")
        if cols.min() < 0 or cols.max() >= ncols:
            raise SparseFormatError(f"column index out of range for {ncols} columns")
    ptr, idx, val = _kernels.coo_to_csr(nrows, ncols, rows, cols, vals, sum_duplicates)
    return SparseMatrix(nrows, ncols, ptr, idx, val, check=False)


def coo_to_csr(triplets: Iterable | CooArrays, nrows: int, ncols: int) -> SparseMatrix:
    """Sorted CSR from triplets, keeping the FIRST value of a repeated (row, col).

    Meant for prolongation assembly, where repeats are identical entries.
    Zero values are dropped. Use :func:`coo_to_csr_summed` when repeats must
    accumulate.
    """
    return _build(triplets, nrows, ncols, False)


def coo_to_csr_summed(triplets: Iterable | CooArrays, nrows: int, ncols: int) -> SparseMatrix:
    """Sorted CSR from triplets, summing repeated (row, col) entries (FEM assembly)."""
    return _build(triplets, nrows, ncols, True)


def spmv(A: SparseMatrix, x, out=None):
    """``y = A @ x``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (A.ncols,):
        raise SparseFormatError(f"vector of length {x.shape} does not match {A.shape}")
    if out is None:
        out = np.empty(A.nrows)
    return _kernels.csr_matvec(A.row_offsets, A.col_indices, A.values, x, out)


def residual(A: SparseMatrix, x, b, out=None):
    """``r = b - A @ x`` in one pass."""
    if len(x) != A.ncols or len(b) != A.nrows:
        raise SparseFormatError("vector lengths do not match the matrix")
    if out is None:
        out = np.empty(A.nrows)
    return _kernels.csr_residual(A.row_offsets, A.col_indices, A.values, x, b, out)


def scaled_residual(A: SparseMatrix, x, b, dinv, out):
    """``out = dinv * (b - A @ x)``; no shape checks, used inside smoothers."""
    return _kernels.csr_scaled_residual(A.row_offsets, A.col_indices, A.values, x, b, dinv, out)


def transpose(A: SparseMatrix) -> SparseMatrix:
    ptr, idx, val = _kernels.csr_transpose(A.nrows, A.ncols, A.row_offsets, A.col_indices, A.values)
    return SparseMatrix(A.ncols, A.nrows, ptr, idx, val, check=False)


def matmul(A: SparseMatrix, B: SparseMatrix) -> SparseMatrix:
    if A.ncols != B.nrows:
        raise SparseFormatError(f"cannot multiply {A.shape} by {B.shape}")
    ptr, idx, val = _kernels.csr_matmul(
        A.nrows, B.ncols, A.row_offsets, A.col_indices, A.values,
        B.row_offsets, B.col_indices, B.values,
    )
    return SparseMatrix(A.nrows, B.ncols, ptr, idx, val, check=False)


def galerkin_triple(R: SparseMatrix, A: SparseMatrix, P: SparseMatrix) -> SparseMatrix:
    """Coarse operator ``R @ A @ P``, evaluated as ``(R @ A) @ P``."""
    if R.ncols != A.nrows or A.ncols != P.nrows:
        raise SparseFormatError(f"incompatible shapes {R.shape}, {A.shape}, {P.shape}")
    return matmul(matmul(R, A), P)


def is_symmetric(A: SparseMatrix, rtol=1e-12):
    """``max|A - A^T| <= rtol * max|A|``."""
    if A.nrows != A.ncols:
        return False
    diff = add(A, transpose(A), -1.0)
    return diff.max_abs() <= rtol * A.max_abs()


def add(A: SparseMatrix, B: SparseMatrix, beta=1.0) -> SparseMatrix:
    """``A + beta * B`` for equally shaped matrices."""
    if A.shape != B.shape:
        raise SparseFormatError(f"cannot add {A.shape} and {B.shape}")
    ra, ca, va = A.to_coo()
    rb, cb, vb = B.to_coo()
    return coo_to_csr_summed(
        CooArrays(np.concatenate([ra, rb]), np.concatenate([ca, cb]), np.concatenate([va, beta * vb])),
        A.nrows, A.ncols,
    )
