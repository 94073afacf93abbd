"""Numpy implementations of the CSR kernels.

Used when the compiled ``_ckernels`` module is unavailable or when
``GIAMG_PURE_PYTHON=1`` is set. Signatures and outputs match the compiled
core.
"""
import numpy as np


def _row_ids(ptr):
    return np.repeat(np.arange(len(ptr) - 1, dtype=np.int64), np.diff(ptr))


def csr_matvec(ptr, idx, val, x, out):
    n = len(ptr) - 1
    out[:] = np.bincount(_row_ids(ptr), weights=val * x[idx], minlength=n)
    return out


def csr_residual(ptr, idx, val, x, b, out):
    csr_matvec(ptr, idx, val, x, out)
    np.subtract(b, out, out=out)
    return out


def csr_scaled_residual(ptr, idx, val, x, b, dinv, out):
    csr_residual(ptr, idx, val, x, b, out)
    out *= dinv
    return out


def csr_transpose(nrows, ncols, ptr, idx, val):
    rows = _row_ids(ptr)
    order = np.argsort(idx, kind="stable")
    tptr = np.zeros(ncols + 1, dtype=np.int64)
    np.cumsum(np.bincount(idx, minlength=ncols), out=tptr[1:])
    return tptr, rows[order], val[order]


def _compress(nrows, rows, cols, vals, sum_duplicates):
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if len(rows):
        first = np.ones(len(rows), dtype=bool)
        first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(first)
        if sum_duplicates:
            vals = np.add.reduceat(vals, starts)
        else:
            vals = vals[starts]
        rows, cols = rows[starts], cols[starts]
    keep = vals != 0.0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    ptr = np.zeros(nrows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=nrows), out=ptr[1:])
    return ptr, cols.astype(np.int64, copy=False), vals.astype(np.float64, copy=False)


def coo_to_csr(nrows, ncols, rows, cols, vals, sum_duplicates):
    return _compress(nrows, rows, cols, vals, sum_duplicates)


def csr_matmul(nrows, ncols, aptr, aidx, aval, bptr, bidx, bval):
    # expand every product a_ik * b_kj, then sum duplicates
    arow = _row_ids(aptr)
    counts = bptr[aidx + 1] - bptr[aidx]
    total = int(counts.sum())
    rows = np.repeat(arow, counts)
    seg_start = np.repeat(np.cumsum(counts) - counts, counts)
    offs = np.arange(total, dtype=np.int64) - seg_start
    bpos = np.repeat(bptr[aidx], counts) + offs
    vals = np.repeat(aval, counts) * bval[bpos]
    return _compress(nrows, rows, bidx[bpos], vals, True)


def mis_aggregate(n, ptr, idx):
    agg = np.full(n, -1, dtype=np.int64)
    roots = []
    for i in range(n):
        if agg[i] != -1:
            continue
        k = len(roots)
        agg[i] = k
        roots.append(i)
        nbrs = idx[ptr[i]:ptr[i + 1]]
        free = nbrs[agg[nbrs] == -1]
        agg[free] = k
    return agg, np.asarray(roots, dtype=np.int64)
