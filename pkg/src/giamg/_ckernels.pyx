# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled CSR kernels.

Every function here has a numpy twin in ``_pykernels`` with the same
signature and the same output (up to floating-point summation order in
``csr_matmul``). Inputs are assumed validated by the caller: index arrays are
int64, values float64, all indices in range.
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport qsort

cnp.import_array()

ctypedef cnp.int64_t idx_t


cdef int _cmp_idx(const void* a, const void* b) noexcept nogil:
    cdef idx_t x = (<idx_t*>a)[0]
    cdef idx_t y = (<idx_t*>b)[0]
    return (x > y) - (x < y)


def csr_matvec(const idx_t[::1] ptr, const idx_t[::1] idx, const double[::1] val,
               const double[::1] x, double[::1] out):
    cdef Py_ssize_t n = ptr.shape[0] - 1
    cdef Py_ssize_t i
    cdef idx_t k
    cdef double s
    with nogil:
        for i in range(n):
            s = 0.0
            for k in range(ptr[i], ptr[i + 1]):
                s = s + val[k] * x[idx[k]]
            out[i] = s
    return np.asarray(out)


def csr_residual(const idx_t[::1] ptr, const idx_t[::1] idx, const double[::1] val,
                 const double[::1] x, const double[::1] b, double[::1] out):
    cdef Py_ssize_t n = ptr.shape[0] - 1
    cdef Py_ssize_t i
    cdef idx_t k
    cdef double s
    with nogil:
        for i in range(n):
            s = 0.0
            for k in range(ptr[i], ptr[i + 1]):
                s = s + val[k] * x[idx[k]]
            out[i] = b[i] - s
    return np.asarray(out)


def csr_scaled_residual(const idx_t[::1] ptr, const idx_t[::1] idx, const double[::1] val,
                        const double[::1] x, const double[::1] b, const double[::1] dinv,
                        double[::1] out):
    cdef Py_ssize_t n = ptr.shape[0] - 1
    cdef Py_ssize_t i
    cdef idx_t k
    cdef double s
    with nogil:
        for i in range(n):
            s = 0.0
            for k in range(ptr[i], ptr[i + 1]):
                s = s + val[k] * x[idx[k]]
            out[i] = dinv[i] * (b[i] - s)
    return np.asarray(out)


def csr_transpose(Py_ssize_t nrows, Py_ssize_t ncols, const idx_t[::1] ptr,
                  const idx_t[::1] idx, const double[::1] val):
    cdef Py_ssize_t nnz = idx.shape[0]
    cdef cnp.ndarray[idx_t, ndim=1] tptr_a = np.zeros(ncols + 1, dtype=np.int64)
    cdef cnp.ndarray[idx_t, ndim=1] tidx_a = np.empty(nnz, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] tval_a = np.empty(nnz, dtype=np.float64)
    cdef idx_t[::1] tptr = tptr_a
    cdef idx_t[::1] tidx = tidx_a
    cdef double[::1] tval = tval_a
    cdef idx_t[::1] nxt
    cdef Py_ssize_t i, j
    cdef idx_t k, dst
    with nogil:
        for k in range(nnz):
            tptr[idx[k] + 1] += 1
        for j in range(ncols):
            tptr[j + 1] += tptr[j]
    nxt = tptr_a[:-1].copy()
    with nogil:
        for i in range(nrows):
            for k in range(ptr[i], ptr[i + 1]):
                j = idx[k]
                dst = nxt[j]
                tidx[dst] = i
                tval[dst] = val[k]
                nxt[j] = dst + 1
    return tptr_a, tidx_a, tval_a


def csr_matmul(Py_ssize_t nrows, Py_ssize_t ncols,
               const idx_t[::1] aptr, const idx_t[::1] aidx, const double[::1] aval,
               const idx_t[::1] bptr, const idx_t[::1] bidx, const double[::1] bval):
    """Gustavson row-by-row product; exact zeros are not stored."""
    cdef cnp.ndarray[idx_t, ndim=1] marker_a = np.full(ncols, -1, dtype=np.int64)
    cdef idx_t[::1] marker = marker_a
    cdef Py_ssize_t i
    cdef idx_t ka, kb, j, col, cnt, bound = 0
    # symbolic pass: upper bound on nnz
    with nogil:
        for i in range(nrows):
            for ka in range(aptr[i], aptr[i + 1]):
                j = aidx[ka]
                for kb in range(bptr[j], bptr[j + 1]):
                    col = bidx[kb]
                    if marker[col] != i:
                        marker[col] = i
                        bound += 1
    cdef cnp.ndarray[idx_t, ndim=1] cptr_a = np.zeros(nrows + 1, dtype=np.int64)
    cdef cnp.ndarray[idx_t, ndim=1] cidx_a = np.empty(bound, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] cval_a = np.empty(bound, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] acc_a = np.zeros(ncols, dtype=np.float64)
    cdef idx_t[::1] cptr = cptr_a
    cdef idx_t[::1] cidx = cidx_a
    cdef double[::1] cval = cval_a
    cdef double[::1] acc = acc_a
    cdef idx_t start, pos = 0
    cdef double a, v
    marker_a.fill(-1)
    with nogil:
        for i in range(nrows):
            start = pos
            for ka in range(aptr[i], aptr[i + 1]):
                j = aidx[ka]
                a = aval[ka]
                for kb in range(bptr[j], bptr[j + 1]):
                    col = bidx[kb]
                    if marker[col] != i:
                        marker[col] = i
                        acc[col] = a * bval[kb]
                        cidx[pos] = col
                        pos += 1
                    else:
                        acc[col] += a * bval[kb]
            qsort(&cidx[start], pos - start, sizeof(idx_t), _cmp_idx)
            cnt = start
            for ka in range(start, pos):
                col = cidx[ka]
                v = acc[col]
                if v != 0.0:
                    cidx[cnt] = col
                    cval[cnt] = v
                    cnt += 1
            pos = cnt
            cptr[i + 1] = pos
    return cptr_a, cidx_a[:pos].copy(), cval_a[:pos].copy()


def coo_to_csr(Py_ssize_t nrows, Py_ssize_t ncols, const idx_t[::1] rows,
               const idx_t[::1] cols, const double[::1] vals, bint sum_duplicates):
    """Sorted CSR from triplets; duplicates keep-first or summed, zeros dropped."""
    cdef Py_ssize_t nin = rows.shape[0]
    cdef cnp.ndarray[idx_t, ndim=1] start_a = np.zeros(nrows + 1, dtype=np.int64)
    cdef cnp.ndarray[idx_t, ndim=1] perm_a = np.empty(nin, dtype=np.int64)
    cdef idx_t[::1] start = start_a
    cdef idx_t[::1] perm = perm_a
    cdef idx_t[::1] nxt
    cdef Py_ssize_t i, t
    cdef idx_t k, r
    with nogil:
        for t in range(nin):
            start[rows[t] + 1] += 1
        for i in range(nrows):
            start[i + 1] += start[i]
    nxt = start_a[:-1].copy()
    with nogil:
        for t in range(nin):
            r = rows[t]
            perm[nxt[r]] = t
            nxt[r] += 1
    cdef cnp.ndarray[idx_t, ndim=1] cptr_a = np.zeros(nrows + 1, dtype=np.int64)
    cdef cnp.ndarray[idx_t, ndim=1] cidx_a = np.empty(nin, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] cval_a = np.empty(nin, dtype=np.float64)
    cdef cnp.ndarray[idx_t, ndim=1] marker_a = np.full(ncols, -1, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] acc_a = np.zeros(ncols, dtype=np.float64)
    cdef idx_t[::1] cptr = cptr_a
    cdef idx_t[::1] cidx = cidx_a
    cdef double[::1] cval = cval_a
    cdef idx_t[::1] marker = marker_a
    cdef double[::1] acc = acc_a
    cdef idx_t pos = 0, rstart, cnt, col, q
    cdef double v
    with nogil:
        for i in range(nrows):
            rstart = pos
            for k in range(start[i], start[i + 1]):
                t = perm[k]
                col = cols[t]
                if marker[col] != i:
                    marker[col] = i
                    acc[col] = vals[t]
                    cidx[pos] = col
                    pos += 1
                elif sum_duplicates:
                    acc[col] += vals[t]
            qsort(&cidx[rstart], pos - rstart, sizeof(idx_t), _cmp_idx)
            cnt = rstart
            for q in range(rstart, pos):
                col = cidx[q]
                v = acc[col]
                if v != 0.0:
                    cidx[cnt] = col
                    cval[cnt] = v
                    cnt += 1
            pos = cnt
            cptr[i + 1] = pos
    return cptr_a, cidx_a[:pos].copy(), cval_a[:pos].copy()


def mis_aggregate(Py_ssize_t n, const idx_t[::1] ptr, const idx_t[::1] idx):
    """Greedy ascending-order aggregation on a strength graph.

    An unassigned dof becomes a root; its unassigned neighbours join it.
    """
    cdef cnp.ndarray[idx_t, ndim=1] agg_a = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[idx_t, ndim=1] roots_a = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] agg = agg_a
    cdef idx_t[::1] roots = roots_a
    cdef Py_ssize_t i
    cdef idx_t k, j, nagg = 0
    with nogil:
        for i in range(n):
            if agg[i] != -1:
                continue
            agg[i] = nagg
            roots[nagg] = i
            for k in range(ptr[i], ptr[i + 1]):
                j = idx[k]
                if agg[j] == -1:
                    agg[j] = nagg
            nagg += 1
    return agg_a, roots_a[:nagg].copy()
