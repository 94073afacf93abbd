"""Dense LU with partial pivoting for the coarsest multigrid level."""
from __future__ import annotations

import numpy as np

__all__ = ["DenseLU", "SingularMatrixError"]


class SingularMatrixError(ArithmeticError):
    def __init__(self, row):
        super().__init__(f"matrix is singular: zero pivot in row {row}")
        self.row = row


class DenseLU:
    """``P A = L U`` computed in place, row-oriented rank-1 updates.

    Parameters
    ----------
    A : array_like, shape (n, n)
    """

    def __init__(self, A):
        lu = np.array(A, dtype=float, copy=True)
        n = lu.shape[0]
        if lu.shape != (n, n):
            raise ValueError("matrix must be square")
        perm = np.arange(n)
        for k in range(n):
            piv = k + int(np.argmax(np.abs(lu[k:, k])))
            if lu[piv, k] == 0.0:
                raise SingularMatrixError(k)
            if piv != k:
                lu[[k, piv]] = lu[[piv, k]]
                perm[[k, piv]] = perm[[piv, k]]
            lu[k + 1:, k] /= lu[k, k]
            lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
        self.lu = lu
        self.perm = perm
        self.n = n

    def solve(self, b, out=None):
        b = np.asarray(b, dtype=float)
        if b.shape != (self.n,):
            raise ValueError(f"right-hand side of length {b.shape} for a {self.n}x{self.n} system")
        y = b[self.perm].copy()
        lu = self.lu
        for i in range(1, self.n):
            y[i] -= lu[i, :i] @ y[:i]
        for i in range(self.n - 1, -1, -1):
            y[i] = (y[i] - lu[i, i + 1:] @ y[i + 1:]) / lu[i, i]
        if out is not None:
            out[:] = y
            return out
        return y
