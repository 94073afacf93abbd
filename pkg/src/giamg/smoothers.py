"""Jacobi-preconditioned Chebyshev smoothing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sparse import SparseMatrix, scaled_residual, spmv

__all__ = ["ChebyshevData", "chebyshev_setup", "chebyshev_smooth", "estimate_lambda_max"]


def _inv_diag(A):
    d = A.diagonal()
    if np.any(d == 0.0):
        raise ValueError(f"zero diagonal entry in row {int(np.flatnonzero(d == 0.0)[0])}")
    return 1.0 / d


def estimate_lambda_max(A: SparseMatrix, iters: int = 30, seed: int = 0) -> float:
    """Largest eigenvalue of ``D^{-1} A`` by power iteration.

    Returns the Rayleigh quotient ``v^T A v / v^T D v`` of the final iterate,
    which is the natural one for the symmetric pencil ``(A, D)``.
    """
    if A.nrows != A.ncols:
        raise ValueError("matrix must be square")
    dinv = _inv_diag(A)
    v = np.random.default_rng(seed).standard_normal(A.nrows)
    Av = np.empty(A.nrows)
    for _ in range(iters):
        spmv(A, v, out=Av)
        v = dinv * Av
        v /= np.linalg.norm(v)
    spmv(A, v, out=Av)
    return float((v @ Av) / (v @ (v / dinv)))


@dataclass(frozen=True)
class ChebyshevData:
    """Frozen smoother parameters for one operator.

    The target interval is ``[lambda_max / lo_factor, hi_factor * lambda_max]``.
    """

    inv_diag: np.ndarray
    lambda_max: float
    lo_factor: float = 8.0
    hi_factor: float = 1.1
    iterations: int = 2

    def __post_init__(self):
        if not self.lambda_max > 0:
            raise ValueError("lambda_max must be positive")
        if self.lo_factor < 1 or self.hi_factor < 1:
            raise ValueError("interval factors must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        self.inv_diag.flags.writeable = False

    @property
    def interval(self):
        return self.lambda_max / self.lo_factor, self.hi_factor * self.lambda_max


def chebyshev_setup(A: SparseMatrix, iterations=2, lo_factor=8.0, hi_factor=1.1,
                    power_iters=30, seed=0) -> ChebyshevData:
    return ChebyshevData(
        inv_diag=_inv_diag(A),
        lambda_max=estimate_lambda_max(A, power_iters, seed),
        lo_factor=lo_factor,
        hi_factor=hi_factor,
        iterations=iterations,
    )


def chebyshev_smooth(A: SparseMatrix, data: ChebyshevData, b, x, work=None):
    """Apply ``data.iterations`` Chebyshev steps to ``A x = b``, updating ``x`` in place.

    The error propagator is ``T_k((theta - D^{-1}A)/delta) / T_k(theta/delta)``
    with ``theta``, ``delta`` the centre and half-width of the target interval.

    Parameters
    ----------
    work : tuple of two arrays, optional
        Scratch vectors of length ``A.nrows``.
    """
    n = A.nrows
    if len(b) != n or len(x) != n:
        raise ValueError(f"vector lengths {len(b)}, {len(x)} do not match operator size {n}")
    r, d = work if work is not None else (np.empty(n), np.empty(n))
    lo, hi = data.interval
    theta = 0.5 * (hi + lo)
    delta = 0.5 * (hi - lo)

    scaled_residual(A, x, b, data.inv_diag, r)
    np.multiply(r, 1.0 / theta, out=d)
    x += d
    if data.iterations == 1:
        return x
    sigma = theta / delta
    rho = 1.0 / sigma
    for _ in range(data.iterations - 1):
        scaled_residual(A, x, b, data.inv_diag, r)
        rho_new = 1.0 / (2.0 * sigma - rho)
        d *= rho_new * rho
        d += (2.0 * rho_new / delta) * r
        x += d
        rho = rho_new
    return x
