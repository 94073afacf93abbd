"""High-order Helmholtz systems on structured hexahedral meshes.

The element basis is the hierarchical modal basis built from Jacobi
polynomials: two vertex modes ``(1-a)/2`` and ``(1+a)/2`` plus bubble modes
``(1-a)/2 * (1+a)/2 * P_{i-2}^{1,1}(a)``. Three-dimensional modes are tensor
products, with elemental index ``(p+1)^2 i + (p+1) j + k`` for the mode that
has order ``i`` in x, ``j`` in y and ``k`` in z.

The model problem is ``-lap(u) + lam u = g`` on a box with homogeneous
Dirichlet data, manufactured so that ``u = sin(pi x) sin(pi y) sin(pi z)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .dofmaps import GlobalToUniversalMap, LocalToGlobalMap
from .sparse import CooArrays, SparseMatrix, coo_to_csr_summed

__all__ = [
    "AssembledSystem",
    "BoundaryPolicy",
    "HexMesh",
    "ModalBasis1D",
    "assemble_helmholtz",
    "elemental_dof_index",
    "evaluate_solution",
    "jacobi_poly",
    "jacobi_poly_deriv",
    "manufactured_forcing",
    "manufactured_solution",
    "phi_1d",
    "phi_1d_deriv",
]

PENALTY_SCALE = 1e10


def jacobi_poly(n, alpha, beta, a):
    """Jacobi polynomial ``P_n^{alpha,beta}(a)`` by the three-term recurrence.

    Works elementwise on arrays.
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    a = np.asarray(a, dtype=float)
    p_prev = np.ones_like(a)
    if n == 0:
        return p_prev
    p = 0.5 * ((alpha - beta) + (alpha + beta + 2.0) * a)
    ab = alpha + beta
    for k in range(2, n + 1):
        c1 = 2.0 * k * (k + ab) * (2 * k + ab - 2)
        c2 = (2 * k + ab - 1) * (alpha * alpha - beta * beta)
        c3 = (2 * k + ab - 1) * (2 * k + ab) * (2 * k + ab - 2)
        c4 = 2.0 * (k + alpha - 1) * (k + beta - 1) * (2 * k + ab)
        p_prev, p = p, ((c2 + c3 * a) * p - c4 * p_prev) / c1
    return p


def jacobi_poly_deriv(n, alpha, beta, a):
    """d/da of ``P_n^{alpha,beta}``: ``(n+alpha+beta+1)/2 * P_{n-1}^{alpha+1,beta+1}``."""
    a = np.asarray(a, dtype=float)
    if n == 0:
        return np.zeros_like(a)
    return 0.5 * (n + alpha + beta + 1) * jacobi_poly(n - 1, alpha + 1, beta + 1, a)


def _check_mode(i, p):
    if not 0 <= i <= p:
        raise ValueError(f"mode index {i} outside 0..{p}")


def phi_1d(i, p, a):
    """Modal basis function ``i`` of an order-``p`` element at reference coordinate ``a``."""
    _check_mode(i, p)
    a = np.asarray(a, dtype=float)
    if i == 0:
        return 0.5 * (1.0 - a)
    if i == 1:
        return 0.5 * (1.0 + a)
    return 0.25 * (1.0 - a) * (1.0 + a) * jacobi_poly(i - 2, 1.0, 1.0, a)


def phi_1d_deriv(i, p, a):
    _check_mode(i, p)
    a = np.asarray(a, dtype=float)
    if i == 0:
        return np.full_like(a, -0.5)
    if i == 1:
        return np.full_like(a, 0.5)
    return -0.5 * a * jacobi_poly(i - 2, 1.0, 1.0, a) + 0.25 * (1.0 - a * a) * jacobi_poly_deriv(
        i - 2, 1.0, 1.0, a
    )


@dataclass(frozen=True)
class ModalBasis1D:
    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")

    def values(self, a):
        """``(order+1, len(a))`` table of mode values."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        return np.array([phi_1d(i, self.order, a) for i in range(self.order + 1)])

    def derivatives(self, a):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        return np.array([phi_1d_deriv(i, self.order, a) for i in range(self.order + 1)])


def elemental_dof_index(i, j, k, p):
    for t in (i, j, k):
        if not 0 <= t <= p:
            raise ValueError(f"tensor index {t} outside 0..{p}")
    return (p + 1) ** 2 * i + (p + 1) * j + k


@dataclass(frozen=True)
class HexMesh:
    """``n_per_dim^3`` identical axis-aligned boxes tiling ``[lo, hi]``."""

    n_per_dim: int
    lo: tuple = (0.0, 0.0, 0.0)
    hi: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.n_per_dim < 1:
            raise ValueError("n_per_dim must be >= 1")
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError("hi must exceed lo componentwise")

    @property
    def n_elements(self):
        return self.n_per_dim ** 3

    @property
    def h(self):
        return tuple((h - l) / self.n_per_dim for l, h in zip(self.lo, self.hi))


class BoundaryPolicy(enum.Enum):
    PENALTY = "penalty"
    ELIMINATE = "eliminate"


def manufactured_solution(x, y, z):
    return np.sin(np.pi * x) * np.sin(np.pi * y) * np.sin(np.pi * z)


def manufactured_forcing(x, y, z, lam):
    """Forcing as usually quoted for this benchmark, ``-(lam + 3 pi^2) u``.

    It belongs to the sign convention ``lap(u) - lam u = f``; the assembled
    right-hand side uses ``-f``.
    """
    return -(lam + 3.0 * np.pi ** 2) * manufactured_solution(x, y, z)


@dataclass
class AssembledSystem:
    A: SparseMatrix
    b: np.ndarray
    l2g: LocalToGlobalMap
    g2u: GlobalToUniversalMap
    exact_coeffs: np.ndarray | None
    p: int
    mesh: HexMesh
    lam: float
    bc: BoundaryPolicy
    # system dofs on the domain boundary; all False under elimination
    boundary: np.ndarray = field(repr=False)

    @property
    def n_dofs(self):
        return self.A.nrows


def _quadrature(p):
    return leggauss(p + 2)


def reference_matrices_1d(p, h):
    """1D mass and stiffness matrices on an element of length ``h``."""
    q, w = _quadrature(p)
    basis = ModalBasis1D(p)
    B, D = basis.values(q), basis.derivatives(q)
    mass = (B * w) @ B.T * (h / 2.0)
    stiff = (D * w) @ D.T * (2.0 / h)
    return mass, stiff


def element_matrix(p, h, lam):
    """Dense ``(p+1)^3`` element matrix of ``grad u . grad v + lam u v`` on a box.

    Tensor Gauss-Legendre quadrature factorises into 1D matrices; the Kronecker
    order matches :func:`elemental_dof_index`.
    """
    (mx, kx), (my, ky), (mz, kz) = (reference_matrices_1d(p, hd) for hd in h)
    mass = np.kron(np.kron(mx, my), mz)
    elem = (
        np.kron(np.kron(kx, my), mz)
        + np.kron(np.kron(mx, ky), mz)
        + np.kron(np.kron(mx, my), kz)
        + lam * mass
    )
    # exact symmetry, so the assembled operator survives a symmetric file round trip
    return 0.5 * (elem + elem.T), 0.5 * (mass + mass.T)


def _global_1d(n, p):
    """Global grid position of local mode ``i`` in element ``e``: ``out[e, i]``."""
    e = np.arange(n)[:, None]
    pos = np.empty((n, p + 1), dtype=np.int64)
    pos[:, 0:1] = e * p
    pos[:, 1:2] = e * p + p
    if p > 1:
        pos[:, 2:] = e * p + np.arange(1, p)[None, :]
    return pos


def _element_grid_rows(n, p):
    """Rows of global tensor-grid indices, one per element, x-slowest."""
    g = _global_1d(n, p)
    n1 = n * p + 1
    rows = np.empty((n ** 3, (p + 1) ** 3), dtype=np.int64)
    e = 0
    for ex in range(n):
        for ey in range(n):
            for ez in range(n):
                rows[e] = (
                    (g[ex][:, None, None] * n1 + g[ey][None, :, None]) * n1 + g[ez][None, None, :]
                ).ravel()
                e += 1
    return rows


def _element_origins(mesh):
    n = mesh.n_per_dim
    hx, hy, hz = mesh.h
    idx = np.array([(ex, ey, ez) for ex in range(n) for ey in range(n) for ez in range(n)])
    return np.asarray(mesh.lo) + idx * np.array([hx, hy, hz])


def _load_vector(mesh, p, func):
    """Per-element ``(n_elem, (p+1)^3)`` array of ``int func * Phi``."""
    q, w = _quadrature(p)
    B = ModalBasis1D(p).values(q)
    h = mesh.h
    out = np.empty((mesh.n_elements, (p + 1) ** 3))
    for e, origin in enumerate(_element_origins(mesh)):
        x, y, z = (origin[d] + 0.5 * (q + 1.0) * h[d] for d in range(3))
        vals = func(x[:, None, None], y[None, :, None], z[None, None, :])
        wx, wy, wz = (B * w * (hd / 2.0) for hd in h)
        out[e] = np.einsum("ia,jb,kc,abc->ijk", wx, wy, wz, vals).ravel()
    return out


def _assemble(rows, elem, n):
    width = rows.shape[1]
    r = np.repeat(rows, width, axis=1).ravel()
    c = np.tile(rows, (1, width)).ravel()
    v = np.tile(elem.ravel(), rows.shape[0])
    keep = (r >= 0) & (c >= 0)
    if not keep.all():
        r, c, v = r[keep], c[keep], v[keep]
    return coo_to_csr_summed(CooArrays(r, c, v), n, n)


def _scatter(rows, local, n):
    out = np.zeros(n)
    m = rows >= 0
    np.add.at(out, rows[m], local[m])
    return out


def assemble_helmholtz(mesh: HexMesh, p: int, lam: float = 1.0,
                       bc: BoundaryPolicy = BoundaryPolicy.PENALTY, *,
                       project_exact: bool = True) -> AssembledSystem:
    """Assemble ``-lap(u) + lam u = (lam + 3 pi^2) u_exact`` with zero Dirichlet data.

    Parameters
    ----------
    mesh : HexMesh
    p : int
        Polynomial order, ``>= 1``.
    lam : float
        Helmholtz coefficient, ``>= 0``.
    bc : BoundaryPolicy
        ``PENALTY`` keeps every dof and adds ``1e10 * max|diag(A)|`` to the
        diagonal of boundary dofs (with zero right-hand side there).
        ``ELIMINATE`` keeps interior dofs only; eliminated entries appear as
        ``-1`` in the returned l2g map.
    project_exact : bool
        Also compute the L2 projection of the exact solution onto the global
        basis (an extra mass-matrix solve).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    bc = BoundaryPolicy(bc)
    n = mesh.n_per_dim
    n1 = n * p + 1
    ndof = n1 ** 3
    grid_rows = _element_grid_rows(n, p)

    gi = np.arange(n1)
    on_edge = (gi == 0) | (gi == n1 - 1)
    boundary = (on_edge[:, None, None] | on_edge[None, :, None] | on_edge[None, None, :]).ravel()

    if bc is BoundaryPolicy.PENALTY:
        rows, nsys = grid_rows, ndof
    else:
        relabel = np.full(ndof, -1, dtype=np.int64)
        relabel[~boundary] = np.arange(int((~boundary).sum()))
        rows, nsys = relabel[grid_rows], int((~boundary).sum())

    elem, elem_mass = element_matrix(p, mesh.h, lam)
    A = _assemble(rows, elem, nsys)
    load = _load_vector(mesh, p, lambda x, y, z: -manufactured_forcing(x, y, z, lam))
    b = _scatter(rows, load, nsys)

    if bc is BoundaryPolicy.PENALTY:
        beta = PENALTY_SCALE * np.abs(A.diagonal()).max()
        bidx = np.flatnonzero(boundary)
        A = coo_to_csr_summed(
            CooArrays(np.concatenate([A.row_ids(), bidx]),
                      np.concatenate([A.col_indices, bidx]),
                      np.concatenate([A.values, np.full(len(bidx), beta)])),
            nsys, nsys,
        )
        b[boundary] = 0.0  # beta * g with g = 0
        sys_boundary = boundary
    else:
        sys_boundary = np.zeros(nsys, dtype=bool)

    exact = None
    if project_exact:
        exact = _project(rows, elem_mass, mesh, p, nsys, interior_only=bc is BoundaryPolicy.ELIMINATE)

    return AssembledSystem(
        A=A, b=b,
        l2g=LocalToGlobalMap(p, rows),
        g2u=GlobalToUniversalMap(np.arange(nsys, dtype=np.int64)),
        exact_coeffs=exact, p=p, mesh=mesh, lam=float(lam), bc=bc,
        boundary=sys_boundary,
    )


def _kron_mass_inverse(mesh, p, interior_only):
    """Exact inverse of the global mass matrix as a tensor-product operator.

    On a structured box mesh the global mass matrix is ``Mx (x) My (x) Mz`` of
    assembled 1D mass matrices (restricted to interior positions under
    elimination).
    """
    n = mesh.n_per_dim
    n1 = n * p + 1
    g = _global_1d(n, p)
    invs = []
    for h in mesh.h:
        m1, _ = reference_matrices_1d(p, h)
        glob = np.zeros((n1, n1))
        for e in range(n):
            glob[np.ix_(g[e], g[e])] += m1
        if interior_only:
            glob = glob[1:-1, 1:-1]
        invs.append(np.linalg.inv(glob))
    shape = tuple(inv.shape[0] for inv in invs)

    def apply(r, out=None):
        z = np.einsum("ia,jb,kc,abc->ijk", *invs, np.reshape(r, shape), optimize=True).ravel()
        if out is None:
            return z
        out[:] = z
        return out

    return apply


def _project(rows, elem_mass, mesh, p, nsys, interior_only=False):
    """L2 projection of the exact solution onto the (possibly reduced) global basis.

    PCG on the assembled mass matrix, preconditioned by its tensor-product
    inverse; the modal mass matrix is far too ill-conditioned for Jacobi.
    """
    from .krylov import pcg_solve

    M = _assemble(rows, elem_mass, nsys)
    rhs = _scatter(rows, _load_vector(mesh, p, manufactured_solution), nsys)
    coeffs, log = pcg_solve(M, rhs, precond=_kron_mass_inverse(mesh, p, interior_only),
                            rtol=1e-13, max_iters=200)
    return coeffs


def locate(mesh: HexMesh, point):
    """Element index and reference coordinates in ``[-1, 1]^3`` of ``point``."""
    point = np.asarray(point, dtype=float)
    lo, hi = np.asarray(mesh.lo), np.asarray(mesh.hi)
    if point.shape != (3,) or np.any(point < lo) or np.any(point > hi):
        raise ValueError(f"point {point} outside the mesh domain")
    n = mesh.n_per_dim
    h = np.asarray(mesh.h)
    cell = np.minimum(((point - lo) / h).astype(int), n - 1)
    ref = 2.0 * (point - lo - cell * h) / h - 1.0
    e = (cell[0] * n + cell[1]) * n + cell[2]
    return int(e), ref


def evaluate_solution(sys: AssembledSystem, coeffs, point):
    """Value at ``point`` of the modal expansion with global coefficients ``coeffs``.

    Eliminated (boundary) dofs contribute zero.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    e, ref = locate(sys.mesh, point)
    basis = ModalBasis1D(sys.p)
    bx, by, bz = (basis.values(ref[d])[:, 0] for d in range(3))
    local = np.einsum("i,j,k->ijk", bx, by, bz).ravel()
    row = sys.l2g.rows[e]
    m = row >= 0
    return float(local[m] @ coeffs[row[m]])
