import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import giamg.sparse as sparse_mod
from giamg import _pykernels
from giamg.fem import BoundaryPolicy, HexMesh, assemble_helmholtz
from giamg.sparse import CooArrays, coo_to_csr_summed

settings.register_profile(
    "giamg",
    max_examples=100,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("giamg")

try:
    from giamg import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Run a test once per available kernel implementation."""
    monkeypatch.setattr(sparse_mod, "_kernels", BACKENDS[request.param])
    return request.param


@functools.lru_cache(maxsize=None)
def cube(p, n=2, lam=1.0, bc="penalty", project=False):
    """Cached Helmholtz system on the unit cube with ``n**3`` elements."""
    return assemble_helmholtz(HexMesh(n), p, lam, BoundaryPolicy(bc), project_exact=project)


def random_sparse(rng, nrows, ncols, density=0.3):
    mask = rng.random((nrows, ncols)) < density
    dense = np.where(mask, rng.standard_normal((nrows, ncols)), 0.0)
    r, c = np.nonzero(dense)
    return coo_to_csr_summed(CooArrays(r, c, dense[r, c]), nrows, ncols), dense


def random_spd(rng, n, density=0.3):
    _, B = random_sparse(rng, n, n, density)
    dense = B @ B.T + n * np.eye(n)
    return sparse_mod.SparseMatrix.from_dense(dense), dense


def laplace_1d(n):
    return sparse_mod.SparseMatrix.from_dense(
        2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    )


# Acceptance results, printed as one line per criterion at the end of the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
