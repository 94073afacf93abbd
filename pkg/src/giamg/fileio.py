"""On-disk formats: Matrix Market matrices, vectors, l2g and g2u maps.

* Matrix Market: ``coordinate real general`` or ``coordinate real symmetric``,
  1-based indices. Repeated entries in a file are summed.
* Vectors: one value per line, written with 17 significant digits.
* l2g: first line ``p <order>``, then one line per element holding the
  ``(p+1)^3`` dof indices of that element. 0-based.
* g2u: one universal index per line. 0-based.

All writers go through :func:`atomic_write`, so a partially written file never
appears under the final name.
"""
from __future__ import annotations

import os
import tempfile
from contextlib import contextmanager

import numpy as np

from .sparse import CooArrays, SparseMatrix, coo_to_csr_summed


class InputFormatError(ValueError):
    """A file could not be parsed; the message names the file and line."""

    def __init__(self, path, line, msg):
        super().__init__(f"{path}:{line}: {msg}")
        self.path = str(path)
        self.line = line


@contextmanager
def atomic_write(path):
    """Open a temporary file next to ``path`` and rename it into place on success."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- Matrix Market -----------------------------------------------------------

def write_matrix_market(path, A: SparseMatrix, symmetric=False, comment=None):
    """Write ``A`` in coordinate format. With ``symmetric=True`` only the lower
    triangle is stored; the caller is responsible for ``A`` being symmetric."""
    rows, cols, vals = A.to_coo()
    if symmetric:
        keep = rows >= cols
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
    kind = "symmetric" if symmetric else "general"
    with atomic_write(path) as fh:
        fh.write(f"%%MatrixMarket matrix coordinate real {kind}\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{A.nrows} {A.ncols} {len(vals)}\n")
        body = np.column_stack([rows + 1, cols + 1])
        for (r, c), v in zip(body, vals):
            fh.write(f"{r} {c} {v:.17g}\n")


def read_matrix_market(path) -> SparseMatrix:
    with open(path) as fh:
        lines = fh.readlines()
    if not lines:
        raise InputFormatError(path, 1, "empty file")
    header = lines[0].split()
    if (
        len(header) != 5
        or header[0] != "%%MatrixMarket"
        or header[1].lower() != "matrix"
        or header[2].lower() != "coordinate"
    ):
        raise InputFormatError(path, 1, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'")
    field, symm = header[3].lower(), header[4].lower()
    if field not in ("real", "integer", "double"):
        raise InputFormatError(path, 1, f"unsupported field '{field}'")
    if symm not in ("general", "symmetric"):
        raise InputFormatError(path, 1, f"unsupported symmetry '{symm}'")

    lineno = 1
    size = None
    for lineno in range(2, len(lines) + 1):
        s = lines[lineno - 1].strip()
        if s and not s.startswith("%"):
            size = s.split()
            break
    if size is None:
        raise InputFormatError(path, lineno, "missing size line")
    try:
        nrows, ncols, nnz = (int(t) for t in size)
    except ValueError:
        raise InputFormatError(path, lineno, "size line must be 'nrows ncols nnz'") from None

    body = [s for s in lines[lineno:] if s.strip() and not s.lstrip().startswith("%")]
    try:
        data = np.array(" ".join(body).split(), dtype=float).reshape(-1, 3)
        fast = len(data) == nnz
    except ValueError:
        fast = False
    if fast:
        rows = data[:, 0].astype(np.int64)
        cols = data[:, 1].astype(np.int64)
        vals = data[:, 2].copy()
        fast = (
            np.array_equal(rows, data[:, 0]) and np.array_equal(cols, data[:, 1])
            and (nnz == 0 or (rows.min() >= 1 and rows.max() <= nrows
                              and cols.min() >= 1 and cols.max() <= ncols))
        )
        rows -= 1
        cols -= 1
    if not fast:
        rows, cols, vals = _parse_mm_entries(path, lines, lineno, nrows, ncols, nnz)
    if symm == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    return coo_to_csr_summed(CooArrays(rows, cols, vals), nrows, ncols)


def _parse_mm_entries(path, lines, lineno, nrows, ncols, nnz):
    """Line-by-line parse; slow, but pinpoints the offending line."""
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    k = 0
    for ln in range(lineno + 1, len(lines) + 1):
        s = lines[ln - 1].strip()
        if not s or s.startswith("%"):
            continue
        if k >= nnz:
            raise InputFormatError(path, ln, f"more than the declared {nnz} entries")
        parts = s.split()
        try:
            r, c, v = int(parts[0]), int(parts[1]), float(parts[2])
        except (ValueError, IndexError):
            raise InputFormatError(path, ln, f"cannot parse entry '{s}'") from None
        if not (1 <= r <= nrows and 1 <= c <= ncols):
            raise InputFormatError(path, ln, f"index ({r}, {c}) outside {nrows}x{ncols}")
        rows[k], cols[k], vals[k] = r - 1, c - 1, v
        k += 1
    if k != nnz:
        raise InputFormatError(path, len(lines), f"expected {nnz} entries, found {k}")
    return rows, cols, vals


# -- vectors -------------------------------------------------------------------

def write_vector(path, v):
    with atomic_write(path) as fh:
        for x in np.asarray(v, dtype=float):
            fh.write(f"{x:.17g}\n")


def read_vector(path):
    out = []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            try:
                out.append(float(s))
            except ValueError:
                raise InputFormatError(path, ln, f"not a number: '{s}'") from None
    return np.asarray(out)


# -- dof maps ----------------------------------------------------------------------

def write_l2g(path, l2g):
    with atomic_write(path) as fh:
        fh.write(f"p {l2g.order}\n")
        for row in l2g.rows:
            fh.write(" ".join(map(str, row.tolist())) + "\n")


def read_l2g(path):
    from .dofmaps import LocalToGlobalMap

    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise InputFormatError(path, 1, "empty l2g file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "p":
        raise InputFormatError(path, 1, "first line must be 'p <order>'")
    try:
        order = int(head[1])
    except ValueError:
        raise InputFormatError(path, 1, f"bad order '{head[1]}'") from None
    width = (order + 1) ** 3
    rows = []
    for ln, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        try:
            row = [int(t) for t in line.split()]
        except ValueError:
            raise InputFormatError(path, ln, "non-integer dof index") from None
        if len(row) != width:
            raise InputFormatError(path, ln, f"expected {width} indices for p={order}, got {len(row)}")
        rows.append(row)
    return LocalToGlobalMap(order, np.asarray(rows, dtype=np.int64).reshape(-1, width))


def write_g2u(path, g2u):
    with atomic_write(path) as fh:
        for v in g2u.values.tolist():
            fh.write(f"{v}\n")


def read_g2u(path):
    from .dofmaps import GlobalToUniversalMap

    vals = []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            try:
                vals.append(int(s))
            except ValueError:
                raise InputFormatError(path, ln, f"non-integer index '{s}'") from None
    return GlobalToUniversalMap(np.asarray(vals, dtype=np.int64))
