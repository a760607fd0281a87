"""Triplet assembly, Dirichlet elimination and direct sparse solves."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SingularSystemError(RuntimeError):
    """Raised when the LU factorization meets a zero pivot."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class TripletBuffer:
    """Accumulates ``(row, col, value)`` entries; duplicates are summed on compression."""

    def __init__(self, n: int):
        self.n = n
        self._rows, self._cols, self._vals = [], [], []

    def add(self, rows, cols, values):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        values = np.asarray(values, dtype=float).ravel()
        if not len(rows) == len(cols) == len(values):
            raise ValueError("rows, cols and values must have equal length")
        self._rows.append(rows)
        self._cols.append(cols)
        self._vals.append(values)

    def add_element_matrices(self, cells: np.ndarray, matrices: np.ndarray):
        """Scatter a stack of dense element matrices ``(n_elem, k, k)`` through ``cells``."""
        k = cells.shape[1]
        rows = np.repeat(cells, k, axis=1)
        cols = np.tile(cells, (1, k))
        self.add(rows, cols, matrices.reshape(len(cells), k * k))

    def arrays(self):
        if not self._rows:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty, np.zeros(0)
        return np.concatenate(self._rows), np.concatenate(self._cols), np.concatenate(self._vals)

    def __len__(self):
        return sum(len(r) for r in self._rows)


def compress(t: TripletBuffer, n: int | None = None) -> sp.csr_matrix:
    """CSR matrix with duplicates summed and explicit zeros kept."""
    n = t.n if n is None else n
    rows, cols, vals = t.arrays()
    if len(rows) and (rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n):
        raise IndexError(f"triplet index outside a {n}x{n} matrix")
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def assemble_vector(cells: np.ndarray, element_vectors: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n)
    np.add.at(out, cells.ravel(), element_vectors.ravel())
    return out


def solve_sparse(A, b, check: bool = True) -> np.ndarray:
    """Solve ``A x = b`` by SuperLU with partial pivoting and a fixed COLAMD ordering.

    Symmetric indefinite (saddle-point) systems are fine. The matrix is
    equilibrated by symmetric diagonal scaling first, which tames the large
    penalty entries. One step of iterative refinement is applied when the
    backward error check fails on the first pass.
    """
    A = sp.csc_matrix(A)
    b = np.asarray(b, dtype=float)
    if A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
        raise ValueError(f"incompatible shapes {A.shape} and {b.shape}")
    s = _scaling(A)
    S = sp.diags(s)
    try:
        lu_scaled = spla.splu(sp.csc_matrix(S @ A @ S), permc_spec="COLAMD",
                              diag_pivot_thresh=1.0, options={"SymmetricMode": False})
    except RuntimeError as exc:
        raise SingularSystemError(f"sparse LU failed: {exc}", pivot=_pivot_from_message(str(exc))) from exc

    class _Scaled:
        def solve(self, rhs):
            return s * lu_scaled.solve(s * rhs)

    lu = _Scaled()
    x = lu.solve(b)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("sparse LU produced non-finite values (numerically singular)")
    if check:
        bound = _residual_bound(A, x, b)
        res = np.abs(A @ x - b).max(initial=0.0)
        if res > bound:
            x = x + lu.solve(b - A @ x)
            res = np.abs(A @ x - b).max(initial=0.0)
            if res > _residual_bound(A, x, b):
                raise SingularSystemError(
                    f"residual {res:.3e} exceeds backward-error bound {bound:.3e}")
    return x


def _scaling(A):
    # 1/sqrt of the largest absolute entry per row; rows that are entirely zero keep 1
    amax = np.asarray(abs(A).max(axis=1).todense()).ravel()
    out = np.ones_like(amax)
    nz = amax > 0
    out[nz] = 1.0 / np.sqrt(amax[nz])
    return out


def _residual_bound(A, x, b):
    normA = np.asarray(abs(A).sum(axis=1)).max(initial=0.0)
    return 1e-10 * (normA * np.abs(x).max(initial=0.0) + np.abs(b).max(initial=0.0))


def _pivot_from_message(msg):
    # SuperLU reports "Factor is exactly singular" with the column in some builds
    digits = [int(tok) for tok in msg.replace(",", " ").split() if tok.isdigit()]
    return digits[-1] if digits else None


def apply_dirichlet(A, b, constraints):
    """Eliminate prescribed DOFs symmetrically.

    ``constraints`` is an iterable of ``(dof, value)`` or a mapping. Constrained
    rows and columns become identity, the RHS holds the value, and the column
    contributions move to the right-hand side of the free equations.
    """
    items = constraints.items() if isinstance(constraints, dict) else constraints
    prescribed: dict[int, float] = {}
    for dof, value in items:
        dof = int(dof)
        value = float(value)
        if dof in prescribed and prescribed[dof] != value:
            raise ValueError(f"conflicting constraints on dof {dof}: {prescribed[dof]} vs {value}")
        prescribed[dof] = value
    A = sp.csr_matrix(A, copy=True)
    b = np.array(b, dtype=float, copy=True)
    if not prescribed:
        return A, b
    n = A.shape[0]
    dofs = np.fromiter(prescribed.keys(), dtype=np.int64)
    vals = np.fromiter(prescribed.values(), dtype=float)
    if dofs.min() < 0 or dofs.max() >= n:
        raise IndexError("constrained dof outside the system")
    g = np.zeros(n)
    g[dofs] = vals
    b -= A @ g
    keep = np.ones(n)
    keep[dofs] = 0.0
    K = sp.diags(keep)
    A = (K @ A @ K + sp.diags(1.0 - keep)).tocsr()
    b[dofs] = vals
    return A, b
