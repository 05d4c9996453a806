"""Sparse and dense kernels for relational message passing.

Dense matrices and 3-D tensors are plain ``float64`` numpy arrays. Sparse
matrices use :class:`SparseMatrix`, an immutable CSR container whose entries
are kept sorted by column within each row so that every reduction runs in a
fixed order.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, DomainError, NonFiniteError, UnsupportedContractionError

__all__ = [
    "SparseMatrix",
    "spmm",
    "dense_contract",
    "row_normalize",
    "stack_vertical",
    "stack_horizontal",
    "SUPPORTED_CONTRACTIONS",
]


def _frozen(a):
    a.setflags(write=False)
    return a


class SparseMatrix:
    """Immutable CSR matrix.

    Build instances with :meth:`from_coo`; duplicate ``(row, col)`` pairs are
    summed once at construction.

    Parameters
    ----------
    indptr, indices, data : ndarray
        Standard CSR arrays. ``indices`` must be sorted within each row and
        free of duplicates; :meth:`from_coo` guarantees this.
    shape : tuple of int
    """

    __slots__ = ("indptr", "indices", "data", "shape", "_transpose", "_row_ids")

    def __init__(self, indptr, indices, data, shape):
        self.indptr = _frozen(np.asarray(indptr, dtype=np.int64))
        self.indices = _frozen(np.asarray(indices, dtype=np.int64))
        self.data = _frozen(np.asarray(data, dtype=np.float64))
        self.shape = (int(shape[0]), int(shape[1]))
        self._transpose = None
        self._row_ids = None
        if self.indptr.shape != (self.shape[0] + 1,):
            raise DimensionError(f"indptr length {self.indptr.size} does not match {self.shape[0]} rows")
        if not np.isfinite(self.data).all():
            raise NonFiniteError("sparse matrix values must be finite")

    @classmethod
    def from_coo(cls, rows, cols, vals, shape):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.broadcast_to(np.asarray(vals, dtype=np.float64), rows.shape).ravel()
        n_rows, n_cols = int(shape[0]), int(shape[1])
        if rows.shape != cols.shape:
            raise DimensionError("row and column index arrays differ in length")
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols):
            raise DimensionError(f"entry index out of bounds for shape {(n_rows, n_cols)}")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            new = np.empty(rows.size, dtype=bool)
            new[0] = True
            new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(new)
            vals = np.add.reduceat(vals, starts)
            rows, cols = rows[starts], cols[starts]
        indptr = np.zeros(n_rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
        return cls(indptr, cols, vals, (n_rows, n_cols))

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense, dtype=np.float64)
        r, c = np.nonzero(dense)
        return cls.from_coo(r, c, dense[r, c], dense.shape)

    @classmethod
    def identity(cls, n):
        idx = np.arange(n)
        return cls.from_coo(idx, idx, 1.0, (n, n))

    @classmethod
    def zeros(cls, n_rows, n_cols):
        return cls(np.zeros(n_rows + 1, dtype=np.int64), [], [], (n_rows, n_cols))

    @property
    def nnz(self):
        return int(self.indices.size)

    @property
    def row_ids(self):
        """Row index of every stored entry (COO row array)."""
        if self._row_ids is None:
            self._row_ids = _frozen(np.repeat(np.arange(self.shape[0]), np.diff(self.indptr)))
        return self._row_ids

    def coo(self):
        return self.row_ids, self.indices, self.data

    def to_dense(self):
        out = np.zeros(self.shape)
        out[self.row_ids, self.indices] = self.data
        return out

    @property
    def T(self):
        if self._transpose is None:
            t = SparseMatrix.from_coo(self.indices, self.row_ids, self.data, self.shape[::-1])
            t._transpose = self
            self._transpose = t
        return self._transpose

    def nonempty_rows(self):
        return np.flatnonzero(np.diff(self.indptr))

    def take_rows(self, rows):
        """Sub-matrix made of the given rows, in the given order."""
        rows = np.asarray(rows, dtype=np.int64)
        starts, stops = self.indptr[rows], self.indptr[rows + 1]
        lengths = stops - starts
        indptr = np.zeros(rows.size + 1, dtype=np.int64)
        np.cumsum(lengths, out=indptr[1:])
        pos = np.repeat(starts - indptr[:-1], lengths) + np.arange(indptr[-1])
        return SparseMatrix(indptr, self.indices[pos], self.data[pos], (rows.size, self.shape[1]))

    def with_data(self, data):
        """Same sparsity pattern, new values."""
        data = np.asarray(data, dtype=np.float64)
        if data.shape != self.data.shape:
            raise DimensionError(f"expected {self.nnz} values, got {data.shape}")
        return SparseMatrix(self.indptr, self.indices, data, self.shape)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


def spmm(s: SparseMatrix, d: np.ndarray) -> np.ndarray:
    """Multiply sparse ``s`` by dense ``d``; returns a dense ``(s.rows, d.cols)`` array."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or s.shape[1] != d.shape[0]:
        raise DimensionError(f"spmm: sparse shape {s.shape} incompatible with dense shape {d.shape}")
    out = np.zeros((s.shape[0], d.shape[1]))
    if s.nnz == 0 or d.shape[1] == 0:
        return out
    prod = s.data[:, None] * d[s.indices]
    rows = s.nonempty_rows()
    out[rows] = np.add.reduceat(prod, s.indptr[rows], axis=0)
    if not np.isfinite(out).all():
        raise NonFiniteError("spmm produced non-finite values")
    return out


def _parse_descriptor(subscripts):
    return subscripts.replace(" ", "").replace("→", "->")


SUPPORTED_CONTRACTIONS = ("ni,io->no", "ni,rio->rno", "rio,rni->no")


def dense_contract(subscripts: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Evaluate one of the three dense contractions used by message passing.

    ``'ni,io->no'``
        plain matrix product;
    ``'ni,rio->rno'``
        project the node matrix through every relation weight;
    ``'rio,rni->no'``
        apply per-relation weights to per-relation messages and sum over
        relations and input features.

    Both ``->`` and ``→`` are accepted as the arrow.
    """
    key = _parse_descriptor(subscripts)
    if key not in SUPPORTED_CONTRACTIONS:
        raise UnsupportedContractionError(f"unsupported contraction {subscripts!r}; expected one of {SUPPORTED_CONTRACTIONS}")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if key == "ni,io->no":
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise DimensionError(f"{key}: shapes {a.shape} and {b.shape} do not agree")
        out = a @ b
    elif key == "ni,rio->rno":
        if a.ndim != 2 or b.ndim != 3 or a.shape[1] != b.shape[1]:
            raise DimensionError(f"{key}: shapes {a.shape} and {b.shape} do not agree")
        out = np.matmul(a[None, :, :], b)
    else:
        if a.ndim != 3 or b.ndim != 3 or a.shape[0] != b.shape[0] or a.shape[1] != b.shape[2]:
            raise DimensionError(f"{key}: shapes {a.shape} and {b.shape} do not agree")
        r, i, o = a.shape
        n = b.shape[1]
        # (n, r*i) @ (r*i, o)
        out = b.transpose(1, 0, 2).reshape(n, r * i) @ a.reshape(r * i, o)
    if not np.isfinite(out).all():
        raise NonFiniteError(f"{key} produced non-finite values")
    return out


def row_normalize(s: SparseMatrix) -> SparseMatrix:
    """Scale every nonempty row to sum to one. Empty rows stay empty."""
    if s.nnz and s.data.min() < 0:
        raise DomainError("row_normalize requires non-negative entries")
    sums = np.zeros(s.shape[0])
    rows = s.nonempty_rows()
    if s.nnz:
        sums[rows] = np.add.reduceat(s.data, s.indptr[rows])
    denom = sums[s.row_ids]
    # rows summing to zero (explicit zeros only) are left untouched
    data = np.divide(s.data, denom, out=np.zeros_like(s.data), where=denom > 0)
    return s.with_data(data)


def _check_square_stack(mats):
    if len(mats) == 0:
        raise DimensionError("cannot stack an empty list of matrices")
    n = mats[0].shape[0]
    for m in mats:
        if m.shape != (n, n):
            raise DimensionError(f"all stacked matrices must be {n}x{n}, got {m.shape}")
    return n


def stack_vertical(mats) -> SparseMatrix:
    """Stack ``R`` square ``N x N`` matrices into an ``(R*N, N)`` matrix."""
    n = _check_square_stack(mats)
    if len(mats) == 1:
        return mats[0]
    rows = np.concatenate([m.row_ids + r * n for r, m in enumerate(mats)])
    cols = np.concatenate([m.indices for m in mats])
    vals = np.concatenate([m.data for m in mats])
    return SparseMatrix.from_coo(rows, cols, vals, (len(mats) * n, n))


def stack_horizontal(mats) -> SparseMatrix:
    """Concatenate ``R`` square ``N x N`` matrices side by side into ``(N, R*N)``."""
    n = _check_square_stack(mats)
    if len(mats) == 1:
        return mats[0]
    rows = np.concatenate([m.row_ids for m in mats])
    cols = np.concatenate([m.indices + r * n for r, m in enumerate(mats)])
    vals = np.concatenate([m.data for m in mats])
    return SparseMatrix.from_coo(rows, cols, vals, (n, len(mats) * n))
