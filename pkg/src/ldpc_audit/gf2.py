"""Dense bit-packed GF(2) matrices and exact linear algebra on them.

Rows are packed into uint64 words (64 columns per word).  ``BitMatrix``
instances are immutable; every operation returns fresh objects, so values
can be shared freely across threads.  All indices in this API are
0-based; user-facing reports convert to 1-based at the edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels

__all__ = [
    "BitMatrix",
    "SubSelection",
    "KernelBasis",
    "rank",
    "kernel_basis",
    "transpose",
    "kronecker",
    "assemble_blocks",
    "suffix_weight",
    "row_weights",
    "col_weights",
    "submatrix",
    "row_sum",
]


def _pack(dense: np.ndarray) -> np.ndarray:
    rows, cols = dense.shape
    n_words = (cols + 63) // 64
    if n_words == 0:
        return np.zeros((rows, 0), dtype=np.uint64)
    padded = np.zeros((rows, n_words * 64), dtype=np.uint64)
    padded[:, :cols] = dense & 1
    shifts = np.arange(64, dtype=np.uint64)
    return (padded.reshape(rows, n_words, 64) << shifts).sum(axis=2, dtype=np.uint64)


def _unpack(words: np.ndarray, cols: int) -> np.ndarray:
    rows, n_words = words.shape
    if cols == 0:
        return np.zeros((rows, 0), dtype=np.uint8)
    shifts = np.arange(64, dtype=np.uint64)
    bits = (words[:, :, None] >> shifts) & np.uint64(1)
    return bits.reshape(rows, n_words * 64)[:, :cols].astype(np.uint8)


class BitMatrix:
    """An immutable dense GF(2) matrix with bit-packed storage.

    Construct through :meth:`from_dense`, :meth:`from_support`,
    :meth:`zeros`, :meth:`identity` or :meth:`ones`.  Empty matrices
    (zero rows and/or zero columns) are legal everywhere.
    """

    __slots__ = ("rows", "cols", "_words")

    def __init__(self, rows: int, cols: int, words: np.ndarray):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        if words.shape != (rows, (cols + 63) // 64):
            raise ValueError("packed word array has the wrong shape")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        words = np.ascontiguousarray(words, dtype=np.uint64)
        words.setflags(write=False)
        object.__setattr__(self, "_words", words)

    def __setattr__(self, name, value):
        raise AttributeError("BitMatrix is immutable")

    # -- construction -------------------------------------------------

    @classmethod
    def from_dense(cls, dense) -> "BitMatrix":
        """Build from any 2-d array-like of 0/1 entries."""
        arr = np.asarray(dense, dtype=np.uint64)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d array of 0/1 entries")
        if arr.size and int(arr.max()) > 1:
            raise ValueError("entries must be 0 or 1")
        return cls(arr.shape[0], arr.shape[1], _pack(arr))

    @classmethod
    def from_support(
        cls, rows: int, cols: int, supports: Iterable[Iterable[int]]
    ) -> "BitMatrix":
        """Build from per-row column index sets (0-based)."""
        dense = np.zeros((rows, cols), dtype=np.uint8)
        for i, support in enumerate(supports):
            for j in support:
                if not 0 <= j < cols:
                    raise ValueError(f"row {i}: column {j} out of range 0..{cols - 1}")
                dense[i, j] = 1
        return cls.from_dense(dense)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, np.zeros((rows, (cols + 63) // 64), dtype=np.uint64))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def ones(cls, rows: int, cols: int) -> "BitMatrix":
        return cls.from_dense(np.ones((rows, cols), dtype=np.uint8))

    # -- access --------------------------------------------------------

    def to_dense(self) -> np.ndarray:
        """Unpacked uint8 copy of shape (rows, cols)."""
        return _unpack(self._words, self.cols)

    def words_copy(self) -> np.ndarray:
        """Writable copy of the packed words, for elimination kernels."""
        return self._words.copy()

    def get(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i}, {j}) out of range for {self!r}")
        return int((self._words[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1))

    def row_support(self, i: int) -> np.ndarray:
        """Sorted column indices of the 1 entries in row ``i``."""
        return np.nonzero(_unpack(self._words[i : i + 1], self.cols)[0])[0]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __xor__(self, other: "BitMatrix") -> "BitMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        return BitMatrix(self.rows, self.cols, self._words ^ other._words)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(
            np.array_equal(self._words, other._words)
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


@dataclass(frozen=True)
class SubSelection:
    """An ordered selection of parent row and column indices.

    Order is the insertion order of whatever produced the selection, so
    traces stay reproducible.  Indices must be unique.
    """

    row_ids: tuple[int, ...]
    col_ids: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.row_ids)) != len(self.row_ids):
            raise ValueError("duplicate row index in selection")
        if len(set(self.col_ids)) != len(self.col_ids):
            raise ValueError("duplicate column index in selection")

    def sets(self) -> tuple[frozenset, frozenset]:
        return frozenset(self.row_ids), frozenset(self.col_ids)

    def same_sets(self, other: "SubSelection") -> bool:
        return self.sets() == other.sets()

    @property
    def is_empty(self) -> bool:
        return not self.row_ids and not self.col_ids


@dataclass(frozen=True)
class KernelBasis:
    """A deterministic basis of the right kernel.

    ``vectors`` has shape (dimension, cols); row order follows the free
    columns of the reduced row echelon form, ascending, so two calls on
    the same matrix return identical bases.
    """

    dimension: int
    vectors: np.ndarray

    def __iter__(self):
        return iter(self.vectors)


def rank(m: BitMatrix) -> int:
    """GF(2) rank by Gauss-Jordan elimination on the packed rows."""
    words = m.words_copy()
    return int(kernels.gauss_jordan(words, m.cols).size)


def kernel_basis(m: BitMatrix) -> KernelBasis:
    """Basis of ``{x : m @ x = 0}`` with ``dimension == cols - rank``."""
    words = m.words_copy()
    pivots = kernels.gauss_jordan(words, m.cols)
    r = int(pivots.size)
    pivot_set = set(int(p) for p in pivots)
    free = [c for c in range(m.cols) if c not in pivot_set]
    vectors = np.zeros((len(free), m.cols), dtype=np.uint8)
    reduced = _unpack(words[:r], m.cols) if r else np.zeros((0, m.cols), np.uint8)
    for k, f in enumerate(free):
        vectors[k, f] = 1
        for row_idx in range(r):
            vectors[k, int(pivots[row_idx])] = reduced[row_idx, f]
    vectors.setflags(write=False)
    return KernelBasis(dimension=len(free), vectors=vectors)


def transpose(m: BitMatrix) -> BitMatrix:
    return BitMatrix.from_dense(m.to_dense().T)


def kronecker(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Kronecker product; entry ((i1,i2),(j1,j2)) = a(i1,j1) * b(i2,j2)."""
    return BitMatrix.from_dense(np.kron(a.to_dense(), b.to_dense()))


def assemble_blocks(grid: Sequence[Sequence[BitMatrix | None]]) -> BitMatrix:
    """Assemble a block matrix from a rectangular grid.

    ``None`` entries stand for zero blocks; their dimensions are inferred
    from the other blocks in the same grid row and column.  Raises
    ``ValueError`` naming the offending grid position on any mismatch or
    when a whole grid row or column is ``None`` (size not inferable).
    """
    if not grid or not all(len(row) == len(grid[0]) for row in grid):
        raise ValueError("grid must be a non-empty rectangle")
    n_brows, n_bcols = len(grid), len(grid[0])
    heights: list[int | None] = [None] * n_brows
    widths: list[int | None] = [None] * n_bcols
    for i in range(n_brows):
        for j in range(n_bcols):
            block = grid[i][j]
            if block is None:
                continue
            if heights[i] is None:
                heights[i] = block.rows
            elif heights[i] != block.rows:
                raise ValueError(
                    f"block ({i}, {j}): expected {heights[i]} rows, got {block.rows}"
                )
            if widths[j] is None:
                widths[j] = block.cols
            elif widths[j] != block.cols:
                raise ValueError(
                    f"block ({i}, {j}): expected {widths[j]} columns, got {block.cols}"
                )
    for i, h in enumerate(heights):
        if h is None:
            raise ValueError(f"grid row {i} is all zero blocks; row size unknown")
    for j, w in enumerate(widths):
        if w is None:
            raise ValueError(f"grid column {j} is all zero blocks; column size unknown")
    dense = np.zeros((sum(heights), sum(widths)), dtype=np.uint8)
    r0 = 0
    for i in range(n_brows):
        c0 = 0
        for j in range(n_bcols):
            block = grid[i][j]
            if block is not None:
                dense[r0 : r0 + heights[i], c0 : c0 + widths[j]] = block.to_dense()
            c0 += widths[j]
        r0 += heights[i]
    return BitMatrix.from_dense(dense)


def suffix_weight(m: BitMatrix, i: int, j: int) -> int:
    """Weight of row ``i`` restricted to columns ``j .. cols-1``.

    ``j == cols`` is legal and gives 0 (the empty suffix).
    """
    if not 0 <= i < m.rows:
        raise IndexError(f"row {i} out of range for {m!r}")
    if not 0 <= j <= m.cols:
        raise IndexError(f"suffix start {j} out of range 0..{m.cols}")
    sup = m.row_support(i)
    return int(np.count_nonzero(sup >= j))


def row_weights(m: BitMatrix) -> np.ndarray:
    """Per-row popcount, int64 of length rows."""
    if m.cols == 0:
        return np.zeros(m.rows, dtype=np.int64)
    return np.bitwise_count(m.words_copy()).sum(axis=1).astype(np.int64)


def col_weights(m: BitMatrix) -> np.ndarray:
    """Per-column popcount, int64 of length cols."""
    return m.to_dense().sum(axis=0, dtype=np.int64)


def submatrix(m: BitMatrix, sel: SubSelection) -> BitMatrix:
    """Restriction of ``m`` to a selection, in the selection's order."""
    for r in sel.row_ids:
        if not 0 <= r < m.rows:
            raise IndexError(f"selected row {r} out of range for {m!r}")
    for c in sel.col_ids:
        if not 0 <= c < m.cols:
            raise IndexError(f"selected column {c} out of range for {m!r}")
    dense = m.to_dense()
    picked = dense[np.ix_(np.asarray(sel.row_ids, dtype=np.intp),
                          np.asarray(sel.col_ids, dtype=np.intp))] \
        if sel.row_ids and sel.col_ids else np.zeros(
            (len(sel.row_ids), len(sel.col_ids)), dtype=np.uint8)
    return BitMatrix.from_dense(picked)


def row_sum(m: BitMatrix, rows: Iterable[int], restrict_to: Sequence[int]) -> np.ndarray:
    """GF(2) sum of the given rows, restricted to the given columns.

    Returns a uint8 vector ordered like ``restrict_to``; summing zero rows
    gives the zero vector.
    """
    cols = np.asarray(list(restrict_to), dtype=np.intp)
    acc = np.zeros(len(cols), dtype=np.uint8)
    if cols.size == 0:
        return acc
    dense = m.to_dense()
    for r in rows:
        if not 0 <= r < m.rows:
            raise IndexError(f"row {r} out of range for {m!r}")
        acc ^= dense[r, cols]
    return acc
