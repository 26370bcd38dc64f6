"""Pure numpy implementations of the GF(2) hot loops.

These mirror :mod:`ldpc_audit.kernels.numba_impl` operation for operation;
both backends must produce identical outputs on identical inputs.  The
active backend is selected in :mod:`ldpc_audit.kernels`.
"""

from __future__ import annotations

import numpy as np

__all__ = ["gauss_jordan", "strip_fixpoint"]

_ONE = np.uint64(1)


def gauss_jordan(words: np.ndarray, n_cols: int) -> np.ndarray:
    """Reduce a bit-packed GF(2) matrix to reduced row echelon form, in place.

    Parameters
    ----------
    words : uint64 array of shape (n_rows, n_words)
        Bit-packed rows, 64 columns per word, bit ``c % 64`` of word
        ``c // 64`` holding column ``c``.  Modified in place.
    n_cols : int
        Number of meaningful columns; trailing bits of the last word are
        ignored (and must be zero).

    Returns
    -------
    pivots : int64 array
        Pivot column of row ``r`` for ``r < rank``, strictly increasing.
        The rank is ``pivots.size``.

    Pivot selection is the lowest row index at or below the current row,
    so repeated calls on equal inputs give identical output.
    """
    n_rows = words.shape[0]
    pivots = []
    r = 0
    for col in range(n_cols):
        if r == n_rows:
            break
        w = col >> 6
        b = np.uint64(col & 63)
        colbits = (words[:, w] >> b) & _ONE
        hits = np.nonzero(colbits[r:])[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            words[[r, p]] = words[[p, r]]
            colbits[p] = colbits[r]
        colbits[r] = 0
        others = np.nonzero(colbits)[0]
        if others.size:
            words[others] ^= words[r]
        pivots.append(col)
        r += 1
    return np.asarray(pivots, dtype=np.int64)


def strip_fixpoint(sub: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Peel a dense GF(2) matrix to its fixpoint.

    Repeatedly selects the lowest-index remaining column of residual weight
    at most 1.  Weight 0: the column is dropped as isolated.  Weight 1: the
    column is paired with its unique remaining row and both are removed,
    which may lower other columns' weights.  Stops when every remaining
    column has weight 2 or more.

    Parameters
    ----------
    sub : uint8 array of shape (n_rows, n_cols)
        Dense 0/1 matrix; not modified.

    Returns
    -------
    kinds : int8 array
        0 for a pair event, 1 for an isolated-column drop, in event order.
    ev_col : int64 array
        Local column index of each event.
    ev_row : int64 array
        Local row index removed by a pair event, -1 for drops.
    """
    n_rows, n_cols = sub.shape
    col_w = sub.sum(axis=0, dtype=np.int64)
    row_alive = np.ones(n_rows, dtype=bool)
    col_alive = np.ones(n_cols, dtype=bool)
    kinds = np.empty(n_cols, dtype=np.int8)
    ev_col = np.empty(n_cols, dtype=np.int64)
    ev_row = np.empty(n_cols, dtype=np.int64)
    n_ev = 0
    while True:
        light = np.nonzero(col_alive & (col_w <= 1))[0]
        if light.size == 0:
            break
        j = int(light[0])
        col_alive[j] = False
        if col_w[j] == 0:
            kinds[n_ev] = 1
            ev_col[n_ev] = j
            ev_row[n_ev] = -1
        else:
            i = int(np.nonzero(row_alive & (sub[:, j] == 1))[0][0])
            row_alive[i] = False
            col_w -= sub[i]
            kinds[n_ev] = 0
            ev_col[n_ev] = j
            ev_row[n_ev] = i
        n_ev += 1
    return kinds[:n_ev].copy(), ev_col[:n_ev].copy(), ev_row[:n_ev].copy()
