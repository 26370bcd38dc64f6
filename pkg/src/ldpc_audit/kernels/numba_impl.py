"""Jitted implementations of the GF(2) hot loops.

Same contracts as :mod:`ldpc_audit.kernels.numpy_impl`; see that module
for parameter documentation.  Importing this module requires numba.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["gauss_jordan", "strip_fixpoint"]


@njit(cache=True)
def gauss_jordan(words, n_cols):  # pragma: no cover - exercised via dispatch
    n_rows, n_words = words.shape
    cap = n_rows if n_rows < n_cols else n_cols
    pivots = np.empty(cap, dtype=np.int64)
    one = np.uint64(1)
    r = 0
    for col in range(n_cols):
        if r == n_rows:
            break
        w = col >> 6
        b = np.uint64(col & 63)
        p = -1
        for i in range(r, n_rows):
            if (words[i, w] >> b) & one:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(n_words):
                tmp = words[r, k]
                words[r, k] = words[p, k]
                words[p, k] = tmp
        for i in range(n_rows):
            if i != r and (words[i, w] >> b) & one:
                for k in range(n_words):
                    words[i, k] ^= words[r, k]
        pivots[r] = col
        r += 1
    return pivots[:r].copy()


@njit(cache=True)
def strip_fixpoint(sub):  # pragma: no cover - exercised via dispatch
    n_rows, n_cols = sub.shape
    col_w = np.zeros(n_cols, dtype=np.int64)
    for i in range(n_rows):
        for j in range(n_cols):
            col_w[j] += sub[i, j]
    row_alive = np.ones(n_rows, dtype=np.uint8)
    col_alive = np.ones(n_cols, dtype=np.uint8)
    kinds = np.empty(n_cols, dtype=np.int8)
    ev_col = np.empty(n_cols, dtype=np.int64)
    ev_row = np.empty(n_cols, dtype=np.int64)
    n_ev = 0
    while True:
        j = -1
        for c in range(n_cols):
            if col_alive[c] and col_w[c] <= 1:
                j = c
                break
        if j < 0:
            break
        col_alive[j] = 0
        if col_w[j] == 0:
            kinds[n_ev] = 1
            ev_col[n_ev] = j
            ev_row[n_ev] = -1
        else:
            hit = -1
            for i in range(n_rows):
                if row_alive[i] and sub[i, j]:
                    hit = i
                    break
            row_alive[hit] = 0
            for c in range(n_cols):
                if col_alive[c] and sub[hit, c]:
                    col_w[c] -= 1
            kinds[n_ev] = 0
            ev_col[n_ev] = j
            ev_row[n_ev] = hit
        n_ev += 1
    return kinds[:n_ev].copy(), ev_col[:n_ev].copy(), ev_row[:n_ev].copy()
