"""Shared strategies and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from ldpc_audit import BitMatrix


def bm(dense) -> BitMatrix:
    return BitMatrix.from_dense(np.asarray(dense, dtype=np.uint8))


@st.composite
def dense_matrices(draw, max_rows=8, max_cols=10, min_rows=1, min_cols=1):
    rows = draw(st.integers(min_rows, max_rows))
    cols = draw(st.integers(min_cols, max_cols))
    data = draw(
        st.lists(
            st.lists(st.integers(0, 1), min_size=cols, max_size=cols),
            min_size=rows,
            max_size=rows,
        )
    )
    return np.asarray(data, dtype=np.uint8).reshape(rows, cols)


@st.composite
def capped_column_matrices(draw, max_rows=8, max_cols=10, cap=3):
    """0/1 matrices with every column weight <= cap (finder input contract)."""
    rows = draw(st.integers(1, max_rows))
    cols = draw(st.integers(1, max_cols))
    dense = [[0] * cols for _ in range(rows)]
    for c in range(cols):
        k = draw(st.integers(0, min(cap, rows)))
        owners = draw(
            st.lists(
                st.integers(0, rows - 1), min_size=k, max_size=k, unique=True
            )
        )
        for r in owners:
            dense[r][c] = 1
    return dense


@st.composite
def peelable_matrices(draw, max_rows=6, max_cols=10):
    """Matrices guaranteed to peel to empty.

    Built backwards: starting from nothing, each new row brings exactly
    one previously unseen column plus up to two already-covered ones, so
    forward peeling can always consume the rows in reverse build order.
    Leftover columns never touched by any row peel off as isolated.
    """
    rows = draw(st.integers(1, max_rows))
    cols = draw(st.integers(rows, max_cols))
    fresh = draw(st.permutations(range(cols)))
    dense = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        dense[i][fresh[i]] = 1
        seen = fresh[i + 1 : rows] + fresh[rows:]
        extra = draw(
            st.lists(
                st.sampled_from(seen) if seen else st.nothing(),
                min_size=0,
                max_size=min(2, len(seen)),
                unique=True,
            )
        )
        for c in extra:
            dense[i][c] = 1
    return dense


@pytest.fixture(scope="session")
def m18():
    from ldpc_audit import build_Mn

    return build_Mn(1)
