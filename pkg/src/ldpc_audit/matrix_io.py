"""Text formats for GF(2) matrices.

Two formats are supported.

The index format (``.alist``-style):

* line 1: ``n m`` (number of columns, number of rows);
* line 2: maximum column weight, maximum row weight;
* then ``n`` lines, one per column, listing the 1-based indices of the
  rows with a 1 in that column;
* then ``m`` lines, one per row, listing the 1-based indices of the
  columns with a 1 in that row.

Zero entries in the index lists are padding and are ignored on read; the
writer emits no padding.  Blank index lines denote empty columns/rows.

The dense debug format: one line of ``0``/``1`` characters per row.
"""

from __future__ import annotations

import json
import os
from typing import Union

import numpy as np

from .gf2 import BitMatrix

__all__ = [
    "write_alist",
    "read_alist",
    "write_dense",
    "read_dense",
    "read_matrix",
    "canonical_json",
]

PathLike = Union[str, "os.PathLike[str]"]


def write_alist(m: BitMatrix, path: PathLike) -> None:
    """Write ``m`` in the index format described in the module docstring."""
    dense = m.to_dense()
    col_lists = [np.nonzero(dense[:, j])[0] + 1 for j in range(m.cols)]
    row_lists = [np.nonzero(dense[i, :])[0] + 1 for i in range(m.rows)]
    max_col = max((len(c) for c in col_lists), default=0)
    max_row = max((len(r) for r in row_lists), default=0)
    lines = [f"{m.cols} {m.rows}", f"{max_col} {max_row}"]
    lines += [" ".join(str(v) for v in c) for c in col_lists]
    lines += [" ".join(str(v) for v in r) for r in row_lists]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_alist(path: PathLike) -> BitMatrix:
    """Read a matrix written by :func:`write_alist`.

    Raises ``ValueError`` with the offending line number on malformed
    input, including any disagreement between the column lists and the
    row lists.
    """
    with open(path) as fh:
        raw = fh.read().splitlines()

    def ints(line_no: int) -> list[int]:
        if line_no >= len(raw):
            raise ValueError(f"line {line_no + 1}: unexpected end of file")
        try:
            return [int(tok) for tok in raw[line_no].split()]
        except ValueError:
            raise ValueError(f"line {line_no + 1}: expected integers") from None

    header = ints(0)
    if len(header) != 2 or header[0] < 0 or header[1] < 0:
        raise ValueError("line 1: expected 'n m' (columns, rows)")
    n, m_rows = header
    weights = ints(1)
    if len(weights) != 2:
        raise ValueError("line 2: expected max column weight and max row weight")
    expected = 2 + n + m_rows
    # Blank lines inside the expected count are empty index lists (an
    # all-zero column or row); only lines beyond the count are noise.
    while len(raw) > expected and raw[-1].strip() == "":
        raw.pop()
    if len(raw) != expected:
        raise ValueError(f"expected {expected} lines, found {len(raw)}")

    dense = np.zeros((m_rows, n), dtype=np.uint8)
    for j in range(n):
        for v in ints(2 + j):
            if v == 0:
                continue
            if not 1 <= v <= m_rows:
                raise ValueError(f"line {3 + j}: row index {v} out of range 1..{m_rows}")
            dense[v - 1, j] = 1
    for i in range(m_rows):
        line_no = 2 + n + i
        listed = {v for v in ints(line_no) if v != 0}
        for v in listed:
            if not 1 <= v <= n:
                raise ValueError(
                    f"line {line_no + 1}: column index {v} out of range 1..{n}"
                )
        from_cols = {int(j) + 1 for j in np.nonzero(dense[i, :])[0]}
        if listed != from_cols:
            raise ValueError(
                f"line {line_no + 1}: row {i + 1} disagrees with the column lists"
            )
    return BitMatrix.from_dense(dense)


def write_dense(m: BitMatrix, path: PathLike) -> None:
    """Write ``m`` as lines of 0/1 characters, one per row."""
    dense = m.to_dense()
    with open(path, "w") as fh:
        for i in range(m.rows):
            fh.write("".join("1" if v else "0" for v in dense[i]) + "\n")


def read_dense(path: PathLike) -> BitMatrix:
    """Read a matrix written by :func:`write_dense`."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        return BitMatrix.zeros(0, 0)
    width = len(lines[0])
    rows = []
    for i, ln in enumerate(lines):
        if len(ln) != width:
            raise ValueError(f"line {i + 1}: expected {width} characters, got {len(ln)}")
        if set(ln) - {"0", "1"}:
            raise ValueError(f"line {i + 1}: characters other than 0/1")
        rows.append([1 if ch == "1" else 0 for ch in ln])
    return BitMatrix.from_dense(np.asarray(rows, dtype=np.uint8))


def read_matrix(path: PathLike, fmt: str = "alist") -> BitMatrix:
    """Dispatch to :func:`read_alist` or :func:`read_dense` by ``fmt``."""
    if fmt == "alist":
        return read_alist(path)
    if fmt == "dense":
        return read_dense(path)
    raise ValueError(f"unknown matrix format {fmt!r} (expected 'alist' or 'dense')")


def canonical_json(obj) -> str:
    """Serialize a report dict so identical runs are byte-identical.

    Keys are sorted and nothing run-dependent (timestamps, durations)
    belongs in ``obj``; report builders keep timing out of their
    ``to_json_dict`` output for exactly this reason.
    """
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
