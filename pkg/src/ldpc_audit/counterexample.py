"""A structured parity-check family the greedy decomposition overcounts.

The family is parameterized by odd ``N >= 1``: n = 11N+7 columns, m = n/2
rows, every row of weight 6 and every column of weight 3.  The head block
(4N+2 rows by 10N+6 columns) is a sum of a staircase part and a banded
part laid out so that the in-order finder selects its rows 1, 2, ...,
4N+2 in exactly that order and returns the whole head as one ESS; the
tail rows then form a dependent selection whose removal accounting
pushes the summed message bits past the kernel dimension.

``an_formula`` and ``leading_index`` are closed forms for the head: the
support of row i and, per finder iteration t, the first column the
chosen row still covers.  ``verify_lemma_valid_choices`` replays the
finder and checks the walk row by row; ``verify_theorem`` checks the
end-to-end overcount.  Row and column indices in those closed forms are
1-based to match report output; matrices are 0-based as everywhere else.
"""

from __future__ import annotations

import numpy as np

from .decompose import decompose
from .gf2 import (
    BitMatrix,
    SubSelection,
    assemble_blocks,
    kronecker,
    rank,
    submatrix,
)
from .peel import InOrderPolicy, ess_finder

__all__ = [
    "family_dimensions",
    "build_Sn",
    "build_Dn",
    "build_An",
    "build_Bn",
    "build_Mn",
    "an_formula",
    "leading_index",
    "verify_lemma_valid_choices",
    "verify_theorem",
]


def _require_odd(N: int) -> None:
    if N < 1 or N % 2 == 0:
        raise ValueError(f"family parameter N must be odd and >= 1, got {N}")


def family_dimensions(N: int) -> dict:
    """Shapes of the family members for parameter ``N``."""
    _require_odd(N)
    n = 11 * N + 7
    return {
        "N": N,
        "n": n,
        "m": n // 2,
        "head_rows": 4 * N + 2,
        "head_cols": 10 * N + 6,
        "tail_rows": (3 * N + 3) // 2,
        "tail_cols": N + 1,
    }


def build_Sn(N: int) -> BitMatrix:
    """Staircase part of the head: one full row, then shrinking stairs.

    Row 1 covers columns 1-6; below it sit four stair blocks, each N rows
    with d consecutive ones per row for d = 4, 3, 2, 1, packed left to
    right.  The last head row carries no staircase support.
    """
    _require_odd(N)
    supports: list[list[int]] = [[] for _ in range(4 * N + 2)]
    supports[0] = list(range(6))
    for d in (4, 3, 2, 1):
        row_off = (4 - d) * N + 1
        col_off = 6 + N * sum(range(d + 1, 5))
        for t in range(N):
            supports[row_off + t] = list(range(col_off + d * t, col_off + d * t + d))
    return BitMatrix.from_support(4 * N + 2, 10 * N + 6, supports)


def build_Dn(N: int) -> BitMatrix:
    """Banded part of the head: a sub/main diagonal band plus three shifted
    diagonals that switch on one stair block later each, and a single
    closing entry in the last row."""
    _require_odd(N)
    supports: list[list[int]] = [[] for _ in range(4 * N + 2)]
    for r in range(1, 4 * N + 2):
        supports[r].extend((r - 1, r))
    for r in range(N + 1, 4 * N + 2):
        supports[r].append(r + 3 * N + 1)
    for r in range(2 * N + 1, 4 * N + 2):
        supports[r].append(r + 5 * N + 2)
    for r in range(3 * N + 1, 4 * N + 2):
        supports[r].append(r + 6 * N + 3)
    supports[4 * N + 1].append(10 * N + 5)
    return BitMatrix.from_support(4 * N + 2, 10 * N + 6, supports)


def build_An(N: int) -> BitMatrix:
    """Head block: staircase plus band, which never overlap."""
    acc = build_Sn(N).to_dense().astype(np.int64) + build_Dn(N).to_dense()
    assert int(acc.max()) <= 1, "staircase and band parts overlap"
    return BitMatrix.from_dense(acc)


def build_Bn(N: int) -> BitMatrix:
    """Tail rows' head-column part: four spread-out entries per row."""
    _require_odd(N)
    rows = (3 * N + 3) // 2
    supports = [
        [0, (11 * N + 5) // 2 - 1, 7 * N + 3, (17 * N + 11) // 2 - 1]
    ]
    for i in range(2, rows + 1):
        supports.append([
            4 * N + i - 1,
            (11 * N + 3) // 2 + i - 1,
            7 * N + 2 + i,
            (17 * N + 9) // 2 + i - 1,
        ])
    return BitMatrix.from_support(rows, 10 * N + 6, supports)


def build_Mn(N: int) -> BitMatrix:
    """The full family member: head on top, tail rows below.

    The tail's own columns are covered by 3x2 all-ones blocks, one per
    pair of tail columns, giving the tail rows weight 6 and the tail
    columns weight 3 like everything else.
    """
    _require_odd(N)
    tail = kronecker(BitMatrix.identity((N + 1) // 2), BitMatrix.ones(3, 2))
    return assemble_blocks([
        [build_An(N), None],
        [build_Bn(N), tail],
    ])


def an_formula(N: int, i: int) -> tuple[int, ...]:
    """Support of head row ``i`` (both 1-based) in closed form."""
    _require_odd(N)
    if not 1 <= i <= 4 * N + 2:
        raise ValueError(f"row must be in [1, {4 * N + 2}], got {i}")
    if i == 1:
        cols = [1, 2, 3, 4, 5, 6]
    elif i <= N + 1:
        cols = [i - 1, i, 4 * i - 1, 4 * i, 4 * i + 1, 4 * i + 2]
    elif i <= 2 * N + 1:
        cols = [i - 1, i, i + 3 * N + 1,
                3 * i + N + 1, 3 * i + N + 2, 3 * i + N + 3]
    elif i <= 3 * N + 1:
        cols = [i - 1, i, i + 3 * N + 1, i + 5 * N + 2,
                2 * i + 3 * N + 3, 2 * i + 3 * N + 4]
    elif i <= 4 * N + 1:
        cols = [i - 1, i, i + 3 * N + 1, i + 5 * N + 2,
                i + 6 * N + 3, i + 6 * N + 5]
    else:
        cols = [i - 1, i, i + 3 * N + 1, i + 5 * N + 2,
                i + 6 * N + 3, 10 * N + 6]
    return tuple(sorted(cols))


def leading_index(N: int, t: int) -> int:
    """First column (1-based) the in-order walk's row ``t`` still covers.

    Defined for iterations t in [2, 4N+1].  After t-1 iterations of the
    valid walk, exactly the columns below this index have been zeroed.
    """
    _require_odd(N)
    if not 2 <= t <= 4 * N + 1:
        raise ValueError(f"iteration must be in [2, {4 * N + 1}], got {t}")
    d = 5 - ((t - 2) // N + 1)
    return d * t + ((5 - d) * (4 - d) // 2) * N + 7 - 2 * d


def verify_lemma_valid_choices(N: int, matrix: BitMatrix | None = None) -> dict:
    """Replay the in-order finder and check the predicted walk.

    Checks that iteration t selects row t, that the zeroed columns before
    iteration t form the prefix predicted by ``leading_index``, and that
    the walk ends by returning exactly the head block.  ``matrix``
    substitutes a (possibly perturbed) matrix for the built one, so a
    negative control shows up as a reported violation rather than a pass.
    """
    _require_odd(N)
    m = build_Mn(N) if matrix is None else matrix
    records: list[dict] = []
    sel = ess_finder(m, InOrderPolicy(), observer=records.append)
    head_rows = 4 * N + 2
    head_cols = 10 * N + 6
    first_violation: dict | None = None
    iterations_checked = 0

    def note(t: int, problem: str) -> None:
        nonlocal first_violation
        if first_violation is None:
            first_violation = {"iteration": t, "problem": problem}

    if len(records) < head_rows:
        note(len(records) + 1,
             f"finder stopped after {len(records)} iterations")
    for t in range(1, min(len(records), head_rows) + 1):
        rec = records[t - 1]
        iterations_checked = t
        if rec["row"] != t - 1:
            note(t, f"expected row {t}, finder chose row {rec['row'] + 1}")
            break
        if 2 <= t <= 4 * N + 1:
            want = set(range(leading_index(N, t) - 1))
            if set(rec["v_before"]) != want:
                note(t, "zeroed columns do not form the predicted prefix")
                break
        if t == head_rows:
            if rec["weight"] != 0:
                note(t, f"final head row still has weight {rec['weight']}")
            elif set(rec["v_before"]) != set(range(head_cols)):
                note(t, "head columns not exhausted before the final head row")
    selection_matches = (
        set(sel.row_ids) == set(range(head_rows))
        and set(sel.col_ids) == set(range(head_cols))
    )
    if first_violation is None and not selection_matches:
        note(len(records), "finder did not return the head block")
    return {
        "N": N,
        "ok": first_violation is None and selection_matches,
        "iterations_checked": iterations_checked,
        "selection_matches": selection_matches,
        "first_violation": first_violation,
    }


def verify_theorem(N: int) -> dict:
    """End-to-end overcount check for family parameter ``N``.

    Reports the finder-walk check, the kernel dimensions of the full
    matrix and its head against their predicted bounds, an independence
    witness (dropping the first row of the head and the first tail row
    leaves independent rows), and the decomposition verdict.
    """
    _require_odd(N)
    dims = family_dimensions(N)
    m = build_Mn(N)
    n = dims["n"]
    lemma = verify_lemma_valid_choices(N)
    sel = ess_finder(m, InOrderPolicy())
    head_ok = (
        set(sel.row_ids) == set(range(dims["head_rows"]))
        and set(sel.col_ids) == set(range(dims["head_cols"]))
    )
    kernel_dim = n - rank(m)
    keep = tuple(r for r in range(m.rows) if r not in (0, dims["head_rows"]))
    stair_rank = rank(submatrix(m, SubSelection(keep, tuple(range(n)))))
    head_kernel_dim = dims["head_cols"] - rank(build_An(N))
    report = decompose(m)
    out = {
        "N": N,
        "lemma_ok": lemma["ok"],
        "finder_returns_head": head_ok,
        "kernel_dim": kernel_dim,
        "kernel_dim_bound": n // 2 + 2,
        "kernel_dim_ok": kernel_dim <= n // 2 + 2,
        "independent_rows_rank": stair_rank,
        "independent_rows_ok": stair_rank == len(keep),
        "head_kernel_dim": head_kernel_dim,
        "head_kernel_bound": 6 * N + 4,
        "head_kernel_ok": head_kernel_dim >= 6 * N + 4,
        "sum_k": report.sum_k,
        "verdict": report.verdict,
        "overcount_ok": report.verdict == "OVERCOUNT",
    }
    out["ok"] = all(out[key] for key in (
        "lemma_ok", "finder_returns_head", "kernel_dim_ok",
        "independent_rows_ok", "head_kernel_ok", "overcount_ok",
    ))
    return out
