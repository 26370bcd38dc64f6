"""Peeling, greedy stopping-set search, and classification.

A *stopping set* here is a selection (C, V) of rows and columns such that

1. every selected row has its whole support inside V, and
2. every selected column has weight at least 2 within the selection.

If additionally the selected rows are independent over all columns of the
matrix at hand, the selection is an ESS; if they are dependent it is a
PESS.  A matrix none of whose selections satisfy 1-2 peels down to
nothing; we call it a pseudo-tree.

``strip`` is the peeling fixpoint, ``ess_finder`` the greedy search that
grows a selection by repeatedly taking a lightest row.  The finder's only
freedom is tie-breaking, captured by ``ChoicePolicy`` objects.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .gf2 import BitMatrix, SubSelection, rank, submatrix

__all__ = [
    "ColumnWeightError",
    "SelectionConditionError",
    "PeelTrace",
    "EssClassification",
    "ChoicePolicy",
    "InOrderPolicy",
    "LightestFirstIndexPolicy",
    "SeededRandomPolicy",
    "ScriptedPolicy",
    "make_policy",
    "strip",
    "ess_finder",
    "classify",
    "is_pseudo_tree",
    "fold_level",
    "check_column_weights",
    "default_labels",
]


class ColumnWeightError(ValueError):
    """A column exceeds the weight-3 input contract of the finder."""


class SelectionConditionError(ValueError):
    """A selection fed to ``classify`` violates stopping-set conditions 1-2."""


@dataclass(frozen=True)
class PeelTrace:
    """Outcome of running ``strip`` to its fixpoint.

    ``pairs`` holds (variable, constraint) parent indices in removal
    order; ``dropped_isolated`` the variables removed at weight 0, in
    removal order; ``survivors`` whatever remains, in the input
    selection's order.  Survivor columns all have residual weight >= 2
    and survivor rows have all their in-selection support on survivor
    columns, so a survivor set with at least one column satisfies
    stopping-set conditions 1-2 within the selection.
    """

    pairs: tuple[tuple[int, int], ...]
    dropped_isolated: tuple[int, ...]
    survivors: SubSelection


@dataclass(frozen=True)
class EssClassification:
    """Stopping-set kind, optionally with fold information.

    ``fold_level`` is the smallest number of constraints whose removal
    leaves a pseudo-tree, when ``fold_level`` has been computed and a
    witness of size <= ``searched_max`` exists; ``witness`` holds the
    removed rows (parent ids).  ``fold_level is None`` with
    ``searched_max = k`` means no witness of size <= k exists.
    """

    kind: str  # "ESS" or "PESS"
    fold_level: int | None = None
    witness: tuple[int, ...] | None = None
    searched_max: int | None = None


class ChoicePolicy:
    """Tie-breaking rule for the finder's lightest-row selection.

    The finder always restricts candidates to the not-yet-selected rows
    of minimum residual weight; a policy only picks among those.  The
    deterministic policies are pure functions of the candidate list; the
    seeded-random policy carries its own generator, so reuse of one
    policy object across runs continues its stream.
    """

    kind = "abstract"

    def __init__(self) -> None:
        self._call_no = 0

    def start_call(self) -> None:
        """Notify the policy that a fresh finder invocation begins."""
        self._call_no += 1

    def select(
        self,
        candidates: Sequence[int],
        *,
        iteration: int,
        labels: Sequence[str],
        leadings: Sequence[int],
    ) -> int:
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind


class InOrderPolicy(ChoicePolicy):
    """Among the tied lightest rows, take the lowest row index."""

    kind = "in-order"

    def select(self, candidates, **_ctx):
        return candidates[0]


class LightestFirstIndexPolicy(ChoicePolicy):
    """Among the tied lightest rows, prefer the smallest leading live column.

    A row with no live support ranks last; remaining ties fall back to
    the lowest row index.
    """

    kind = "lightest-first-index"

    def select(self, candidates, *, leadings, **_ctx):
        best = min(range(len(candidates)), key=lambda k: (leadings[k], candidates[k]))
        return candidates[best]


class SeededRandomPolicy(ChoicePolicy):
    """Uniform choice among the tied lightest rows, reproducible from seed.

    ``seed`` is anything ``numpy.random.default_rng`` accepts, so callers
    can pass (base_seed, trial) tuples for per-trial streams.
    """

    kind = "seeded-random"

    def __init__(self, seed) -> None:
        super().__init__()
        self.seed = seed if isinstance(seed, int) else tuple(seed)
        self._rng = np.random.default_rng(self.seed)

    def select(self, candidates, **_ctx):
        return candidates[int(self._rng.integers(len(candidates)))]

    def describe(self) -> str:
        return f"seeded-random(seed={self.seed})"


class ScriptedPolicy(ChoicePolicy):
    """Replay fixed tie-break choices at chosen points, in-order elsewhere.

    ``overrides`` maps (finder call number, iteration) - both 1-based -
    to the label of the row to pick there.  Raises ``LookupError`` if the
    scripted row is not among the tied candidates, so a stale script
    fails loudly instead of drifting.
    """

    kind = "scripted"

    def __init__(self, overrides: dict[tuple[int, int], str]) -> None:
        super().__init__()
        self.overrides = dict(overrides)

    def select(self, candidates, *, iteration, labels, **_ctx):
        want = self.overrides.get((self._call_no, iteration))
        if want is None:
            return candidates[0]
        for cand in candidates:
            if labels[cand] == want:
                return cand
        raise LookupError(
            f"scripted choice {want!r} is not among the tied rows at "
            f"call {self._call_no}, iteration {iteration}"
        )

    def describe(self) -> str:
        return f"scripted({len(self.overrides)} overrides)"


def make_policy(kind: str, seed=None) -> ChoicePolicy:
    """Build a policy from its CLI name."""
    if kind in ("in-order", "in_order"):
        return InOrderPolicy()
    if kind in ("lightest-first", "lightest-first-index"):
        return LightestFirstIndexPolicy()
    if kind in ("random", "seeded-random"):
        return SeededRandomPolicy(0 if seed is None else seed)
    raise ValueError(f"unknown policy {kind!r}")


def default_labels(n_rows: int) -> tuple[str, ...]:
    """Row labels ``c1 .. cn`` (1-based, matching report conventions)."""
    return tuple(f"c{i + 1}" for i in range(n_rows))


def check_column_weights(m: BitMatrix, maximum: int = 3) -> None:
    """Raise ``ColumnWeightError`` if any column weight exceeds ``maximum``."""
    w = m.to_dense().sum(axis=0, dtype=np.int64)
    heavy = np.nonzero(w > maximum)[0]
    if heavy.size:
        j = int(heavy[0])
        raise ColumnWeightError(
            f"column index {j} (0-based) has weight {int(w[j])}; "
            f"the finder requires column weight <= {maximum}"
        )


def _whole(m: BitMatrix) -> SubSelection:
    return SubSelection(tuple(range(m.rows)), tuple(range(m.cols)))


def strip(m: BitMatrix, sel: SubSelection | None = None) -> PeelTrace:
    """Peel the selection to its fixpoint.

    Repeatedly, lowest-index column first: a column of residual weight 1
    is removed together with its unique remaining row, a column of
    weight 0 is dropped as isolated.  Rows are only removed through
    pairing, so rows whose in-selection support is empty survive.
    """
    if sel is None:
        sel = _whole(m)
    sub = submatrix(m, sel).to_dense()
    kinds, ev_col, ev_row = kernels.strip_fixpoint(sub)
    pairs = []
    dropped = []
    dead_rows = set()
    dead_cols = set()
    for kind, c, r in zip(kinds, ev_col, ev_row):
        col_id = sel.col_ids[int(c)]
        dead_cols.add(int(c))
        if kind == 0:
            pairs.append((col_id, sel.row_ids[int(r)]))
            dead_rows.add(int(r))
        else:
            dropped.append(col_id)
    survivors = SubSelection(
        tuple(rid for k, rid in enumerate(sel.row_ids) if k not in dead_rows),
        tuple(cid for k, cid in enumerate(sel.col_ids) if k not in dead_cols),
    )
    return PeelTrace(tuple(pairs), tuple(dropped), survivors)


def ess_finder(
    m: BitMatrix,
    policy: ChoicePolicy | None = None,
    *,
    enforce_column_weight: bool = True,
    labels: Sequence[str] | None = None,
    observer: Callable[[dict], None] | None = None,
) -> SubSelection:
    """Greedily grow a selection until it pins down a stopping set.

    Each iteration selects a not-yet-selected row of minimum residual
    weight (ties broken by ``policy``, in-order by default), adds it and
    its live support columns to the selection, and zeroes those columns
    in the working copy.  When the chosen row contributes no new columns,
    the current selection is peeled; survivors with at least one column
    are returned immediately and satisfy stopping-set conditions 1-2.
    When every row has been selected the accumulated selection is
    returned as-is; callers treat that case as "the rest of the matrix".

    ``observer``, when given, receives one dict per iteration with keys
    ``iteration`` (1-based), ``row``, ``weight`` and ``v_before``.
    """
    if enforce_column_weight:
        check_column_weights(m)
    if policy is None:
        policy = InOrderPolicy()
    if labels is None:
        labels = default_labels(m.rows)
    policy.start_call()
    n_rows, n_cols = m.shape
    if n_rows == 0:
        return SubSelection((), ())
    H = m.to_dense()
    row_w = H.sum(axis=1, dtype=np.int64)
    selected = np.zeros(n_rows, dtype=bool)
    c_order: list[int] = []
    v_order: list[int] = []
    for iteration in range(1, n_rows + 1):
        unsel = np.nonzero(~selected)[0]
        w_min = int(row_w[unsel].min())
        candidates = [int(r) for r in unsel[row_w[unsel] == w_min]]
        leadings = []
        for r in candidates:
            sup = np.nonzero(H[r])[0]
            leadings.append(int(sup[0]) if sup.size else n_cols)
        chosen = policy.select(
            candidates, iteration=iteration, labels=labels, leadings=leadings
        )
        if chosen not in candidates:
            raise RuntimeError("policy returned a row that is not a candidate")
        if observer is not None:
            observer(
                {
                    "iteration": iteration,
                    "row": chosen,
                    "weight": w_min,
                    "v_before": tuple(v_order),
                }
            )
        selected[chosen] = True
        c_order.append(chosen)
        sup = np.nonzero(H[chosen])[0]
        if sup.size == 0:
            trace = strip(m, SubSelection(tuple(c_order), tuple(v_order)))
            if trace.survivors.col_ids:
                return trace.survivors
        else:
            v_order.extend(int(c) for c in sup)
            row_w -= H[:, sup].sum(axis=1, dtype=np.int64)
            H[:, sup] = 0
    return SubSelection(tuple(c_order), tuple(v_order))


def _check_conditions(m: BitMatrix, sel: SubSelection) -> str | None:
    """Return None if ``sel`` satisfies conditions 1-2 in ``m``, else why not."""
    col_set = set(sel.col_ids)
    for r in sel.row_ids:
        outside = [int(j) for j in m.row_support(r) if int(j) not in col_set]
        if outside:
            return (
                f"row {r} has support on column {outside[0]} "
                f"outside the selection (condition 1)"
            )
    if sel.col_ids:
        sub = submatrix(m, sel)
        w = sub.to_dense().sum(axis=0, dtype=np.int64)
        light = np.nonzero(w < 2)[0]
        if light.size:
            j = int(light[0])
            return (
                f"column {sel.col_ids[j]} has weight {int(w[j])} "
                f"within the selection (condition 2)"
            )
    return None


def classify(m: BitMatrix, sel: SubSelection) -> EssClassification:
    """ESS or PESS, by row independence over all columns of ``m``.

    The selection must satisfy stopping-set conditions 1-2 within ``m``
    (raises ``SelectionConditionError`` otherwise).  The rows are tested
    for GF(2) independence restricted to *all* columns of ``m``, so pass
    the matrix the selection was actually found in.
    """
    problem = _check_conditions(m, sel)
    if problem is not None:
        raise SelectionConditionError(problem)
    full_rows = submatrix(m, SubSelection(sel.row_ids, tuple(range(m.cols))))
    kind = "ESS" if rank(full_rows) == len(sel.row_ids) else "PESS"
    return EssClassification(kind=kind)


def is_pseudo_tree(m: BitMatrix, sel: SubSelection | None = None) -> bool:
    """True iff peeling leaves no columns.

    Rows with empty in-selection support survive peeling but constrain
    nothing, so emptiness is judged on columns.
    """
    return not strip(m, sel).survivors.col_ids


def fold_level(
    m: BitMatrix, sel: SubSelection | None = None, max_k: int = 2
) -> EssClassification:
    """Exhaustively search for the smallest constraint removal that peels.

    Tries all subsets of the selected rows of size 1..``max_k`` in index
    order and returns the first whose removal makes the remaining
    selection a pseudo-tree.  ``fold_level=None`` in the result means no
    witness of size <= ``max_k`` exists.  The search is exponential in
    ``max_k``; intended for component-sized selections.
    """
    if sel is None:
        sel = _whole(m)
    cls = classify(m, sel)
    n = len(sel.row_ids)
    for k in range(1, max_k + 1):
        for combo in itertools.combinations(range(n), k):
            keep = tuple(sel.row_ids[i] for i in range(n) if i not in combo)
            if is_pseudo_tree(m, SubSelection(keep, sel.col_ids)):
                witness = tuple(sel.row_ids[i] for i in combo)
                return replace(cls, fold_level=k, witness=witness, searched_max=max_k)
    return replace(cls, fold_level=None, witness=None, searched_max=max_k)
