"""Greedy decomposition of a parity-check matrix into encodable pieces.

``decompose`` repeatedly runs the stopping-set finder on whatever part of
the matrix is still unclaimed, classifies each selection, and splits the
matrix into components.  An ESS becomes a component as-is.  A PESS has a
dependent row set; one dependent row is removed from the component (it
stays available to later rounds) and, because the dependency's leftover
lives on the columns of the previous component, that component is rebuilt
with a synthesized constraint row and decomposed again, recursively.

Per component, ``k = n_cols - rank`` counts the message bits an encoder
for that component would expose.  The report compares the sum of the
``k`` values against the kernel dimension of the input; a greedy pass
that were exact would match it, and the verdict records whether it
overcounts or undercounts instead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .gf2 import BitMatrix, SubSelection, kernel_basis, rank, row_sum, submatrix, transpose
from .peel import (
    ChoicePolicy,
    InOrderPolicy,
    check_column_weights,
    classify,
    default_labels,
    ess_finder,
    is_pseudo_tree,
)

__all__ = [
    "DepthLimitError",
    "AddedConstraint",
    "Component",
    "DecompositionReport",
    "decompose",
    "find_dependency",
    "lowest_row_removal",
    "message_bit_count",
]

_ORIGINAL_LABEL = re.compile(r"^c(\d+)$")


class DepthLimitError(RuntimeError):
    """Rebuild recursion exceeded the configured depth limit."""

    def __init__(self, depth: int) -> None:
        super().__init__(
            f"rebuild recursion exceeded depth limit {depth}; "
            f"the run was abandoned rather than truncated"
        )
        self.depth = depth


@dataclass(frozen=True)
class AddedConstraint:
    """A synthesized constraint row: the leftover of a dependency.

    ``support_cols`` are global column ids (0-based) of the nonzero
    entries; ``source_labels`` the rows that were summed.
    """

    label: str
    source_labels: tuple[str, ...]
    support_cols: tuple[int, ...]


@dataclass(frozen=True)
class Component:
    """One encodable piece of the input matrix.

    ``matrix`` is the component's own parity-check matrix: its columns
    are ``selection.col_ids`` (global ids, in order) and its rows carry
    ``row_labels``.  ``selection.row_ids`` lists only the *original*
    input rows among them; synthesized rows appear in ``row_labels`` and
    ``added_constraints`` instead.  ``removed`` is the label of the
    dependent row dropped from a PESS, if any.
    """

    selection: SubSelection
    row_labels: tuple[str, ...]
    matrix: BitMatrix
    kind: str  # "ESS" | "PESS" | "pseudo-tree" | "remnant" | "residual"
    k: int
    rank: int
    added_constraints: tuple[AddedConstraint, ...] = ()
    removed: str | None = None


@dataclass(frozen=True)
class DecompositionReport:
    components: tuple[Component, ...]
    sum_k: int
    kernel_dim: int
    verdict: str  # "OVERCOUNT" | "EXACT" | "UNDERCOUNT"
    policy: str
    depth_limit: int
    n_pess_events: int
    n_discarded_leftovers: int
    log: dict = field(repr=False)

    def to_json_dict(self) -> dict:
        """Deterministic JSON form: no timing, 1-based ids, stable order."""
        return {
            "schema_version": 1,
            "kind": "decomposition-report",
            "policy": self.policy,
            "depth_limit": self.depth_limit,
            "kernel_dim": self.kernel_dim,
            "sum_k": self.sum_k,
            "verdict": self.verdict,
            "n_pess_events": self.n_pess_events,
            "n_discarded_leftovers": self.n_discarded_leftovers,
            "components": [
                {
                    "kind": c.kind,
                    "k": c.k,
                    "rank": c.rank,
                    "row_labels": list(c.row_labels),
                    "rows": [r + 1 for r in c.selection.row_ids],
                    "cols": [j + 1 for j in c.selection.col_ids],
                    "removed": c.removed,
                    "added_constraints": [
                        {
                            "label": a.label,
                            "sources": list(a.source_labels),
                            "cols": [j + 1 for j in a.support_cols],
                        }
                        for a in c.added_constraints
                    ],
                }
                for c in self.components
            ],
            "log": self.log,
        }


def message_bit_count(m: BitMatrix) -> int:
    """Message bits an encoder for ``m`` exposes: n_cols - rank."""
    return m.cols - rank(m)


def find_dependency(m: BitMatrix, sel: SubSelection | None = None) -> tuple[tuple[int, ...], int]:
    """A row subset summing to zero, plus how many independent ones exist.

    Returns the support of the first left-kernel basis vector (row ids of
    ``sel`` if given, else of ``m``) and the left-kernel dimension.  The
    basis order is deterministic, so so is the returned subset.
    """
    sub = m if sel is None else submatrix(m, sel)
    basis = kernel_basis(transpose(sub))
    if basis.dimension == 0:
        raise ValueError("rows are linearly independent; there is no dependency")
    local = np.nonzero(basis.vectors[0])[0]
    if sel is None:
        return tuple(int(i) for i in local), basis.dimension
    return tuple(sel.row_ids[int(i)] for i in local), basis.dimension


def lowest_row_removal(rows: Sequence[int], labels: Sequence[str]) -> int:
    """Default PESS removal strategy: drop the lowest-index dependent row."""
    return min(rows)


@dataclass
class _Group:
    """A component slot; rebuilds replace the most recent one."""

    matrix: BitMatrix  # over the group's own columns
    labels: tuple[str, ...]
    col_ids: tuple[int, ...]  # global
    components: list[Component]
    rebuilt: int = 0  # times this slot has been rebuilt


def _unique_label(base: str, taken: set[str]) -> str:
    label = base
    serial = 2
    while label in taken:
        label = f"{base}#{serial}"
        serial += 1
    taken.add(label)
    return label


def _original_rows(labels: Sequence[str], top_m: int) -> tuple[int, ...]:
    out = []
    for lab in labels:
        hit = _ORIGINAL_LABEL.match(lab)
        if hit and 1 <= int(hit.group(1)) <= top_m:
            out.append(int(hit.group(1)) - 1)
    return tuple(out)


def _make_component(
    base: BitMatrix,
    labels: Sequence[str],
    col_ids: Sequence[int],
    rows_l: Sequence[int],
    cols_l: Sequence[int],
    kind: str,
    *,
    top_m: int,
    synth: dict[str, AddedConstraint],
    removed: str | None = None,
) -> Component:
    mat = submatrix(base, SubSelection(tuple(rows_l), tuple(cols_l)))
    row_labels = tuple(labels[r] for r in rows_l)
    global_cols = tuple(col_ids[c] for c in cols_l)
    added = tuple(synth[lab] for lab in row_labels if lab in synth)
    return Component(
        selection=SubSelection(_original_rows(row_labels, top_m), global_cols),
        row_labels=row_labels,
        matrix=mat,
        kind=kind,
        k=message_bit_count(mat),
        rank=rank(mat),
        added_constraints=added,
        removed=removed,
    )


def _decompose_level(
    base: BitMatrix,
    labels: tuple[str, ...],
    col_ids: tuple[int, ...],
    *,
    policy: ChoicePolicy,
    removal: Callable[[Sequence[int], Sequence[str]], int],
    depth: int,
    depth_limit: int,
    top_m: int,
    synth: dict[str, AddedConstraint],
    taken_labels: set[str],
    counters: dict[str, int],
) -> tuple[list[Component], dict]:
    alive_rows = list(range(base.rows))
    alive_cols = list(range(base.cols))
    groups: list[_Group] = []
    steps: list[dict] = []
    step = 0

    def close_residual() -> None:
        comp = _make_component(
            base, labels, col_ids, alive_rows, alive_cols, "residual",
            top_m=top_m, synth=synth,
        )
        groups.append(_Group(comp.matrix, comp.row_labels,
                             comp.selection.col_ids, [comp]))
        steps.append({
            "step": step,
            "event": "residual",
            "rows": list(comp.row_labels),
            "cols": [j + 1 for j in comp.selection.col_ids],
            "k": comp.k,
        })

    while alive_rows or alive_cols:
        step += 1
        w_sel = SubSelection(tuple(alive_rows), tuple(alive_cols))
        working = submatrix(base, w_sel)
        w_labels = tuple(labels[r] for r in alive_rows)
        found = ess_finder(working, policy, enforce_column_weight=False, labels=w_labels)
        rows_l = [alive_rows[i] for i in found.row_ids]
        cols_l = [alive_cols[j] for j in found.col_ids]

        # A selection without columns pins no variables, and the finder
        # only produces one after selecting every remaining row; nothing
        # further can split off, so the remainder is one residual block.
        # Likewise when the selection is empty or covers everything left.
        if (
            not cols_l
            or (set(rows_l) == set(alive_rows) and set(cols_l) == set(alive_cols))
        ):
            close_residual()
            break

        sel_set = set(cols_l)
        alive_set = set(alive_cols)
        cand_sel = SubSelection(tuple(rows_l), tuple(cols_l))
        problem = None
        for r in rows_l:
            # support within the working matrix must stay inside the selection
            if any(
                int(c) in alive_set and int(c) not in sel_set
                for c in base.row_support(r)
            ):
                problem = "condition-1"
                break
        if problem is None:
            colw = submatrix(base, cand_sel).to_dense().sum(axis=0)
            if int(colw.min()) < 2:
                problem = "condition-2"

        removed_label: str | None = None
        if problem is None:
            # independence is judged over every live column, not just the
            # selection's own
            full = submatrix(base, SubSelection(tuple(rows_l), tuple(alive_cols)))
            if rank(full) == len(rows_l):
                comp = _make_component(
                    base, labels, col_ids, rows_l, cols_l, "ESS",
                    top_m=top_m, synth=synth,
                )
                comp_rows = rows_l
                event: dict = {"event": "ESS"}
            else:
                counters["pess"] += 1
                dep_rows, multiplicity = find_dependency(base, cand_sel)
                dep_labels = [labels[r] for r in dep_rows]
                removed_row = removal(dep_rows, dep_labels)
                if removed_row not in dep_rows:
                    raise ValueError(
                        f"removal strategy picked row {removed_row}, "
                        f"which is not in the dependency"
                    )
                removed_label = labels[removed_row]
                comp_rows = [r for r in rows_l if r != removed_row]
                event = {
                    "event": "PESS",
                    "dependency": dep_labels,
                    "multiplicity": multiplicity,
                    "removed": removed_label,
                }
                if groups:
                    prev = groups.pop()
                    # the leftover is read off on the previous group's
                    # columns; map its global ids back to this level
                    to_local = {g: j for j, g in enumerate(col_ids)}
                    star = row_sum(
                        base, dep_rows,
                        restrict_to=tuple(to_local[g] for g in prev.col_ids),
                    )
                    label = _unique_label("+".join(dep_labels), taken_labels)
                    support = tuple(
                        prev.col_ids[j] for j in np.nonzero(star)[0]
                    )
                    constraint = AddedConstraint(label, tuple(dep_labels), support)
                    synth[label] = constraint
                    rebuilt_dense = np.vstack([prev.matrix.to_dense(), star[None, :]])
                    rebuilt = BitMatrix.from_dense(rebuilt_dense)
                    if depth + 1 > depth_limit:
                        raise DepthLimitError(depth_limit)
                    sub_components, sub_log = _decompose_level(
                        rebuilt,
                        prev.labels + (label,),
                        prev.col_ids,
                        policy=policy,
                        removal=removal,
                        depth=depth + 1,
                        depth_limit=depth_limit,
                        top_m=top_m,
                        synth=synth,
                        taken_labels=taken_labels,
                        counters=counters,
                    )
                    groups.append(_Group(
                        rebuilt, prev.labels + (label,), prev.col_ids,
                        sub_components, rebuilt=prev.rebuilt + 1,
                    ))
                    event["synthesized"] = label
                    event["synthesized_cols"] = [j + 1 for j in support]
                    event["rebuild"] = sub_log
                else:
                    counters["discarded"] += 1
                    event["discarded_leftover"] = True
                comp = _make_component(
                    base, labels, col_ids, comp_rows, cols_l, "PESS",
                    top_m=top_m, synth=synth, removed=removed_label,
                )
        else:
            kind = "pseudo-tree" if is_pseudo_tree(base, cand_sel) else "remnant"
            comp = _make_component(
                base, labels, col_ids, rows_l, cols_l, kind,
                top_m=top_m, synth=synth,
            )
            comp_rows = rows_l
            event = {"event": kind, "violated": problem}

        event.update({
            "step": step,
            "rows": [labels[r] for r in comp_rows],
            "cols": [col_ids[c] + 1 for c in cols_l],
            "k": comp.k,
        })
        steps.append(event)
        groups.append(_Group(comp.matrix, comp.row_labels,
                             comp.selection.col_ids, [comp]))
        comp_row_set = set(comp_rows)
        alive_rows = [r for r in alive_rows if r not in comp_row_set]
        alive_cols = [c for c in alive_cols if c not in sel_set]

    components = [c for g in groups for c in g.components]
    log = {
        "depth": depth,
        "n_rows": base.rows,
        "n_cols": base.cols,
        "steps": steps,
    }
    return components, log


def decompose(
    m: BitMatrix,
    policy: ChoicePolicy | None = None,
    *,
    depth_limit: int = 32,
    removal: Callable[[Sequence[int], Sequence[str]], int] | None = None,
    enforce_column_weight: bool = True,
) -> DecompositionReport:
    """Run the greedy decomposition and account for its message bits.

    ``policy`` breaks finder ties (in-order by default) and is shared
    across every finder invocation of the run, recursive ones included,
    so scripted policies see a global call counter.  ``removal`` picks
    which dependent row a PESS drops; the default takes the lowest.
    Synthesized rows can push rebuilt matrices past the weight-3 column
    contract, so only the input matrix is checked.
    """
    if enforce_column_weight:
        check_column_weights(m)
    if policy is None:
        policy = InOrderPolicy()
    if removal is None:
        removal = lowest_row_removal
    labels = default_labels(m.rows)
    synth: dict[str, AddedConstraint] = {}
    taken = set(labels)
    counters = {"pess": 0, "discarded": 0}
    components, log = _decompose_level(
        m,
        labels,
        tuple(range(m.cols)),
        policy=policy,
        removal=removal,
        depth=1,
        depth_limit=depth_limit,
        top_m=m.rows,
        synth=synth,
        taken_labels=taken,
        counters=counters,
    )
    sum_k = sum(c.k for c in components)
    kernel_dim = m.cols - rank(m)
    if sum_k > kernel_dim:
        verdict = "OVERCOUNT"
    elif sum_k == kernel_dim:
        verdict = "EXACT"
    else:
        verdict = "UNDERCOUNT"
    return DecompositionReport(
        components=tuple(components),
        sum_k=sum_k,
        kernel_dim=kernel_dim,
        verdict=verdict,
        policy=policy.describe(),
        depth_limit=depth_limit,
        n_pess_events=counters["pess"],
        n_discarded_leftovers=counters["discarded"],
        log=log,
    )
