"""XOR encoder circuits scheduled off the peeling order.

A matrix that peels to nothing (a pseudo-tree) is encodable directly:
the columns dropped as isolated become message bits, and replaying the
peel backwards solves each paired column as the XOR of the rest of its
row.  Components that do not peel get the fold fallback: remove up to
``max_fold`` rows until the rest peels, and record the removed rows as
unenforced.  ``compose`` glues per-component circuits into one encoder
candidate for the whole matrix and ``verify_encoder`` audits it: every
output must be a codeword, inputs must be independent, and the input
count must match the kernel dimension.

Gates live in parallel arrays in construction order, which is already
topological, so evaluation is a single pass and takes message batches.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .decompose import Component, DecompositionReport
from .gf2 import BitMatrix, SubSelection, rank, submatrix
from .peel import default_labels, is_pseudo_tree, strip

__all__ = [
    "INPUT",
    "CONST0",
    "WIRE",
    "XOR",
    "ComposeError",
    "UnencodableComponentError",
    "SolveStep",
    "EncodeSchedule",
    "Circuit",
    "VerifyResult",
    "schedule_pseudo_tree",
    "build_circuit",
    "evaluate",
    "compose",
    "verify_encoder",
    "component_circuit",
    "decomposition_circuit",
    "circuit_to_json_dict",
]

INPUT, CONST0, WIRE, XOR = 0, 1, 2, 3
_KIND_NAMES = {INPUT: "input", CONST0: "const0", WIRE: "wire", XOR: "xor"}


class ComposeError(ValueError):
    """Component circuits do not tile the columns exactly once."""


class UnencodableComponentError(ValueError):
    """No removal within the fold budget makes the component peel."""


@dataclass(frozen=True)
class SolveStep:
    """Solve column ``var`` as the XOR of ``operands``, enforcing one row."""

    var: int
    row_label: str
    operands: tuple[int, ...]


@dataclass(frozen=True)
class EncodeSchedule:
    """Message columns plus solve steps in dependency order.

    ``vacuous_rows`` lists rows with no support inside the scheduled
    selection; they constrain nothing and get no step.
    """

    message_bits: tuple[int, ...]
    steps: tuple[SolveStep, ...]
    vacuous_rows: tuple[str, ...] = ()


@dataclass(frozen=True)
class Circuit:
    """An XOR circuit as parallel gate arrays.

    ``arg_a`` holds the message slot for INPUT gates and the first
    operand gate otherwise; unused operands are -1.  ``inputs`` are the
    INPUT gate ids in message order and ``message_cols`` the column each
    message slot feeds.  ``output_cols``/``output_gates`` map driven
    columns (ascending) to their gates.  ``unenforced`` names constraint
    rows the circuit deliberately does not enforce (fold fallback).
    """

    n_cols: int
    kinds: np.ndarray = field(repr=False)
    arg_a: np.ndarray = field(repr=False)
    arg_b: np.ndarray = field(repr=False)
    inputs: tuple[int, ...]
    message_cols: tuple[int, ...]
    output_cols: tuple[int, ...]
    output_gates: tuple[int, ...]
    unenforced: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("kinds", "arg_a", "arg_b"):
            getattr(self, name).setflags(write=False)

    @property
    def n_inputs(self) -> int:
        return len(self.inputs)

    @property
    def n_gates(self) -> int:
        return int(self.kinds.size)

    @property
    def xor_count(self) -> int:
        return int(np.count_nonzero(self.kinds == XOR))


class _Builder:
    def __init__(self) -> None:
        self.kinds: list[int] = []
        self.arg_a: list[int] = []
        self.arg_b: list[int] = []

    def _add(self, kind: int, a: int = -1, b: int = -1) -> int:
        self.kinds.append(kind)
        self.arg_a.append(a)
        self.arg_b.append(b)
        return len(self.kinds) - 1

    def input(self, slot: int) -> int:
        return self._add(INPUT, slot)

    def const0(self) -> int:
        return self._add(CONST0)

    def wire(self, src: int) -> int:
        return self._add(WIRE, src)

    def xor(self, a: int, b: int) -> int:
        return self._add(XOR, a, b)

    def xor_tree(self, ops: Sequence[int]) -> int:
        """Balanced XOR of the operands: k operands cost k-1 gates."""
        if not ops:
            return self.const0()
        if len(ops) == 1:
            return self.wire(ops[0])
        level = list(ops)
        while len(level) > 1:
            nxt = [self.xor(a, b) for a, b in zip(level[::2], level[1::2])]
            if len(level) % 2:
                nxt.append(level[-1])
            level = nxt
        return level[0]


def schedule_pseudo_tree(
    m: BitMatrix,
    sel: SubSelection | None = None,
    labels: Sequence[str] | None = None,
) -> EncodeSchedule:
    """Schedule a selection that peels to nothing.

    The isolated-drop columns become message bits (ascending); replaying
    the peel backwards, each paired column is solved from the rest of its
    row's in-selection support, which is available by then.  Raises
    ``ValueError`` if columns survive peeling.
    """
    if sel is None:
        sel = SubSelection(tuple(range(m.rows)), tuple(range(m.cols)))
    if labels is None:
        labels = default_labels(m.rows)
    trace = strip(m, sel)
    if trace.survivors.col_ids:
        raise ValueError(
            f"selection does not peel: {len(trace.survivors.col_ids)} "
            f"columns survive"
        )
    col_set = set(sel.col_ids)
    steps = []
    paired_rows = set()
    for var, row in reversed(trace.pairs):
        paired_rows.add(row)
        operands = tuple(
            int(c) for c in m.row_support(row) if int(c) in col_set and int(c) != var
        )
        steps.append(SolveStep(var=var, row_label=labels[row], operands=operands))
    vacuous = tuple(labels[r] for r in sel.row_ids if r not in paired_rows)
    return EncodeSchedule(
        message_bits=tuple(sorted(trace.dropped_isolated)),
        steps=tuple(steps),
        vacuous_rows=vacuous,
    )


def build_circuit(
    schedule: EncodeSchedule, n_cols: int, unenforced: Sequence[str] = ()
) -> Circuit:
    """Materialize a schedule as gates over a width-``n_cols`` codeword."""
    builder = _Builder()
    col_gate: dict[int, int] = {}
    for slot, c in enumerate(schedule.message_bits):
        if c in col_gate:
            raise ValueError(f"column {c} appears twice among message bits")
        col_gate[c] = builder.input(slot)
    for step in schedule.steps:
        if step.var in col_gate:
            raise ValueError(f"column {step.var} is solved twice")
        try:
            ops = [col_gate[c] for c in step.operands]
        except KeyError as missing:
            raise ValueError(
                f"schedule out of order: column {missing.args[0]} is not "
                f"available when solving column {step.var}"
            ) from None
        col_gate[step.var] = builder.xor_tree(ops)
    bad = [c for c in col_gate if not 0 <= c < n_cols]
    if bad:
        raise ValueError(f"column {bad[0]} out of range for width {n_cols}")
    cols = tuple(sorted(col_gate))
    return Circuit(
        n_cols=n_cols,
        kinds=np.asarray(builder.kinds, dtype=np.int8),
        arg_a=np.asarray(builder.arg_a, dtype=np.int64),
        arg_b=np.asarray(builder.arg_b, dtype=np.int64),
        inputs=tuple(col_gate[c] for c in schedule.message_bits),
        message_cols=tuple(schedule.message_bits),
        output_cols=cols,
        output_gates=tuple(col_gate[c] for c in cols),
        unenforced=tuple(unenforced),
    )


def evaluate(circuit: Circuit, messages) -> np.ndarray:
    """Run a message (or a batch of them) through the circuit.

    Accepts shape (n_inputs,) or (batch, n_inputs) of 0/1 and returns the
    codeword(s) over all ``n_cols`` columns; columns the circuit does not
    drive come back 0.
    """
    msgs = np.asarray(messages, dtype=np.uint8)
    single = msgs.ndim == 1
    msgs = np.atleast_2d(msgs)
    if msgs.shape[1] != circuit.n_inputs:
        raise ValueError(
            f"expected {circuit.n_inputs} message bits, got {msgs.shape[1]}"
        )
    batch = msgs.shape[0]
    values = np.zeros((circuit.n_gates, batch), dtype=np.uint8)
    kinds, arg_a, arg_b = circuit.kinds, circuit.arg_a, circuit.arg_b
    for g in range(circuit.n_gates):
        kind = kinds[g]
        if kind == INPUT:
            values[g] = msgs[:, arg_a[g]]
        elif kind == WIRE:
            values[g] = values[arg_a[g]]
        elif kind == XOR:
            values[g] = values[arg_a[g]] ^ values[arg_b[g]]
    out = np.zeros((batch, circuit.n_cols), dtype=np.uint8)
    for col, gate in zip(circuit.output_cols, circuit.output_gates):
        out[:, col] = values[gate]
    return out[0] if single else out


def compose(circuits: Sequence[Circuit]) -> Circuit:
    """Disjoint union of component circuits into one full-width encoder.

    Every column must be driven by exactly one component; message slots
    concatenate in component order.
    """
    if not circuits:
        raise ComposeError("nothing to compose")
    n_cols = circuits[0].n_cols
    if any(c.n_cols != n_cols for c in circuits):
        raise ComposeError("component circuits disagree on codeword width")
    owner: dict[int, int] = {}
    kinds, arg_a, arg_b = [], [], []
    inputs: list[int] = []
    message_cols: list[int] = []
    unenforced: list[str] = []
    offset = 0
    slot_base = 0
    for circ in circuits:
        kinds.append(circ.kinds)
        a = circ.arg_a.copy()
        is_input = circ.kinds == INPUT
        a[is_input] += slot_base
        a[~is_input & (a >= 0)] += offset
        arg_a.append(a)
        b = circ.arg_b.copy()
        b[b >= 0] += offset
        arg_b.append(b)
        inputs.extend(g + offset for g in circ.inputs)
        message_cols.extend(circ.message_cols)
        unenforced.extend(circ.unenforced)
        for col, gate in zip(circ.output_cols, circ.output_gates):
            if col in owner:
                raise ComposeError(f"column {col} is driven by two components")
            owner[col] = gate + offset
        offset += circ.n_gates
        slot_base += circ.n_inputs
    missing = [c for c in range(n_cols) if c not in owner]
    if missing:
        raise ComposeError(f"column {missing[0]} is not driven by any component")
    cols = tuple(sorted(owner))
    return Circuit(
        n_cols=n_cols,
        kinds=np.concatenate(kinds) if kinds else np.zeros(0, np.int8),
        arg_a=np.concatenate(arg_a),
        arg_b=np.concatenate(arg_b),
        inputs=tuple(inputs),
        message_cols=tuple(message_cols),
        output_cols=cols,
        output_gates=tuple(owner[c] for c in cols),
        unenforced=tuple(unenforced),
    )


@dataclass(frozen=True)
class VerifyResult:
    """Outcome of auditing a circuit against a parity-check matrix.

    ``reason`` is "encodes" when everything holds, otherwise the first
    failure among "non-codeword-output", "dimension-mismatch" and
    "rank-deficient".  The witness is the first failing message in the
    checked enumeration order, so reruns agree bit for bit.
    """

    ok: bool
    reason: str
    n_inputs: int
    kernel_dim: int
    image_rank: int
    checked: int
    mode: str
    witness_message: tuple[int, ...] | None = None
    witness_codeword: tuple[int, ...] | None = None
    unenforced: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "verify-result",
            "ok": self.ok,
            "reason": self.reason,
            "n_inputs": self.n_inputs,
            "kernel_dim": self.kernel_dim,
            "image_rank": self.image_rank,
            "checked": self.checked,
            "mode": self.mode,
            "witness_message": None if self.witness_message is None
            else list(self.witness_message),
            "witness_codeword": None if self.witness_codeword is None
            else list(self.witness_codeword),
            "unenforced": list(self.unenforced),
        }


_EXHAUSTIVE_LIMIT = 20
_CHUNK = 4096


def _first_violation(
    circuit: Circuit, m_dense: np.ndarray, messages: np.ndarray
) -> tuple[int, np.ndarray] | None:
    out = evaluate(circuit, messages)
    syndromes = (out @ m_dense.T) & 1
    bad = np.nonzero(syndromes.any(axis=1))[0]
    if bad.size == 0:
        return None
    first = int(bad[0])
    return first, out[first]


def verify_encoder(
    m: BitMatrix,
    circuit: Circuit,
    *,
    mode: str = "auto",
    samples: int = 512,
    seed: int = 0,
) -> VerifyResult:
    """Audit ``circuit`` as an encoder for the kernel of ``m``.

    Membership (every output is a codeword) is checked over all 2^k
    messages when k <= 20 or ``mode="exhaustive"``, else over the zero
    message, the unit messages and ``samples`` seeded-random ones.  After
    membership, the input count must equal the kernel dimension and the
    unit responses must be independent (injectivity).
    """
    if mode not in ("auto", "exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if circuit.n_cols != m.cols:
        raise ValueError(
            f"circuit width {circuit.n_cols} does not match matrix with {m.cols} columns"
        )
    k = circuit.n_inputs
    exhaustive = mode == "exhaustive" or (mode == "auto" and k <= _EXHAUSTIVE_LIMIT)
    m_dense = m.to_dense().astype(np.int64)
    units = np.eye(k, dtype=np.uint8)
    responses = evaluate(circuit, units) if k else np.zeros((0, m.cols), np.uint8)
    image_rank = rank(BitMatrix.from_dense(responses))
    kernel_dim = m.cols - rank(m)

    witness = None
    checked = 0
    if exhaustive:
        eff_mode = "exhaustive"
        slots = np.arange(k, dtype=np.uint64)
        for start in range(0, 1 << k, _CHUNK):
            ids = np.arange(start, min(start + _CHUNK, 1 << k), dtype=np.uint64)
            msgs = ((ids[:, None] >> slots) & np.uint64(1)).astype(np.uint8)
            checked += len(ids)
            hit = _first_violation(circuit, m_dense, msgs)
            if hit is not None:
                witness = (msgs[hit[0]], hit[1])
                break
    else:
        eff_mode = "sampled"
        rng = np.random.default_rng(seed)
        msgs = np.vstack([
            np.zeros((1, k), dtype=np.uint8),
            units,
            rng.integers(0, 2, size=(samples, k), dtype=np.uint8),
        ])
        checked = msgs.shape[0]
        hit = _first_violation(circuit, m_dense, msgs)
        if hit is not None:
            witness = (msgs[hit[0]], hit[1])

    if witness is not None:
        ok, reason = False, "non-codeword-output"
    elif k != kernel_dim:
        ok, reason = False, "dimension-mismatch"
    elif image_rank < k:
        ok, reason = False, "rank-deficient"
    else:
        ok, reason = True, "encodes"
    return VerifyResult(
        ok=ok,
        reason=reason,
        n_inputs=k,
        kernel_dim=kernel_dim,
        image_rank=image_rank,
        checked=checked,
        mode=eff_mode,
        witness_message=None if witness is None else tuple(int(x) for x in witness[0]),
        witness_codeword=None if witness is None else tuple(int(x) for x in witness[1]),
        unenforced=circuit.unenforced,
    )


def _translate(schedule: EncodeSchedule, col_map: Sequence[int]) -> EncodeSchedule:
    return EncodeSchedule(
        message_bits=tuple(col_map[c] for c in schedule.message_bits),
        steps=tuple(
            SolveStep(
                var=col_map[s.var],
                row_label=s.row_label,
                operands=tuple(col_map[c] for c in s.operands),
            )
            for s in schedule.steps
        ),
        vacuous_rows=schedule.vacuous_rows,
    )


def component_circuit(comp: Component, n_cols: int, max_fold: int = 2) -> Circuit:
    """Encoder circuit for one component, folding if it does not peel.

    A component that peels is scheduled directly.  Otherwise rows are
    removed, smallest subsets first in index order, until the rest peels;
    the removed rows are recorded as unenforced.  Raises
    ``UnencodableComponentError`` when no subset within ``max_fold``
    works.  Columns are translated to their global ids, so the result
    composes with the other components.
    """
    mat = comp.matrix
    keep = tuple(range(mat.rows))
    removed: tuple[int, ...] = ()
    if not is_pseudo_tree(mat):
        found = False
        all_cols = tuple(range(mat.cols))
        for size in range(1, max_fold + 1):
            for combo in itertools.combinations(range(mat.rows), size):
                rest = tuple(r for r in range(mat.rows) if r not in combo)
                if is_pseudo_tree(mat, SubSelection(rest, all_cols)):
                    keep, removed, found = rest, combo, True
                    break
            if found:
                break
        if not found:
            raise UnencodableComponentError(
                f"no removal of up to {max_fold} rows makes the component peel"
            )
    schedule = schedule_pseudo_tree(
        mat,
        SubSelection(keep, tuple(range(mat.cols))),
        labels=comp.row_labels,
    )
    schedule = _translate(schedule, comp.selection.col_ids)
    return build_circuit(
        schedule, n_cols, unenforced=tuple(comp.row_labels[r] for r in removed)
    )


def decomposition_circuit(
    m: BitMatrix, report: DecompositionReport, max_fold: int = 2
) -> Circuit:
    """Compose per-component circuits into an encoder candidate for ``m``."""
    return compose([
        component_circuit(comp, m.cols, max_fold) for comp in report.components
    ])


def circuit_to_json_dict(circuit: Circuit) -> dict:
    """Deterministic JSON form of a circuit (columns 1-based)."""
    gates = []
    for g in range(circuit.n_gates):
        kind = int(circuit.kinds[g])
        gate: dict = {"id": g, "kind": _KIND_NAMES[kind]}
        if kind == INPUT:
            gate["slot"] = int(circuit.arg_a[g])
        elif kind == WIRE:
            gate["a"] = int(circuit.arg_a[g])
        elif kind == XOR:
            gate["a"] = int(circuit.arg_a[g])
            gate["b"] = int(circuit.arg_b[g])
        gates.append(gate)
    return {
        "schema_version": 1,
        "kind": "encoder-circuit",
        "n_cols": circuit.n_cols,
        "n_inputs": circuit.n_inputs,
        "n_gates": circuit.n_gates,
        "xor_count": circuit.xor_count,
        "message_cols": [c + 1 for c in circuit.message_cols],
        "outputs": [
            {"col": c + 1, "gate": g}
            for c, g in zip(circuit.output_cols, circuit.output_gates)
        ],
        "unenforced": list(circuit.unenforced),
        "gates": gates,
    }
