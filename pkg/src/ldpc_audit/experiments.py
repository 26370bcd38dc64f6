"""Ensembles of random regular matrices run through the decomposition.

``sample_regular`` draws a (dv, dc)-regular parity-check matrix by the
configuration model: dv stubs per column are shuffled against dc slots
per row, and duplicate edges are repaired by bounded random swap rounds.
A graph the swaps cannot fix is abandoned and resampled from a fresh
stream, so every trial is a pure function of (seed, trial, attempt).

``run_ensemble`` decomposes each sample and tallies verdicts.  Trials
that blow the rebuild depth limit are excluded from the verdict counts
but reported.  Wall-clock time goes to CSV only; the JSON report must be
byte-identical across reruns.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .decompose import DepthLimitError, decompose
from .gf2 import BitMatrix, rank
from .peel import make_policy

__all__ = [
    "SampleStuckError",
    "EnsembleParams",
    "TrialOutcome",
    "EnsembleResult",
    "sample_regular",
    "run_ensemble",
    "write_outcomes_csv",
]

_MAX_ATTEMPTS = 50


class SampleStuckError(RuntimeError):
    """Swap rounds exhausted without removing all duplicate edges."""


@dataclass(frozen=True)
class EnsembleParams:
    """Ensemble description; n * dv must be divisible by dc."""

    n: int
    dv: int = 3
    dc: int = 6
    trials: int = 100
    seed: int = 0
    policy: str = "in-order"
    depth_limit: int = 32

    def __post_init__(self):
        if self.n <= 0 or self.dv <= 0 or self.dc <= 0:
            raise ValueError("n, dv and dc must be positive")
        if self.dv > 3:
            raise ValueError("the finder's input contract caps dv at 3")
        if (self.n * self.dv) % self.dc:
            raise ValueError(
                f"n*dv = {self.n * self.dv} is not divisible by dc = {self.dc}"
            )
        if self.trials <= 0:
            raise ValueError("trials must be positive")

    @property
    def m_rows(self) -> int:
        return self.n * self.dv // self.dc


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    attempts: int
    depth_exceeded: bool
    kernel_dim: int
    verdict: str | None  # None when depth_exceeded
    sum_k: int | None
    n_components: int | None
    n_pess_events: int | None
    elapsed_s: float

    def to_json_dict(self) -> dict:
        # elapsed_s stays out: reruns must serialize identically
        return {
            "trial": self.trial,
            "attempts": self.attempts,
            "depth_exceeded": self.depth_exceeded,
            "kernel_dim": self.kernel_dim,
            "verdict": self.verdict,
            "sum_k": self.sum_k,
            "n_components": self.n_components,
            "n_pess_events": self.n_pess_events,
        }


@dataclass(frozen=True)
class EnsembleResult:
    params: EnsembleParams
    outcomes: tuple[TrialOutcome, ...]

    def aggregate(self) -> dict:
        done = [o for o in self.outcomes if not o.depth_exceeded]
        verdicts = {"OVERCOUNT": 0, "EXACT": 0, "UNDERCOUNT": 0}
        for o in done:
            verdicts[o.verdict] += 1
        excess = [o.sum_k - o.kernel_dim for o in done]
        return {
            "trials": len(self.outcomes),
            "completed": len(done),
            "depth_limited": len(self.outcomes) - len(done),
            "verdicts": verdicts,
            "overcount_rate": (
                verdicts["OVERCOUNT"] / len(done) if done else None
            ),
            "mean_excess": (
                sum(excess) / len(excess) if excess else None
            ),
            "max_excess": max(excess) if excess else None,
        }

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "ensemble-report",
            "params": {
                "n": self.params.n,
                "dv": self.params.dv,
                "dc": self.params.dc,
                "trials": self.params.trials,
                "seed": self.params.seed,
                "policy": self.params.policy,
                "depth_limit": self.params.depth_limit,
            },
            "aggregate": self.aggregate(),
            "trials": [o.to_json_dict() for o in self.outcomes],
        }


def sample_regular(
    n: int,
    dv: int,
    dc: int,
    rng: np.random.Generator,
    max_swap_rounds: int = 64,
) -> BitMatrix:
    """One configuration-model draw of a (dv, dc)-regular matrix.

    Duplicate edges are repaired by swapping each offending stub with a
    uniformly random one, up to ``max_swap_rounds`` rounds; persistent
    duplicates raise ``SampleStuckError`` so the caller can resample.
    """
    if (n * dv) % dc:
        raise ValueError(f"n*dv = {n * dv} is not divisible by dc = {dc}")
    m_rows = n * dv // dc
    stubs = np.repeat(np.arange(n, dtype=np.int64), dv)
    rng.shuffle(stubs)
    rows = np.arange(stubs.size, dtype=np.int64) // dc
    for _ in range(max_swap_rounds):
        order = np.lexsort((stubs, rows))
        sr, sc = rows[order], stubs[order]
        dup = np.zeros(stubs.size, dtype=bool)
        dup[1:] = (sr[1:] == sr[:-1]) & (sc[1:] == sc[:-1])
        dup_slots = order[dup]
        if dup_slots.size == 0:
            dense = np.zeros((m_rows, n), dtype=np.uint8)
            dense[rows, stubs] = 1
            return BitMatrix.from_dense(dense)
        partners = rng.integers(0, stubs.size, size=dup_slots.size)
        for p, q in zip(dup_slots, partners):
            stubs[p], stubs[q] = stubs[q], stubs[p]
    raise SampleStuckError(
        f"duplicate edges survived {max_swap_rounds} swap rounds"
    )


def run_ensemble(
    params: EnsembleParams,
    progress: Callable[[TrialOutcome], None] | None = None,
) -> EnsembleResult:
    """Sample, decompose and tally ``params.trials`` matrices."""
    outcomes = []
    for trial in range(params.trials):
        t0 = time.perf_counter()
        matrix = None
        attempts = 0
        for attempt in range(_MAX_ATTEMPTS):
            rng = np.random.default_rng((params.seed, trial, attempt))
            attempts = attempt + 1
            try:
                matrix = sample_regular(params.n, params.dv, params.dc, rng)
                break
            except SampleStuckError:
                continue
        if matrix is None:
            raise RuntimeError(
                f"trial {trial}: no simple graph in {_MAX_ATTEMPTS} attempts"
            )
        policy = make_policy(params.policy, seed=(params.seed, trial))
        kernel_dim = matrix.cols - rank(matrix)
        try:
            report = decompose(matrix, policy, depth_limit=params.depth_limit)
            outcome = TrialOutcome(
                trial=trial,
                attempts=attempts,
                depth_exceeded=False,
                kernel_dim=kernel_dim,
                verdict=report.verdict,
                sum_k=report.sum_k,
                n_components=len(report.components),
                n_pess_events=report.n_pess_events,
                elapsed_s=time.perf_counter() - t0,
            )
        except DepthLimitError:
            outcome = TrialOutcome(
                trial=trial,
                attempts=attempts,
                depth_exceeded=True,
                kernel_dim=kernel_dim,
                verdict=None,
                sum_k=None,
                n_components=None,
                n_pess_events=None,
                elapsed_s=time.perf_counter() - t0,
            )
        outcomes.append(outcome)
        if progress is not None:
            progress(outcome)
    return EnsembleResult(params=params, outcomes=tuple(outcomes))


_CSV_FIELDS = (
    "trial", "attempts", "depth_exceeded", "verdict", "sum_k",
    "kernel_dim", "n_components", "n_pess_events", "elapsed_s",
)


def write_outcomes_csv(result: EnsembleResult, path) -> None:
    """Per-trial CSV, including wall-clock time (unlike the JSON form)."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_CSV_FIELDS)
        writer.writeheader()
        for o in result.outcomes:
            writer.writerow({
                "trial": o.trial,
                "attempts": o.attempts,
                "depth_exceeded": int(o.depth_exceeded),
                "verdict": o.verdict or "",
                "sum_k": "" if o.sum_k is None else o.sum_k,
                "kernel_dim": o.kernel_dim,
                "n_components": "" if o.n_components is None else o.n_components,
                "n_pess_events": "" if o.n_pess_events is None else o.n_pess_events,
                "elapsed_s": f"{o.elapsed_s:.6f}",
            })
