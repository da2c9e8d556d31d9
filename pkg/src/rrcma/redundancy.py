"""Redundant-restart classification and the restarts' redundancy factor."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError
from .hill_valley import OFFLINE_N_T, HvConfig, hv_test


@dataclass
class RestartRecord:
    """One restart segment: where it converged and what it cost."""

    index: int
    x: np.ndarray
    f: float
    b: int
    redundant: bool | None = None
    criterion: str = ""
    lambda_: int = 0
    sigma0: float = 0.0
    evals_at_restart: int = 0


@dataclass
class RunLedger:
    records: list[RestartRecord]
    B: int
    x_star: np.ndarray
    f_star: float
    best_x: np.ndarray | None = None
    best_f: float = float("inf")
    # best-so-far trajectory as (evaluation_index, best_f) change points
    trajectory: list[tuple[int, float]] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    # evaluations of a final segment that never completed a generation
    unrecorded_evals: int = 0
    archive: object = None


def is_redundant(
    r: int,
    ledger: RunLedger,
    f: Callable[[np.ndarray], float],
    hv: HvConfig = HvConfig(OFFLINE_N_T),
) -> bool:
    """Whether restart ``r`` (1-based) revisited a non-global basin seen before.

    ``f`` is the analysis objective; its evaluations are not part of the run
    budget.
    """
    rec = ledger.records[r - 1]
    in_global, _ = hv_test(ledger.x_star, rec.x, f, hv, fi=ledger.f_star, fj=rec.f)
    if in_global:
        return False
    for prev in ledger.records[: r - 1]:
        same, _ = hv_test(prev.x, rec.x, f, hv, fi=prev.f, fj=rec.f)
        if same:
            return True
    return False


def classify(
    ledger: RunLedger,
    f: Callable[[np.ndarray], float],
    hv: HvConfig = HvConfig(OFFLINE_N_T),
) -> RunLedger:
    """Resolve ``redundant`` for every record in place."""
    for r, rec in enumerate(ledger.records, start=1):
        rec.redundant = is_redundant(r, ledger, f, hv)
    return ledger


def rrf(ledger: RunLedger) -> float:
    if ledger.B <= 0:
        raise ConfigError("total budget B must be positive", "B")
    if any(rec.redundant is None for rec in ledger.records):
        raise ConfigError("unresolved redundancy; call classify() first", "records")
    wasted = sum(rec.b for rec in ledger.records if rec.redundant)
    return wasted / ledger.B
