"""Restart CMA-ES with repelling tabu regions.

The runner in this module drives both the plain restart CMA-ES (no archive)
and the repelling variant, so the two share every random draw until the first
tabu point exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import cma
from .benchmarks import Problem
from .cma import CmaParams, CmaState, default_lambda
from .errors import ConfigError
from .hill_valley import ONLINE_N_T, HvConfig, hv_test
from .numerics import gamma_function, make_rng, sample_mvn
from .redundancy import RestartRecord, RunLedger
from .restarts import StrategyKind, StrategyState, next_restart_params, record_segment

COVERAGE_PRESETS = (2.0, 10.0, 100.0, 1000.0)
DEFAULT_GAMMA = 0.995
MAX_REJECT_PER_OFFSPRING = 50

# key of the per-run stream feeding BIPOP's regime draws
_STRATEGY_STREAM = 1 << 32


@dataclass
class TabuPoint:
    x: np.ndarray
    f: float
    n: int = 1


@dataclass(frozen=True)
class RepellingConfig:
    c: float = 10.0
    gamma: float = DEFAULT_GAMMA
    sigma0: float = 2.0
    # per-generation cap is max_reject * lambda
    max_reject: int = MAX_REJECT_PER_OFFSPRING

    def __post_init__(self):
        if not self.c > 0:
            raise ConfigError("coverage factor must be positive", "c")
        if not 0 < self.gamma < 1:
            raise ConfigError("shrinkage factor must lie in (0, 1)", "gamma")
        if not self.sigma0 > 0:
            raise ConfigError("sigma0 must be positive", "sigma0")
        if self.max_reject < 1:
            raise ConfigError("max_reject must be >= 1", "max_reject")


@dataclass
class Archive:
    S: float
    points: list[TabuPoint] = field(default_factory=list)
    R: int = 0

    def __len__(self):
        return len(self.points)

    @property
    def locations(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    def radii(self, cfg: RepellingConfig, d: int) -> np.ndarray:
        return np.array(
            [rejection_radius(tabu_volume(p, self, cfg), d) for p in self.points]
        )


def tabu_volume(T: TabuPoint, archive: Archive, cfg: RepellingConfig) -> float:
    """Repelling volume of ``T``: its share ``n_T / R`` of ``S / (c sigma0)``."""
    if archive.R < 1:
        raise ConfigError("tabu volume needs at least one completed restart", "R")
    return T.n * archive.S / (cfg.c * cfg.sigma0 * archive.R)


def rejection_radius(V: float, d: int) -> float:
    """Radius of the ``d``-ball with volume ``V``."""
    return V ** (1 / d) * gamma_function(d / 2 + 1) ** (1 / d) / math.sqrt(math.pi)


def rejects(
    x: np.ndarray,
    T: TabuPoint,
    delta_T: float,
    gamma: float,
    n_rej: int,
    C_inv: np.ndarray,
    sigma: float,
) -> bool:
    diff = np.asarray(x, dtype=float) - T.x
    dist = math.sqrt(max(float(diff @ C_inv @ diff), 0.0))
    return dist / sigma < gamma**n_rej * delta_T


def _any_rejects(x, centers, radii, threshold_scale, C_inv, sigma) -> bool:
    diff = x - centers
    dist = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", diff, C_inv, diff), 0.0))
    return bool(np.any(dist / sigma < threshold_scale * radii))


def sample_accepted(
    state: CmaState,
    archive: Archive | None,
    cfg: RepellingConfig | None,
    rng: np.random.Generator,
    n_rej: int = 0,
    radii: np.ndarray | None = None,
    C_inv: np.ndarray | None = None,
    max_reject: int | None = None,
) -> tuple[np.ndarray, int]:
    """Draw until no tabu point rejects; return the sample and the new ``n_rej``.

    ``n_rej`` is the generation's running rejection count.  Once it exceeds
    ``max_reject`` the next draw is accepted unconditionally; callers detect
    that case by comparing the returned count against the cap.
    """
    if archive is None or not archive.points:
        return sample_mvn(state.m, state.sigma, state.B, state.D, rng), n_rej
    centers = archive.locations
    radii = archive.radii(cfg, state.d) if radii is None else radii
    C_inv = state.C_inv if C_inv is None else C_inv
    cap = cfg.max_reject if max_reject is None else max_reject
    while True:
        x = sample_mvn(state.m, state.sigma, state.B, state.D, rng)
        if n_rej > cap:
            return x, n_rej
        if not _any_rejects(x, centers, radii, cfg.gamma**n_rej, C_inv, state.sigma):
            return x, n_rej
        n_rej += 1


def sample_generation(
    state: CmaState,
    lam: int,
    centers: np.ndarray,
    radii: np.ndarray,
    cfg: RepellingConfig,
    rng: np.random.Generator,
    audit: Callable | None = None,
) -> tuple[np.ndarray, int, int]:
    """Accept ``lam`` offspring against the tabu points at ``centers``.

    Same acceptance sequence as ``lam`` chained :func:`sample_accepted` calls
    sharing one rejection counter, but candidates are drawn in blocks; the
    stream is rewound afterwards so that exactly the consumed draws are used.
    Returns ``(X, n_rej, n_saturated)``.
    """
    d = state.d
    cap = cfg.max_reject * lam
    C_inv = state.C_inv
    scale_root = np.sqrt(state.D)
    saved = rng.bit_generator.state
    X = np.empty((lam, d))
    n_acc = n_rej = used = saturated = 0
    block = 2 * lam
    while n_acc < lam:
        Z = rng.standard_normal((block, d))
        cand = state.m + state.sigma * ((Z * scale_root) @ state.B.T)
        diff = cand[:, None, :] - centers[None, :, :]
        q = np.sqrt(np.maximum(np.einsum("ktj,jl,ktl->kt", diff, C_inv, diff), 0.0))
        q /= state.sigma
        for j in range(block):
            used += 1
            if n_rej > cap:
                saturated += 1
            elif np.any(q[j] < cfg.gamma**n_rej * radii):
                n_rej += 1
                continue
            elif audit is not None:
                audit(cand[j], centers, radii, cfg.gamma**n_rej, C_inv, state.sigma)
            X[n_acc] = cand[j]
            n_acc += 1
            if n_acc == lam:
                break
        block = min(4 * block, 4096)
    rng.bit_generator.state = saved
    rng.standard_normal((used, d))
    return X, n_rej, saturated


def archive_update(
    archive: Archive,
    m: np.ndarray,
    f_m: float,
    f: Callable[[np.ndarray], float],
    hv: HvConfig = HvConfig(ONLINE_N_T),
) -> Archive:
    """Merge the converged mean ``m`` into the archive (in place).

    The first tabu point sharing a basin with ``m`` absorbs it, moving to ``m``
    when ``m`` is better; otherwise ``m`` becomes a new tabu point.
    """
    for T in archive.points:
        same, _ = hv_test(m, T.x, f, hv, fi=f_m, fj=T.f)
        if same:
            T.n += 1
            if f_m < T.f:
                T.x, T.f = np.array(m, dtype=float), float(f_m)
            break
    else:
        archive.points.append(TabuPoint(np.array(m, dtype=float), float(f_m), 1))
    archive.R += 1
    return archive


class BudgetExhausted(Exception):
    pass


class CountingObjective:
    """Budgeted objective that records the best-so-far trajectory."""

    def __init__(self, problem: Problem, budget: int):
        self.problem = problem
        self.budget = int(budget)
        self.evals = 0
        self.best_f = math.inf
        self.best_x: np.ndarray | None = None
        self.trajectory: list[tuple[int, float]] = []

    @property
    def remaining(self) -> int:
        return self.budget - self.evals

    def batch(self, X: np.ndarray) -> np.ndarray:
        if len(X) > self.remaining:
            raise BudgetExhausted
        F = self.problem.evaluate(X)
        for i, value in enumerate(F):
            self.evals += 1
            if value < self.best_f:
                self.best_f = float(value)
                self.best_x = np.array(X[i])
                self.trajectory.append((self.evals, self.best_f))
        return F

    def __call__(self, x: np.ndarray) -> float:
        return float(self.batch(np.asarray(x, dtype=float)[None, :])[0])


def run_rr_cmaes(
    problem: Problem,
    strategy: StrategyKind | str,
    cfg: RepellingConfig | None,
    budget: int,
    seed: int,
    *,
    sigma0: float | None = None,
    hv: HvConfig = HvConfig(ONLINE_N_T),
    run_id: str = "",
    audit: Callable | None = None,
) -> RunLedger:
    """Restart CMA-ES on ``problem``; repelling when ``cfg`` is given.

    Each restart segment ``k`` draws from ``make_rng(seed, k)``.  ``sigma0``
    defaults to ``cfg.sigma0`` (or 2.0 without repelling).  ``audit``, if
    given, is called as ``audit(x, centers, radii, scale, C_inv, sigma)`` for
    every accepted offspring while the archive is non-empty.  The returned
    ledger is unclassified.
    """
    kind = StrategyKind.parse(strategy) if isinstance(strategy, str) else strategy
    if budget < 1:
        raise ConfigError("budget must be >= 1", "budget")
    if sigma0 is None:
        sigma0 = cfg.sigma0 if cfg is not None else 2.0
    d = problem.d
    bounds = problem.bounds
    obj = CountingObjective(problem, budget)
    archive = Archive(problem.volume) if cfg is not None else None
    st = StrategyState(default_lambda(d))
    strategy_rng = make_rng(seed, _STRATEGY_STREAM)
    records: list[RestartRecord] = []
    events: list[dict] = []
    unrecorded = 0
    segment = 0

    while obj.remaining > 0:
        rng = make_rng(seed, segment)
        lam, seg_sigma0, st = next_restart_params(kind, st, sigma0, strategy_rng)
        params = CmaParams.default(d, lam)
        state = cma.init(params, bounds, seg_sigma0, rng)
        start = obj.evals
        radii = None
        if archive is not None and archive.points:
            radii = archive.radii(cfg, d)
        saturated = 0
        criterion = None
        try:
            while criterion is None:
                if radii is None:
                    X = cma.ask(state, params, rng)
                else:
                    X, n_rej, sat = sample_generation(
                        state, lam, archive.locations, radii, cfg, rng, audit
                    )
                    saturated += sat
                X_eval = cma.saturate(X, bounds)
                if obj.remaining < lam:
                    obj.batch(X_eval[: obj.remaining])
                    raise BudgetExhausted
                F = obj.batch(X_eval)
                cma.tell(state, params, X, F, X_eval)
                criterion = cma.check_restart(state, params)
        except BudgetExhausted:
            criterion = None

        evals_at_restart = obj.evals
        m = cma.saturate(state.m, bounds)
        matched = None
        archive_size = len(archive) if archive is not None else 0
        if criterion is not None and archive is not None:
            try:
                f_m = obj(m)
                before = len(archive)
                archive_update(archive, m, f_m, obj, hv)
                matched = len(archive) == before
                archive_size = len(archive)
            except BudgetExhausted:
                f_m = float(problem(m))
        else:
            f_m = float(problem(m))

        b = obj.evals - start
        st = record_segment(st, b)
        if state.generation == 0 and criterion is None:
            unrecorded += b
        else:
            rec = RestartRecord(
                index=len(records) + 1,
                x=m,
                f=f_m,
                b=b,
                criterion=criterion.value if criterion is not None else "budget",
                lambda_=lam,
                sigma0=seg_sigma0,
                evals_at_restart=evals_at_restart,
            )
            records.append(rec)
            events.append(
                {
                    "event": "restart",
                    "run_id": run_id,
                    "restart_index": rec.index,
                    "evals_at_restart": evals_at_restart,
                    "mean": [float(v) for v in m],
                    "f_mean": f_m,
                    "criterion": rec.criterion,
                    "lambda": lam,
                    "sigma0": seg_sigma0,
                    "archive_size": archive_size,
                    "redundant_online": matched,
                    "evals": b,
                    "saturated_rejections": saturated,
                }
            )
        segment += 1

    trajectory = list(obj.trajectory)
    if trajectory and trajectory[-1][0] != obj.evals:
        trajectory.append((obj.evals, obj.best_f))
    ledger = RunLedger(
        records=records,
        B=obj.evals,
        x_star=problem.x_star,
        f_star=problem.f_star,
        best_x=obj.best_x,
        best_f=obj.best_f,
        trajectory=trajectory,
        events=events,
        unrecorded_evals=unrecorded,
        archive=archive,
    )
    return ledger


def run_restart_cmaes(
    problem: Problem,
    strategy: StrategyKind | str,
    budget: int,
    seed: int,
    *,
    sigma0: float = 2.0,
    run_id: str = "",
) -> RunLedger:
    """Plain restart CMA-ES (no tabu archive)."""
    return run_rr_cmaes(problem, strategy, None, budget, seed, sigma0=sigma0, run_id=run_id)
