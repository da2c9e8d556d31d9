"""Non-elitist (mu/mu_w, lambda)-CMA-ES run segment.

One :class:`CmaState` covers one restart segment: it is created by :func:`init`,
advanced by :func:`tell` and inspected by :func:`check_restart`.  Offspring
sampling lives in the runner (see :mod:`rrcma.repelling`) because the
repelling variant interleaves sampling with rejection tests.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EvaluationError
from .numerics import eigendecompose, sample_mvn, symmetrize

MAX_CONDITION = 1e14
TOL_FUN_HIST = 1e-12
TOL_X_FACTOR = 1e-12
EIGEN_FLOOR = 1e-30


class RestartCriterion(str, enum.Enum):
    # Declaration order is the order in which check_restart tests them.
    MAX_CONDITION = "MaxCondition"
    TOL_X = "TolX"
    TOL_FUN_HIST = "TolFunHist"
    EQUAL_FUN_VALUES = "EqualFunValues"
    STAGNATION = "Stagnation"
    NO_EFFECT_AXIS = "NoEffectAxis"
    NO_EFFECT_COORD = "NoEffectCoord"


def default_lambda(d: int) -> int:
    return 4 + int(math.floor(3 * math.log(d)))


@dataclass(frozen=True)
class CmaParams:
    d: int
    lambda_: int
    mu: int
    weights: np.ndarray
    mu_eff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_1: float
    c_mu: float
    chi_n: float

    @classmethod
    def default(cls, d: int, lambda_: int | None = None) -> "CmaParams":
        """Tutorial defaults; ``lambda_`` overrides the population size only."""
        if d < 1:
            raise ConfigError("dimension must be >= 1", "d")
        lam = default_lambda(d) if lambda_ is None else int(lambda_)
        if lam < 2:
            raise ConfigError("lambda must be >= 2", "lambda")
        mu = lam // 2
        w = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
        w = w / w.sum()
        mu_eff = 1.0 / float(np.sum(w**2))
        c_sigma = (mu_eff + 2) / (d + mu_eff + 5)
        d_sigma = 1 + 2 * max(0.0, math.sqrt((mu_eff - 1) / (d + 1)) - 1) + c_sigma
        c_c = (4 + mu_eff / d) / (d + 4 + 2 * mu_eff / d)
        c_1 = 2 / ((d + 1.3) ** 2 + mu_eff)
        c_mu = min(1 - c_1, 2 * (mu_eff - 2 + 1 / mu_eff) / ((d + 2) ** 2 + mu_eff))
        chi_n = math.sqrt(d) * (1 - 1 / (4 * d) + 1 / (21 * d**2))
        return cls(d, lam, mu, w, mu_eff, c_sigma, d_sigma, c_c, c_1, c_mu, chi_n)

    @property
    def tolfun_window(self) -> int:
        return 10 + int(math.ceil(30 * self.d / self.lambda_))


@dataclass
class CmaState:
    m: np.ndarray
    sigma: float
    C: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    B: np.ndarray
    D: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    sigma0: float
    generation: int = 0
    evals_used: int = 0
    best_x: np.ndarray | None = None
    best_f: float = math.inf
    # ring buffer of per-generation best fitness for TolFunHist
    history: deque = field(default_factory=deque)
    equal_flags: list = field(default_factory=list)
    gens_since_improvement: int = 0

    @property
    def C_inv(self) -> np.ndarray:
        return (self.B / self.D) @ self.B.T

    @property
    def d(self) -> int:
        return len(self.m)


def _check_bounds(lb, ub) -> tuple[np.ndarray, np.ndarray]:
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if lb.shape != ub.shape or lb.ndim != 1 or not np.all(lb < ub):
        raise ConfigError("bounds must satisfy lb < ub componentwise", "bounds")
    return lb, ub


def init(
    params: CmaParams,
    bounds: tuple,
    sigma0: float,
    rng: np.random.Generator,
) -> CmaState:
    """Fresh segment: identity covariance and a uniformly drawn mean."""
    lb, ub = _check_bounds(*bounds)
    if not sigma0 > 0:
        raise ConfigError("sigma0 must be positive", "sigma0")
    if len(lb) != params.d:
        raise ConfigError("bounds do not match the dimension", "bounds")
    d = params.d
    m = rng.uniform(lb, ub)
    return CmaState(
        m=m,
        sigma=float(sigma0),
        C=np.eye(d),
        p_sigma=np.zeros(d),
        p_c=np.zeros(d),
        B=np.eye(d),
        D=np.ones(d),
        lb=lb,
        ub=ub,
        sigma0=float(sigma0),
        history=deque(maxlen=params.tolfun_window),
    )


def saturate(x: np.ndarray, bounds: tuple) -> np.ndarray:
    lb, ub = bounds
    return np.minimum(np.maximum(x, lb), ub)


def ask(state: CmaState, params: CmaParams, rng: np.random.Generator) -> np.ndarray:
    """Sample ``lambda`` unclamped offspring, one row each."""
    return sample_mvn(state.m, state.sigma, state.B, state.D, rng, size=params.lambda_)


def tell(
    state: CmaState,
    params: CmaParams,
    X: np.ndarray,
    F: np.ndarray,
    X_eval: np.ndarray | None = None,
) -> CmaState:
    """Update the distribution in place from offspring ``X`` and fitness ``F``.

    ``X`` holds the unclamped samples used for the update; ``X_eval`` the
    (possibly repaired) points that were actually evaluated, used only to track
    the best solution.  Returns ``state`` for chaining.
    """
    X = np.asarray(X, dtype=float)
    F = np.asarray(F, dtype=float)
    if X.shape != (params.lambda_, params.d) or F.shape != (params.lambda_,):
        raise EvaluationError(
            f"expected {params.lambda_} offspring in dimension {params.d}, "
            f"got X{X.shape} and F{F.shape}"
        )
    if np.any(np.isnan(F)):
        raise EvaluationError("NaN fitness value")
    if X_eval is None:
        X_eval = X

    d, p = params.d, params
    order = np.argsort(F, kind="stable")
    f_best, f_worst = F[order[0]], F[order[-1]]
    f_median = F[order[len(F) // 2]]

    if f_best < state.best_f:
        state.best_f = float(f_best)
        state.best_x = np.array(X_eval[order[0]])
        state.gens_since_improvement = 0
    else:
        state.gens_since_improvement += 1
    state.history.append(float(f_best))
    state.equal_flags.append(bool(f_best == f_median == f_worst))

    y = (X[order[: p.mu]] - state.m) / state.sigma
    y_w = p.weights @ y
    state.m = state.m + state.sigma * y_w
    span = state.ub - state.lb
    state.m = np.clip(state.m, state.lb - 10 * span, state.ub + 10 * span)

    inv_sqrt = (state.B / np.sqrt(state.D)) @ state.B.T
    state.p_sigma = (1 - p.c_sigma) * state.p_sigma + math.sqrt(
        p.c_sigma * (2 - p.c_sigma) * p.mu_eff
    ) * (inv_sqrt @ y_w)
    ps_norm = math.sqrt(float(state.p_sigma @ state.p_sigma))
    g = state.generation + 1
    h_sigma = ps_norm / math.sqrt(1 - (1 - p.c_sigma) ** (2 * g)) < (
        1.4 + 2 / (d + 1)
    ) * p.chi_n
    state.p_c = (1 - p.c_c) * state.p_c + h_sigma * math.sqrt(
        p.c_c * (2 - p.c_c) * p.mu_eff
    ) * y_w

    rank_one = np.outer(state.p_c, state.p_c)
    if not h_sigma:
        rank_one = rank_one + p.c_c * (2 - p.c_c) * state.C
    rank_mu = (y.T * p.weights) @ y
    state.C = (1 - p.c_1 - p.c_mu) * state.C + p.c_1 * rank_one + p.c_mu * rank_mu
    state.sigma *= math.exp((p.c_sigma / p.d_sigma) * (ps_norm / p.chi_n - 1))

    state.C = symmetrize(state.C)
    if not np.isfinite(state.sigma):
        raise EvaluationError("step size diverged")
    B, D = eigendecompose(state.C, check=False)
    floor = EIGEN_FLOOR * max(float(D[-1]), EIGEN_FLOOR)
    if D[0] < floor:
        D = np.maximum(D, floor)
        state.C = symmetrize((B * D) @ B.T)
    state.B, state.D = B, D
    state.generation = g
    state.evals_used += len(F)
    return state


def check_restart(
    state: CmaState,
    params: CmaParams,
    history=None,
) -> RestartCriterion | None:
    """First local restart criterion met, or ``None``.

    ``history`` defaults to the state's own ring buffer of generation-best
    fitness values.
    """
    history = state.history if history is None else history
    d = params.d
    D = state.D
    if D[-1] > MAX_CONDITION * D[0]:
        return RestartCriterion.MAX_CONDITION

    tol_x = TOL_X_FACTOR * state.sigma0
    if (
        state.sigma * math.sqrt(float(np.max(np.diag(state.C)))) < tol_x
        and state.sigma * float(np.max(np.abs(state.p_c))) < tol_x
    ):
        return RestartCriterion.TOL_X

    window = params.tolfun_window
    if len(history) >= window:
        recent = list(history)[-window:]
        if max(recent) - min(recent) < TOL_FUN_HIST:
            return RestartCriterion.TOL_FUN_HIST

    g = state.generation
    eq_window = int(math.ceil(0.1 * g)) + 10
    if g >= eq_window and all(state.equal_flags[-eq_window:]):
        return RestartCriterion.EQUAL_FUN_VALUES

    if state.gens_since_improvement > 20 * d:
        return RestartCriterion.STAGNATION

    if g > 0:
        i = g % d
        shift = 0.1 * state.sigma * math.sqrt(D[i]) * state.B[:, i]
        if np.all(state.m + shift == state.m):
            return RestartCriterion.NO_EFFECT_AXIS
        coord = 0.2 * state.sigma * np.sqrt(np.diag(state.C))
        if np.any(state.m + coord == state.m):
            return RestartCriterion.NO_EFFECT_COORD
    return None
