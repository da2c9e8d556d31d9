"""Population size and initial step size for consecutive restarts."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError


class StrategyKind(str, enum.Enum):
    NAIVE = "restart"
    IPOP = "ipop"
    BIPOP = "bipop"

    @classmethod
    def parse(cls, name: str) -> "StrategyKind":
        try:
            return cls(str(name).lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ConfigError(f"unknown strategy {name!r} (choose from {choices})", "strategy") from None


class Regime(str, enum.Enum):
    DEFAULT = "default"
    LARGE = "large"
    SMALL = "small"


@dataclass(frozen=True)
class StrategyState:
    lambda_default: int
    restarts_done: int = 0
    large_regime_count: int = 0
    small_regime_count: int = 0
    evals_large: int = 0
    evals_small: int = 0
    # regime of the segment most recently handed out
    last_regime: Regime = Regime.DEFAULT


def next_restart_params(
    kind: StrategyKind,
    st: StrategyState,
    sigma0_base: float,
    rng: np.random.Generator | None = None,
) -> tuple[int, float, StrategyState]:
    """``(lambda, sigma0, new_state)`` for segment number ``st.restarts_done``.

    Segment 0 is the initial run and always uses the defaults.  Under BIPOP the
    first actual restart is a large-regime one; afterwards the regime with the
    smaller evaluation count goes next (ties favour the large regime).  ``rng``
    is only consumed by the small BIPOP regime.
    """
    lam0 = st.lambda_default
    n = st.restarts_done
    if kind is StrategyKind.NAIVE or n == 0:
        return lam0, sigma0_base, replace(st, restarts_done=n + 1, last_regime=Regime.DEFAULT)

    if kind is StrategyKind.IPOP:
        return lam0 * 2**n, sigma0_base, replace(st, restarts_done=n + 1, last_regime=Regime.LARGE)

    if kind is not StrategyKind.BIPOP:
        raise ConfigError(f"unsupported strategy {kind!r}", "strategy")
    if st.large_regime_count == 0 or st.evals_large <= st.evals_small:
        count = st.large_regime_count + 1
        st = replace(
            st, restarts_done=n + 1, large_regime_count=count, last_regime=Regime.LARGE
        )
        return lam0 * 2**count, sigma0_base, st

    if rng is None:
        raise ConfigError("BIPOP small regime needs a random stream", "rng")
    u, v = rng.uniform(size=2)
    lam, sigma0 = bipop_small_params(
        lam0, lam0 * 2**st.large_regime_count, sigma0_base, u, v
    )
    st = replace(
        st,
        restarts_done=n + 1,
        small_regime_count=st.small_regime_count + 1,
        last_regime=Regime.SMALL,
    )
    return lam, sigma0, st


def bipop_small_params(
    lambda_default: int, lambda_large: int, sigma0_base: float, u: float, v: float
) -> tuple[int, float]:
    """Small-regime draw for uniform variates ``u`` and ``v``."""
    lam = int(math.floor(lambda_default * (lambda_large / lambda_default) ** (u**2 / 2)))
    lam = min(max(lam, lambda_default), lambda_large)
    return lam, sigma0_base * 10 ** (-2 * v)


def record_segment(st: StrategyState, evals: int) -> StrategyState:
    """Charge ``evals`` to the regime of the segment that just finished."""
    if st.last_regime is Regime.LARGE:
        return replace(st, evals_large=st.evals_large + evals)
    if st.last_regime is Regime.SMALL:
        return replace(st, evals_small=st.evals_small + evals)
    return st
