"""Hill-Valley same-basin test along the segment between two points."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, DimensionError

ONLINE_N_T = 10
OFFLINE_N_T = 10


@dataclass(frozen=True)
class HvConfig:
    n_t: int = ONLINE_N_T

    def __post_init__(self):
        if self.n_t < 1:
            raise ConfigError("number of interior test points must be >= 1", "n_t")


def hv_test(
    xi: np.ndarray,
    xj: np.ndarray,
    f: Callable[[np.ndarray], float],
    cfg: HvConfig = HvConfig(),
    fi: float | None = None,
    fj: float | None = None,
) -> tuple[int, int]:
    """Return ``(same_basin, evals_spent)``.

    ``fi`` and ``fj`` are the endpoint fitness values; when omitted they are
    computed with ``f`` but never counted in ``evals_spent``, which only covers
    interior points.  Interior points are visited from ``xi`` towards ``xj``
    and the test stops at the first hill.  A non-finite interior value counts
    as a hill; identical endpoints share a basin without any evaluation.
    """
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    if xi.shape != xj.shape:
        raise DimensionError(f"shape mismatch {xi.shape} vs {xj.shape}")
    if np.array_equal(xi, xj):
        return 1, 0
    fi = float(f(xi)) if fi is None else float(fi)
    fj = float(f(xj)) if fj is None else float(fj)
    level = max(fi, fj)
    n = cfg.n_t
    # canonical direction so that swapping the endpoints yields bit-identical points
    if tuple(xi) > tuple(xj):
        xi, xj = xj, xi
    for k in range(1, n + 1):
        x_test = xi + (k / (n + 1)) * (xj - xi)
        value = float(f(x_test))
        if not math.isfinite(value) or level <= value:
            return 0, k
    return 1, n
