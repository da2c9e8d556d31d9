"""Symmetric eigendecomposition, Gaussian sampling, distances and seeded streams."""
from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError, DomainError, NumericalError

SYMMETRY_TOL = 1e-12


def make_rng(base_seed: int, *keys: int) -> np.random.Generator:
    """Independent PCG64 stream for ``(base_seed, *keys)``.

    Streams are derived through ``SeedSequence`` hashing, so e.g.
    ``make_rng(seed, run, restart)`` never overlaps with a sibling stream.
    """
    entropy = [int(base_seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in keys]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def symmetrize(C: np.ndarray) -> np.ndarray:
    return 0.5 * (C + C.T)


def eigendecompose(C: np.ndarray, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(B, D)`` with ``C = B @ diag(D) @ B.T`` and ``D`` ascending.

    ``check=False`` skips the shape and symmetry validation for callers that
    symmetrize themselves; non-finite entries are always rejected.
    """
    C = np.asarray(C, dtype=float)
    if not check:
        if not np.isfinite(C).all():
            raise NumericalError("matrix has non-finite entries")
        D, B = np.linalg.eigh(C)
        return B, D
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise NumericalError("matrix has non-finite entries")
    scale = max(np.max(np.abs(C)), 1.0)
    if np.max(np.abs(C - C.T)) > 1e-8 * scale:
        raise NumericalError("matrix is not symmetric")
    D, B = np.linalg.eigh(symmetrize(C))
    return B, D


def sample_mvn(
    m: np.ndarray,
    sigma: float,
    B: np.ndarray,
    D: np.ndarray,
    rng: np.random.Generator,
    size: int | None = None,
) -> np.ndarray:
    """Draw ``m + sigma * B diag(sqrt(D)) z`` with ``z ~ N(0, I)``.

    With ``size`` given, returns a ``(size, d)`` array of independent draws.
    """
    if np.any(D <= 0):
        raise DomainError("eigenvalues must be positive")
    d = len(m)
    z = rng.standard_normal(d if size is None else (size, d))
    y = (z * np.sqrt(D)) @ B.T
    return m + sigma * y


def inverse_from_eigen(B: np.ndarray, D: np.ndarray) -> np.ndarray:
    return (B / D) @ B.T


def mahalanobis(x: np.ndarray, y: np.ndarray, C_inv: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    C_inv = np.asarray(C_inv, dtype=float)
    if x.shape != y.shape or C_inv.shape != (x.size, x.size):
        raise DimensionError(
            f"incompatible shapes x{x.shape}, y{y.shape}, C_inv{C_inv.shape}"
        )
    delta = x - y
    return math.sqrt(max(float(delta @ C_inv @ delta), 0.0))


def gamma_function(z: float) -> float:
    if not z > 0:
        raise DomainError(f"gamma_function requires z > 0, got {z}")
    return math.gamma(z)
