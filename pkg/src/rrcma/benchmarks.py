"""Multimodal benchmark problems with optima metadata.

All objective callables are vectorised over the leading axis: an ``(n, d)``
array maps to ``n`` values.  :class:`Problem` additionally accepts single
points and returns a float for them.

Catalog
-------
sphere, rastrigin, gallagher21, gallagher101
    Rotated and translated instances; ``x_star`` lies in the central 80% of
    ``[-5, 5]^d``.
himmelblau
    Himmelblau with a capped Euclidean distance penalty that singles out one
    of its four zeros (chosen by the instance seed).
uneven_trap, equal_maxima, six_hump_camel, shubert, vincent
    Niching maximisation problems turned into minimisation with a unique
    global optimum via :func:`globalize`; the instance seed chooses which of
    the equal maxima survives.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import ConfigError, DimensionError
from .numerics import make_rng

DEFAULT_BOUND = 5.0
PENALTY_CAP = 0.01

# seed namespace for instance generation, kept apart from run seeds
_INSTANCE_STREAM = 0x1E57A9CE


@dataclass(frozen=True, eq=False)
class InstanceTransform:
    """Maps base coordinates ``z`` to search coordinates ``x = t + R.T z``."""

    rotation: np.ndarray
    translation: np.ndarray

    @classmethod
    def identity(cls, d: int) -> "InstanceTransform":
        return cls(np.eye(d), np.zeros(d))

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.translation + np.asarray(z) @ self.rotation

    def inverse(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x) - self.translation) @ self.rotation.T


@dataclass(frozen=True, eq=False)
class Problem:
    name: str
    d: int
    lb: np.ndarray
    ub: np.ndarray
    func: Callable[[np.ndarray], np.ndarray]
    x_star: np.ndarray
    f_star: float
    local_optima: tuple = ()
    instance_seed: int = 0
    transform: InstanceTransform | None = None
    base: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise DimensionError(f"{self.name} expects dimension {self.d}, got {x.shape}")
        if x.ndim == 1:
            return float(self.func(x[None, :])[0])
        return np.asarray(self.func(x), dtype=float)

    __call__ = evaluate

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lb, self.ub

    @property
    def volume(self) -> float:
        return float(np.prod(self.ub - self.lb))


def _box(d: int, low: float = -DEFAULT_BOUND, high: float = DEFAULT_BOUND):
    return np.full(d, float(low)), np.full(d, float(high))


def _as_2d(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[None, :] if x.ndim == 1 else x


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def make_transform(d: int, lb, ub, rng: np.random.Generator) -> InstanceTransform:
    span = ub - lb
    t = rng.uniform(lb + 0.1 * span, ub - 0.1 * span)
    return InstanceTransform(random_rotation(d, rng), t)


# ---------------------------------------------------------------------------
# unimodal control and Rastrigin


def sphere_base(z: np.ndarray) -> np.ndarray:
    z = _as_2d(z)
    return np.sum(z * z, axis=1)


def rastrigin_base(z: np.ndarray) -> np.ndarray:
    z = _as_2d(z)
    return 10.0 * z.shape[1] + np.sum(z * z - 10.0 * np.cos(2 * np.pi * z), axis=1)


@lru_cache(maxsize=None)
def _rastrigin_1d_minimum(k: int) -> float:
    """Local minimiser of ``z**2 - 10 cos(2 pi z)`` next to the integer ``k``."""
    if k == 0:
        return 0.0
    grad = lambda z: 2 * z + 20 * np.pi * np.sin(2 * np.pi * z)
    return float(optimize.brentq(grad, k - 0.45, k + 0.45, xtol=1e-15))


def rastrigin_lattice(d: int, kmax: int = 4) -> list[np.ndarray]:
    """Base-space local minimisers with integer labels in ``[-kmax, kmax]^d``."""
    roots = [_rastrigin_1d_minimum(k) for k in range(-kmax, kmax + 1)]
    return [np.array(p) for p in itertools.product(roots, repeat=d)]


def _transformed(base, transform: InstanceTransform):
    def func(x):
        return base(transform.inverse(_as_2d(x)))

    return func


def _make_sphere(d, seed):
    lb, ub = _box(d)
    rng = make_rng(_INSTANCE_STREAM, 1, d, seed)
    tr = make_transform(d, lb, ub, rng)
    return Problem("sphere", d, lb, ub, _transformed(sphere_base, tr), tr.translation.copy(),
                   0.0, (), seed, tr, sphere_base)


def _make_rastrigin(d, seed):
    lb, ub = _box(d)
    rng = make_rng(_INSTANCE_STREAM, 2, d, seed)
    tr = make_transform(d, lb, ub, rng)
    func = _transformed(rastrigin_base, tr)
    catalog = ()
    if d <= 3:
        found = []
        for z in rastrigin_lattice(d):
            if not np.any(z):
                continue
            x = tr(z)
            if np.all(x >= lb) and np.all(x <= ub):
                found.append((x, float(rastrigin_base(z)[0])))
        catalog = tuple(found)
    return Problem("rastrigin", d, lb, ub, func, tr.translation.copy(), 0.0, catalog, seed, tr,
                   rastrigin_base)


# ---------------------------------------------------------------------------
# Gallagher-style random Gaussian peaks


class GallagherPeaks:
    """Random peaks landscape ``(10 - max_i w_i exp(-q_i(z) / 2d))**2``.

    Peak 0 has height 10 and sits at the base-space origin; the remaining
    heights ``1.1 + 8 (i - 1) / (k - 2)`` are distinct and below 10, so the
    global optimum is unique with value 0.  Each peak has an axis-parallel
    (in base space) ill-conditioned quadratic form ``q_i``.
    """

    def __init__(self, n_peaks: int, d: int, centers: np.ndarray, rng: np.random.Generator):
        k = n_peaks
        self.d = d
        self.heights = np.concatenate(
            [[10.0], 1.1 + 8.0 * np.arange(k - 1) / (k - 2)]
        )
        top_alpha = 1000.0**2 if k <= 21 else 1000.0
        alphas = np.concatenate(
            [[top_alpha], rng.permutation(1000.0 ** (2 * np.arange(k - 1) / (k - 2)))]
        )
        expo = 0.5 * np.arange(d) / (d - 1) if d > 1 else np.array([0.5])
        scales = np.empty((k, d))
        for i, a in enumerate(alphas):
            scales[i] = rng.permutation(a**expo) / a**0.25
        self.scales = scales
        self.centers = np.asarray(centers, dtype=float)

    def peak_values(self, z: np.ndarray) -> np.ndarray:
        z = _as_2d(z)
        diff = z[:, None, :] - self.centers[None, :, :]
        q = np.sum(diff * diff * self.scales[None], axis=2)
        return self.heights[None, :] * np.exp(-q / (2 * self.d))

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return (10.0 - np.max(self.peak_values(z), axis=1)) ** 2


def _make_gallagher(n_peaks):
    def build(d, seed):
        lb, ub = _box(d)
        rng = make_rng(_INSTANCE_STREAM, 3, n_peaks, d, seed)
        tr = make_transform(d, lb, ub, rng)
        others = rng.uniform(lb + 0.01 * (ub - lb), ub - 0.01 * (ub - lb), size=(n_peaks - 1, d))
        centers = np.vstack([np.zeros(d), tr.inverse(others)])
        base = GallagherPeaks(n_peaks, d, centers, rng)
        func = _transformed(base, tr)
        catalog = []
        values = base.peak_values(centers)
        for i in range(1, n_peaks):
            own = values[i, i]
            rivals = np.delete(values[i], i)
            x = tr(centers[i])
            if own > rivals.max() and np.all(x >= lb) and np.all(x <= ub):
                catalog.append((x, float((10.0 - own) ** 2)))
        return Problem(f"gallagher{n_peaks}", d, lb, ub, func, tr.translation.copy(), 0.0,
                       tuple(catalog), seed, tr, base)

    return build


# ---------------------------------------------------------------------------
# modified Himmelblau


def _himmelblau_zeros() -> np.ndarray:
    starts = [(3.0, 2.0), (-2.8, 3.1), (-3.8, -3.3), (3.6, -1.8)]
    system = lambda x: [x[0] ** 2 + x[1] - 11, x[0] + x[1] ** 2 - 7]
    return np.array([optimize.fsolve(system, s, xtol=1e-13) for s in starts])


HIMMELBLAU_MINIMA = _himmelblau_zeros()
HIMMELBLAU_MINIMA[0] = (3.0, 2.0)


def modified_himmelblau(x: np.ndarray, x_star: np.ndarray, literal: bool = False) -> np.ndarray:
    """Himmelblau plus ``min(0.01, ||x - x_star||_2)``.

    ``literal=True`` leaves the first polynomial term unsquared.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = _as_2d(x)
    a = x[:, 0] ** 2 + x[:, 1] - 11
    b = (x[:, 0] + x[:, 1] ** 2 - 7) ** 2
    pen = np.minimum(PENALTY_CAP, np.linalg.norm(x - np.asarray(x_star), axis=1))
    out = (a if literal else a * a) + b + pen
    return float(out[0]) if single else out


def _make_himmelblau(d, seed, literal=False):
    if d != 2:
        raise ConfigError("himmelblau is two-dimensional", "dim")
    lb, ub = _box(2)
    idx = int(make_rng(_INSTANCE_STREAM, 4, seed).integers(4))
    x_star = HIMMELBLAU_MINIMA[idx].copy()
    func = lambda x: modified_himmelblau(_as_2d(x), x_star, literal)
    others = tuple(
        (m.copy(), float(func(m)[0])) for i, m in enumerate(HIMMELBLAU_MINIMA) if i != idx
    )
    return Problem("himmelblau", 2, lb, ub, func, x_star, float(func(x_star)[0]), others, seed,
                   InstanceTransform.identity(2))


# ---------------------------------------------------------------------------
# niching maximisation problems and globalisation


def globalize(
    f: Callable[[np.ndarray], np.ndarray],
    x_star: np.ndarray,
    lb: np.ndarray | None = None,
    ub: np.ndarray | None = None,
    name: str = "globalized",
    other_optima=(),
    instance_seed: int = 0,
) -> Problem:
    """Minimisation problem ``-f(x) + min(0.01, ||x - x_star||^2)``.

    ``f`` is to be maximised and ``x_star`` is one of its global maximisers;
    ``other_optima`` are further maximisers of ``f`` to carry into the local
    optima catalog.
    """
    x_star = np.asarray(x_star, dtype=float)
    d = x_star.size
    lb = np.full(d, -np.inf) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(d, np.inf) if ub is None else np.asarray(ub, dtype=float)

    def func(x):
        x = _as_2d(x)
        sq = np.sum((x - x_star) ** 2, axis=1)
        return -np.asarray(f(x), dtype=float) + np.minimum(PENALTY_CAP, sq)

    catalog = tuple((np.asarray(o, dtype=float), float(func(o)[0])) for o in other_optima)
    return Problem(name, d, lb, ub, func, x_star, float(func(x_star)[0]), catalog,
                   instance_seed, InstanceTransform.identity(d))


def uneven_trap(x: np.ndarray) -> np.ndarray:
    """Five-uneven-peak trap on ``[0, 30]``; maxima 200 at both ends."""
    x = _as_2d(x)[:, 0]
    conds = [x < 2.5, x < 5, x < 7.5, x < 12.5, x < 17.5, x < 22.5, x < 27.5]
    vals = [80 * (2.5 - x), 64 * (x - 2.5), 64 * (7.5 - x), 28 * (x - 7.5),
            28 * (17.5 - x), 32 * (x - 17.5), 32 * (27.5 - x)]
    return np.select(conds, vals, default=80 * (x - 27.5))


def equal_maxima(x: np.ndarray) -> np.ndarray:
    x = _as_2d(x)[:, 0]
    return np.sin(5 * np.pi * x) ** 6


def six_hump_camel(x: np.ndarray) -> np.ndarray:
    x = _as_2d(x)
    a, b = x[:, 0], x[:, 1]
    return -4 * ((4 - 2.1 * a**2 + a**4 / 3) * a**2 + a * b + (4 * b**2 - 4) * b**2)


def _shubert_1d(x: np.ndarray) -> np.ndarray:
    j = np.arange(1, 6)
    return np.sum(j * np.cos((j + 1) * x[..., None] + j), axis=-1)


def shubert(x: np.ndarray) -> np.ndarray:
    x = _as_2d(x)
    return -np.prod(_shubert_1d(x), axis=1)


def vincent(x: np.ndarray) -> np.ndarray:
    x = _as_2d(x)
    return np.mean(np.sin(10 * np.log(x)), axis=1)


def _refine_max(f, x0, lb, ub) -> np.ndarray:
    res = optimize.minimize(lambda x: -float(f(x)[0]), x0, method="L-BFGS-B",
                            bounds=list(zip(lb, ub)), options={"ftol": 1e-15, "gtol": 1e-12})
    return res.x


@lru_cache(maxsize=None)
def _camel_maxima() -> tuple[tuple, tuple]:
    lb, ub = np.array([-1.9, -1.1]), np.array([1.9, 1.1])
    starts = [(0.0898, -0.7126), (-0.0898, 0.7126), (-1.7036, 0.7961), (1.7036, -0.7961),
              (1.6071, 0.5687), (-1.6071, -0.5687)]
    pts = [_refine_max(six_hump_camel, np.array(s), lb, ub) for s in starts]
    return tuple(map(tuple, pts[:2])), tuple(map(tuple, pts[2:]))


@lru_cache(maxsize=None)
def _shubert_maxima() -> tuple:
    grid = np.linspace(-10, 10, 20001)
    g = _shubert_1d(grid)
    interior = np.arange(1, len(grid) - 1)
    peaks = interior[(g[interior] > g[interior - 1]) & (g[interior] >= g[interior + 1])]
    troughs = interior[(g[interior] < g[interior - 1]) & (g[interior] <= g[interior + 1])]

    def polish(idx, sign):
        out = []
        for i in idx:
            res = optimize.minimize_scalar(lambda t: sign * _shubert_1d(np.array(t)),
                                           bracket=(grid[i - 1], grid[i], grid[i + 1]),
                                           tol=1e-14)
            out.append((float(res.x), float(_shubert_1d(np.array(res.x)))))
        return out

    hi = polish(peaks, -1.0)
    lo = polish(troughs, 1.0)
    g_max = max(v for _, v in hi)
    g_min = min(v for _, v in lo)
    tops = [p for p, v in hi if v > g_max - 1e-8]
    bottoms = [p for p, v in lo if v < g_min + 1e-8]
    pts = [(a, b) for a in tops for b in bottoms] + [(b, a) for a in tops for b in bottoms]
    return tuple(sorted(pts))


def vincent_maxima(d: int) -> list[np.ndarray]:
    ks = [k for k in range(-5, 6) if 0.25 <= math.exp((math.pi / 2 + 2 * math.pi * k) / 10) <= 10]
    coords = [math.exp((math.pi / 2 + 2 * math.pi * k) / 10) for k in ks]
    return [np.array(p) for p in itertools.product(coords, repeat=d)]


def _make_niching(name, d, seed):
    pick = make_rng(_INSTANCE_STREAM, 5, d, seed)
    if name == "uneven_trap":
        if d != 1:
            raise ConfigError("uneven_trap is one-dimensional", "dim")
        lb, ub, f = np.array([0.0]), np.array([30.0]), uneven_trap
        maxima = [np.array([0.0]), np.array([30.0])]
        extra = [np.array([5.0]), np.array([12.5]), np.array([22.5])]
    elif name == "equal_maxima":
        if d != 1:
            raise ConfigError("equal_maxima is one-dimensional", "dim")
        lb, ub, f = np.array([0.0]), np.array([1.0]), equal_maxima
        maxima = [np.array([0.1 + 0.2 * i]) for i in range(5)]
        extra = []
    elif name == "six_hump_camel":
        if d != 2:
            raise ConfigError("six_hump_camel is two-dimensional", "dim")
        lb, ub, f = np.array([-1.9, -1.1]), np.array([1.9, 1.1]), six_hump_camel
        tops, rest = _camel_maxima()
        maxima = [np.array(p) for p in tops]
        extra = [np.array(p) for p in rest]
    elif name == "shubert":
        if d != 2:
            raise ConfigError("shubert is two-dimensional", "dim")
        lb, ub, f = _box(2, -10, 10) + (shubert,)
        maxima = [np.array(p) for p in _shubert_maxima()]
        extra = []
    elif name == "vincent":
        if not 1 <= d <= 3:
            raise ConfigError("vincent supports dimensions 1 to 3", "dim")
        lb, ub, f = np.full(d, 0.25), np.full(d, 10.0), vincent
        maxima = vincent_maxima(d)
        extra = []
    else:  # pragma: no cover - guarded by make_problem
        raise ConfigError(f"unknown problem {name!r}", "problem")
    idx = int(pick.integers(len(maxima)))
    others = [m for i, m in enumerate(maxima) if i != idx] + extra
    return globalize(f, maxima[idx], lb, ub, name, others, seed)


# ---------------------------------------------------------------------------


PROBLEMS = {
    "sphere": ("unimodal control", _make_sphere),
    "rastrigin": ("separable multimodal, strong global structure", _make_rastrigin),
    "gallagher21": ("21 random Gaussian peaks, weak global structure", _make_gallagher(21)),
    "gallagher101": ("101 random Gaussian peaks, weak global structure", _make_gallagher(101)),
    "himmelblau": ("modified Himmelblau, four basins (d=2)", _make_himmelblau),
    "uneven_trap": ("globalized five-uneven-peak trap (d=1)", None),
    "equal_maxima": ("globalized equal maxima (d=1)", None),
    "six_hump_camel": ("globalized six-hump camel back (d=2)", None),
    "shubert": ("globalized Shubert (d=2)", None),
    "vincent": ("globalized Vincent (d<=3)", None),
}

FIXED_DIMENSION = {"himmelblau": 2, "uneven_trap": 1, "equal_maxima": 1,
                   "six_hump_camel": 2, "shubert": 2}


def make_problem(name: str, d: int, instance_seed: int = 0, **options) -> Problem:
    """Build instance ``instance_seed`` of catalog problem ``name``.

    ``options`` are problem specific; ``himmelblau`` accepts ``literal``.
    """
    if name not in PROBLEMS:
        raise ConfigError(f"unknown problem {name!r}", "problem")
    d = int(d)
    if d < 1:
        raise ConfigError("dimension must be >= 1", "dim")
    builder = PROBLEMS[name][1]
    if builder is None:
        return _make_niching(name, d, instance_seed)
    return builder(d, instance_seed, **options)


def is_local_minimum(problem: Problem, x: np.ndarray, step: float = 1e-4) -> bool:
    """Coordinate perturbation check, restricted to the feasible box."""
    fx = problem(x)
    for i in range(problem.d):
        for s in (-step, step):
            y = np.array(x, dtype=float)
            y[i] = min(max(y[i] + s, problem.lb[i]), problem.ub[i])
            if y[i] != x[i] and problem(y) < fx:
                return False
    return True
