"""Half-spaces of H^n, their invariant measure, and Monte Carlo integrals against it.

A closed geodesic half-space is parametrized by a signed foot distance ``t``
and a unit foot direction ``omega``: with the Minkowski normal
``v = (sinh t, cosh t * omega)`` it is ``S = {p : <p, v>_M >= 0}``.  The base
point o lies in ``S`` iff ``t >= 0``, and ``(t, omega)`` and ``(-t, -omega)``
are the two sides of the same hyperplane, at distance ``|t|`` from o.

The isometry-invariant measure on half-spaces is, in these coordinates,

    sigma = kappa_n * cosh(t)**(n-1) dt domega

with ``domega`` the surface measure on S^{n-1}.  ``kappa_n`` is fixed by the
cut normalization: the half-spaces containing o but not ``x`` have total
mass ``d(o, x) / 2``.  Consequently the half-spaces separating two points,
counted on both sides, have mass exactly their distance.

Integrals are estimated by drawing half-spaces whose boundary meets the
window ``B(o, R)`` (``|t| <= R``) with density proportional to ``sigma``, so
every draw carries the same weight ``Z_R / N``.  Any integrand used here
vanishes on half-spaces whose boundary misses the convex hull of the points
involved, so nothing is lost as long as the points sit inside the window.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import geometry
from .errors import DomainError, PreconditionError
from .rng import stream, thread_cap

__all__ = [
    "HalfSpace",
    "HalfSpaceBatch",
    "CroftonSampler",
    "SeparationEstimate",
    "contains",
    "separates",
    "kappa",
    "density",
    "sphere_volume",
    "cosh_power_integral",
    "sample",
    "window_radius",
    "cut_measure",
    "discrepancy_integral",
    "projection_gaps",
    "cw_projection_gap",
]

GRID_SIZE = 2048
BLOCK_SIZE = 1 << 16
WINDOW_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """Closed half-space ``{p : <p, (sinh t, cosh t * omega)>_M >= 0}``."""

    t: float
    omega: np.ndarray

    def __post_init__(self):
        w = np.array(self.omega, dtype=float).ravel()
        if abs(np.linalg.norm(w) - 1.0) > 1e-12:
            raise DomainError(f"half-space direction must be a unit vector, |omega| = {np.linalg.norm(w)!r}")
        w.setflags(write=False)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self) -> int:
        return self.omega.size

    @property
    def normal(self) -> np.ndarray:
        return np.concatenate([[math.sinh(self.t)], math.cosh(self.t) * self.omega])


def contains(S: HalfSpace, p: geometry.HyperboloidPoint) -> bool:
    if S.dim != p.dim:
        raise DomainError(f"dimension mismatch: half-space in H^{S.dim}, point in H^{p.dim}")
    return bool(geometry.minkowski(p.coords, S.normal) >= 0)


def separates(S: HalfSpace, x: geometry.HyperboloidPoint, y: geometry.HyperboloidPoint) -> bool:
    return contains(S, x) != contains(S, y)


def sphere_volume(k: int) -> float:
    """Surface measure of the unit sphere S^k in R^{k+1} (``S^0`` has 2 points)."""
    return 2.0 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def kappa(n: int) -> float:
    """Normalizing constant of sigma in H^n."""
    if n < 1:
        raise PreconditionError(f"dimension must be >= 1, got {n}")
    if n == 1:
        return 0.5
    return (n - 1) / (2.0 * sphere_volume(n - 2))


def density(t, n: int):
    """Density of sigma in ``t`` (per unit surface measure of ``omega``)."""
    return kappa(n) * np.cosh(t) ** (n - 1)


def cosh_power_integral(R: float, k: int) -> float:
    """``int_{-R}^{R} cosh(t)**k dt`` by the reduction formula."""
    if k == 0:
        return 2.0 * R
    if k == 1:
        return 2.0 * math.sinh(R)
    return 2.0 * math.sinh(R) * math.cosh(R) ** (k - 1) / k + (k - 1) / k * cosh_power_integral(R, k - 2)


@dataclass(frozen=True, eq=False)
class HalfSpaceBatch:
    t: np.ndarray
    omega: np.ndarray
    weight: float

    def __len__(self) -> int:
        return self.t.size

    def __iter__(self) -> Iterator[tuple[HalfSpace, float]]:
        for t, w in zip(self.t, self.omega):
            yield HalfSpace(t, w), self.weight

    def normals(self) -> np.ndarray:
        return np.concatenate([np.sinh(self.t)[:, None], np.cosh(self.t)[:, None] * self.omega], axis=1)

    def contains_many(self, X) -> np.ndarray:
        """Boolean ``(len(self), m)`` membership table for hyperboloid rows ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        V = self.normals()
        return (V[:, :1] * X[:, 0] - V[:, 1:] @ X[:, 1:].T) >= 0


@dataclass(frozen=True)
class SeparationEstimate:
    value: float
    std_error: float
    n_samples: int

    def to_json(self) -> dict:
        return {"estimate": self.value, "std_error": self.std_error, "n_samples": self.n_samples}


@dataclass(frozen=True)
class CroftonSampler:
    """Monte Carlo source of half-spaces meeting ``B(o, radius)``.

    Draws are split into fixed blocks of ``block_size``; block ``b`` uses the
    substream ``(seed, "crofton.halfspaces", b)``, so estimates depend only on
    ``(seed, n_samples, radius, dim)`` and not on the number of workers.
    """

    dim: int
    radius: float
    n_samples: int
    seed: int = 0
    block_size: int = BLOCK_SIZE
    grid_size: int = GRID_SIZE

    def __post_init__(self):
        if self.dim < 1:
            raise PreconditionError(f"dimension must be >= 1, got {self.dim}")
        if not self.radius > 0:
            raise PreconditionError(f"window radius must be positive, got {self.radius}")
        if self.n_samples < 2:
            raise PreconditionError("sample budget must be at least 2")

    @property
    def kappa(self) -> float:
        return kappa(self.dim)

    @property
    def total_mass(self) -> float:
        """``Z_R``: sigma-mass of all half-spaces with ``|t| <= R``."""
        return self.kappa * sphere_volume(self.dim - 1) * cosh_power_integral(self.radius, self.dim - 1)

    @cached_property
    def _grid(self) -> tuple[np.ndarray, np.ndarray]:
        t = np.linspace(-self.radius, self.radius, self.grid_size)
        cdf = cumulative_trapezoid(np.cosh(t) ** (self.dim - 1), t, initial=0.0)
        return t, cdf / cdf[-1]

    def draw(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
        t_grid, cdf = self._grid
        t = np.interp(rng.random(size), cdf, t_grid)
        omega = geometry.random_direction(self.dim, rng, size)
        return t, omega

    def blocks(self) -> list[tuple[int, int]]:
        out = []
        start = 0
        b = 0
        while start < self.n_samples:
            size = min(self.block_size, self.n_samples - start)
            out.append((b, size))
            start += size
            b += 1
        return out

    def block(self, b: int, size: int) -> HalfSpaceBatch:
        t, omega = self.draw(stream(self.seed, "crofton.halfspaces", b), size)
        return HalfSpaceBatch(t, omega, self.total_mass / self.n_samples)


def sample(sampler: CroftonSampler, rng: np.random.Generator, size: int | None = None) -> HalfSpaceBatch:
    """Draw ``size`` (default ``sampler.n_samples``) half-spaces with equal weights ``Z_R / size``."""
    size = sampler.n_samples if size is None else size
    t, omega = sampler.draw(rng, size)
    return HalfSpaceBatch(t, omega, sampler.total_mass / size)


def _estimate(sampler: CroftonSampler, integrand: Callable[[HalfSpaceBatch], np.ndarray], workers: int | None) -> SeparationEstimate:
    def run(block):
        f = np.asarray(integrand(sampler.block(*block)), dtype=float)
        return float(np.sum(f)), float(np.sum(f * f))

    blocks = sampler.blocks()
    workers = thread_cap() if workers is None else max(1, workers)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    s = s2 = 0.0
    for a, b in parts:  # fixed block order
        s += a
        s2 += b
    N = sampler.n_samples
    Z = sampler.total_mass
    mean = s / N
    var = max(s2 - N * mean * mean, 0.0) / (N - 1)
    return SeparationEstimate(Z * mean, Z * math.sqrt(var / N), N)


def _coords(points) -> np.ndarray:
    if isinstance(points, geometry.HyperboloidPoint):
        return points.coords[None, :]
    pts = getattr(points, "points", points)
    if isinstance(pts, (list, tuple)) and pts and isinstance(pts[0], geometry.HyperboloidPoint):
        return np.array([p.coords for p in pts])
    return np.atleast_2d(np.asarray(pts, dtype=float))


def window_radius(points, factor: float = 1.5, floor: float = 1e-3) -> float:
    """Default window: ``factor`` times the largest distance from o."""
    r = geometry.dist_from_origin(_coords(points))
    return factor * max(float(np.max(r)), floor)


def _check_window(X: np.ndarray, sampler: CroftonSampler) -> None:
    if X.shape[1] != sampler.dim + 1:
        raise DomainError(f"points of H^{X.shape[1] - 1} used with a sampler for H^{sampler.dim}")
    r = geometry.dist_from_origin(X)
    worst = float(np.max(r))
    if worst > sampler.radius * (1.0 + WINDOW_TOL):
        raise PreconditionError(
            f"point at distance {worst:.6g} from o lies outside the window of radius {sampler.radius:.6g}"
        )


def cut_measure(
    x: geometry.HyperboloidPoint,
    y: geometry.HyperboloidPoint,
    sampler: CroftonSampler,
    *,
    orientation: str = "both",
    recenter: bool = False,
    workers: int | None = None,
) -> SeparationEstimate:
    """Estimate the sigma-mass of half-spaces separating ``x`` and ``y``.

    ``orientation="both"`` counts every separating half-space (expected value
    ``d(x, y)``); ``"one"`` counts only those containing ``x`` but not ``y``
    (expected value ``d(x, y) / 2``).

    With ``recenter=True`` the pair is first translated so that its midpoint
    sits at o; sigma is isometry invariant, so the target is unchanged while
    the window only needs radius ``d(x, y) / 2``.
    """
    if orientation not in ("both", "one"):
        raise PreconditionError(f"orientation must be 'both' or 'one', got {orientation!r}")
    if recenter and x != y:
        g = geometry.translation_to_origin(geometry.geodesic_point(x, y, 0.5))
        x, y = geometry.apply(g, x), geometry.apply(g, y)
    X = np.stack([x.coords, y.coords])
    _check_window(X, sampler)

    def integrand(batch: HalfSpaceBatch) -> np.ndarray:
        inside = batch.contains_many(X)
        if orientation == "one":
            return inside[:, 0] & ~inside[:, 1]
        return inside[:, 0] != inside[:, 1]

    return _estimate(sampler, integrand, workers)


def discrepancy_integral(mu1, mu2, sampler: CroftonSampler, *, workers: int | None = None) -> SeparationEstimate:
    """Estimate ``int (mu1(S) - mu2(S))**2 dsigma(S)`` for two empirical measures.

    ``mu1`` and ``mu2`` are hyperbolic samples (or hyperboloid coordinate
    arrays); every support point must lie in the sampler's window.
    """
    X1 = _coords(mu1)
    X2 = _coords(mu2)
    if X1.shape[0] == 0 or X2.shape[0] == 0:
        raise PreconditionError("discrepancy_integral needs two nonempty samples")
    _check_window(np.vstack([X1, X2]), sampler)
    pooled = np.vstack([X1, X2])
    m1 = X1.shape[0]

    def integrand(batch: HalfSpaceBatch) -> np.ndarray:
        inside = batch.contains_many(pooled)
        diff = inside[:, :m1].mean(axis=1) - inside[:, m1:].mean(axis=1)
        return diff * diff

    return _estimate(sampler, integrand, workers)


def _klein(points) -> np.ndarray:
    if getattr(points, "metric", None) is not None:
        return geometry.from_hyperboloid_coords(points.points, "klein")
    X = np.atleast_2d(np.asarray(points, dtype=float))
    return X


def projection_gaps(mu1, mu2, directions, thresholds=None) -> np.ndarray:
    """Per-direction Kolmogorov-Smirnov distance between projected samples.

    Points are Klein coordinates (or hyperbolic samples, converted).  For a
    direction ``u`` the statistic is ``sup_a |F1(a) - F2(a)|`` with
    ``Fi(a) = mui({k : k . u <= a})``, i.e. the largest disagreement in mass of
    a Euclidean half-space with normal ``u``.  The supremum runs over all
    real ``a`` unless a threshold grid is given.
    """
    K1 = _klein(mu1)
    K2 = _klein(mu2)
    if K1.shape[0] == 0 or K2.shape[0] == 0:
        raise PreconditionError("projection gap needs two nonempty samples")
    for K in (K1, K2):
        if not np.all(np.linalg.norm(K, axis=1) < 1.0):
            raise DomainError("Klein points must lie strictly inside the unit ball")
    U = np.atleast_2d(np.asarray(directions, dtype=float))
    if U.shape[0] == 0:
        raise PreconditionError("at least one direction is required")
    if U.shape[1] != K1.shape[1] or K1.shape[1] != K2.shape[1]:
        raise DomainError("directions and points must share a dimension")
    gaps = np.empty(U.shape[0])
    for k, u in enumerate(U):
        a = np.sort(K1 @ u)
        b = np.sort(K2 @ u)
        grid = np.concatenate([a, b]) if thresholds is None else np.asarray(thresholds, dtype=float)
        F1 = np.searchsorted(a, grid, side="right") / a.size
        F2 = np.searchsorted(b, grid, side="right") / b.size
        gaps[k] = float(np.max(np.abs(F1 - F2))) if grid.size else 0.0
    return gaps


def cw_projection_gap(mu1, mu2, directions, thresholds=None) -> float:
    """Largest directional Kolmogorov-Smirnov gap over ``directions``."""
    return float(np.max(projection_gaps(mu1, mu2, directions, thresholds)))
