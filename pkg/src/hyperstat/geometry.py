"""Real hyperbolic space H^n in the hyperboloid, Klein and Poincaré models.

The hyperboloid model is canonical: a point is ``x = (x0, x1, ..., xn)`` with
Minkowski norm ``x0**2 - x1**2 - ... - xn**2 = 1`` and ``x0 >= 1``.  The Klein
and Poincaré balls are views used for input, output and for the half-space
picture (in the Klein ball geodesics are straight chords).

Single points are wrapped in small validated dataclasses.  Functions whose
name ends in ``_many`` or that start with ``pairwise`` work on raw
``(m, n+1)`` coordinate arrays and skip per-point validation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import expm

from .errors import DegenerateInputError, DomainError, PreconditionError

__all__ = [
    "HyperboloidPoint",
    "KleinPoint",
    "PoincarePoint",
    "Isometry",
    "MODELS",
    "minkowski",
    "origin",
    "dist",
    "dist_klein",
    "dist_poincare",
    "dist_from_origin",
    "pairwise_dist",
    "convert",
    "to_hyperboloid_coords",
    "from_hyperboloid_coords",
    "geodesic_point",
    "random_direction",
    "random_point_ball",
    "random_points_ball",
    "identity",
    "boost",
    "rotation",
    "random_rotation",
    "random_isometry",
    "random_small_isometry",
    "translation_to_origin",
    "apply",
    "apply_many",
]

MODELS = ("hyperboloid", "klein", "poincare")

MAX_DIM = 16
NORM_TOL = 1e-12
DIST_DOMAIN_TOL = 1e-9
ISOMETRY_TOL = 1e-10

# below this value of <a,b>_M - 1 the Gram entry is recomputed from differences
_NEAR_GAP = 1e-4


def _as_vector(coords, name: str) -> np.ndarray:
    arr = np.array(coords, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"{name}: coordinates must be a nonempty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: non-finite coordinate in {arr!r}")
    arr.setflags(write=False)
    return arr


def _check_dim(n: int) -> None:
    if not 1 <= n <= MAX_DIM:
        raise DomainError(f"dimension {n} outside supported range 1..{MAX_DIM}")


def minkowski(a, b) -> np.ndarray | float:
    """Minkowski form ``a0*b0 - <a_sp, b_sp>`` along the last axis."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def _norm_defect(x: np.ndarray) -> float:
    scale = x[0] * x[0] + float(np.dot(x[1:], x[1:]))
    return abs(float(minkowski(x, x)) - 1.0) / max(1.0, scale)


@dataclass(frozen=True, eq=False)
class HyperboloidPoint:
    """Point on the upper sheet of the unit hyperboloid in R^{n+1}."""

    coords: np.ndarray

    def __post_init__(self):
        x = _as_vector(self.coords, "hyperboloid point")
        if x.size < 2:
            raise DomainError("hyperboloid point needs at least 2 coordinates")
        _check_dim(x.size - 1)
        if x[0] < 1.0 - NORM_TOL or _norm_defect(x) > NORM_TOL:
            raise DomainError(
                f"not on the upper hyperboloid sheet: <x,x>_M = {float(minkowski(x, x))!r}, x0 = {x[0]!r}"
            )
        object.__setattr__(self, "coords", x)

    @property
    def dim(self) -> int:
        return self.coords.size - 1

    def __eq__(self, other):
        if not isinstance(other, HyperboloidPoint):
            return NotImplemented
        return np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"HyperboloidPoint({self.coords.tolist()!r})"


class _BallPoint:
    coords: np.ndarray
    _label = "ball point"

    def __post_init__(self):
        x = _as_vector(self.coords, self._label)
        _check_dim(x.size)
        if not np.linalg.norm(x) < 1.0:
            raise DomainError(f"{self._label} has norm {np.linalg.norm(x)!r} >= 1")
        object.__setattr__(self, "coords", x)

    @property
    def dim(self) -> int:
        return self.coords.size

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash((type(self).__name__, self.coords.tobytes()))

    def __repr__(self):
        return f"{type(self).__name__}({self.coords.tolist()!r})"


@dataclass(frozen=True, eq=False, repr=False)
class KleinPoint(_BallPoint):
    """Point of the Klein (projective) unit ball."""

    coords: np.ndarray
    _label = "Klein point"


@dataclass(frozen=True, eq=False, repr=False)
class PoincarePoint(_BallPoint):
    """Point of the Poincaré (conformal) unit ball."""

    coords: np.ndarray
    _label = "Poincaré point"


AnyPoint = Union[HyperboloidPoint, KleinPoint, PoincarePoint]


def origin(n: int) -> HyperboloidPoint:
    """The base point o = (1, 0, ..., 0) of H^n."""
    x = np.zeros(n + 1)
    x[0] = 1.0
    return HyperboloidPoint(x)


def _arccosh1p(u):
    # arccosh(1 + u) without cancellation near u = 0
    return np.log1p(u + np.sqrt(u * (u + 2.0)))


def _gap(a: np.ndarray, b: np.ndarray) -> float:
    """``<a,b>_M - 1`` from coordinate differences (exact zero for a == b)."""
    diff = a - b
    return 0.5 * (float(np.dot(diff[1:], diff[1:])) - diff[0] * diff[0])


def dist(a: HyperboloidPoint, b: HyperboloidPoint) -> float:
    """Hyperbolic distance ``arccosh(<a,b>_M)``."""
    if a.dim != b.dim:
        raise DomainError(f"dimension mismatch: H^{a.dim} vs H^{b.dim}")
    u = _gap(a.coords, b.coords)
    if u < -DIST_DOMAIN_TOL:
        raise DomainError(f"<a,b>_M = {1 + u!r} < 1; points are not on the same sheet")
    return float(_arccosh1p(max(u, 0.0)))


def dist_from_origin(x) -> np.ndarray | float:
    """Distance from o for hyperboloid coordinates (single or stacked)."""
    x = np.asarray(x, dtype=float)
    r = np.arcsinh(np.linalg.norm(x[..., 1:], axis=-1))
    return float(r) if r.ndim == 0 else r


def _wedge_sq(u: np.ndarray, w: np.ndarray) -> float:
    # |u ^ w|^2 = sum_{i<j} (u_i w_j - u_j w_i)^2
    m = np.outer(u, w)
    m = m - m.T
    return 0.5 * float(np.sum(m * m))


def dist_klein(u: KleinPoint, v: KleinPoint) -> float:
    """Distance between Klein points.

    Evaluates ``arccosh((1 - u.v) / sqrt((1-|u|^2)(1-|v|^2)))``.  The excess
    over 1 is rewritten as ``(|u-v|^2 - |u ^ (v-u)|^2) / (s * (1 - u.v + s))``
    with ``s`` the square root, so nearby points do not cancel.
    """
    if u.dim != v.dim:
        raise DomainError(f"dimension mismatch: {u.dim} vs {v.dim}")
    a, b = u.coords, v.coords
    delta = b - a
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    s = np.sqrt((1.0 - na) * (1.0 + na) * (1.0 - nb) * (1.0 + nb))
    num = float(np.dot(delta, delta)) - _wedge_sq(a, delta)
    excess = max(num, 0.0) / (s * (1.0 - float(np.dot(a, b)) + s))
    return float(_arccosh1p(excess))


def dist_poincare(p: PoincarePoint, q: PoincarePoint) -> float:
    """Distance between Poincaré points, ``arccosh(1 + 2|p-q|^2 / ((1-|p|^2)(1-|q|^2)))``."""
    if p.dim != q.dim:
        raise DomainError(f"dimension mismatch: {p.dim} vs {q.dim}")
    a, b = p.coords, q.coords
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    delta = a - b
    excess = 2.0 * float(np.dot(delta, delta)) / ((1 - na) * (1 + na) * (1 - nb) * (1 + nb))
    return float(_arccosh1p(excess))


def pairwise_dist(X, Y=None) -> np.ndarray:
    """Matrix of hyperbolic distances between rows of ``X`` and ``Y``.

    Rows are hyperboloid coordinates.  With ``Y`` omitted the result is
    exactly symmetric with a zero diagonal.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    same = Y is None
    Y = X if same else np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise DomainError(f"dimension mismatch: {X.shape[1] - 1} vs {Y.shape[1] - 1}")
    gap = np.outer(X[:, 0], Y[:, 0]) - X[:, 1:] @ Y[:, 1:].T - 1.0
    near = np.argwhere(gap < _NEAR_GAP)
    if near.size:
        i, j = near[:, 0], near[:, 1]
        diff = X[i] - Y[j]
        gap[i, j] = 0.5 * (np.sum(diff[:, 1:] ** 2, axis=1) - diff[:, 0] ** 2)
    if np.any(gap < -DIST_DOMAIN_TOL):
        raise DomainError("pairwise_dist: Minkowski product below 1; invalid points")
    D = _arccosh1p(np.maximum(gap, 0.0))
    if same:
        D = np.triu(D, 1)
        D = D + D.T
    return D


def _one_minus_sq(x: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(x, axis=-1)
    return (1.0 - r) * (1.0 + r)


def to_hyperboloid_coords(coords, model: str) -> np.ndarray:
    """Map stacked coordinates of ``model`` to hyperboloid coordinates."""
    x = np.asarray(coords, dtype=float)
    if model == "hyperboloid":
        return x.copy()
    if model == "klein":
        scale = 1.0 / np.sqrt(_one_minus_sq(x))
        return np.concatenate([scale[..., None], x * scale[..., None]], axis=-1)
    if model == "poincare":
        denom = _one_minus_sq(x)
        sq = np.sum(x * x, axis=-1)
        x0 = (1.0 + sq) / denom
        return np.concatenate([x0[..., None], 2.0 * x / denom[..., None]], axis=-1)
    raise DomainError(f"unknown model {model!r}; expected one of {MODELS}")


def from_hyperboloid_coords(x, model: str) -> np.ndarray:
    """Map stacked hyperboloid coordinates to ``model`` coordinates."""
    x = np.asarray(x, dtype=float)
    if model == "hyperboloid":
        return x.copy()
    if model == "klein":
        return x[..., 1:] / x[..., :1]
    if model == "poincare":
        return x[..., 1:] / (1.0 + x[..., :1])
    raise DomainError(f"unknown model {model!r}; expected one of {MODELS}")


_CLASSES = {"hyperboloid": HyperboloidPoint, "klein": KleinPoint, "poincare": PoincarePoint}


def model_of(p: AnyPoint) -> str:
    for name, cls in _CLASSES.items():
        if isinstance(p, cls):
            return name
    raise DomainError(f"not a hyperbolic point: {p!r}")


def convert(p: AnyPoint, target: str):
    """Convert a point to the ``target`` model.

    Klein and Poincaré are related directly (``k = 2p / (1 + |p|^2)`` and its
    inverse ``p = k / (1 + sqrt(1 - |k|^2))``); everything else goes through
    the hyperboloid.
    """
    if target not in _CLASSES:
        raise DomainError(f"unknown model {target!r}; expected one of {MODELS}")
    source = model_of(p)
    if source == target:
        return p
    c = p.coords
    if source == "poincare" and target == "klein":
        return KleinPoint(2.0 * c / (1.0 + np.dot(c, c)))
    if source == "klein" and target == "poincare":
        return PoincarePoint(c / (1.0 + np.sqrt(_one_minus_sq(c))))
    x = to_hyperboloid_coords(c, source)
    return _CLASSES[target](from_hyperboloid_coords(x, target))


def _project(x: np.ndarray) -> np.ndarray:
    """Rescale so that <x,x>_M = 1 (rows along the last axis)."""
    q = minkowski(x, x)
    if np.any(q <= 0) or np.any(x[..., 0] <= 0):
        raise DomainError("cannot project a non-timelike vector onto the hyperboloid")
    return x / np.sqrt(q)[..., None]


def geodesic_point(a: HyperboloidPoint, b: HyperboloidPoint, s: float) -> HyperboloidPoint:
    """Point at distance ``s * d(a, b)`` from ``a`` along the geodesic to ``b``."""
    L = dist(a, b)
    if L == 0.0:
        raise DegenerateInputError("geodesic_point needs two distinct points")
    if s == 0:
        return a
    if s == 1:
        return b
    x = (np.sinh((1.0 - s) * L) * a.coords + np.sinh(s * L) * b.coords) / np.sinh(L)
    return HyperboloidPoint(_project(x))


def random_direction(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform unit vector(s) on S^{n-1}."""
    shape = (n,) if size is None else (size, n)
    if n == 1:
        return rng.choice(np.array([-1.0, 1.0]), size=shape)
    g = rng.standard_normal(shape)
    norm = np.linalg.norm(g, axis=-1, keepdims=True)
    while np.any(norm == 0):  # pragma: no cover - probability zero
        g = rng.standard_normal(shape)
        norm = np.linalg.norm(g, axis=-1, keepdims=True)
    return g / norm


def _sample_radius(R: float, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    # radius density proportional to sinh(r)**(n-1) on [0, R]
    if n == 1:
        return R * rng.random(size)
    half = np.sinh(R / 2.0)
    if n == 2:
        return 2.0 * np.arcsinh(np.sqrt(rng.random(size)) * half)
    # propose from the n = 2 law, accept with (sinh r / sinh R)**(n-2)
    out = np.empty(size)
    filled = 0
    sinh_R = np.sinh(R)
    while filled < size:
        need = size - filled
        batch = max(64, 2 * need)
        r = 2.0 * np.arcsinh(np.sqrt(rng.random(batch)) * half)
        keep = r[rng.random(batch) < (np.sinh(r) / sinh_R) ** (n - 2)][:need]
        out[filled : filled + keep.size] = keep
        filled += keep.size
    return out


def random_points_ball(R: float, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` points uniform in the hyperbolic ball B(o, R), as a coordinate array."""
    if not R > 0:
        raise PreconditionError(f"ball radius must be positive, got {R}")
    _check_dim(n)
    r = _sample_radius(R, n, size, rng)
    omega = random_direction(n, rng, size)
    return np.concatenate([np.cosh(r)[:, None], np.sinh(r)[:, None] * omega], axis=1)


def random_point_ball(R: float, n: int, rng: np.random.Generator) -> HyperboloidPoint:
    """One point uniform (w.r.t. hyperbolic volume) in B(o, R)."""
    return HyperboloidPoint(random_points_ball(R, n, 1, rng)[0])


@dataclass(frozen=True, eq=False)
class Isometry:
    """Linear map of R^{n+1} preserving the Minkowski form and the upper sheet."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 2:
            raise DomainError(f"isometry matrix must be square of size >= 2, got {M.shape}")
        J = np.diag([1.0] + [-1.0] * (M.shape[0] - 1))
        if not np.all(np.abs(M.T @ J @ M - J) <= ISOMETRY_TOL) or not M[0, 0] > 0:
            raise DomainError("matrix does not preserve the Minkowski form / upper sheet")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0] - 1

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(self.matrix @ other.matrix)

    def inverse(self) -> "Isometry":
        J = np.diag([1.0] + [-1.0] * self.dim)
        return Isometry(J @ self.matrix.T @ J)


def identity(n: int) -> Isometry:
    return Isometry(np.eye(n + 1))


def boost(t: float, direction) -> Isometry:
    """Hyperbolic translation by ``t`` along the geodesic through o in ``direction``.

    Maps o to ``(cosh t, sinh t * direction)``.
    """
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    n = e.size
    M = np.eye(n + 1)
    M[0, 0] = np.cosh(t)
    M[0, 1:] = M[1:, 0] = np.sinh(t) * e
    M[1:, 1:] += (np.cosh(t) - 1.0) * np.outer(e, e)
    return Isometry(M)


def rotation(Q) -> Isometry:
    """Isometry fixing o that acts on the spatial block by the orthogonal matrix ``Q``."""
    Q = np.asarray(Q, dtype=float)
    M = np.eye(Q.shape[0] + 1)
    M[1:, 1:] = Q
    return Isometry(M)


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform element of SO(n)."""
    if n == 1:
        return np.ones((1, 1))
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_isometry(n: int, rng: np.random.Generator, max_boost: float = 2.0) -> Isometry:
    """Uniform rotation followed by a boost of magnitude U[0, max_boost] in a uniform direction."""
    Q = random_rotation(n, rng)
    t = max_boost * rng.random()
    e = random_direction(n, rng)
    return boost(t, e) @ rotation(Q)


def random_small_isometry(n: int, scale: float, rng: np.random.Generator) -> Isometry:
    """Isometry close to the identity: rotation angle <= scale, boost <= scale.

    The rotation is ``expm(theta * K)`` with ``K`` a random skew matrix of unit
    spectral norm and ``theta ~ U[0, scale]``; the boost magnitude is
    ``U[0, scale]`` along a uniform direction.
    """
    Q = np.eye(n)
    if n >= 2:
        A = rng.standard_normal((n, n))
        K = A - A.T
        K /= np.linalg.norm(K, 2)
        Q = expm(scale * rng.random() * K)
    t = scale * rng.random()
    e = random_direction(n, rng)
    return boost(t, e) @ rotation(Q)


def translation_to_origin(m: HyperboloidPoint) -> Isometry:
    """Pure translation along the geodesic o-m that sends ``m`` to o."""
    sp = m.coords[1:]
    norm = np.linalg.norm(sp)
    if norm == 0.0:
        return identity(m.dim)
    return boost(-np.arcsinh(norm), sp / norm)


def apply(g: Isometry, p: HyperboloidPoint) -> HyperboloidPoint:
    """Image ``g.p``, re-projected onto the hyperboloid."""
    if g.dim != p.dim:
        raise DomainError(f"dimension mismatch: isometry of H^{g.dim}, point of H^{p.dim}")
    return HyperboloidPoint(_project(g.matrix @ p.coords))


def apply_many(g: Isometry, X) -> np.ndarray:
    """Apply ``g`` to every row of a hyperboloid coordinate array."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return _project(X @ g.matrix.T)
