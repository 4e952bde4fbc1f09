"""Negative-type classification of finite metric configurations.

A finite metric ``D`` has negative type when ``sum_ij a_i a_j D_ij <= 0`` for
every coefficient vector with ``sum(a) == 0``.  On that hyperplane the form
equals ``-2 a^T B a`` with ``B = -J D J / 2`` the doubly-centered matrix, so
negative type is positive semidefiniteness of ``B``, and strictness is
``ker B == span{1}``.  Classification is spectral: ``B`` is compressed to an
orthonormal basis of the hyperplane and its smallest eigenvalue is compared
with ``tol * max|eig(B)|``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space

from . import geometry, metrics
from .errors import DegenerateInputError, DomainError, NumericError, PreconditionError

__all__ = [
    "DistanceMatrix",
    "Verdict",
    "NegTypeReport",
    "Violation",
    "distance_matrix",
    "quad_form",
    "red_blue_sum",
    "double_center",
    "classify",
    "snowflake",
    "search_violation",
    "l1_square",
    "GENERATORS",
]

SYMMETRY_TOL = 1e-12
DUPLICATE_TOL = 1e-12
HYPERPLANE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Validated square matrix of pairwise distances."""

    entries: np.ndarray

    def __post_init__(self):
        D = np.array(self.entries, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 1:
            raise DomainError(f"distance matrix must be square, got shape {D.shape}")
        if not np.all(np.isfinite(D)):
            raise DomainError("distance matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(D))))
        asym = np.abs(D - D.T)
        if np.any(asym > SYMMETRY_TOL * scale):
            i, j = np.unravel_index(np.argmax(asym), D.shape)
            raise DomainError(f"distance matrix not symmetric at ({i}, {j})")
        if np.any(np.diag(D) != 0):
            i = int(np.flatnonzero(np.diag(D))[0])
            raise DomainError(f"distance matrix has nonzero diagonal at row {i}")
        if np.any(D < 0):
            i, j = np.argwhere(D < 0)[0]
            raise DomainError(f"distance matrix has a negative entry at ({i}, {j})")
        D = 0.5 * (D + D.T)
        D.setflags(write=False)
        object.__setattr__(self, "entries", D)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _entries(D) -> np.ndarray:
    return D.entries if isinstance(D, DistanceMatrix) else np.asarray(D, dtype=float)


def _stack_points(points, metric: metrics.Metric) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return points
    pts = list(points)
    kinds = {type(p) for p in pts}
    point_types = (geometry.HyperboloidPoint, geometry.KleinPoint, geometry.PoincarePoint)
    if kinds & set(point_types):
        if metric.kind != "hyperbolic":
            raise DomainError(f"hyperbolic points given with metric {metric}")
        return np.array([geometry.convert(p, "hyperboloid").coords for p in pts])
    return np.asarray(pts, dtype=float)


def distance_matrix(points, metric="hyperbolic") -> DistanceMatrix:
    """Pairwise distance matrix of ``points`` under ``metric``.

    ``points`` may be an array of coordinate rows (hyperboloid rows for the
    hyperbolic metric), a list of point objects, or, for ``metric="raw"``, a
    square matrix that is validated and returned as is.
    """
    m = metrics.parse_metric(metric)
    if m.kind == "raw":
        return DistanceMatrix(points)
    X = _stack_points(points, m)
    if X.ndim != 2 or X.shape[0] < 2:
        raise PreconditionError("distance_matrix needs at least 2 points")
    if m.kind == "hyperbolic" and not isinstance(points, np.ndarray) and X.shape[1] < 2:
        raise DomainError("hyperbolic metric needs hyperboloid coordinates")
    return DistanceMatrix(metrics.pairwise(X, None, m))


def _check_hyperplane(alpha: np.ndarray, n: int) -> None:
    if alpha.shape != (n,):
        raise PreconditionError(f"coefficient vector has shape {alpha.shape}, expected ({n},)")
    if abs(alpha.sum()) > HYPERPLANE_TOL * max(1.0, float(np.abs(alpha).sum())):
        raise PreconditionError(f"coefficients must sum to zero, got sum {alpha.sum()!r}")


def quad_form(D, alpha) -> float:
    """``sum_ij alpha_i alpha_j D_ij`` for ``alpha`` on the hyperplane ``sum(alpha) == 0``."""
    M = _entries(D)
    a = np.asarray(alpha, dtype=float)
    _check_hyperplane(a, M.shape[0])
    return float(a @ M @ a)


def red_blue_sum(D, red: Sequence[int], blue: Sequence[int]) -> float:
    """Opposite-colour minus same-colour distance sums over ordered pairs.

    Equals ``-quad_form(D, 1_red - 1_blue)``; nonnegative for every colouring
    exactly when ``D`` has negative type.
    """
    if len(red) != len(blue):
        raise PreconditionError(f"red and blue lists differ in size: {len(red)} vs {len(blue)}")
    M = _entries(D)
    r = np.asarray(red, dtype=int)
    b = np.asarray(blue, dtype=int)
    return float(2.0 * M[np.ix_(r, b)].sum() - M[np.ix_(r, r)].sum() - M[np.ix_(b, b)].sum())


def double_center(D) -> np.ndarray:
    """``B = -J D J / 2`` with ``J = I - 11^T/n``."""
    M = _entries(D)
    row = M.mean(axis=1, keepdims=True)
    col = M.mean(axis=0, keepdims=True)
    B = -0.5 * (M - row - col + M.mean())
    return 0.5 * (B + B.T)


class Verdict(str, enum.Enum):
    NOT_NEGATIVE_TYPE = "NOT_NEGATIVE_TYPE"
    NEGATIVE_TYPE_NONSTRICT = "NEGATIVE_TYPE_NONSTRICT"
    STRICT = "STRICT"


@dataclass(frozen=True, eq=False)
class NegTypeReport:
    verdict: Verdict
    eigenvalues: tuple
    witness: np.ndarray | None
    # smallest eigenvalue of B restricted to the hyperplane sum(alpha) == 0
    hyperplane_min: float
    tol: float

    @property
    def scale(self) -> float:
        return max(abs(self.eigenvalues[0]), abs(self.eigenvalues[-1]))

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "witness": None if self.witness is None else [float(v) for v in self.witness],
        }


def _normalize_witness(v: np.ndarray) -> np.ndarray:
    v = v - v.mean()
    v = v / np.linalg.norm(v)
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return v


def _hyperplane_basis(n: int) -> np.ndarray:
    return null_space(np.ones((1, n)))


def classify(D, tol: float = 1e-9) -> NegTypeReport:
    """Classify a configuration of distinct points by the spectrum of ``B``."""
    M = _entries(D)
    n = M.shape[0]
    if n < 2:
        raise PreconditionError("classification needs at least 2 points")
    off = M[~np.eye(n, dtype=bool)]
    if np.any(off <= DUPLICATE_TOL):
        i, j = np.argwhere((M <= DUPLICATE_TOL) & ~np.eye(n, dtype=bool))[0]
        raise DegenerateInputError(f"points {i} and {j} coincide (distance {M[i, j]!r})")
    B = double_center(M)
    try:
        eig = np.linalg.eigvalsh(B)
        Q = _hyperplane_basis(n)
        w, V = np.linalg.eigh(Q.T @ B @ Q)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericError(f"eigensolve failed: {exc}") from exc
    if not np.all(np.isfinite(eig)):
        raise NumericError("non-finite eigenvalues")
    scale = max(abs(eig[0]), abs(eig[-1]))
    thresh = tol * scale
    lowest = float(w[0])
    if lowest < -thresh:
        verdict = Verdict.NOT_NEGATIVE_TYPE
    elif lowest <= thresh:
        verdict = Verdict.NEGATIVE_TYPE_NONSTRICT
    else:
        verdict = Verdict.STRICT
    witness = None if verdict is Verdict.STRICT else _normalize_witness(Q @ V[:, 0])
    return NegTypeReport(verdict, tuple(float(e) for e in eig), witness, lowest, tol)


def snowflake(D, r: float) -> DistanceMatrix:
    """Entrywise power ``D**r``; a metric for ``0 < r <= 1``."""
    if not 0 < r <= 1:
        raise PreconditionError(f"snowflake exponent must lie in (0, 1], got {r}")
    return DistanceMatrix(np.power(_entries(D), r))


def l1_square() -> np.ndarray:
    """Vertices of the unit square, ordered so that (1,1,-1,-1) is the flat direction."""
    return np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])


def _gen_cube(rng, m, dim):
    return rng.uniform(-1.0, 1.0, size=(m, dim))


def _gen_lattice(rng, m, dim):
    return rng.integers(-1, 2, size=(m, dim)).astype(float)


def _gen_hyperbolic(rng, m, dim):
    return geometry.random_points_ball(2.0, dim, m, rng)


GENERATORS: dict[str, Callable] = {
    "cube": _gen_cube,
    "lattice": _gen_lattice,
    "hyperbolic-ball": _gen_hyperbolic,
}


@dataclass(frozen=True, eq=False)
class Violation:
    points: np.ndarray
    witness: np.ndarray
    report: NegTypeReport
    trial: int


def search_violation(
    points_gen,
    metric,
    trials: int,
    rng: np.random.Generator,
    dim: int = 3,
    min_points: int = 4,
    max_points: int = 8,
    tol: float = 1e-9,
) -> Violation | None:
    """Random search for a configuration that is not of negative type.

    ``points_gen`` is a name from :data:`GENERATORS` or a callable
    ``(rng, m, dim) -> (m, k) array``.  Each trial draws a size uniformly from
    ``[min_points, max_points]``; configurations with coincident points are
    skipped.  The first violating configuration (in stream order) is returned.
    """
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    gen = GENERATORS[points_gen] if isinstance(points_gen, str) else points_gen
    m_metric = metrics.parse_metric(metric)
    for trial in range(trials):
        m = int(rng.integers(min_points, max_points + 1))
        X = gen(rng, m, dim)
        try:
            report = classify(metrics.pairwise(X, None, m_metric), tol=tol)
        except DegenerateInputError:
            continue
        if report.verdict is Verdict.NOT_NEGATIVE_TYPE:
            return Violation(X, report.witness, report, trial)
    return None
