"""Energy distance and distance covariance on empirical measures, with permutation tests.

All statistics are V-statistics (plug-in estimators of the population
functionals) unless ``unbiased=True`` is passed.  Permutation tests compute
distance matrices once and only permute indices; permutation ``b`` draws from
the substream ``(seed, label, b)`` so results do not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry, metrics
from .errors import DomainError, PreconditionError
from .rng import stream

__all__ = [
    "Sample",
    "PermutationTestResult",
    "a_mu",
    "a_mu_gap",
    "energy_form",
    "energy_perm_test",
    "dcov",
    "dcov_perm_test",
    "double_centered",
    "MIN_PERMUTATIONS",
]

MIN_PERMUTATIONS = 99


@dataclass(frozen=True, eq=False)
class Sample:
    """Finite empirical measure: equally weighted points in a tagged metric space.

    Hyperbolic points are stored as hyperboloid coordinate rows whatever model
    they were read in; ``source`` optionally keeps the ``(model, rows)`` they
    were read from so a file can be written back without conversion error.
    For the ``raw`` metric, ``points`` are row indices into ``matrix``.
    """

    points: np.ndarray
    metric: metrics.Metric = field(default_factory=lambda: metrics.Metric("hyperbolic"))
    matrix: np.ndarray | None = None
    source: tuple | None = None

    def __post_init__(self):
        m = metrics.parse_metric(self.metric)
        object.__setattr__(self, "metric", m)
        if m.kind == "raw":
            pts = np.asarray(self.points, dtype=int).ravel()
            if self.matrix is None:
                raise DomainError("raw sample needs its distance matrix")
        else:
            pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if len(pts) == 0:
            raise PreconditionError("a sample needs at least one point")
        if m.kind == "hyperbolic":
            metrics._check_hyperbolic(pts, "sample")
        elif m.kind == "lp" and not np.all(np.isfinite(pts)):
            raise DomainError("sample has non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def hyperbolic(cls, points) -> "Sample":
        """Build from hyperboloid coordinate rows or a list of point objects."""
        if isinstance(points, (list, tuple)) and points and not np.isscalar(points[0]) and hasattr(points[0], "coords"):
            points = np.array([geometry.convert(p, "hyperboloid").coords for p in points])
        return cls(points, metrics.Metric("hyperbolic"))

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        if self.metric.kind == "hyperbolic":
            return self.points.shape[1] - 1
        if self.metric.kind == "raw":
            return 0
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.size

    def distances(self, other: "Sample | None" = None) -> np.ndarray:
        if other is None:
            return metrics.pairwise(self.points, None, self.metric, self.matrix)
        _check_same_space(self, other)
        return metrics.pairwise(self.points, other.points, self.metric, self.matrix)


def _check_same_space(a: Sample, b: Sample) -> None:
    if a.metric != b.metric:
        raise DomainError(f"samples live in different spaces: {a.metric} vs {b.metric}")
    if a.metric.kind == "raw":
        if a.matrix is not b.matrix and not np.array_equal(a.matrix, b.matrix):
            raise DomainError("raw samples index different distance matrices")
    elif a.points.shape[1] != b.points.shape[1]:
        raise DomainError(f"samples have different dimensions: {a.dim} vs {b.dim}")


@dataclass(frozen=True)
class PermutationTestResult:
    statistic: float
    p_value: float
    permutations: int
    seed: int
    sizes: tuple = ()

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "permutations": self.permutations,
            "seed": self.seed,
            "sizes": list(self.sizes),
        }


def _probe_coords(x, mu: Sample) -> np.ndarray:
    if hasattr(x, "coords"):
        if mu.metric.kind != "hyperbolic":
            raise DomainError(f"hyperbolic point probed against a {mu.metric} sample")
        x = geometry.convert(x, "hyperboloid").coords
    if mu.metric.kind == "raw":
        return np.atleast_1d(np.asarray(x, dtype=int))
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != mu.points.shape[1]:
        raise DomainError("probe point and sample live in different spaces")
    return x


def a_mu(x, mu: Sample) -> float:
    """Mean distance from ``x`` to the support points of ``mu``."""
    d = metrics.pairwise(_probe_coords(x, mu), mu.points, mu.metric, mu.matrix)
    return float(d.mean())


def a_mu_gap(mu1: Sample, mu2: Sample, probes=None) -> float:
    """``max_x |a_mu1(x) - a_mu2(x)|`` over probes (default: the pooled supports)."""
    _check_same_space(mu1, mu2)
    if probes is None:
        probes = np.concatenate([mu1.points, mu2.points])
    elif isinstance(probes, Sample):
        probes = probes.points
    elif isinstance(probes, (list, tuple)) and probes and hasattr(probes[0], "coords"):
        probes = np.array([geometry.convert(p, "hyperboloid").coords for p in probes])
    probes = np.asarray(probes)
    if len(probes) == 0:
        raise PreconditionError("a_mu_gap needs at least one probe")
    P = _probe_coords(probes, mu1)
    a1 = metrics.pairwise(P, mu1.points, mu1.metric, mu1.matrix).mean(axis=1)
    a2 = metrics.pairwise(P, mu2.points, mu2.metric, mu2.matrix).mean(axis=1)
    return float(np.max(np.abs(a1 - a2)))


def _fsum_mean(M: np.ndarray, exclude_diagonal: bool = False) -> float:
    n, m = M.shape
    if exclude_diagonal:
        if n < 2:
            raise PreconditionError("unbiased statistics need at least 2 points per sample")
        return math.fsum(M[~np.eye(n, dtype=bool)]) / (n * (n - 1))
    return math.fsum(M.ravel()) / (n * m)


def energy_form(mu1: Sample, mu2: Sample, unbiased: bool = False) -> float:
    """Energy distance ``2 E d(X,Y) - E d(X,X') - E d(Y,Y')``.

    This is minus the integral of ``d`` against ``(mu1 - mu2)^2``, so it is
    nonnegative in negative-type spaces and vanishes for identical empirical
    measures.  Means are exactly rounded sums and the pair is put in a
    canonical order first, so the result is exactly symmetric.
    """
    _check_same_space(mu1, mu2)
    if mu2.points.tobytes() < mu1.points.tobytes():
        mu1, mu2 = mu2, mu1
    p1, p2 = mu1.points, mu2.points
    kw = dict(metric=mu1.metric, matrix=mu1.matrix)
    cross = _fsum_mean(metrics.pairwise(p1, p2, **kw))
    within1 = _fsum_mean(metrics.pairwise(p1, p1.copy(), **kw), unbiased)
    within2 = _fsum_mean(metrics.pairwise(p2, p2.copy(), **kw), unbiased)
    return 2.0 * cross - (within1 + within2)


def _check_permutations(B: int) -> None:
    if B < MIN_PERMUTATIONS:
        raise PreconditionError(f"need at least {MIN_PERMUTATIONS} permutations, got {B}")


def _p_value(observed: float, permuted: np.ndarray) -> float:
    return (1.0 + float(np.count_nonzero(permuted >= observed))) / (permuted.size + 1.0)


def _energy_batch(D: np.ndarray, labels: np.ndarray, n1: int, unbiased: bool) -> np.ndarray:
    # labels: (N, k) 0/1 matrix, column c marks the first sample of split c
    n2 = D.shape[0] - n1
    Z = labels.astype(float)
    DZ = D @ Z
    s11 = np.einsum("ic,ic->c", Z, DZ)
    total = D.sum()
    s12 = D.sum(axis=1) @ Z - s11
    s22 = total - s11 - 2.0 * s12
    if unbiased:
        w1, w2 = n1 * (n1 - 1), n2 * (n2 - 1)
    else:
        w1, w2 = n1 * n1, n2 * n2
    return 2.0 * s12 / (n1 * n2) - (s11 / w1 + s22 / w2)


def energy_perm_test(
    mu1: Sample, mu2: Sample, permutations: int = 999, seed: int = 0, unbiased: bool = False
) -> PermutationTestResult:
    """Two-sample energy test; the null pools both samples and re-splits them at the original sizes."""
    _check_permutations(permutations)
    _check_same_space(mu1, mu2)
    n1, n2 = mu1.size, mu2.size
    if n1 < 2 or n2 < 2:
        raise PreconditionError("energy test needs at least 2 points in each sample")
    if mu1.metric.kind == "raw":
        pooled = Sample(np.concatenate([mu1.points, mu2.points]), mu1.metric, mu1.matrix)
    else:
        pooled = Sample(np.vstack([mu1.points, mu2.points]), mu1.metric)
    D = pooled.distances()
    N = n1 + n2
    labels = np.zeros((N, permutations + 1), dtype=bool)
    labels[:n1, 0] = True
    for b in range(permutations):
        perm = stream(seed, "energy.permutation", b).permutation(N)
        labels[perm[:n1], b + 1] = True
    stats = _energy_batch(D, labels, n1, unbiased)
    return PermutationTestResult(
        statistic=energy_form(mu1, mu2, unbiased),
        p_value=_p_value(stats[0], stats[1:]),
        permutations=permutations,
        seed=seed,
        sizes=(n1, n2),
    )


def double_centered(D: np.ndarray) -> np.ndarray:
    """``J D J``: subtract row and column means, add back the grand mean."""
    D = np.asarray(D, dtype=float)
    return D - D.mean(axis=1, keepdims=True) - D.mean(axis=0, keepdims=True) + D.mean()


def _u_centered(D: np.ndarray) -> np.ndarray:
    n = D.shape[0]
    if n < 4:
        raise PreconditionError("unbiased distance covariance needs at least 4 pairs")
    rows = D.sum(axis=1, keepdims=True) / (n - 2)
    cols = D.sum(axis=0, keepdims=True) / (n - 2)
    A = D - rows - cols + D.sum() / ((n - 1) * (n - 2))
    np.fill_diagonal(A, 0.0)
    return A


def _check_paired(sx: Sample, sy: Sample) -> int:
    if sx.size != sy.size:
        raise PreconditionError(f"paired samples differ in length: {sx.size} vs {sy.size}")
    if sx.size < 2:
        raise PreconditionError("distance covariance needs at least 2 pairs")
    return sx.size


def _centered_pair(sx: Sample, sy: Sample, unbiased: bool) -> tuple[np.ndarray, np.ndarray]:
    center = _u_centered if unbiased else double_centered
    return center(sx.distances()), center(sy.distances())


def _dcov_from_centered(A: np.ndarray, B: np.ndarray, unbiased: bool) -> float:
    n = A.shape[0]
    denom = n * (n - 3) if unbiased else n * n
    return float(np.sum(A * B)) / denom


def dcov(sx: Sample, sy: Sample, unbiased: bool = False) -> float:
    """Squared sample distance covariance ``(1/n^2) sum_ij A_ij B_ij``.

    ``A`` and ``B`` are the doubly-centered distance matrices of the paired
    samples (row ``i`` of ``sx`` goes with row ``i`` of ``sy``).  The two
    samples may live in different spaces.
    """
    _check_paired(sx, sy)
    A, B = _centered_pair(sx, sy, unbiased)
    return _dcov_from_centered(A, B, unbiased)


def dcov_perm_test(
    sx: Sample, sy: Sample, permutations: int = 999, seed: int = 0, unbiased: bool = False
) -> PermutationTestResult:
    """Independence test: the null re-pairs ``sy`` with ``sx`` by random permutations."""
    _check_permutations(permutations)
    n = _check_paired(sx, sy)
    A, B = _centered_pair(sx, sy, unbiased)
    observed = _dcov_from_centered(A, B, unbiased)
    permuted = np.empty(permutations)
    for b in range(permutations):
        perm = stream(seed, "dcov.permutation", b).permutation(n)
        permuted[b] = _dcov_from_centered(A, B[np.ix_(perm, perm)], unbiased)
    return PermutationTestResult(
        statistic=observed,
        p_value=_p_value(observed, permuted),
        permutations=permutations,
        seed=seed,
        sizes=(n, n),
    )
