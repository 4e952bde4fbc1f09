"""Metric tags and pairwise distances for every supported space.

Tags: ``hyperbolic`` (rows are hyperboloid coordinates), ``euclidean`` /
``l2``, ``l1``, ``linf``, ``l<p>`` for any real ``p >= 1`` (e.g. ``l3``,
``l2.5``), and ``raw`` (points are integer indices into a supplied matrix).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import geometry
from .errors import DomainError

__all__ = ["Metric", "parse_metric", "pairwise"]

_LP = re.compile(r"^l(\d+(?:\.\d*)?)$")


@dataclass(frozen=True)
class Metric:
    kind: str  # "hyperbolic", "lp" or "raw"
    p: float | None = None

    def __str__(self) -> str:
        if self.kind != "lp":
            return self.kind
        if self.p == np.inf:
            return "linf"
        return f"l{self.p:g}"


def parse_metric(tag: "str | Metric") -> Metric:
    if isinstance(tag, Metric):
        return tag
    t = tag.strip().lower()
    if t in ("hyperbolic", "raw"):
        return Metric(t)
    if t == "euclidean":
        return Metric("lp", 2.0)
    if t == "linf":
        return Metric("lp", np.inf)
    m = _LP.match(t)
    if m:
        p = float(m.group(1))
        if p < 1:
            raise DomainError(f"l^p with p = {p} < 1 is not a metric")
        return Metric("lp", p)
    raise DomainError(f"unknown metric tag {tag!r}")


def _check_hyperbolic(X: np.ndarray, label: str) -> None:
    if X.shape[1] < 2:
        raise DomainError(f"{label}: hyperbolic points need at least 2 coordinates")
    q = geometry.minkowski(X, X)
    scale = np.maximum(1.0, np.sum(X * X, axis=1))
    bad = np.flatnonzero((np.abs(q - 1.0) > geometry.NORM_TOL * scale) | (X[:, 0] < 1.0 - geometry.NORM_TOL))
    if bad.size:
        raise DomainError(f"{label}: row {int(bad[0])} is not a hyperboloid point")


def pairwise(X, Y=None, metric="hyperbolic", matrix=None) -> np.ndarray:
    """Distances between the rows of ``X`` and ``Y`` (``Y=None``: ``X`` with itself)."""
    m = parse_metric(metric)
    X = np.asarray(X)
    same = Y is None
    if m.kind == "raw":
        if matrix is None:
            raise DomainError("raw metric needs the distance matrix")
        M = np.asarray(matrix, dtype=float)
        i = np.asarray(X, dtype=int).ravel()
        j = i if same else np.asarray(Y, dtype=int).ravel()
        if i.size and (i.min() < 0 or max(i.max(), j.max()) >= M.shape[0]):
            raise DomainError("raw metric: index outside the distance matrix")
        return M[np.ix_(i, j)]
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X if same else np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise DomainError(f"points live in different spaces: width {X.shape[1]} vs {Y.shape[1]}")
    if m.kind == "hyperbolic":
        _check_hyperbolic(X, "X")
        if not same:
            _check_hyperbolic(Y, "Y")
        return geometry.pairwise_dist(X, None if same else Y)
    if m.p == 1:
        D = cdist(X, Y, "cityblock")
    elif m.p == np.inf:
        D = cdist(X, Y, "chebyshev")
    elif m.p == 2:
        D = cdist(X, Y, "euclidean")
    else:
        D = cdist(X, Y, "minkowski", p=m.p)
    if same:
        np.fill_diagonal(D, 0.0)
    return D
