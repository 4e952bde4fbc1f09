"""Reading and writing point sets, distance matrices and JSON reports.

Point-set CSV::

    model,dim            <- optional literal header
    klein,2              <- metadata row: model tag and dimension n
    0.1,0.2              <- one point per row
    ...

Hyperboloid rows carry ``n + 1`` coordinates, ball models and ``l<p>``
point sets carry ``n``.  A CSV whose first row is numeric is read as a
header-free square distance matrix.

Point-set JSON: ``{"model": "poincare", "points": [[...], ...]}`` (``dim`` is
optional and checked when present).  ``{"matrix": [[...], ...]}`` is a
distance matrix.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import geometry, metrics
from .energetics import Sample
from .errors import DomainError, ParseError
from .negtype import DistanceMatrix

__all__ = ["ingest", "emit", "parse_points", "dumps", "write_json", "POINT_MODELS"]

POINT_MODELS = geometry.MODELS


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if s in ("-0", "0"):
        return "0.0" if s == "0" else "-0.0"
    return s


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written at 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def write_json(obj, path: str | Path | None) -> str:
    text = dumps(obj)
    if path is not None:
        Path(path).write_text(text)
    return text


def _model_metric(model: str) -> metrics.Metric:
    if model in POINT_MODELS:
        return metrics.Metric("hyperbolic")
    try:
        m = metrics.parse_metric(model)
    except DomainError as exc:
        raise ParseError(f"unknown model tag {model!r}") from exc
    if m.kind != "lp":
        raise ParseError(f"model tag {model!r} cannot label a point set")
    return m


def parse_points(rows, model: str, dim: int | None, source: str = "<input>", first_line: int = 1) -> Sample:
    """Validate coordinate rows of ``model`` and return a sample.

    Hyperbolic inputs are checked point by point in their own model and
    stored as hyperboloid coordinates.
    """
    metric = _model_metric(model)
    X = np.array(rows, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ParseError(f"{source}: no points found")
    width = X.shape[1]
    expected = None if dim is None else (dim + 1 if model == "hyperboloid" else dim)
    if expected is not None and width != expected:
        raise ParseError(f"{source}: rows have {width} coordinates, model {model} with dim {dim} needs {expected}")
    if metric.kind == "hyperbolic":
        cls = {"hyperboloid": geometry.HyperboloidPoint, "klein": geometry.KleinPoint, "poincare": geometry.PoincarePoint}[model]
        for i, row in enumerate(X):
            try:
                cls(row)
            except DomainError as exc:
                raise DomainError(f"{source}: row {first_line + i}: {exc}") from None
        X.setflags(write=False)
        return Sample(geometry.to_hyperboloid_coords(X, model), metric, source=(model, X))
    elif not np.all(np.isfinite(X)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(X), axis=1))[0])
        raise DomainError(f"{source}: row {first_line + bad}: non-finite coordinate")
    return Sample(X, metric)


def _read_csv(path: Path, model_override: str | None):
    try:
        lines = list(csv.reader(path.read_text().splitlines()))
    except csv.Error as exc:
        raise ParseError(f"{path}: {exc}") from exc
    numbered = [(k + 1, [c.strip() for c in row]) for k, row in enumerate(lines) if row and any(c.strip() for c in row)]
    if not numbered:
        raise ParseError(f"{path}: empty file")

    def floats(lineno, row):
        out = []
        for col, cell in enumerate(row, start=1):
            try:
                out.append(float(cell))
            except ValueError:
                raise ParseError(f"{path}:{lineno}:{col}: not a number: {cell!r}") from None
        return out

    first_no, first = numbered[0]
    if [c.lower() for c in first] == ["model", "dim"]:
        numbered = numbered[1:]
        if not numbered:
            raise ParseError(f"{path}:{first_no}: header without metadata row")
        first_no, first = numbered[0]
    try:
        float(first[0])
        numeric = True
    except ValueError:
        numeric = False
    if numeric and model_override is None:
        rows = [floats(k, r) for k, r in numbered]
        if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
            raise ParseError(f"{path}: distance matrix CSV must be square")
        return DistanceMatrix(np.array(rows))
    if numeric:
        model, dim, body = model_override, None, numbered
    else:
        if len(first) != 2:
            raise ParseError(f"{path}:{first_no}: metadata row must be 'model,dim'")
        model = first[0].lower()
        try:
            dim = int(first[1])
        except ValueError:
            raise ParseError(f"{path}:{first_no}:2: dim must be an integer, got {first[1]!r}") from None
        body = numbered[1:]
        if model_override is not None and model_override != model:
            raise ParseError(f"{path}: file says model {model!r} but {model_override!r} was requested")
    rows = [floats(k, r) for k, r in body]
    if len({len(r) for r in rows}) > 1:
        k = next(k for (k, r) in body if len(r) != len(rows[0]))
        raise ParseError(f"{path}:{k}: ragged row")
    return parse_points(rows, model, dim, str(path), body[0][0] if body else first_no)


def _read_json(path: Path, model_override: str | None):
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if isinstance(data, list):
        if model_override is None:
            raise ParseError(f"{path}: bare coordinate array needs a model (use --model)")
        data = {"model": model_override, "points": data}
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be an object")
    if "matrix" in data and "points" in data:
        raise ParseError(f"{path}: ambiguous file with both 'matrix' and 'points'")
    if "matrix" in data:
        try:
            M = np.array(data["matrix"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}: matrix is not numeric: {exc}") from None
        return DistanceMatrix(M)
    if "points" not in data:
        raise ParseError(f"{path}: expected a 'points' or 'matrix' field")
    model = data.get("model", model_override)
    if model is None:
        raise ParseError(f"{path}: missing 'model' field")
    if model_override is not None and model_override != model:
        raise ParseError(f"{path}: file says model {model!r} but {model_override!r} was requested")
    pts = data["points"]
    if not isinstance(pts, list) or not all(isinstance(r, list) for r in pts):
        raise ParseError(f"{path}: 'points' must be an array of coordinate arrays")
    if len({len(r) for r in pts}) > 1:
        raise ParseError(f"{path}: ragged coordinate arrays")
    try:
        rows = np.array(pts, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: non-numeric coordinate: {exc}") from None
    return parse_points(rows, str(model).lower(), data.get("dim"), str(path), 0)


def _format(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("csv", "json"):
            raise ParseError(f"unknown format {fmt!r}")
        return fmt
    suffix = path.suffix.lower()
    if suffix in (".csv", ".json"):
        return suffix[1:]
    raise ParseError(f"{path}: cannot tell CSV from JSON; use a .csv/.json suffix")


def ingest(path, fmt: str | None = None, model: str | None = None):
    """Read a point set (-> :class:`Sample`) or a distance matrix (-> :class:`DistanceMatrix`)."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    kind = _format(path, fmt)
    return _read_csv(path, model) if kind == "csv" else _read_json(path, model)


def _sample_rows(sample: Sample, model: str) -> tuple[np.ndarray, str, int]:
    if sample.metric.kind == "hyperbolic":
        if model not in POINT_MODELS:
            raise DomainError(f"cannot write a hyperbolic sample in model {model!r}")
        if sample.source is not None and sample.source[0] == model:
            return sample.source[1], model, sample.dim
        return geometry.from_hyperboloid_coords(sample.points, model), model, sample.dim
    if sample.metric.kind == "raw":
        raise DomainError("raw-indexed samples have no coordinates to write")
    return np.asarray(sample.points), str(sample.metric), sample.dim


def emit(sample: Sample, path, model: str = "hyperboloid", fmt: str | None = None) -> None:
    """Write ``sample`` in a format :func:`ingest` reads back."""
    path = Path(path)
    kind = _format(path, fmt)
    rows, tag, dim = _sample_rows(sample, model)
    if kind == "json":
        write_json({"schema": 1, "model": tag, "dim": dim, "points": [list(map(float, r)) for r in rows]}, path)
        return
    lines = ["model,dim", f"{tag},{dim}"]
    lines += [",".join(_format_float(float(v)) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
