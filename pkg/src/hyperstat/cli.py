"""Batch command line: ``hyperstat {check-negtype,energy-test,dcov-test,crofton-verify,gen}``.

Every subcommand writes a JSON report (``schema: 1``) to ``--out`` or stdout.
Exit status: 0 when every check passes, 1 when a check fails, 2 on parse
errors, 3 on precondition/domain errors, 4 on numerical failures.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__, crofton, energetics, geometry, io, negtype
from .energetics import Sample
from .errors import HyperstatError, ParseError, PreconditionError
from .rng import stream

SCHEMA = 1
DEFAULT_SEED = 0
SIGMA_BAND = 3.0
NONNEG_TOL = 1e-10

GENERATORS = ("uniform-ball", "two-ball", "paired-dependent", "paired-independent")


def _check(name: str, passed: bool, **details) -> dict:
    return {"name": name, "pass": bool(passed), **details}


def _report(args, result: dict, checks: list[dict], tolerances: dict) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": args.command,
        "config": config,
        "seed": args.seed,
        "tolerances": tolerances,
        "result": result,
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }


def _load_sample(path: str, model: str | None) -> Sample:
    obj = io.ingest(path, model=model)
    if not isinstance(obj, Sample):
        raise ParseError(f"{path}: expected a point set, found a distance matrix")
    return obj


def _negative_type_space(sample: Sample) -> bool:
    m = sample.metric
    return m.kind == "hyperbolic" or (m.kind == "lp" and m.p is not None and m.p <= 2)


def cmd_check_negtype(args) -> dict:
    obj = io.ingest(args.input, model=args.model)
    D = obj if isinstance(obj, negtype.DistanceMatrix) else negtype.distance_matrix(obj.points, obj.metric)
    rep = negtype.classify(D, tol=args.tol)
    checks = []
    if rep.witness is not None:
        q = negtype.quad_form(D, rep.witness)
        checks.append(_check("witness_on_hyperplane", abs(rep.witness.sum()) <= 1e-12, sum=float(rep.witness.sum())))
        if rep.verdict is negtype.Verdict.NOT_NEGATIVE_TYPE:
            checks.append(_check("witness_violates", q > 0, quad_form=q))
        else:
            checks.append(_check("witness_flat", abs(q) <= 2 * args.tol * rep.scale, quad_form=q))
    if args.expect:
        checks.append(_check("expected_verdict", rep.verdict.value == args.expect, expected=args.expect))
    result = {"points": D.size, **rep.to_json()}
    return _report(args, result, checks, {"eigenvalue_rel_tol": args.tol, "duplicate_tol": negtype.DUPLICATE_TOL})


def _test_checks(res: energetics.PermutationTestResult, nonneg_scale: float | None) -> list[dict]:
    B = res.permutations
    checks = [_check("p_value_valid", 1.0 / (B + 1) - 1e-15 <= res.p_value <= 1.0, p_value=res.p_value)]
    if nonneg_scale is not None:
        checks.append(
            _check("statistic_nonnegative", res.statistic >= -NONNEG_TOL * max(1.0, nonneg_scale), statistic=res.statistic)
        )
    return checks


def cmd_energy_test(args) -> dict:
    if not args.input2:
        raise PreconditionError("energy-test needs --input and --input2")
    mu1 = _load_sample(args.input, args.model)
    mu2 = _load_sample(args.input2, args.model)
    res = energetics.energy_perm_test(mu1, mu2, args.permutations, args.seed)
    scale = None
    if _negative_type_space(mu1):
        scale = float(np.max(mu1.distances(mu2)))
    result = {**res.to_json(), "alpha": args.alpha, "reject": res.p_value < args.alpha}
    return _report(args, result, _test_checks(res, scale), {"nonnegativity_rel_tol": NONNEG_TOL})


def cmd_dcov_test(args) -> dict:
    if not args.input2:
        raise PreconditionError("dcov-test needs --input and --input2")
    sx = _load_sample(args.input, args.model)
    sy = _load_sample(args.input2, args.model)
    res = energetics.dcov_perm_test(sx, sy, args.permutations, args.seed)
    scale = None
    if _negative_type_space(sx) and _negative_type_space(sy):
        scale = float(np.max(sx.distances())) * float(np.max(sy.distances()))
    result = {**res.to_json(), "alpha": args.alpha, "reject": res.p_value < args.alpha}
    return _report(args, result, _test_checks(res, scale), {"nonnegativity_rel_tol": NONNEG_TOL})


def _within(estimate: crofton.SeparationEstimate, target: float) -> bool:
    return abs(estimate.value - target) <= SIGMA_BAND * estimate.std_error


def _sampler(dim, radius, n, seed, label, *index):
    sub = int(stream(seed, label, *index).integers(0, 2**63))
    return crofton.CroftonSampler(dim, radius, n, seed=sub)


def cmd_crofton_verify(args) -> dict:
    n, N, seed = args.dim, args.mc_samples, args.seed
    o = geometry.origin(n)
    rng = stream(seed, "crofton-verify.points")
    checks: list[dict] = []
    result: dict = {}

    # cut normalization: one orientation from o, expected d/2
    rows = []
    for k, d in enumerate((0.25, 0.5, 1.0, 2.0, 3.0)):
        x = geometry.HyperboloidPoint(np.concatenate([[math.cosh(d)], math.sinh(d) * geometry.random_direction(n, rng)]))
        s = _sampler(n, 0.75 * d, N, seed, "crofton-verify.cut", k)
        est = crofton.cut_measure(o, x, s, orientation="one", recenter=True)
        rows.append({"d": d, **est.to_json(), "ratio": est.value / d, "pass": _within(est, d / 2)})
    result["cut_normalization"] = rows
    checks.append(_check("cut_normalization", all(r["pass"] for r in rows)))

    # embedding identity: both orientations, expected d(x, y)
    rows = []
    for k in range(5):
        x = geometry.random_point_ball(1.5, n, rng)
        y = geometry.random_point_ball(1.5, n, rng)
        d = geometry.dist(x, y)
        s = _sampler(n, 0.75 * d, N, seed, "crofton-verify.embedding", k)
        est = crofton.cut_measure(x, y, s, recenter=True)
        rows.append({"d": d, **est.to_json(), "pass": _within(est, d)})
    result["embedding"] = rows
    checks.append(_check("embedding_identity", all(r["pass"] for r in rows)))

    # isometry invariance, fixed window at o
    rows = []
    for k in range(3):
        x = geometry.random_point_ball(0.5, n, rng)
        y = geometry.random_point_ball(0.5, n, rng)
        g = geometry.random_isometry(n, rng, max_boost=0.5)
        gx, gy = geometry.apply(g, x), geometry.apply(g, y)
        R = crofton.window_radius(np.stack([x.coords, y.coords, gx.coords, gy.coords]))
        e1 = crofton.cut_measure(x, y, _sampler(n, R, N, seed, "crofton-verify.iso", k, 0))
        e2 = crofton.cut_measure(gx, gy, _sampler(n, R, N, seed, "crofton-verify.iso", k, 1))
        se = math.hypot(e1.std_error, e2.std_error)
        rows.append({"d": geometry.dist(x, y), "estimate": e1.value, "moved_estimate": e2.value,
                     "std_error": se, "pass": abs(e1.value - e2.value) <= SIGMA_BAND * se})
    result["isometry_invariance"] = rows
    checks.append(_check("isometry_invariance", all(r["pass"] for r in rows)))

    # additivity along a geodesic
    rows = []
    for k in range(3):
        x = geometry.random_point_ball(1.0, n, rng)
        y = geometry.random_point_ball(1.0, n, rng)
        m = geometry.geodesic_point(x, y, float(rng.uniform(0.2, 0.8)))
        R = crofton.window_radius(np.stack([x.coords, y.coords]))
        parts = [crofton.cut_measure(a, b, _sampler(n, R, N, seed, "crofton-verify.additivity", k, j))
                 for j, (a, b) in enumerate(((x, m), (m, y), (x, y)))]
        se = math.sqrt(sum(p.std_error ** 2 for p in parts))
        gap = parts[0].value + parts[1].value - parts[2].value
        rows.append({"d": geometry.dist(x, y), "gap": gap, "std_error": se, "pass": abs(gap) <= SIGMA_BAND * se})
    result["additivity"] = rows
    checks.append(_check("additivity", all(r["pass"] for r in rows)))

    # energy form against the half-space discrepancy
    if args.input:
        if not args.input2:
            raise PreconditionError("crofton-verify with --input also needs --input2")
        pairs = [(_load_sample(args.input, args.model), _load_sample(args.input2, args.model))]
    else:
        pairs = [(Sample.hyperbolic(geometry.random_points_ball(1.0, n, 20, rng)),
                  Sample.hyperbolic(geometry.random_points_ball(1.0, n, 20, rng))) for _ in range(3)]
    rows = []
    for k, (mu1, mu2) in enumerate(pairs):
        if mu1.metric.kind != "hyperbolic" or mu1.dim != n or mu2.dim != n:
            raise PreconditionError(f"crofton-verify needs hyperbolic samples in H^{n}")
        R = crofton.window_radius(np.vstack([mu1.points, mu2.points]))
        disc = crofton.discrepancy_integral(mu1, mu2, _sampler(n, R, N, seed, "crofton-verify.energy", k))
        energy = energetics.energy_form(mu1, mu2)
        se = 2.0 * disc.std_error
        rows.append({"energy": energy, "minus_two_discrepancy": -2.0 * disc.value, "std_error": se,
                     "pass": abs(energy - 2.0 * disc.value) <= SIGMA_BAND * se})
    result["energy_discrepancy"] = rows
    checks.append(_check("energy_discrepancy_identity", all(r["pass"] for r in rows)))

    return _report(args, result, checks, {"sigma_band": SIGMA_BAND, "grid_size": crofton.GRID_SIZE})


def generate(name: str, n: int, dim: int, seed: int, radius: float = 1.0, radius2: float = 1.5,
             scale: float = 0.1) -> tuple[Sample, Sample | None]:
    """Synthetic hyperbolic data; deterministic in ``seed``."""
    if n < 1:
        raise PreconditionError("sample size must be positive")
    if name == "uniform-ball":
        X = geometry.random_points_ball(radius, dim, n, stream(seed, "gen.uniform-ball"))
        return Sample.hyperbolic(X), None
    if name == "two-ball":
        X = geometry.random_points_ball(radius, dim, n, stream(seed, "gen.two-ball", 0))
        Y = geometry.random_points_ball(radius2, dim, n, stream(seed, "gen.two-ball", 1))
        return Sample.hyperbolic(X), Sample.hyperbolic(Y)
    if name == "paired-independent":
        X = geometry.random_points_ball(radius, dim, n, stream(seed, "gen.paired-independent", 0))
        Y = geometry.random_points_ball(radius, dim, n, stream(seed, "gen.paired-independent", 1))
        return Sample.hyperbolic(X), Sample.hyperbolic(Y)
    if name == "paired-dependent":
        if scale < 0:
            raise PreconditionError("isometry noise scale must be nonnegative")
        X = geometry.random_points_ball(radius, dim, n, stream(seed, "gen.paired-dependent", 0))
        rng = stream(seed, "gen.paired-dependent", 1)
        Y = np.array([geometry.apply_many(geometry.random_small_isometry(dim, scale, rng), x)[0] for x in X])
        return Sample.hyperbolic(X), Sample.hyperbolic(Y)
    raise PreconditionError(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}")


def cmd_gen(args) -> dict:
    first, second = generate(args.generator, args.n, args.dim, args.seed, args.radius, args.radius2, args.scale)
    model = args.model or "hyperboloid"
    if not args.out:
        raise PreconditionError("gen needs --out")
    io.emit(first, args.out, model=model)
    files = [args.out]
    if second is not None:
        if not args.out2:
            raise PreconditionError(f"generator {args.generator} writes two files; give --out2")
        io.emit(second, args.out2, model=model)
        files.append(args.out2)
    result = {"generator": args.generator, "files": files, "sizes": [first.size] + ([second.size] if second else [])}
    args_for_report = argparse.Namespace(**{k: v for k, v in vars(args).items()})
    args_for_report.out = None
    return _report(args_for_report, result, [], {})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperstat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hyperstat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, inputs=True):
        if inputs:
            p.add_argument("--input", help="point set or distance matrix (.csv/.json)")
            p.add_argument("--input2", help="second point set")
        p.add_argument("--model", help="model tag when the file does not carry one, or output model for gen")
        p.add_argument("--dim", type=int, default=2)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", help="report path (default: stdout)")

    p = sub.add_parser("check-negtype", help="classify a finite configuration")
    common(p)
    p.add_argument("--tol", type=float, default=1e-9, help="relative eigenvalue tolerance")
    p.add_argument("--expect", choices=[v.value for v in negtype.Verdict])
    p.set_defaults(func=cmd_check_negtype)

    for name, func, helptext in (("energy-test", cmd_energy_test, "two-sample energy permutation test"),
                                 ("dcov-test", cmd_dcov_test, "distance covariance independence test")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--permutations", type=int, default=999)
        p.add_argument("--alpha", type=float, default=0.05)
        p.set_defaults(func=func)

    p = sub.add_parser("crofton-verify", help="Monte Carlo checks of the half-space measure identities")
    common(p)
    p.add_argument("--mc-samples", type=int, default=200_000)
    p.set_defaults(func=cmd_crofton_verify)

    p = sub.add_parser("gen", help="write synthetic samples")
    p.add_argument("generator", choices=GENERATORS)
    common(p, inputs=False)
    p.add_argument("--out2", help="second output file for two-sample / paired generators")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--radius2", type=float, default=1.5)
    p.add_argument("--scale", type=float, default=0.1, help="isometry noise scale (paired-dependent)")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "mc_samples", 2) < 2 or getattr(args, "permutations", 99) < 1 or args.seed < 0:
        print("hyperstat: budgets must be positive and the seed nonnegative", file=sys.stderr)
        return 3
    try:
        report = args.func(args)
    except HyperstatError as exc:
        print(f"hyperstat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    out = None if args.command == "gen" else args.out
    text = io.write_json(report, out)
    if out is None:
        sys.stdout.write(text)
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
