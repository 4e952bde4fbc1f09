"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test records a short measurement summary with ``record_property``; the
terminal summary hook in ``conftest.py`` prints one PASS/FAIL line per
criterion.
"""

import json
import math
import time

import numpy as np
import pytest

from hyperstat import cli, crofton, geometry, negtype
from hyperstat.crofton import CroftonSampler
from hyperstat.energetics import Sample, energy_form
from hyperstat.negtype import Verdict
from hyperstat.rng import stream

pytestmark = pytest.mark.acceptance

N_CUT = 200_000
N_DISC = 1_000_000
PERMUTATIONS = 500
ALPHA = 0.05


def cut_pairs(n):
    """20 pairs in H^n at distances linspace(0.1, 3, 20), placed by random isometries."""
    rng = stream(2024, "acceptance.pairs", n)
    pairs = []
    for d in np.linspace(0.1, 3.0, 20):
        u = geometry.random_direction(n, rng)
        p = np.concatenate([[math.cosh(d)], math.sinh(d) * u])
        h = geometry.random_isometry(n, rng, max_boost=1.0)
        x = geometry.HyperboloidPoint(geometry.apply_many(h, geometry.origin(n).coords)[0])
        y = geometry.HyperboloidPoint(geometry.apply_many(h, p)[0])
        pairs.append((x, y))
    return pairs


def cut_estimates(n, orientation):
    out = []
    for k, (x, y) in enumerate(cut_pairs(n)):
        d = geometry.dist(x, y)
        s = CroftonSampler(n, 0.75 * d, N_CUT, seed=1000 * n + k)
        out.append((d, crofton.cut_measure(x, y, s, orientation=orientation, recenter=True)))
    return out


def test_criterion_01_crofton_normalization(record_property):
    start = time.perf_counter()
    worst_z, worst_se = 0.0, 0.0
    failures = []
    for n in (2, 3):
        for d, est in cut_estimates(n, "one"):
            z = abs(est.value - d / 2) / est.std_error
            se_ratio = est.std_error / (0.01 * max(1.0, d))
            worst_z, worst_se = max(worst_z, z), max(worst_se, se_ratio)
            if z > 3 or se_ratio > 1:
                failures.append((n, d, est))
    elapsed = time.perf_counter() - start
    record_property("summary", f"max |z| = {worst_z:.2f}, max se / bound = {worst_se:.2f}, {elapsed:.1f} s")
    assert not failures
    assert elapsed <= 60


def test_criterion_02_embedding_identity(record_property):
    worst = 0.0
    for n in (2, 3):
        for d, est in cut_estimates(n, "both"):
            z = abs(est.value - d) / est.std_error
            worst = max(worst, z)
            assert z <= 3, (n, d, est)
    record_property("summary", f"max |z| = {worst:.2f} over 40 pairs")


def test_criterion_03_energy_discrepancy_identity(record_property):
    worst_z, worst_rel = 0.0, 0.0
    for k in range(10):
        rng = stream(k, "acceptance.energy")
        mu1 = Sample.hyperbolic(geometry.random_points_ball(1.0, 2, 20, rng))
        mu2 = Sample.hyperbolic(geometry.random_points_ball(1.0, 2, 20, rng))
        R = crofton.window_radius(np.vstack([mu1.points, mu2.points]))
        disc = crofton.discrepancy_integral(mu1, mu2, CroftonSampler(2, R, N_DISC, seed=k))
        energy = energy_form(mu1, mu2)
        gap = abs(energy + 2.0 * (-disc.value))
        z = gap / (2.0 * disc.std_error)
        rel = gap / energy
        worst_z, worst_rel = max(worst_z, z), max(worst_rel, rel)
        assert z <= 3, (k, energy, disc)
        assert rel <= 0.02, (k, energy, disc)
    record_property("summary", f"max |z| = {worst_z:.2f}, max relative gap = {worst_rel:.4f}")


def test_criterion_04_hyperbolic_strictness(record_property):
    rng = stream(4, "acceptance.strict")
    worst = math.inf
    done = 0
    while done < 100:
        X = geometry.random_points_ball(2.0, 2, 10, rng)
        D = geometry.pairwise_dist(X)
        if np.min(D[~np.eye(10, dtype=bool)]) < 0.05:
            continue
        rep = negtype.classify(negtype.DistanceMatrix(D))
        ratio = rep.eigenvalues[1] / rep.eigenvalues[-1]
        worst = min(worst, ratio)
        assert rep.verdict is Verdict.STRICT
        assert rep.eigenvalues[1] > 1e-10 * rep.eigenvalues[-1]
        done += 1
    record_property("summary", f"min second eigenvalue / max = {worst:.3e}")


def test_criterion_05_l1_square(record_property):
    D = negtype.distance_matrix(negtype.l1_square(), "l1")
    assert abs(negtype.quad_form(D, [1, 1, -1, -1])) <= 1e-12
    rep = negtype.classify(D)
    assert rep.verdict is Verdict.NEGATIVE_TYPE_NONSTRICT
    v = np.array([1.0, 1.0, -1.0, -1.0]) / 2
    w = rep.witness / np.linalg.norm(rep.witness)
    angle = math.atan2(np.linalg.norm(w - (w @ v) * v), w @ v)
    record_property("summary", f"witness angle = {angle:.1e}")
    assert angle < 1e-6


def test_criterion_06_snowflake(record_property):
    D = negtype.distance_matrix(negtype.l1_square(), "l1")
    rep = negtype.classify(negtype.snowflake(D, 0.5))
    record_property("summary", f"verdict {rep.verdict.value}, hyperplane min eigenvalue {rep.hyperplane_min:.3f}")
    assert rep.verdict is Verdict.STRICT


def _cli_p_value(tmp_path, command, generator, seed, extra=()):
    a, b = tmp_path / f"{generator}-{seed}-a.csv", tmp_path / f"{generator}-{seed}-b.csv"
    assert cli.main(["gen", generator, "--n", str(extra[0]), "--seed", str(seed), "--out", str(a),
                     "--out2", str(b), *extra[1:]]) == 0
    rep_path = tmp_path / f"{command}-{generator}-{seed}.json"
    code = cli.main([command, "--input", str(a), "--input2", str(b), "--permutations", str(PERMUTATIONS),
                     "--seed", str(seed), "--alpha", str(ALPHA), "--out", str(rep_path)])
    assert code == 0
    return json.loads(rep_path.read_text())["result"]["p_value"]


def test_criterion_07_dcov_consistency(tmp_path, record_property, capsys):
    start = time.perf_counter()
    power = sum(_cli_p_value(tmp_path, "dcov-test", "paired-dependent", s, (100, "--scale", "0.5")) < ALPHA
                for s in range(20))
    size = sum(_cli_p_value(tmp_path, "dcov-test", "paired-independent", 100 + s, (100,)) < ALPHA
               for s in range(40))
    elapsed = time.perf_counter() - start
    capsys.readouterr()
    record_property("summary", f"dependent rejected {power}/20, independent rejected {size}/40, {elapsed:.1f} s")
    assert power >= 18
    assert size <= 6
    assert elapsed <= 120


def test_criterion_08_energy_power(tmp_path, record_property, capsys):
    power = sum(_cli_p_value(tmp_path, "energy-test", "two-ball", s, (200, "--radius", "1", "--radius2", "1.5"))
                < ALPHA for s in range(20))
    size = sum(_cli_p_value(tmp_path, "energy-test", "two-ball", 100 + s, (200, "--radius", "1", "--radius2", "1"))
               < ALPHA for s in range(40))
    capsys.readouterr()
    record_property("summary", f"R=1 vs 1.5 rejected {power}/20, identical rejected {size}/40")
    assert power >= 18
    assert size <= 6


def _klein_ball(n, size, rng, rmax=0.99):
    r = rmax * rng.random(size) ** (1.0 / n)
    return geometry.random_direction(n, rng, size) * r[:, None]


def test_criterion_09_model_consistency(record_property):
    rng = stream(9, "acceptance.models")
    worst_rel = 0.0
    for k in range(10_000):
        n = 2 + k % 2
        a, b = _klein_ball(n, 2, rng)
        ka, kb = geometry.KleinPoint(a), geometry.KleinPoint(b)
        d_klein = geometry.dist_klein(ka, kb)
        d_hyp = geometry.dist(geometry.convert(ka, "hyperboloid"), geometry.convert(kb, "hyperboloid"))
        d_poin = geometry.dist_poincare(geometry.convert(ka, "poincare"), geometry.convert(kb, "poincare"))
        rel = max(abs(d_klein - d_hyp), abs(d_poin - d_hyp), abs(d_klein - d_poin)) / d_hyp
        worst_rel = max(worst_rel, rel)
        assert rel <= 1e-10, (a, b)
    worst_iso = 0.0
    for k in range(1_000):
        n = 2 + k % 2
        h = geometry.random_isometry(n, rng)
        x, y = (geometry.HyperboloidPoint(p) for p in geometry.random_points_ball(2.0, n, 2, rng))
        err = abs(geometry.dist(geometry.apply(h, x), geometry.apply(h, y)) - geometry.dist(x, y))
        worst_iso = max(worst_iso, err)
        assert err <= 1e-9
    record_property("summary", f"max relative model gap = {worst_rel:.1e}, max isometry error = {worst_iso:.1e}")


def test_criterion_10_projection_gap(record_property):
    K = _klein_ball(2, 25, stream(10, "acceptance.cw"), rmax=0.9)
    U = geometry.random_direction(2, stream(11, "acceptance.cw"), 100)
    assert crofton.cw_projection_gap(K, K.copy(), U) == 0.0
    a, b = np.array([[0.5, 0.0]]), np.array([[-0.5, 0.0]])
    g1 = crofton.cw_projection_gap(a, b, [[1.0, 0.0]])
    g2 = crofton.cw_projection_gap(a, b, [[0.0, 1.0]])
    record_property("summary", f"equal samples 0, two atoms e1 -> {g1}, e2 -> {g2}")
    assert g1 == 1.0 and g2 == 0.0
