"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line.  Criteria 3-7, 9 and 10
share one default ``validate`` run in a subprocess.
"""
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from extremal_bases.counterexample import (CounterexampleParams, R_value, in_T,
                                           lemma_equivalence_scan, run_counterexample, sample_T)
from extremal_bases.distances import disc_distance
from extremal_bases.harness import random_domain, sample_point
from extremal_bases.domains import DiagonalQuadric
from oracles import quadric_disc, quadric_ray


@pytest.fixture
def report_line(capsys):
    """Print one verdict line past pytest's capture, then assert it."""
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail
    return emit


def _max(checks, prefix):
    vals = [c["max_ratio"] for c in checks if c["name"].startswith(prefix)]
    assert vals, f"no checks named {prefix}*"
    return max(vals)


@pytest.fixture(scope="module")
def validate_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("validate")
    t0 = time.perf_counter()
    res = subprocess.run([sys.executable, "-m", "extremal_bases", "validate", "--out", str(out)],
                         capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return res.returncode, elapsed, report, res.stderr


@pytest.fixture(scope="module")
def checks(validate_run):
    report = validate_run[2]
    assert report is not None, validate_run[3]
    return report["checks"]


def test_criterion_1_counterexample(rng, report_line):
    t0 = time.perf_counter()
    params = CounterexampleParams(0.75, 0.25, 0.1)
    rep = run_counterexample(params)
    B = sample_T(params, 1000, rng)
    r_err = max(abs(R_value(b, params) - 1.0) for b in B)
    elapsed = time.perf_counter() - t0
    res = rep["a_hat_in_T"]
    ok = (abs(rep["m1"] - 0.9) <= 1e-10 and rep["a1_phase_error"] <= 1e-10
          and r_err <= 1e-9 and rep["R_b_star"] < 1 - 1e-3
          and rep["R_a_hat"] <= 0.875 + 1e-6
          and not res["equations"] and not res["characterization"]
          and min(res["residuals"].values()) > 1e-3
          and rep["residual_2_3"] > 1e-3 and rep["verdict"] == "PROPERTY_STAR_FAILS"
          and elapsed < 10.0)
    report_line(1, ok, f"m1={rep['m1']:.12g} R(b*)={rep['R_b_star']:.6g} R(a_hat)={rep['R_a_hat']:.9g} "
                   f"max|R-1| on T={r_err:.1e} residual(2,3)={rep['residual_2_3']:.5g} "
                   f"{rep['verdict']} {elapsed:.2f}s")


def test_criterion_2_T_equivalence(report_line):
    t0 = time.perf_counter()
    agree, bad, undecided = lemma_equivalence_scan(CounterexampleParams(), 100_000, seed=0,
                                                   near=1000)
    elapsed = time.perf_counter() - t0
    ok = not bad and agree + undecided == 101_000 and elapsed < 10.0
    report_line(2, ok, f"agree={agree} undecided={undecided} disagreements={len(bad)} {elapsed:.2f}s")


def test_criterion_3_minimal_tangency(checks, report_line):
    worst = _max(checks, "tangency_minimal")
    counts = [c["samples"] + c["rejected"] for c in checks if c["name"].startswith("tangency_minimal")]
    ok = worst <= 1e-6 and len(counts) == 2 and min(counts) >= 250
    report_line(3, ok, f"max residual={worst:.2e} over {counts} samples")


def test_criterion_4_prop1(checks, report_line):
    worst, ball = _max(checks, "prop1"), _max(checks, "ball_ratio")
    report_line(4, worst <= 20 and ball <= 1e-7, f"max ratio={worst:.4g} ball deviation={ball:.1e}")


def test_criterion_5_prop2(checks, report_line):
    worst, perm, b = _max(checks, "prop2"), _max(checks, "permutation"), _max(checks, "b_ratio")
    # the permutation statistic is 1/(n! prod); it stays <= 1 exactly, up to rounding
    ok = worst <= 20 and perm <= 1.0 + 1e-12 and b <= 10
    report_line(5, ok, f"max A/E={worst:.4g} perm statistic={perm:.6g} b ratio={b:.4g}")


def test_criterion_6_disc_vs_E(checks, report_line):
    worst, ball = _max(checks, "disc_vs_E"), _max(checks, "ball_disc_vs_E")
    report_line(6, worst <= 20 and ball <= 1e-7, f"max E*d ratio={worst:.4g} ball deviation={ball:.1e}")


def test_criterion_7_mixed(checks, report_line):
    worst, match = _max(checks, "mixed_prop"), _max(checks, "mixed_minimal_match")
    ks = sorted({c["name"] for c in checks if c["name"].startswith("mixed_prop")})
    ok = worst <= 20 and match <= 1e-6 and len(ks) == 2 * (2 + 3)
    report_line(7, ok, f"max ratio={worst:.4g} k=n-1 radius gap={match:.1e} checks={len(ks)}")


def test_criterion_8_oracles(report_line):
    rng = np.random.default_rng(8)
    worst_disc = worst_ray = 0.0
    for _ in range(1000):
        D = random_domain(int(rng.integers(2, 4)), rng)
        while not isinstance(D, DiagonalQuadric):
            D = random_domain(D.n, rng)
        q = sample_point(D, rng.uniform(0.0, 0.99), rng)
        a = rng.standard_normal(D.n) + 1j * rng.standard_normal(D.n)
        a /= np.linalg.norm(a)
        ref = quadric_disc(D, q, a)
        worst_disc = max(worst_disc, abs(disc_distance(D, q, a) - ref) / ref)
        t = D.ray_distance(q, a)
        worst_ray = max(worst_ray, abs(t - D.ray_distance(q, a, method="bisect")),
                        abs(t - quadric_ray(D, q, a)))
    ok = worst_disc <= 1e-8 and worst_ray <= 1e-10
    report_line(8, ok, f"disc rel error={worst_disc:.1e} ray abs error={worst_ray:.1e}")


def test_criterion_9_structural(checks, report_line):
    worst = _max(checks, "structural")
    report_line(9, worst <= 1.0, f"worst violation / tolerance={worst:.3g}")


def test_criterion_10_validate(validate_run, report_line):
    code, elapsed, report, _ = validate_run
    ok = code == 0 and elapsed < 300 and report is not None and report["passed"]
    report_line(10, ok, f"exit code={code} runtime={elapsed:.1f}s")
