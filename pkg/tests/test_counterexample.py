import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_unit
from extremal_bases.counterexample import (B_STAR, CounterexampleParams, R_value, T_residuals,
                                           in_T, lemma_equivalence_scan, make_domains,
                                           run_counterexample, sample_T)
from extremal_bases.distances import disc_distance
from extremal_bases.exceptions import DimensionError
from oracles import R_grid

P = CounterexampleParams()


@pytest.fixture(scope="module")
def report():
    return run_counterexample(P)


def test_R_is_one_on_T(rng):
    B = sample_T(P, 1000, rng)
    R = np.array([R_value(b, P) for b in B])
    assert np.max(np.abs(R - 1.0)) <= 1e-9
    r_eq, r_char = T_residuals(B, P)
    assert r_eq.max() <= 1e-12 and r_char.max() <= 1e-12


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.9), st.floats(0.05, 0.9))
def test_R_matches_phase_grid(seed, x, y):
    b1, b2 = max(x, y), min(x, y)
    if b1 - b2 < 1e-3:
        b1 = min(b2 + 0.05, 0.95)
    params = CounterexampleParams(b1, b2, 0.1)
    b = random_unit(np.random.default_rng(seed), 2)
    refined, _ = R_grid(b, b1, b2)
    assert R_value(b, params) == pytest.approx(refined, abs=1e-9)


def test_R_and_disc_distance_agree(rng):
    _, D0 = make_domains(P)
    for _ in range(20):
        b = random_unit(rng, 2)
        assert disc_distance(D0, np.zeros(2), b) == pytest.approx(1 / math.sqrt(R_value(b, P)),
                                                                  rel=1e-10)


def test_b_star_value():
    assert R_value(B_STAR, P) == pytest.approx(0.875, abs=1e-12)
    assert not any(in_T(B_STAR, P)[:2])


def test_in_T_on_branches():
    for b in ([0, 1j], [1j, 0], [0.6, 0.8]):
        eq, char, _ = in_T(np.array(b, dtype=complex), P)
        assert eq and char


def test_scan_has_no_disagreement():
    agree, bad, undecided = lemma_equivalence_scan(P, 5000, seed=3)
    assert bad == []
    assert agree + undecided == 6000 and agree > 5000


def test_reproduction(report):
    assert report["m1"] == pytest.approx(0.9, abs=1e-10)
    assert report["a1_phase_error"] <= 1e-10
    assert report["R_b_star"] < 1 - 1e-3
    assert report["R_a_hat"] <= 0.875 + 1e-6
    res = report["a_hat_in_T"]
    assert not res["equations"] and not res["characterization"]
    assert min(res["residuals"].values()) > 1e-3
    assert report["residual_2_3"] > 1e-3
    assert report["verdict"] == "PROPERTY_STAR_FAILS"


@pytest.mark.parametrize("delta", [0.3, 0.7])
def test_other_heights(delta):
    rep = run_counterexample(CounterexampleParams(delta=delta))
    assert rep["m1"] == pytest.approx(1 - delta, abs=1e-10)
    assert rep["verdict"] == "PROPERTY_STAR_FAILS"


@pytest.mark.parametrize("kw", [dict(beta1=0.2, beta2=0.5), dict(beta1=1.0), dict(beta2=0.0),
                                dict(delta=1.0), dict(delta=float("nan"))])
def test_parameter_validation(kw):
    with pytest.raises(ValueError):
        CounterexampleParams(**kw)


def test_argument_validation():
    with pytest.raises(DimensionError):
        R_value(np.ones(3), P)
    with pytest.raises(ValueError):
        in_T(np.zeros(2), P)
    with pytest.raises(ValueError):
        in_T(np.ones(2), P, tol=0)
    with pytest.raises(ValueError):
        lemma_equivalence_scan(P, 0)
