import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_complex, random_unit
from extremal_bases.bases import maximal_basis, minimal_basis, reorder_maximal
from extremal_bases.distances import disc_distance
from extremal_bases.domains import GeneralizedEllipsoid, unit_ball
from extremal_bases.exceptions import BasisKindError, DimensionError
from extremal_bases.harness import random_domain, sample_point
from extremal_bases.linalg import change_of_basis
from extremal_bases.metrics import (A_metric, E_metric, basis_matrix_audit, basis_norm,
                                    evaluate_metrics, inv_disc_direction, kernel_proxies)


@pytest.fixture(scope="module")
def case():
    rng = np.random.default_rng(5)
    D = random_domain(3, rng)
    q = sample_point(D, 0.7, rng)
    return D, q, minimal_basis(D, q), reorder_maximal(maximal_basis(D, q))


def test_kind_checks(case):
    D, q, bmin, bmax = case
    X = np.ones(3)
    with pytest.raises(BasisKindError):
        E_metric(bmax, X)
    with pytest.raises(BasisKindError):
        A_metric(bmin, X)
    with pytest.raises(BasisKindError):
        A_metric(reorder_maximal(bmax), X)
    with pytest.raises(BasisKindError):
        basis_matrix_audit(reorder_maximal(bmax), bmin)


def test_direction_validation(case):
    _, _, bmin, _ = case
    with pytest.raises(DimensionError):
        E_metric(bmin, np.ones(2))
    with pytest.raises(ValueError):
        E_metric(bmin, np.zeros(3))


def test_bases_must_share_point(case):
    D, q, bmin, _ = case
    other = reorder_maximal(maximal_basis(D, 0.5 * q))
    with pytest.raises(ValueError):
        kernel_proxies(bmin, other)


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_absolute_homogeneity(case, seed, log_scale):
    D, q, bmin, bmax = case
    rng = np.random.default_rng(seed)
    X = random_complex(rng, 3)
    lam = math.exp(log_scale) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    for f in (lambda Y: E_metric(bmin, Y), lambda Y: A_metric(bmax, Y)):
        assert f(lam * X) == pytest.approx(abs(lam) * f(X), rel=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_triangle_inequality(case, seed):
    _, _, bmin, bmax = case
    rng = np.random.default_rng(seed)
    X, Y = random_complex(rng, 3), random_complex(rng, 3)
    for b in (bmin, bmax):
        assert basis_norm(b, X + Y) <= basis_norm(b, X) + basis_norm(b, Y) + 1e-12


def test_inv_disc_homogeneity(case, rng):
    D, q, _, _ = case
    X = random_complex(rng, 3)
    assert inv_disc_direction(D, q, 2.5j * X) == pytest.approx(2.5 * inv_disc_direction(D, q, X),
                                                               rel=1e-10)


def test_ball_center_values():
    D = unit_ball(3, radius=2.0)
    q = np.zeros(3)
    bmin, bmax = minimal_basis(D, q), reorder_maximal(maximal_basis(D, q))
    e = np.array([0, 1, 0], dtype=complex)
    assert E_metric(bmin, e) == pytest.approx(0.5, abs=1e-12)
    assert A_metric(bmax, e) == pytest.approx(0.5, abs=1e-12)
    assert inv_disc_direction(D, q, e) == pytest.approx(0.5, abs=1e-12)
    s, m = kernel_proxies(bmin, bmax)
    assert s == pytest.approx(1 / 64, rel=1e-12) and m == pytest.approx(1 / 64, rel=1e-12)


def test_ellipsoid_metric_in_axis_direction():
    D = GeneralizedEllipsoid([0.25, 1.0], [1, 1])
    bmin = minimal_basis(D, np.zeros(2))
    assert E_metric(bmin, [1, 0]) == pytest.approx(0.5, abs=1e-10)
    assert E_metric(bmin, [0, 1]) == pytest.approx(1.0, abs=1e-10)


def test_audit_against_brute_force(case):
    _, _, bmin, bmax = case
    audit = basis_matrix_audit(bmax, bmin)
    B = np.array([[np.vdot(e, a) for e in bmin.vectors] for a in bmax.vectors]).conj()
    assert np.allclose(np.abs(B), np.abs(change_of_basis(bmax.vectors, bmin.vectors)), atol=1e-12)
    s = bmin.radii
    ratio = max(abs(B[j, k]) * s[j] / s[k] for j in range(3) for k in range(3))
    assert audit.b_ratio == pytest.approx(ratio, rel=1e-12)
    from itertools import permutations
    best = max(np.prod([abs(B[j, p[j]]) for j in range(3)]) for p in permutations(range(3)))
    assert audit.perm_product == pytest.approx(best, rel=1e-12)
    assert audit.perm_product >= audit.perm_floor == pytest.approx(1 / 6)
    assert np.prod([abs(B[j, audit.permutation[j]]) for j in range(3)]) == pytest.approx(best)
    assert audit.c_ratio >= 0 and set(audit.to_dict()) >= {"b_ratio", "c_ratio", "perm_product"}


def test_evaluate_metrics(case, rng):
    D, q, bmin, bmax = case
    X = random_unit(rng, 3)
    ev = evaluate_metrics(D, bmin, bmax, X)
    assert ev.E == E_metric(bmin, X) and ev.A == A_metric(bmax, X)
    assert ev.inv_disc == pytest.approx(1 / disc_distance(D, q, X), rel=1e-12)
    assert ev.s_product == pytest.approx(np.prod(bmin.radii))
