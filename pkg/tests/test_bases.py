import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_unit
from extremal_bases.bases import (check_basis, first_step, maximal_basis, minimal_basis,
                                  mixed_basis, reorder_maximal, tangency_residuals)
from extremal_bases.counterexample import CounterexampleParams, make_domains
from extremal_bases.distances import SearchOptions, disc_distance, euclidean_distance
from extremal_bases.domains import DiagonalQuadric, GeneralizedEllipsoid, unit_ball
from extremal_bases.exceptions import BasisKindError, NearBoundaryError, OutsideDomainError
from extremal_bases.harness import random_domain, sample_point
from extremal_bases.linalg import gram_error, orthocomplement, random_unitary

B_STAR_DISC = 1.0 / math.sqrt(0.875)


def _case(seed, n=3, depth=None):
    rng = np.random.default_rng(seed)
    D = random_domain(n, rng)
    frac = 1.0 - (depth if depth is not None else [0.5, 0.1, 0.01][seed % 3])
    return D, sample_point(D, frac, rng), rng


# ------------------------------------------------------------- examples
def test_ball_radii_all_one():
    D = unit_ball(2)
    for b in (maximal_basis(D, np.zeros(2)), minimal_basis(D, np.zeros(2)),
              mixed_basis(D, np.zeros(2), 0)):
        assert np.allclose(b.radii, 1.0, atol=1e-14)
        assert gram_error(b.vectors) < 1e-12


def test_counterexample_maximal_first_steps():
    params = CounterexampleParams()
    D, _ = make_domains(params)
    b = maximal_basis(D, params.q)
    assert b.radii[0] == pytest.approx(0.9, abs=1e-10)
    assert abs(b.vectors[0][2]) == pytest.approx(1.0, abs=1e-10)
    assert b.radii[1] >= math.sqrt(1 - 0.01) * B_STAR_DISC - 1e-6
    assert b.steps == ("nearest", "widest", "forced")


def test_minimal_basis_of_simple_ellipsoid():
    D = GeneralizedEllipsoid([0.25, 1.0], [1, 1])
    b = minimal_basis(D, np.zeros(2))
    assert np.allclose(b.radii, [1.0, 2.0], atol=1e-12)
    assert abs(b.vectors[0][1]) == pytest.approx(1.0, abs=1e-10)


def test_minimal_first_radius_on_D0():
    D0 = make_domains(CounterexampleParams())[1]
    assert minimal_basis(D0, np.zeros(2)).radii[0] == pytest.approx(1.0, abs=1e-12)


def test_mixed_k0_on_D0_reaches_b_star_bound():
    D0 = make_domains(CounterexampleParams())[1]
    b = mixed_basis(D0, np.zeros(2), 0)
    assert b.radii[0] >= B_STAR_DISC - 1e-6
    assert b.steps == ("widest", "forced")


def test_mixed_extremes_match_minimal_and_maximal():
    for seed in range(4):
        D, q, _ = _case(seed)
        f = first_step(D, q)
        assert np.allclose(mixed_basis(D, q, 2, first=f).radii, minimal_basis(D, q, first=f).radii,
                           rtol=0, atol=1e-7)
        assert np.allclose(mixed_basis(D, q, 1, first=f).radii, maximal_basis(D, q, first=f).radii,
                           rtol=0, atol=1e-7)


def test_mixed_rejects_bad_k():
    D = unit_ball(3)
    for k in (-1, 3, 1.5, True):
        with pytest.raises(ValueError):
            mixed_basis(D, np.zeros(3), k)


# ----------------------------------------------------------- invariants
@pytest.mark.parametrize("seed", range(8))
def test_structural_invariants(seed):
    D, q, _ = _case(seed, n=2 + seed % 2)
    d, _ = euclidean_distance(D, q)
    for b in (minimal_basis(D, q), maximal_basis(D, q), mixed_basis(D, q, 0)):
        assert check_basis(D, b, d if b.steps[0] == "nearest" else None) == {}
        assert gram_error(b.vectors) <= 1e-10
        assert max(abs(D.defining_value(p)) for p in b.boundary_points) <= 1e-8
        assert np.allclose(b.boundary_points, q + b.radii[:, None] * b.vectors)


@pytest.mark.parametrize("seed", range(6))
def test_first_radius_is_euclidean_distance(seed):
    D, q, _ = _case(seed)
    d, _ = euclidean_distance(D, q)
    assert minimal_basis(D, q).radii[0] == pytest.approx(d, abs=1e-8)
    assert maximal_basis(D, q).radii[0] == pytest.approx(d, abs=1e-8)


@pytest.mark.parametrize("seed", range(6))
def test_step_dominance(seed):
    D, q, rng = _case(seed)
    bmin = minimal_basis(D, q)
    bmax = maximal_basis(D, q)
    for j in range(1, D.n - 1):
        for basis, sign in ((bmin, 1.0), (bmax, -1.0)):
            F = orthocomplement(basis.vectors[:j], D.n)
            for _ in range(100):
                w = random_unit(rng, F.shape[0]) @ F
                d = disc_distance(D, q, w)
                assert sign * (basis.radii[j] - d) <= 1e-8


@pytest.mark.parametrize("seed", range(4))
def test_radii_stable_across_seeds(seed):
    D, q, _ = _case(seed)
    for build in (minimal_basis, maximal_basis):
        r = [build(D, q, SearchOptions(seed=s)).radii for s in (0, 1, 2)]
        assert np.max(np.ptp(r, axis=0)) <= 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_unitary_equivariance(seed):
    D, q, rng = _case(seed)
    U = random_unitary(D.n, rng)
    DU = D.rotated(U)
    for build in (minimal_basis, maximal_basis):
        assert np.allclose(build(DU, U @ q).radii, build(D, q).radii, rtol=0, atol=1e-7)


@pytest.mark.parametrize("seed", range(4))
def test_dilation_scales_radii(seed):
    D, q, rng = _case(seed)
    lam = float(np.exp(rng.uniform(-2, 2)))
    for build in (minimal_basis, maximal_basis):
        r = build(D, q).radii
        assert np.allclose(build(D.scaled(lam), lam * q).radii, lam * r, rtol=1e-9, atol=0)


def test_same_seed_is_deterministic():
    D, q, _ = _case(11)
    a = maximal_basis(D, q, SearchOptions(seed=4))
    b = maximal_basis(D, q, SearchOptions(seed=4))
    assert np.array_equal(a.vectors, b.vectors) and np.array_equal(a.radii, b.radii)


# ------------------------------------------------------------ reordering
def test_reorder_is_involution_and_sorts():
    D, q, _ = _case(2)
    b = maximal_basis(D, q)
    r = reorder_maximal(b)
    assert r.reordered and not reorder_maximal(r).reordered
    assert np.array_equal(r.radii, b.radii[[0, 2, 1]])
    assert np.array_equal(reorder_maximal(r).vectors, b.vectors)
    assert np.all(np.diff(r.radii[1:]) >= -1e-9)
    assert check_basis(D, r) == {}


def test_reorder_two_dimensional_is_identity():
    D, q, _ = _case(0, n=2)
    b = maximal_basis(D, q)
    assert np.array_equal(reorder_maximal(b).vectors, b.vectors)


def test_reorder_refuses_other_kinds():
    with pytest.raises(BasisKindError):
        reorder_maximal(minimal_basis(unit_ball(2), np.zeros(2)))


# ------------------------------------------------------------- tangency
@pytest.mark.parametrize("seed", range(8))
def test_minimal_bases_are_tangent(seed):
    D, q, _ = _case(seed, n=2 + seed % 2)
    R = tangency_residuals(D, minimal_basis(D, q))
    assert R.max() <= 1e-6
    assert np.all(np.tril(R) == 0.0)


def test_ball_tangency_is_exact(rng):
    D = unit_ball(3)
    q = 0.4 * random_unit(rng, 3)
    assert tangency_residuals(D, minimal_basis(D, q)).max() <= 1e-8


def test_counterexample_maximal_basis_is_not_tangent():
    params = CounterexampleParams()
    D, _ = make_domains(params)
    assert tangency_residuals(D, maximal_basis(D, params.q))[1, 2] > 1e-3


# ----------------------------------------------------------------- errors
def test_outside_and_near_boundary_points():
    D = unit_ball(2)
    with pytest.raises(OutsideDomainError):
        minimal_basis(D, np.array([1.5, 0.0]))
    with pytest.raises(NearBoundaryError):
        maximal_basis(D, np.array([1.0 - 1e-8, 0.0]))
    with pytest.raises(NearBoundaryError):
        mixed_basis(D, np.array([1.0 - 1e-8, 0.0]), 0)


def test_to_dict_is_json_ready():
    import json
    D, q, _ = _case(1)
    d = mixed_basis(D, q, 1).to_dict()
    assert d["kind"] == "mixed:1"
    json.dumps(d)
