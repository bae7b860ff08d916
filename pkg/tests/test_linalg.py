import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_complex, random_unit
from extremal_bases.exceptions import DimensionError, NotFullBasisError, RankDeficiencyError
from extremal_bases.linalg import (change_of_basis, from_real, gram_error, gram_schmidt,
                                   hermitian_inner, orthocomplement, permutation_bound,
                                   random_unitary, real_matrix, to_real, unitary_error)

seeds = st.integers(0, 2**32 - 1)


def test_inner_product_is_linear_in_first_slot():
    u = np.array([1.0, 1j])
    v = np.array([1j, 2.0])
    assert hermitian_inner(2j * u, v) == pytest.approx(2j * hermitian_inner(u, v))
    assert hermitian_inner(u, u) == pytest.approx(2.0)


def test_real_layout_roundtrip(rng):
    z = random_complex(rng, 5)
    x = to_real(z)
    assert x.shape == (10,)
    assert np.array_equal(x[0::2], z.real) and np.array_equal(x[1::2], z.imag)
    assert np.array_equal(from_real(x), z)


def test_real_matrix_represents_complex_product(rng):
    M = random_complex(rng, 3, 4)
    z = random_complex(rng, 4)
    assert np.allclose(real_matrix(M) @ to_real(z), to_real(M @ z), atol=1e-14)


@given(seeds, st.integers(1, 6))
def test_gram_schmidt_orthonormal_and_same_span(seed, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n + 1))
    A = random_complex(rng, k, n)
    Q = gram_schmidt(A)
    assert gram_error(Q) < 1e-12
    # each input lies in the span of the output
    assert np.allclose(Q.T @ (Q.conj() @ A.T), A.T, atol=1e-10)


def test_gram_schmidt_reports_dependent_index():
    A = np.array([[1, 0, 0], [0, 1, 0], [1, 1, 0]], dtype=complex)
    with pytest.raises(RankDeficiencyError) as exc:
        gram_schmidt(A)
    assert exc.value.index == 2


def test_gram_schmidt_ill_conditioned_still_orthonormal():
    eps = 1e-8
    A = np.array([[1, eps, 0], [1, 0, eps], [1, 0, 0]], dtype=complex)
    Q = gram_schmidt(A)
    assert gram_error(Q) < 1e-10


@given(seeds, st.integers(2, 6))
def test_orthocomplement_completes_a_basis(seed, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n))
    F = gram_schmidt(random_complex(rng, k, n))
    C = orthocomplement(F, n)
    assert C.shape == (n - k, n)
    assert unitary_error(np.vstack([F, C])) < 1e-10


def test_orthocomplement_of_full_basis_is_empty(rng):
    U = random_unitary(3, rng)
    assert orthocomplement(U, 3).shape == (0, 3)


def test_orthocomplement_dimension_mismatch():
    with pytest.raises(DimensionError):
        orthocomplement(np.eye(2, dtype=complex), 3)


@given(seeds, st.integers(1, 5))
def test_random_unitary_is_unitary(seed, n):
    U = random_unitary(n, np.random.default_rng(seed))
    assert unitary_error(U) < 1e-12


def test_change_of_basis_entries(rng):
    A = random_unitary(3, rng)
    E = random_unitary(3, rng)
    B = change_of_basis(A, E)
    for j, k in itertools.product(range(3), range(3)):
        assert B[j, k] == pytest.approx(np.vdot(E[k], A[j]))
    assert unitary_error(B) < 1e-12
    assert np.allclose(B @ E, A, atol=1e-12)


def test_change_of_basis_needs_full_bases(rng):
    A = random_unitary(3, rng)
    with pytest.raises(NotFullBasisError):
        change_of_basis(A[:2], A)


def _brute_permutation(B):
    n = B.shape[0]
    return max(np.prod([abs(B[j, s[j]]) for j in range(n)])
               for s in itertools.permutations(range(n)))


@given(seeds, st.integers(1, 5))
def test_permutation_bound_matches_brute_force(seed, n):
    U = random_unitary(n, np.random.default_rng(seed))
    value, sigma = permutation_bound(U)
    assert value == pytest.approx(_brute_permutation(U), rel=1e-10)
    assert sorted(sigma) == list(range(n))
    assert value >= 1.0 / math.factorial(n) * (1 - 1e-12)


def test_permutation_bound_identity_and_flat():
    assert permutation_bound(np.eye(3))[0] == pytest.approx(1.0)
    F = np.fft.fft(np.eye(4)) / 2.0
    assert permutation_bound(F)[0] == pytest.approx(1.0 / 16.0)


def test_unit_helper(rng):
    v = random_unit(rng, 4)
    assert np.linalg.norm(v) == pytest.approx(1.0)
