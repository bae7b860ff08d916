"""Complex linear algebra for orthonormal frames.

A frame is a ``(k, n)`` complex array whose rows are pairwise
Hermitian-orthonormal vectors of C^n.  Frames are only determined up to a
unit scalar per row; nothing here normalizes phases.
"""
import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import DimensionError, NotFullBasisError, RankDeficiencyError

FRAME_TOL = 1e-10
UNITARY_TOL = 1e-9


def as_vector(z):
    """Return ``z`` as a finite 1-D complex array."""
    v = np.asarray(z, dtype=np.complex128).reshape(-1)
    if v.size == 0:
        raise DimensionError("vectors must have at least one entry")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def as_frame(vectors, n=None):
    F = np.asarray(vectors, dtype=np.complex128)
    if F.ndim == 1:
        F = F[None, :]
    if n is not None and F.size == 0:
        return np.zeros((0, n), dtype=np.complex128)
    if n is not None and F.shape[1] != n:
        raise DimensionError(f"frame vectors have dimension {F.shape[1]}, expected {n}")
    return F


def hermitian_inner(u, v):
    """<u, v> = sum_s u_s conj(v_s)."""
    u = as_vector(u)
    v = as_vector(v)
    if u.shape != v.shape:
        raise DimensionError(f"dimension mismatch: {u.size} vs {v.size}")
    return complex(np.vdot(v, u))


def to_real(z):
    """Interleaved real view ``[Re z0, Im z0, ...]`` of a complex vector."""
    return np.ascontiguousarray(z, dtype=np.complex128).view(np.float64)


def from_real(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return x.view(np.complex128).copy()


def real_matrix(M):
    """Real ``(2n, 2k)`` matrix acting on interleaved vectors like ``M``."""
    M = np.asarray(M, dtype=np.complex128)
    n, k = M.shape
    R = np.empty((2 * n, 2 * k))
    R[0::2, 0::2] = M.real
    R[0::2, 1::2] = -M.imag
    R[1::2, 0::2] = M.imag
    R[1::2, 1::2] = M.real
    return R


def _project_out(v, basis):
    # classical projection applied twice keeps the Gram error near eps
    for _ in range(2):
        for b in basis:
            v = v - np.vdot(b, v) * b
    return v


def gram_schmidt(vectors, tol=FRAME_TOL):
    """Orthonormalize ``vectors`` in order.

    The first output row is parallel to the first input row.  Raises
    :class:`RankDeficiencyError` naming the first vector whose component
    orthogonal to its predecessors is below ``tol`` relative to its norm.
    """
    V = as_frame(vectors)
    out = []
    for i, v in enumerate(V):
        norm0 = np.linalg.norm(v)
        if norm0 == 0.0:
            raise RankDeficiencyError(i)
        w = _project_out(v, out)
        norm = np.linalg.norm(w)
        if norm <= tol * norm0:
            raise RankDeficiencyError(i)
        out.append(w / norm)
    return np.array(out, dtype=np.complex128).reshape(len(out), V.shape[1])


def orthocomplement(frame, n):
    """Orthonormal frame of ``span(frame)^perp`` in C^n.

    Standard basis vectors are added greedily, each time taking the one with
    the largest component outside the current span.  A full frame yields an
    empty ``(0, n)`` frame.
    """
    F = as_frame(frame, n)
    k = F.shape[0]
    if k > n:
        raise DimensionError(f"{k} vectors cannot be independent in C^{n}")
    basis = list(F)
    out = []
    eye = np.eye(n, dtype=np.complex128)
    for _ in range(n - k):
        residuals = [_project_out(e, basis) for e in eye]
        norms = [np.linalg.norm(r) for r in residuals]
        j = int(np.argmax(norms))
        w = residuals[j] / norms[j]
        w = _project_out(w, basis)
        w /= np.linalg.norm(w)
        basis.append(w)
        out.append(w)
    return np.array(out, dtype=np.complex128).reshape(n - k, n)


def gram_error(frame):
    """max |<v_i, v_j> - delta_ij| over the rows of ``frame``."""
    F = as_frame(frame)
    if F.shape[0] == 0:
        return 0.0
    G = F.conj() @ F.T
    return float(np.max(np.abs(G - np.eye(F.shape[0]))))


def is_frame(frame, tol=FRAME_TOL):
    return gram_error(frame) <= tol


def unitary_error(U):
    U = np.asarray(U, dtype=np.complex128)
    return float(np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0]))))


def change_of_basis(a_basis, e_basis):
    """Matrix B with ``B[j, k] = <a_j, e_k>``; it maps the e-basis to the a-basis."""
    A = as_frame(a_basis)
    E = as_frame(e_basis)
    n = A.shape[1]
    if E.shape[1] != n:
        raise DimensionError("bases live in spaces of different dimension")
    for name, F in (("a_basis", A), ("e_basis", E)):
        if F.shape[0] != n or not is_frame(F, 1e-8):
            raise NotFullBasisError(f"{name} is not an orthonormal basis of C^{n}")
    B = A @ E.conj().T
    err = unitary_error(B)
    if err > UNITARY_TOL:
        raise NotFullBasisError(f"change of basis is not unitary (error {err:.2e})")
    return B


def permutation_bound(B):
    """max over permutations s of prod_j |B[j, s(j)]|, and the maximizing s.

    Solved exactly as an assignment problem on ``-log|B|``.
    """
    M = np.abs(np.asarray(B))
    with np.errstate(divide="ignore"):
        cost = -np.log(M)
    cost[~np.isfinite(cost)] = 1e300
    rows, cols = linear_sum_assignment(cost)
    value = float(np.prod(M[rows, cols]))
    return value, cols.astype(int)


def random_unitary(n, rng):
    """Haar-distributed unitary matrix."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))
