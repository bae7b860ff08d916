"""Pseudometrics built from extremal bases, and the matrix audit relating them.

For a basis ``v_1..v_n`` with radii ``r_1..r_n`` the weighted norm of a
direction X is ``sum_j |<X, v_j>| / r_j``.  With the minimal basis this is
``E``; with the reordered maximal basis it is ``A``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .distances import disc_distance
from .exceptions import BasisKindError, DimensionError
from .linalg import as_vector, change_of_basis, permutation_bound


def _nonzero(X, n):
    X = as_vector(X)
    if X.size != n:
        raise DimensionError(f"direction has dimension {X.size}, expected {n}")
    if not np.any(X):
        raise ValueError("direction must be nonzero")
    return X


def basis_norm(basis, X):
    """``sum_j |<X, v_j>| / r_j`` for any extremal basis."""
    X = _nonzero(X, basis.n)
    return float(np.sum(np.abs(basis.vectors.conj() @ X) / basis.radii))


def E_metric(basis, X):
    """Weighted norm of X in the minimal basis."""
    if basis.kind != "minimal":
        raise BasisKindError(f"E needs a minimal basis, got {basis.kind!r}")
    return basis_norm(basis, X)


def A_metric(basis, X):
    """Weighted norm of X in the reordered maximal basis.

    An unreordered maximal basis is refused rather than fixed silently.
    """
    if basis.kind != "maximal":
        raise BasisKindError(f"A needs a maximal basis, got {basis.kind!r}")
    if not basis.reordered:
        raise BasisKindError("A needs the reordered maximal basis; call reorder_maximal first")
    return basis_norm(basis, X)


def _same_point(b1, b2):
    if b1.n != b2.n:
        raise DimensionError("bases live in spaces of different dimension")
    if not np.allclose(b1.base_point, b2.base_point, rtol=0.0, atol=1e-12):
        raise ValueError("bases were built at different points")


def kernel_proxies(basis_min, basis_max):
    """``(1 / s^2, 1 / m^2)`` with ``s``, ``m`` the products of the radii."""
    _same_point(basis_min, basis_max)
    s = float(np.prod(basis_min.radii))
    m = float(np.prod(basis_max.radii))
    return 1.0 / (s * s), 1.0 / (m * m)


def inv_disc_direction(domain, q, X, **kw):
    """``|X| / d(q; X / |X|)``; homogeneous of degree one in X."""
    X = _nonzero(X, domain.n)
    nrm = float(np.linalg.norm(X))
    return nrm / disc_distance(domain, q, X / nrm, **kw)


@dataclass
class MatrixAudit:
    """Size of the change of basis B (``b_jk = <a_j, e_k>``) against radius ratios.

    ``b_ratio`` is ``max |b_jk| s_j / s_k`` and ``c_ratio`` the same for
    ``C = B^{-1}``.  ``perm_product`` is the best product ``prod_j |b_{j,s(j)}|``
    over permutations s; it can never fall below ``1/n!``.
    """

    n: int
    b_ratio: float
    b_argmax: tuple
    c_ratio: float
    c_argmax: tuple
    perm_product: float
    permutation: tuple
    perm_floor: float

    def to_dict(self):
        return {
            "n": self.n, "b_ratio": self.b_ratio, "b_argmax": list(self.b_argmax),
            "c_ratio": self.c_ratio, "c_argmax": list(self.c_argmax),
            "perm_product": self.perm_product, "permutation": list(self.permutation),
            "perm_floor": self.perm_floor,
        }


def _ratio_max(M, s):
    R = np.abs(M) * s[:, None] / s[None, :]
    j, k = np.unravel_index(int(np.argmax(R)), R.shape)
    return float(R[j, k]), (int(j), int(k))


def basis_matrix_audit(basis_max, basis_min):
    """Audit the unitary B taking the minimal basis to the reordered maximal one."""
    _same_point(basis_max, basis_min)
    if basis_max.kind == "maximal" and not basis_max.reordered:
        raise BasisKindError("audit needs the reordered maximal basis")
    B = change_of_basis(basis_max.vectors, basis_min.vectors)
    C = B.conj().T
    s = np.asarray(basis_min.radii, dtype=np.float64)
    b_ratio, b_arg = _ratio_max(B, s)
    c_ratio, c_arg = _ratio_max(C, s)
    perm, sigma = permutation_bound(B)
    n = B.shape[0]
    return MatrixAudit(n=n, b_ratio=b_ratio, b_argmax=b_arg, c_ratio=c_ratio, c_argmax=c_arg,
                       perm_product=perm, permutation=tuple(int(i) for i in sigma),
                       perm_floor=1.0 / math.factorial(n))


@dataclass
class MetricEvaluation:
    point: np.ndarray
    direction: np.ndarray
    E: float
    A: float
    inv_disc: float
    s_product: float
    m_product: float


def evaluate_metrics(domain, basis_min, basis_max_reordered, X, **kw):
    """All scalar quantities attached to one (point, direction) pair."""
    _same_point(basis_min, basis_max_reordered)
    X = _nonzero(X, domain.n)
    return MetricEvaluation(
        point=basis_min.base_point.copy(), direction=X.copy(),
        E=E_metric(basis_min, X), A=A_metric(basis_max_reordered, X),
        inv_disc=inv_disc_direction(domain, basis_min.base_point, X, **kw),
        s_product=float(np.prod(basis_min.radii)),
        m_product=float(np.prod(basis_max_reordered.radii)))


__all__ = [
    "basis_norm", "E_metric", "A_metric", "kernel_proxies", "inv_disc_direction",
    "MatrixAudit", "basis_matrix_audit", "MetricEvaluation", "evaluate_metrics",
]
