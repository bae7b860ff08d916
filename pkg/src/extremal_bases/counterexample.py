"""The domain ``rho(z) + |z3|^2 < 1`` where property (*) fails for maximal bases.

Here ``rho(z) = x1^2 + b1 y1^2 + x2^2 + b2 y2^2`` with ``0 < b2 < b1 < 1``.
From ``q = (0, 0, delta)`` the nearest boundary point is ``(0, 0, 1)``.  The
slice ``z3 = delta`` is a dilate of ``D0 = {rho < 1}`` in C^2, so the second
maximal direction is the widest disc direction of D0 at the origin.  That
direction lies outside the set T of directions b where property (*) would
hold.  T is where ``b1 = 0``, ``b2 = 0`` or ``Im b1 = Im b2 = 0``.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from .bases import maximal_basis, tangency_residuals
from .distances import SearchOptions, SphereOptProblem, euclidean_distance, optimize_over_sphere
from .domains import DiagonalQuadric, vector_to_pairs
from .exceptions import DimensionError
from .linalg import as_vector

T_TOL = 1e-9
STAR_THRESHOLD = 1e-3
B_STAR = np.array([1.0, 1.0j]) / math.sqrt(2.0)


@dataclass(frozen=True)
class CounterexampleParams:
    beta1: float = 0.75
    beta2: float = 0.25
    delta: float = 0.1

    def __post_init__(self):
        for name in ("beta1", "beta2", "delta"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{name} must be a finite real number")
        if not 0.0 < self.beta2 < self.beta1 < 1.0:
            raise ValueError(f"need 0 < beta2 < beta1 < 1, got beta1={self.beta1}, beta2={self.beta2}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"need 0 < delta < 1, got delta={self.delta}")

    @property
    def q(self):
        return np.array([0.0, 0.0, self.delta], dtype=np.complex128)


def make_domains(params):
    """``(D, D0)``: the domain in C^3 and its slice model in C^2."""
    D = DiagonalQuadric([1.0, 1.0, 1.0], [params.beta1, params.beta2, 1.0], level=1.0)
    D0 = DiagonalQuadric([1.0, 1.0], [params.beta1, params.beta2], level=1.0)
    return D, D0


def _pair(b):
    b = as_vector(b)
    if b.size != 2:
        raise DimensionError(f"expected a vector in C^2, got dimension {b.size}")
    if not np.any(b):
        raise ValueError("b must be nonzero")
    return b


def R_value(b, params):
    """``max over alpha of rho(e^{i alpha} b)``, in closed form ``A + |C|``."""
    b = _pair(b)
    g = np.array([params.beta1, params.beta2])
    A = float(np.sum(0.5 * (1.0 + g) * np.abs(b) ** 2))
    C = complex(np.sum(0.5 * (1.0 - g) * b ** 2))
    return A + abs(C)


def T_residuals(B, params):
    """Vectorized residuals for rows of ``B`` (shape ``(N, 2)``).

    Returns ``(equation residual, characterization residual)``.  The first
    is the larger of the two pairing equations divided by ``|b|^2``.  The
    second is the distance to the nearest branch of T divided by ``|b|``.
    """
    B = np.atleast_2d(np.asarray(B, dtype=np.complex128))
    b1, b2 = B[:, 0], B[:, 1]
    nn = np.sum(np.abs(B) ** 2, axis=1)
    x1, y1, x2, y2 = b1.real, b1.imag, b2.real, b2.imag
    e1 = (params.beta1 - params.beta2) * y1 * y2
    e2 = (1.0 - params.beta2) * y2 * x1 - (1.0 - params.beta1) * y1 * x2
    r_eq = np.maximum(np.abs(e1), np.abs(e2)) / nn
    nrm = np.sqrt(nn)
    r_char = np.minimum(np.minimum(np.abs(b1), np.abs(b2)),
                        np.maximum(np.abs(y1), np.abs(y2))) / nrm
    return r_eq, r_char


def in_T(b, params, tol=T_TOL):
    """Membership of b in T, decided twice.

    Returns ``(by_equations, by_characterization, residuals)``.  The
    equations say that the gradient pairing along the real and imaginary
    parts vanishes.  The characterization is the explicit list of branches.
    Both residuals are scale free.
    """
    b = _pair(b)
    if not tol > 0:
        raise ValueError("tol must be positive")
    r_eq, r_char = T_residuals(b[None, :], params)
    return bool(r_eq[0] <= tol), bool(r_char[0] <= tol), {"equations": float(r_eq[0]),
                                                          "characterization": float(r_char[0])}


def sample_T(params, count, rng):
    """Unit vectors drawn evenly from the three branches of T."""
    out = np.empty((count, 2), dtype=np.complex128)
    for i in range(count):
        branch = i % 3
        if branch == 0:
            out[i] = [0.0, np.exp(1j * rng.uniform(0, 2 * np.pi))]
        elif branch == 1:
            out[i] = [np.exp(1j * rng.uniform(0, 2 * np.pi)), 0.0]
        else:
            th = rng.uniform(0, 2 * np.pi)
            out[i] = [math.cos(th), math.sin(th)]
    return out


def _random_unit(rng, count):
    Z = rng.standard_normal((count, 2)) + 1j * rng.standard_normal((count, 2))
    return Z / np.linalg.norm(Z, axis=1)[:, None]


def lemma_equivalence_scan(params, samples, seed=0, near=1000, tol=T_TOL):
    """Compare the two T tests on random and near-T unit vectors.

    A disagreement counts only when both residuals are clearly decided,
    that is outside the band ``(tol / 10, 10 tol)``.  Near-T samples are
    branch points moved by a log-uniform distance in ``[1e-14, 1e-2]``.
    Returns ``(agree_count, disagreements, undecided_count)``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    B = _random_unit(rng, samples)
    if near > 0:
        base = sample_T(params, near, rng)
        eps = 10.0 ** rng.uniform(-14, -2, near)
        P = base + eps[:, None] * _random_unit(rng, near)
        P /= np.linalg.norm(P, axis=1)[:, None]
        B = np.vstack([B, P])
    r_eq, r_char = T_residuals(B, params)
    f_eq = r_eq <= tol
    f_char = r_char <= tol
    clear = ((r_eq <= tol / 10) | (r_eq >= 10 * tol)) & ((r_char <= tol / 10) | (r_char >= 10 * tol))
    bad = clear & (f_eq != f_char)
    agree = int(np.sum(clear & (f_eq == f_char)))
    disagreements = [{"b": vector_to_pairs(B[i]), "equations": float(r_eq[i]),
                      "characterization": float(r_char[i])} for i in np.flatnonzero(bad)]
    return agree, disagreements, int(np.sum(~clear))


def run_counterexample(params=None, options=None, threshold=STAR_THRESHOLD):
    """Reproduce the failure of property (*) and return a JSON-ready report."""
    params = params or CounterexampleParams()
    opts = options or SearchOptions()
    D, D0 = make_domains(params)
    q = params.q
    m1, a1 = euclidean_distance(D, q, opts)
    widest = optimize_over_sphere(SphereOptProblem(D0, np.zeros(2), np.eye(2), "maximize",
                                                   "disc", opts))
    a_hat = widest.vector
    R_hat = R_value(a_hat, params)
    eq_flag, char_flag, res = in_T(a_hat, params)
    basis = maximal_basis(D, q, opts, first=(m1, a1))
    resid = tangency_residuals(D, basis)
    r23 = float(resid[1, 2])
    R_star = R_value(B_STAR, params)
    verdict = "PROPERTY_STAR_FAILS" if r23 > threshold else "INCONCLUSIVE"
    return {
        "params": asdict(params),
        "q": vector_to_pairs(q),
        "m1": float(m1),
        "a1": vector_to_pairs(a1),
        "a1_phase_error": float(1.0 - abs(a1[2])),
        "R_b_star": R_star,
        "disc_b_star": 1.0 / math.sqrt(R_star),
        "a_hat": vector_to_pairs(a_hat),
        "disc_a_hat": widest.value,
        "R_a_hat": R_hat,
        "a_hat_in_T": {"equations": eq_flag, "characterization": char_flag,
                       "residuals": res},
        "maximal_basis": basis.to_dict(),
        "tangency_residuals": resid.tolist(),
        "residual_2_3": r23,
        "threshold": threshold,
        "verdict": verdict,
        "settings": opts.to_dict(),
    }


__all__ = [
    "CounterexampleParams", "make_domains", "R_value", "T_residuals", "in_T", "sample_T",
    "lemma_equivalence_scan", "run_counterexample", "B_STAR",
]
