"""Minimal, maximal and mixed extremal bases at interior points.

Each basis is built one vector at a time.  Step 1 takes the direction to the
nearest boundary point.  Every later step searches the unit sphere of the
orthocomplement of the vectors found so far.  A minimizing step takes the
nearest boundary point inside that slice.  A maximizing step takes the
direction whose complex disc is largest.  The last step has a single complex
direction left and is forced.
"""
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ._backend import BACKEND
from .distances import (SearchOptions, SphereOptProblem, disc_distance, optimize_over_sphere)
from .exceptions import BasisKindError, NearBoundaryError
from .domains import vector_to_pairs
from .linalg import gram_error, orthocomplement, to_real

NEAR_BOUNDARY = 1e-6


@dataclass
class ExtremalBasis:
    """Orthonormal basis with its radii and boundary points, in construction order.

    ``steps`` records how each vector was chosen: "nearest" (closest
    boundary point in the current slice), "widest" (largest disc in the
    current slice) or "forced" (last remaining direction).
    """

    base_point: np.ndarray
    kind: str
    vectors: np.ndarray
    radii: np.ndarray
    boundary_points: np.ndarray
    steps: tuple
    k: Optional[int] = None
    reordered: bool = False
    settings: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.vectors.shape[0]

    def to_dict(self):
        return {
            "kind": self.kind if self.k is None else f"{self.kind}:{self.k}",
            "reordered": self.reordered,
            "base_point": vector_to_pairs(self.base_point),
            "radii": [float(r) for r in self.radii],
            "vectors": [vector_to_pairs(v) for v in self.vectors],
            "boundary_points": [vector_to_pairs(p) for p in self.boundary_points],
            "steps": list(self.steps),
            "settings": dict(self.settings),
        }


def first_step(domain, q, options=None):
    """Nearest boundary direction and distance, shared by every basis kind."""
    opts = options or SearchOptions()
    q = domain.require_inside(q)
    res = optimize_over_sphere(SphereOptProblem(domain, q, np.eye(domain.n), "minimize",
                                                "ray", opts))
    if res.value < NEAR_BOUNDARY * domain.scale:
        raise NearBoundaryError(
            f"boundary distance {res.value:.3e} is below {NEAR_BOUNDARY:g} times the domain scale")
    return res.value, res.vector


def _step_plan(n, n_min):
    # n_min leading steps take nearest points, the rest up to n-1 take widest discs
    plan = []
    for j in range(n):
        if j == n - 1 and n > 1:
            plan.append("forced")
        elif j < n_min:
            plan.append("nearest")
        else:
            plan.append("widest")
    return plan


def _build(domain, q, plan, kind, k, opts, first):
    n = domain.n
    q = domain.require_inside(q)
    if first is None:
        # also run when step 1 maximizes, so the near-boundary guard applies
        first = first_step(domain, q, opts)
    v1 = first[1]
    vectors = []
    nfev = []
    for j, how in enumerate(plan):
        if j == 0 and how == "nearest":
            vectors.append(np.asarray(v1))
            nfev.append(0)
            continue
        F = orthocomplement(np.array(vectors).reshape(len(vectors), n), n) if vectors \
            else np.eye(n, dtype=np.complex128)
        if how == "forced":
            u = F[0]
            _, phase = disc_distance(domain, q, u, grid=opts.grid, phase_tol=opts.phase_tol,
                                     with_phase=True)
            vectors.append(u * complex(math.cos(phase), math.sin(phase)))
            nfev.append(1)
            continue
        if how == "nearest":
            prob = SphereOptProblem(domain, q, F, "minimize", "ray", opts)
        else:
            prob = SphereOptProblem(domain, q, F, "maximize", "disc", opts)
        res = optimize_over_sphere(prob)
        vectors.append(res.vector)
        nfev.append(res.nfev)
    V = np.array(vectors, dtype=np.complex128)
    # clean rounding drift so the Gram matrix stays within tolerance
    for i in range(n):
        for _ in range(2):
            for j in range(i):
                V[i] -= np.vdot(V[j], V[i]) * V[j]
        V[i] /= np.linalg.norm(V[i])
    p = domain.problem(q, np.eye(n))
    radii = np.array([p.ray_distance(to_real(v)) for v in V])
    points = q[None, :] + radii[:, None] * V
    settings = dict(opts.to_dict())
    settings["backend"] = BACKEND
    settings["nfev"] = nfev
    return ExtremalBasis(base_point=q.copy(), kind=kind, vectors=V, radii=radii,
                         boundary_points=points, steps=tuple(plan), k=k, settings=settings)


def maximal_basis(domain, q, options=None, first=None):
    """Nearest boundary direction first, then widest discs in successive slices.

    ``first`` may carry a precomputed ``(distance, direction)`` pair from
    :func:`first_step` so that a minimal and a maximal basis share step 1.
    """
    opts = options or SearchOptions()
    return _build(domain, q, _step_plan(domain.n, 1), "maximal", None, opts, first)


def minimal_basis(domain, q, options=None, first=None):
    """Nearest boundary points in successive slices."""
    opts = options or SearchOptions()
    return _build(domain, q, _step_plan(domain.n, domain.n), "minimal", None, opts, first)


def mixed_basis(domain, q, k, options=None, first=None):
    """Nearest points on steps ``1..k``, widest discs on steps ``k+1..n-1``.

    ``k = n-1`` gives the minimal basis and ``k = 1`` the maximal one.  With
    ``k = 0`` step 1 also maximizes the disc distance.
    """
    n = domain.n
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 0 <= k <= n - 1:
        raise ValueError(f"k must be an integer in [0, {n - 1}], got {k!r}")
    opts = options or SearchOptions()
    return _build(domain, q, _step_plan(n, int(k)), "mixed", int(k), opts, first)


def reorder_maximal(basis):
    """Keep vector 1 and reverse vectors 2..n along with radii and points.

    Applying it twice returns the original order.
    """
    if basis.kind != "maximal":
        raise BasisKindError(f"reordering applies to maximal bases, got {basis.kind!r}")
    idx = np.r_[0, np.arange(basis.n - 1, 0, -1)] if basis.n > 1 else np.arange(1)
    return replace(basis, vectors=basis.vectors[idx], radii=basis.radii[idx],
                   boundary_points=basis.boundary_points[idx],
                   steps=tuple(basis.steps[i] for i in idx), reordered=not basis.reordered)


def tangency_residuals(domain, basis):
    """Normalized pairings ``|sum_s dr/dz_s(p_k) v_{j,s}| / |dr/dz(p_k)|`` for ``j > k``.

    Entries on and below the diagonal are zero.
    """
    n = basis.n
    R = np.zeros((n, n))
    for kk in range(n - 1):
        g = domain.complex_gradient(basis.boundary_points[kk])
        gn = np.linalg.norm(g)
        if not gn > 0.0:
            raise ValueError(f"defining function gradient vanishes at boundary point {kk + 1}")
        for j in range(kk + 1, n):
            R[kk, j] = abs(np.sum(g * basis.vectors[j])) / gn
    return R


def check_basis(domain, basis, euclid=None, tol_frame=1e-10, tol_boundary=1e-8, tol_order=1e-9):
    """Structural checks of a constructed basis; returns a dict of failures (empty if fine)."""
    bad = {}
    ge = gram_error(basis.vectors)
    if ge > tol_frame:
        bad["orthonormality"] = ge
    bv = max(abs(domain.defining_value(p)) for p in basis.boundary_points)
    if bv > tol_boundary:
        bad["on_boundary"] = bv
    r = basis.radii
    if basis.kind == "minimal" and np.any(np.diff(r) < -tol_order):
        bad["ordering"] = float(np.min(np.diff(r)))
    if basis.kind == "maximal":
        tail = r[1:] if not basis.reordered else r[1:][::-1]
        if np.any(np.diff(tail) > tol_order):
            bad["ordering"] = float(np.max(np.diff(tail)))
    if euclid is not None and basis.steps[0] == "nearest" and abs(r[0] - euclid) > 1e-8:
        bad["first_radius"] = abs(r[0] - euclid)
    return bad


__all__ = [
    "ExtremalBasis", "first_step", "maximal_basis", "minimal_basis", "mixed_basis",
    "reorder_maximal", "tangency_residuals", "check_basis",
]
