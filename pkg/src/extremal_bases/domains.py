"""Implicit convex domains ``{r < 0}`` in C^n.

Every concrete model is a centered shape composed with an affine unitary
change of coordinates ``z = U w + t``.  Points are complex vectors; the
kernels work on the interleaved real view ``[Re z0, Im z0, ...]``.
"""
import json
import math

import numpy as np

from ._backend import kernels
from .exceptions import DimensionError, OutsideDomainError
from .linalg import as_frame, as_vector, gram_error, real_matrix, to_real, unitary_error

INTERIOR_TOL = 1e-14
BISECT_TOL = 1e-12


class Domain:
    """Interface shared by the concrete models and their slices."""

    n = 0

    def defining_value(self, z):
        raise NotImplementedError

    def complex_gradient(self, z):
        """Wirtinger derivatives ``dr/dz_s`` at ``z``."""
        raise NotImplementedError

    def problem(self, base, frame, grid=256, phase_tol=1e-10, closed_form=True):
        """Kernel problem for rays and discs from ``base`` inside ``span(frame)``."""
        raise NotImplementedError

    @property
    def scale(self):
        """A characteristic length (largest semi-axis of the centered model)."""
        raise NotImplementedError

    def scaled(self, lam):
        """The dilated domain ``lam * D``."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def _point(self, z):
        v = as_vector(z)
        if v.size != self.n:
            raise DimensionError(f"point has dimension {v.size}, domain lives in C^{self.n}")
        return v

    def contains(self, z):
        """Strict interior test with a small absolute margin."""
        return self.defining_value(z) < -INTERIOR_TOL

    def require_inside(self, q):
        q = self._point(q)
        if not self.contains(q):
            raise OutsideDomainError("base point is not strictly inside the domain")
        return q

    def _direction(self, v):
        v = self._point(v)
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > 1e-8:
            raise ValueError(f"direction must have unit norm, got {nrm:.3e}")
        return v

    def ray_distance(self, q, v, method="auto"):
        """Distance from ``q`` to the boundary along the real ray ``q + t v``.

        ``method`` is "auto" (closed form or kernel root finder) or "bisect"
        (bracket doubling then bisection on the defining function).
        """
        q = self.require_inside(q)
        v = self._direction(v)
        if method == "bisect":
            return self._bisect_ray(q, v)
        if method not in ("auto", "closed"):
            raise ValueError(f"unknown method {method!r}")
        p = self.problem(q, np.eye(self.n))
        return float(p.ray_distance(to_real(v)))

    def _initial_step(self):
        return 1e-3

    def _bisect_ray(self, q, v):
        lo, hi = 0.0, self._initial_step()
        while self.defining_value(q + hi * v) < 0.0:
            lo, hi = hi, 2.0 * hi
            if hi > 1e300:
                return math.inf
        while hi - lo > BISECT_TOL * hi:
            mid = 0.5 * (lo + hi)
            f = self.defining_value(q + mid * v)
            if f == 0.0:
                return mid
            if f < 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def slice(self, base, frame):
        """Restriction to the affine complex subspace ``base + span(frame)``."""
        return SlicedDomain(self, base, frame)

    def _problem_frame(self, base, frame):
        base = self.require_inside(base)
        F = as_frame(frame, self.n)
        if F.shape[0] == 0:
            raise DimensionError("frame must contain at least one vector")
        if gram_error(F) > 1e-8:
            raise ValueError("frame is not orthonormal")
        return base, F


class _AffineModel(Domain):
    """Centered model in coordinates ``w = U^H (z - t)``."""

    def _init_affine(self, n, rotation, translation):
        self.n = n
        if rotation is None:
            U = np.eye(n, dtype=np.complex128)
        else:
            U = np.array(rotation, dtype=np.complex128)
            if U.shape != (n, n):
                raise DimensionError(f"rotation must be {n}x{n}")
            if unitary_error(U) > 1e-9:
                raise ValueError("rotation must be unitary")
        if translation is None:
            t = np.zeros(n, dtype=np.complex128)
        else:
            t = self._point_like(translation, n)
        self.rotation = U
        self.translation = t
        self.V = U.conj().T
        for arr in (self.rotation, self.translation, self.V):
            arr.setflags(write=False)

    @staticmethod
    def _point_like(z, n):
        v = as_vector(z)
        if v.size != n:
            raise DimensionError(f"expected {n} entries, got {v.size}")
        return v.copy()

    def local(self, z):
        return self.V @ (self._point(z) - self.translation)

    def _chain(self, gw):
        # dr/dz = V^T dr/dw for w = V (z - t)
        return self.V.T @ gw

    def _affine_dict(self):
        d = {}
        if not np.array_equal(self.rotation, np.eye(self.n)):
            d["rotation"] = [[[float(c.real), float(c.imag)] for c in row] for row in self.rotation]
        if np.any(self.translation != 0):
            d["translation"] = [[float(c.real), float(c.imag)] for c in self.translation]
        return d

    def rotated(self, U):
        """The image ``U(D)`` under a unitary ``U``."""
        U = np.asarray(U, dtype=np.complex128)
        return self._rebuild(rotation=U @ self.rotation, translation=U @ self.translation)


class DiagonalQuadric(_AffineModel):
    """``sum_j p_j x_j^2 + q_j y_j^2 < level`` in rotated, translated coordinates."""

    kind = "diagonal_quadric"

    def __init__(self, coeffs_x, coeffs_y, level=1.0, rotation=None, translation=None):
        p = np.array(coeffs_x, dtype=np.float64).reshape(-1)
        q = np.array(coeffs_y, dtype=np.float64).reshape(-1)
        if p.size == 0 or p.shape != q.shape:
            raise DimensionError("coeffs_x and coeffs_y must be nonempty and of equal length")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise ValueError("coefficients must be finite")
        if np.any(p <= 0) or np.any(q <= 0):
            raise ValueError("all coefficients must be positive")
        level = float(level)
        if not (level > 0 and math.isfinite(level)):
            raise ValueError("level must be positive")
        self.coeffs_x = p
        self.coeffs_y = q
        self.level = level
        self._init_affine(p.size, rotation, translation)
        diag = np.empty(2 * self.n)
        diag[0::2] = p
        diag[1::2] = q
        RV = real_matrix(self.V)
        self.P = RV.T @ (diag[:, None] * RV)
        self.P = 0.5 * (self.P + self.P.T)
        for arr in (p, q, self.P):
            arr.setflags(write=False)

    def _rebuild(self, **kw):
        args = dict(coeffs_x=self.coeffs_x, coeffs_y=self.coeffs_y, level=self.level,
                    rotation=self.rotation, translation=self.translation)
        args.update(kw)
        return DiagonalQuadric(**args)

    def defining_value(self, z):
        w = self.local(z)
        return float(np.sum(self.coeffs_x * w.real ** 2 + self.coeffs_y * w.imag ** 2) - self.level)

    def complex_gradient(self, z):
        w = self.local(z)
        return self._chain(self.coeffs_x * w.real - 1j * self.coeffs_y * w.imag)

    def _initial_step(self):
        return 1e-3 * math.sqrt(self.level)

    @property
    def scale(self):
        return math.sqrt(self.level / min(self.coeffs_x.min(), self.coeffs_y.min()))

    def scaled(self, lam):
        lam = float(lam)
        return self._rebuild(level=self.level * lam * lam, translation=lam * self.translation)

    def problem(self, base, frame, grid=256, phase_tol=1e-10, closed_form=True):
        base, F = self._problem_frame(base, frame)
        RF = real_matrix(F.T)
        d = to_real(base - self.translation)
        Pd = self.P @ d
        Ps = RF.T @ self.P @ RF
        Ps = 0.5 * (Ps + Ps.T)
        b = RF.T @ Pd
        gamma = float(d @ Pd) - self.level
        if gamma >= -INTERIOR_TOL:
            raise OutsideDomainError("base point is not strictly inside the domain")
        centered = closed_form and (
            np.linalg.norm(b) <= 1e-12 * np.linalg.norm(self.P, 2) * np.linalg.norm(d))
        return kernels.quadric_problem(Ps, b, gamma, centered=centered, grid=grid,
                                       phase_tol=phase_tol)

    def to_dict(self):
        d = {"kind": self.kind, "coeffs_x": self.coeffs_x.tolist(),
             "coeffs_y": self.coeffs_y.tolist(), "level": self.level}
        d.update(self._affine_dict())
        return d


class GeneralizedEllipsoid(_AffineModel):
    """``sum_j c_j |w_j|^(2 m_j) < 1`` in rotated, translated coordinates."""

    kind = "generalized_ellipsoid"

    def __init__(self, weights, exponents, rotation=None, translation=None):
        c = np.array(weights, dtype=np.float64).reshape(-1)
        m = np.array(exponents).reshape(-1)
        if c.size == 0 or c.shape != m.shape:
            raise DimensionError("weights and exponents must be nonempty and of equal length")
        if not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise ValueError("weights must be positive and finite")
        if np.any(m != np.round(m)) or np.any(m < 1):
            raise ValueError("exponents must be integers >= 1")
        self.weights = c
        self.exponents = m.astype(np.int64)
        self._init_affine(c.size, rotation, translation)
        for arr in (self.weights, self.exponents):
            arr.setflags(write=False)

    def _rebuild(self, **kw):
        args = dict(weights=self.weights, exponents=self.exponents,
                    rotation=self.rotation, translation=self.translation)
        args.update(kw)
        return GeneralizedEllipsoid(**args)

    def defining_value(self, z):
        s = np.abs(self.local(z)) ** 2
        return float(np.sum(self.weights * s ** self.exponents) - 1.0)

    def complex_gradient(self, z):
        w = self.local(z)
        s = np.abs(w) ** 2
        m = self.exponents
        return self._chain(self.weights * m * s ** (m - 1) * w.conj())

    @property
    def scale(self):
        return float(np.max(self.weights ** (-0.5 / self.exponents)))

    def scaled(self, lam):
        lam = float(lam)
        return self._rebuild(weights=self.weights * lam ** (-2.0 * self.exponents),
                             translation=lam * self.translation)

    def problem(self, base, frame, grid=256, phase_tol=1e-10, closed_form=True):
        base, F = self._problem_frame(base, frame)
        w0 = to_real(self.V @ (base - self.translation))
        G = real_matrix(self.V @ F.T)
        return kernels.ellipsoid_problem(w0, G, self.weights.copy(), self.exponents.copy(), grid=grid,
                                         phase_tol=phase_tol)

    def to_dict(self):
        d = {"kind": self.kind, "weights": self.weights.tolist(),
             "exponents": self.exponents.tolist()}
        d.update(self._affine_dict())
        return d


class SlicedDomain(Domain):
    """``{w in C^k : r(base + sum_j w_j frame_j) < 0}``."""

    kind = "slice"

    def __init__(self, parent, base, frame):
        self.parent = parent
        self.base = parent.require_inside(base)
        F = as_frame(frame, parent.n)
        if F.shape[0] == 0:
            raise DimensionError("slice frame must be nonempty")
        if gram_error(F) > 1e-8:
            raise ValueError("slice frame is not orthonormal")
        self.frame = F
        self.n = F.shape[0]

    def ambient(self, w):
        return self.base + self._point(w) @ self.frame

    def defining_value(self, w):
        return self.parent.defining_value(self.ambient(w))

    def complex_gradient(self, w):
        return self.frame @ self.parent.complex_gradient(self.ambient(w))

    def _initial_step(self):
        return self.parent._initial_step()

    def ray_distance(self, q, v, method="auto"):
        q = self.require_inside(q)
        v = self._direction(v)
        if method == "bisect":
            return self._bisect_ray(q, v)
        return self.parent.ray_distance(self.ambient(q), v @ self.frame, method)

    def problem(self, base, frame, grid=256, phase_tol=1e-10, closed_form=True):
        base, F = self._problem_frame(base, frame)
        return self.parent.problem(self.ambient(base), F @ self.frame, grid=grid,
                                   phase_tol=phase_tol, closed_form=closed_form)

    def slice(self, base, frame):
        base = self.require_inside(base)
        F = as_frame(frame, self.n)
        return SlicedDomain(self.parent, self.ambient(base), F @ self.frame)

    @property
    def scale(self):
        return self.parent.scale

    def scaled(self, lam):
        return SlicedDomain(self.parent.scaled(lam), lam * self.base, self.frame)

    def to_dict(self):
        return {"kind": self.kind, "parent": self.parent.to_dict(),
                "base": [[float(c.real), float(c.imag)] for c in self.base],
                "frame": [[[float(c.real), float(c.imag)] for c in row] for row in self.frame]}


def unit_ball(n, radius=1.0):
    """Euclidean ball of the given radius centered at 0."""
    return DiagonalQuadric(np.ones(n), np.ones(n), level=radius * radius)


# ------------------------------------------------------------------ I/O
def _complex_entry(x):
    if isinstance(x, str):
        return parse_complex(x)
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex entries are [re, im] pairs, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    return complex(x)


def _complex_array(data):
    if isinstance(data, (list, tuple)) and data and isinstance(data[0], (list, tuple)) \
            and data[0] and isinstance(data[0][0], (list, tuple)):
        return np.array([[_complex_entry(x) for x in row] for row in data])
    return np.array([_complex_entry(x) for x in data])


def domain_from_dict(d):
    kind = d.get("kind")
    rot = d.get("rotation")
    tr = d.get("translation")
    rot = None if rot is None else _complex_array(rot)
    tr = None if tr is None else _complex_array(tr)
    if kind == "diagonal_quadric":
        return DiagonalQuadric(d["coeffs_x"], d["coeffs_y"], d.get("level", 1.0), rot, tr)
    if kind == "generalized_ellipsoid":
        return GeneralizedEllipsoid(d["weights"], d["exponents"], rot, tr)
    if kind == "slice":
        return SlicedDomain(domain_from_dict(d["parent"]), _complex_array(d["base"]),
                            _complex_array(d["frame"]))
    raise ValueError(f"unknown domain kind {kind!r}")


def load_domain(path):
    with open(path) as fh:
        return domain_from_dict(json.load(fh))


def dump_domain(domain, path):
    with open(path, "w") as fh:
        json.dump(domain.to_dict(), fh, indent=2)


def parse_complex(s):
    """Parse ``"1"``, ``"-0.5+2i"``, ``"3j"`` and similar forms."""
    t = s.strip().replace(" ", "").replace("I", "j").replace("i", "j")
    if not t:
        raise ValueError("empty complex entry")
    return complex(t)


def parse_point(text):
    """Comma separated complex entries, e.g. ``"0,0.5i,1-2i"``."""
    return np.array([parse_complex(s) for s in text.split(",")], dtype=np.complex128)


def vector_to_pairs(z):
    return [[float(c.real), float(c.imag)] for c in np.asarray(z).reshape(-1)]


__all__ = [
    "Domain", "DiagonalQuadric", "GeneralizedEllipsoid", "SlicedDomain", "unit_ball",
    "domain_from_dict", "load_domain", "dump_domain", "parse_complex", "parse_point",
    "vector_to_pairs",
]
