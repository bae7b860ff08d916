"""Disc distance, Euclidean boundary distance and sphere searches.

Sphere searches run a multistart Nelder-Mead over the unit sphere of a
complex subspace.  Each candidate is a real ``2k`` coordinate vector over the
subspace's frame.  For the disc objective the search lives on the projective
space ``CP^{k-1}``, since the objective does not depend on the phase of its
argument.
"""
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar
from scipy.special import ndtri
from scipy.stats import qmc

from ._backend import kernels
from .domains import Domain
from .exceptions import DimensionError, OptimizerError
from .linalg import as_frame, as_vector, from_real, to_real

MODE_RAY = 0
MODE_DISC = 1


@dataclass
class SearchOptions:
    """Settings shared by every sphere search.

    ``starts=None`` means 64 quasi-random starts for subspaces of complex
    dimension at most 3 and 256 above that.
    """

    starts: Optional[int] = None
    seed: int = 0
    value_tol: float = 1e-10
    step_tol: float = 1e-8
    grid: int = 256
    phase_tol: float = 1e-10
    n_scout: int = 16
    n_polish: int = 3
    max_evals: int = 2500

    def n_starts(self, k):
        if self.starts is not None:
            return int(self.starts)
        return 64 if k <= 3 else 256

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in (d or {}).items() if k in cls.__dataclass_fields__})


@dataclass
class SphereOptProblem:
    """Extremize an objective over unit vectors of ``span(frame)`` seen from ``base``."""

    domain: Domain
    base: np.ndarray
    frame: np.ndarray
    sense: str = "maximize"
    objective: str = "disc"
    options: SearchOptions = field(default_factory=SearchOptions)

    def __post_init__(self):
        if self.sense not in ("minimize", "maximize"):
            raise ValueError(f"sense must be 'minimize' or 'maximize', got {self.sense!r}")
        if self.objective not in ("disc", "ray"):
            raise ValueError(f"objective must be 'disc' or 'ray', got {self.objective!r}")
        self.base = self.domain.require_inside(self.base)
        self.frame = as_frame(self.frame, self.domain.n)
        if self.frame.shape[0] == 0:
            raise DimensionError("cannot search over an empty frame")


@dataclass
class SphereResult:
    vector: np.ndarray   # ambient unit vector; for discs rotated onto the shortest ray
    value: float
    start: int
    nfev: int
    coords: np.ndarray   # complex coordinates over the frame


def sphere_starts(m, count, seed):
    """The ``m`` real coordinate axes followed by ``count`` scrambled Halton
    points pushed onto the unit sphere of R^m."""
    axes = np.eye(m)
    if count <= 0:
        return axes
    u = qmc.Halton(d=m, scramble=True, seed=seed).random(count)
    g = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    g /= np.linalg.norm(g, axis=1)[:, None]
    return np.vstack([axes, g])


def _search(p, mode, sense, k, opts):
    m = 2 * k
    if mode == MODE_DISC and k == 1:
        # the projective search space is a single point
        x = np.zeros(2)
        x[0] = 1.0
        value, phase = p.disc_distance(x)
        return {"x": x, "value": value, "phase": phase, "start": 0, "nfev": 1}
    starts = sphere_starts(m, opts.n_starts(k), opts.seed)
    return kernels.search(p, mode, 1 if sense == "minimize" else -1, starts,
                          n_scout=opts.n_scout, n_polish=opts.n_polish,
                          value_tol=opts.value_tol, step_tol=opts.step_tol,
                          max_evals=opts.max_evals)


def _ray_gradient(domain, p, base, F, x):
    """Ray distance along the unit real vector ``x`` and its gradient on the sphere.

    From ``r(base + t v) = 0`` the derivative is ``dt/dx = -t grad r / (grad r . x)``.
    """
    t = p.ray_distance(x)
    v = from_real(x) @ F
    g = F @ domain.complex_gradient(base + t * v)
    nr = to_real(2.0 * g.conj())
    dt = -t * nr / float(nr @ x)
    return t, dt - float(dt @ x) * x


def polish_nearest(domain, p, base, F, x, max_iter=12):
    """Newton refinement of a local minimum of the ray distance on the sphere.

    The Hessian comes from central differences of the exact gradient in a
    tangent chart.  A step is kept only when it shrinks the gradient, so the
    result is never worse than the input.  Returns ``(x, t, relative gradient)``.
    """
    x = np.array(x, dtype=np.float64)
    x /= np.linalg.norm(x)
    m = x.size
    t, G = _ray_gradient(domain, p, base, F, x)
    gnorm = np.linalg.norm(G) / t
    for _ in range(max_iter):
        if gnorm <= 1e-13 or m < 2:
            break
        T = np.linalg.qr(np.column_stack([x, np.eye(m)]))[0][:, 1:m]
        h = 1e-6
        H = np.empty((m - 1, m - 1))
        for i in range(m - 1):
            xp = x + h * T[:, i]
            xm = x - h * T[:, i]
            gp = _ray_gradient(domain, p, base, F, xp / np.linalg.norm(xp))[1]
            gm = _ray_gradient(domain, p, base, F, xm / np.linalg.norm(xm))[1]
            H[:, i] = T.T @ (gp - gm) / (2.0 * h)
        H = 0.5 * (H + H.T)
        try:
            step = -np.linalg.solve(H, T.T @ G)
        except np.linalg.LinAlgError:
            break
        improved = False
        for _ in range(6):
            xn = x + T @ step
            xn /= np.linalg.norm(xn)
            tn, Gn = _ray_gradient(domain, p, base, F, xn)
            gn = np.linalg.norm(Gn) / tn
            if gn < gnorm and tn <= t * (1.0 + 1e-12):
                x, t, G, gnorm = xn, tn, Gn, gn
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return x, t, gnorm


def _rotate(x, alpha):
    return to_real(complex(math.cos(alpha), math.sin(alpha)) * from_real(x))


class _PhasePiece:
    """Local minimum over phase of the ray distance, tracked from a seed phase.

    Its gradient in the direction x comes from the envelope theorem: the
    ray-distance gradient at the minimizing phase, rotated back.
    """

    def __init__(self, domain, p, base, F, alpha, width):
        self.domain, self.p, self.base, self.F = domain, p, base, F
        self.alpha = alpha
        self.width = width
        self._last = (None, None)

    def value(self, x):
        # SLSQP asks for the value and then the gradient at the same point
        if self._last[0] is not None and np.array_equal(self._last[0], x):
            return self._last[1]
        a0, w = self.alpha, self.width
        if self._slope(x, a0 - w) < 0.0 < self._slope(x, a0 + w):
            # the minimizing phase is the slope root; a root is exact where a value minimum is not
            a = brentq(lambda b: self._slope(x, b), a0 - w, a0 + w, xtol=1e-16, rtol=1e-15)
            val = float(self.p.ray_distance(_rotate(x, a)))
        else:
            # search the offset from the tracked phase: Brent's tolerance grows with |x|
            res = minimize_scalar(lambda u: self.p.ray_distance(_rotate(x, a0 + u)),
                                  method="bounded", bounds=(-w, w), options={"xatol": 1e-13})
            a, val = a0 + float(res.x), float(res.fun)
        self.alpha = a
        self._last = (x.copy(), val)
        return val

    def _slope(self, x, a):
        y = _rotate(x, a)
        _, g = _ray_gradient(self.domain, self.p, self.base, self.F, y)
        return float(g @ _rotate(y, 0.5 * np.pi))

    def grad(self, x):
        t, g = _ray_gradient(self.domain, self.p, self.base, self.F, _rotate(x, self.alpha))
        return t, _rotate(g, -self.alpha)


def _phase_pieces(domain, p, base, F, x, margin=1e-3, grid=256):
    ph = 2.0 * np.pi * np.arange(grid) / grid
    vals = np.array([p.ray_distance(_rotate(x, a)) for a in ph])
    lo = float(vals.min())
    if float(vals.max()) - lo <= 1e-12 * lo:
        return []
    h = 2.0 * np.pi / grid
    idx = [i for i in range(grid) if vals[i] <= vals[i - 1] and vals[i] < vals[(i + 1) % grid]
           and vals[i] <= lo * (1.0 + margin)]
    return [_PhasePiece(domain, p, base, F, ph[i], 1.5 * h) for i in idx]


def polish_widest(domain, p, base, F, x, value, rounds=2):
    """Refine a local maximum of the disc distance on the projective sphere.

    Near a maximum the disc distance is the lower envelope of a few smooth
    phase-local minima, and the maximum usually sits on a ridge where two of
    them tie.  Each round solves ``max s  s.t.  s <= f_i(c)`` with SLSQP in
    a chart around x.  A round is kept only if the full disc evaluation
    confirms the gain.  Returns ``(x, value, phase)``.
    """
    x = np.array(x, dtype=np.float64)
    x /= np.linalg.norm(x)
    m = x.size
    best, phase = p.disc_distance(x)
    if best < value * (1.0 - 1e-12):
        return x, value, None
    for _ in range(rounds):
        pieces = _phase_pieces(domain, p, base, F, x)
        if not pieces:
            break
        basis = np.linalg.qr(np.column_stack([x, _rotate(x, 0.5 * np.pi), np.eye(m)]))[0]
        T = basis[:, 2:m]
        if T.shape[1] == 0:
            break
        x0 = x.copy()

        def point(c):
            y = x0 + T @ c
            return y / np.linalg.norm(y)

        def cons(z, piece):
            return piece.value(point(z[:-1])) - z[-1]

        def cons_jac(z, piece):
            c = z[:-1]
            y = x0 + T @ c
            ny = np.linalg.norm(y)
            xc = y / ny
            piece.value(xc)
            _, g = piece.grad(xc)
            gc = T.T @ ((g - float(g @ xc) * xc) / ny)
            return np.r_[gc, -1.0]

        z0 = np.r_[np.zeros(T.shape[1]), min(pc.value(x0) for pc in pieces)]
        scale = abs(z0[-1])
        constraints = [{"type": "ineq", "fun": cons, "jac": cons_jac, "args": (pc,)}
                       for pc in pieces]
        bounds = [(-0.05, 0.05)] * T.shape[1] + [(None, None)]
        with warnings.catch_warnings():
            # SLSQP clips trial points to the chart box and warns about it
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(lambda z: -z[-1] / scale, z0, jac=lambda z: np.r_[np.zeros(z.size - 1),
                                                                           -1.0 / scale],
                           method="SLSQP", constraints=constraints, bounds=bounds,
                           options={"ftol": 1e-12, "maxiter": 60})
        xn = point(res.x[:-1])
        val, ph = p.disc_distance(xn)
        if not val > best * (1.0 + 1e-15):
            break
        gain = val - best
        x, best, phase = xn, val, ph
        if gain <= 1e-14 * best:
            break
    pieces = _phase_pieces(domain, p, base, F, x)
    if pieces:
        vals = [pc.value(x) for pc in pieces]
        lo = min(vals)
        active = [pc for pc, v in zip(pieces, vals) if v <= lo * (1.0 + 1e-8)]
        xn = _kkt_polish(active, x)
        if xn is not None:
            val, ph = p.disc_distance(xn)
            if val >= best * (1.0 - 1e-15):
                x, best, phase = xn, val, ph
    return x, best, phase


def _kkt_polish(pieces, x, max_iter=8):
    """Newton solve of the optimality system of ``max min_i f_i`` on the active pieces.

    Unknowns are a chart offset c and weights mu with ``sum mu = 1``.  The
    equations are ``sum mu_i grad f_i = 0`` and ``f_i = f_1``.  On a ridge
    the value is flat along the ridge, so the value alone does not pin the
    direction; this system does.  Returns None when the active set is
    inconsistent (a negative weight) or no step helps.
    """
    m = x.size
    a = len(pieces)

    def chart(y):
        return np.linalg.qr(np.column_stack([y, _rotate(y, 0.5 * np.pi), np.eye(m)]))[0][:, 2:m]

    def evaluate(y, T):
        f = np.empty(a)
        G = np.empty((T.shape[1], a))
        for i, pc in enumerate(pieces):
            f[i] = pc.value(y)
            _, g = pc.grad(y)
            G[:, i] = T.T @ (g - float(g @ y) * y)
        return f, G

    T = chart(x)
    d = T.shape[1]
    if d == 0 or a > d + 1:
        return None
    f, G = evaluate(x, T)
    A = np.vstack([G, np.ones((1, a))])
    mu = np.linalg.lstsq(A, np.r_[np.zeros(d), 1.0], rcond=None)[0]

    def residual(f, G, mu):
        return np.r_[G @ mu, f[1:] - f[0]] / f[0]

    res = residual(f, G, mu)
    rnorm = np.linalg.norm(res)
    moved = False
    for _ in range(max_iter):
        if rnorm <= 1e-13 or np.any(mu < 0.0):
            break
        h = 1e-6
        H = np.zeros((d, d))
        for i in range(d):
            fp, Gp = evaluate(_unit_real(x + h * T[:, i]), T)
            fm, Gm = evaluate(_unit_real(x - h * T[:, i]), T)
            H[:, i] = (Gp - Gm) @ mu / (2.0 * h)
        H = 0.5 * (H + H.T)
        # rows: stationarity, value ties; columns: c, mu_2..mu_a (mu_1 = 1 - sum of the rest)
        D = G[:, 1:] - G[:, [0]]
        J = np.zeros((d + a - 1, d + a - 1))
        J[:d, :d] = H
        J[:d, d:] = D
        J[d:, :d] = D.T
        try:
            step = -np.linalg.solve(J, np.r_[G @ mu, f[1:] - f[0]])
        except np.linalg.LinAlgError:
            break
        improved = False
        for _ in range(6):
            xn = _unit_real(x + T @ step[:d])
            mun = mu.copy()
            mun[1:] += step[d:]
            mun[0] = 1.0 - mun[1:].sum()
            Tn = chart(xn)
            fn, Gn = evaluate(xn, Tn)
            rn = np.linalg.norm(residual(fn, Gn, mun))
            if rn < rnorm and fn.min() >= f.min() * (1.0 - 1e-14):
                x, T, f, G, mu, rnorm = xn, Tn, fn, Gn, mun, rn
                improved = moved = True
                break
            step *= 0.5
        if not improved:
            break
    return x if moved and not np.any(mu < 0.0) else None


def _unit_real(y):
    return y / np.linalg.norm(y)


def optimize_over_sphere(problem):
    """Best unit vector of ``span(frame)`` for the problem's objective.

    Returns a :class:`SphereResult`.  For the disc objective the vector is
    multiplied by the unit scalar whose real ray is the shortest, so
    ``base + value * vector`` is a boundary point.
    """
    opts = problem.options
    F = problem.frame
    k = F.shape[0]
    mode = MODE_DISC if problem.objective == "disc" else MODE_RAY
    p = problem.domain.problem(problem.base, F, grid=opts.grid, phase_tol=opts.phase_tol)
    res = _search(p, mode, problem.sense, k, opts)
    value = float(res["value"])
    if not math.isfinite(value) or value <= 0.0:
        raise OptimizerError(f"sphere search returned a non-finite value {value!r}")
    x = np.asarray(res["x"], dtype=np.float64)
    if mode == MODE_RAY and problem.sense == "minimize":
        x, value, _ = polish_nearest(problem.domain, p, problem.base, F, x)
    if mode == MODE_DISC and problem.sense == "maximize" and k > 1:
        x, value, ph = polish_widest(problem.domain, p, problem.base, F, x, value)
        if ph is not None:
            res["phase"] = ph
    w = from_real(x / np.linalg.norm(x))
    if mode == MODE_DISC:
        w = w * complex(math.cos(res["phase"]), math.sin(res["phase"]))
    return SphereResult(vector=w @ F, value=value, start=int(res["start"]),
                        nfev=int(res["nfev"]), coords=w)


def _unit(a):
    a = as_vector(a)
    nrm = np.linalg.norm(a)
    if nrm == 0.0:
        raise ValueError("direction must be nonzero")
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"direction must have unit norm, got {nrm:.3e}")
    return a / nrm


def disc_distance(domain, q, a, grid=256, phase_tol=1e-10, closed_form=True, with_phase=False):
    """Radius of the largest disc ``q + r D a`` inside the domain.

    Equals the minimum over phases of the ray distance along ``e^{i alpha} a``.
    With ``with_phase`` the minimizing phase is returned as well.
    """
    a = _unit(a)
    if a.size != domain.n:
        raise DimensionError(f"direction has dimension {a.size}, domain lives in C^{domain.n}")
    p = domain.problem(q, a[None, :], grid=grid, phase_tol=phase_tol, closed_form=closed_form)
    value, phase = p.disc_distance(np.array([1.0, 0.0]))
    if with_phase:
        return float(value), float(phase)
    return float(value)


def grid_disc_distance(domain, q, a, points=4096):
    """Plain phase-grid minimum of the ray distance, without refinement."""
    a = _unit(a)
    ph = 2.0 * np.pi * np.arange(points) / points
    p = domain.problem(q, a[None, :])
    dirs = np.stack([np.cos(ph), np.sin(ph)], axis=1)
    return float(np.min(p.evaluate(MODE_RAY, dirs)))


def euclidean_distance(domain, q, options=None):
    """Distance from ``q`` to the boundary and a unit direction attaining it."""
    opts = options or SearchOptions()
    q = domain.require_inside(q)
    prob = SphereOptProblem(domain, q, np.eye(domain.n), sense="minimize",
                            objective="ray", options=opts)
    res = optimize_over_sphere(prob)
    return res.value, res.vector


def ray_values(domain, q, directions):
    """Ray distances from ``q`` along each row of ``directions`` (complex unit vectors)."""
    D = np.atleast_2d(np.asarray(directions, dtype=np.complex128))
    p = domain.problem(q, np.eye(domain.n))
    return p.evaluate(MODE_RAY, np.array([to_real(d) for d in D]))


__all__ = [
    "SearchOptions", "SphereOptProblem", "SphereResult", "sphere_starts",
    "optimize_over_sphere", "disc_distance", "grid_disc_distance",
    "euclidean_distance", "ray_values",
]
