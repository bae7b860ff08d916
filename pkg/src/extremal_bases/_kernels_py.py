"""Pure-Python twin of the compiled ``_kernels`` module.

Same functions, same algorithms, same interleaved real layout.  It is
selected automatically when the extension is not built, and it serves as
the reference the compiled kernels are tested against.
"""
import math

import numpy as np

QUADRIC = 0
ELLIPSOID = 1
MODE_RAY = 0
MODE_DISC = 1

INVPHI = 0.6180339887498949
REFINE_MARGIN = 1e-2
MAX_REFINE = 16


def _quad_root(a, b, g):
    # positive root of a t^2 + 2 b t + g = 0 with g < 0 < a
    if a <= 0.0:
        return math.inf
    s = math.sqrt(b * b - a * g)
    if b >= 0.0:
        return -g / (b + s)
    return (s - b) / a


def _times_i(x):
    u = np.empty_like(x)
    u[0::2] = -x[1::2]
    u[1::2] = x[0::2]
    return u


class Problem:
    """Search-space description of one (domain, base point, frame) triple."""

    def __init__(self, kind, m, n, grid, phase_tol, rel_tol, h0):
        self.kind = kind
        self.m = m
        self.n = n
        self.grid = grid
        self.phase_tol = phase_tol
        self.rel_tol = rel_tol
        self.h0 = h0
        self.nray = 0
        self.last = -1.0
        self.centered = False
        self.gamma = -1.0
        ang = 2.0 * np.pi * np.arange(grid) / grid
        self.cos_t = np.cos(ang).tolist()
        self.sin_t = np.sin(ang).tolist()
        self.dv = None

    # ------------------------------------------------------------------ ray
    def _ell_eval(self, t):
        x = self.w0[0::2] + t * self.dv[0::2]
        y = self.w0[1::2] + t * self.dv[1::2]
        s = x * x + y * y
        pw = s ** (self.exps - 1)
        val = float(np.dot(self.wts, pw * s)) - 1.0
        der = float(np.dot(self.wts * self.exps * pw,
                           2.0 * (x * self.dv[0::2] + y * self.dv[1::2])))
        return val, der

    def _ell_root(self, guess):
        # f is convex along the ray with f(0) < 0, so Newton from any point
        # with positive slope converges; bracket bookkeeping guards the rest
        lo, hi = 0.0, math.inf
        t = guess if guess > 0.0 else self.h0
        for _ in range(400):
            f, fp = self._ell_eval(t)
            if f == 0.0:
                return t
            if f > 0.0:
                hi = t
            else:
                lo = t
            if fp > 0.0:
                nt = t - f / fp
            elif hi == math.inf:
                nt = 2.0 * t
            else:
                nt = 0.5 * (lo + hi)
            if hi == math.inf:
                if nt <= lo:
                    nt = 2.0 * t
            elif nt <= lo or nt >= hi:
                nt = 0.5 * (lo + hi)
            if abs(nt - t) <= self.rel_tol * nt or (hi < math.inf and hi - lo <= self.rel_tol * hi):
                return nt
            if nt > 1e300:
                return math.inf
            t = nt
        return t

    def ray(self, v):
        self.nray += 1
        if self.kind == QUADRIC:
            return _quad_root(float(v @ self.P @ v), float(v @ self.b), self.gamma)
        self.dv = self.G @ v
        self.last = self._ell_root(self.last)
        return self.last

    # ----------------------------------------------------------------- disc
    def _prepare_phase(self, x):
        u2 = _times_i(x)
        if self.kind == QUADRIC:
            pu1 = self.P @ x
            pu2 = self.P @ u2
            self.c11 = float(x @ pu1)
            self.c12 = float(x @ pu2)
            self.c22 = float(u2 @ pu2)
            self.cb1 = float(x @ self.b)
            self.cb2 = float(u2 @ self.b)
        else:
            self.d1 = self.G @ x
            self.d2 = self.G @ u2

    def _phase_ray(self, c, s, guess):
        self.nray += 1
        if self.kind == QUADRIC:
            return _quad_root(self.c11 * c * c + 2.0 * self.c12 * c * s + self.c22 * s * s,
                              self.cb1 * c + self.cb2 * s, self.gamma)
        self.dv = c * self.d1 + s * self.d2
        return self._ell_root(guess)

    def _golden(self, lo, hi, guess):
        x1 = hi - INVPHI * (hi - lo)
        x2 = lo + INVPHI * (hi - lo)
        f1 = self._phase_ray(math.cos(x1), math.sin(x1), guess)
        f2 = self._phase_ray(math.cos(x2), math.sin(x2), guess)
        while hi - lo > self.phase_tol:
            if f1 < f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - INVPHI * (hi - lo)
                f1 = self._phase_ray(math.cos(x1), math.sin(x1), guess)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + INVPHI * (hi - lo)
                f2 = self._phase_ray(math.cos(x2), math.sin(x2), guess)
        if f1 < f2:
            return f1, x1
        return f2, x2

    def disc(self, x):
        self._prepare_phase(x)
        if self.kind == QUADRIC and self.centered:
            lam = 0.5 * (self.c11 + self.c22) + math.sqrt(
                0.25 * (self.c11 - self.c22) ** 2 + self.c12 * self.c12)
            self.nray += 1
            phase = 0.5 * math.atan2(2.0 * self.c12, self.c11 - self.c22)
            if lam <= 0.0:
                return math.inf, phase
            return math.sqrt(-self.gamma / lam), phase
        N = self.grid
        guess = self.last
        vals = []
        for c, s in zip(self.cos_t, self.sin_t):
            guess = self._phase_ray(c, s, guess)
            vals.append(guess)
        ip = min(range(N), key=vals.__getitem__)
        best = vals[ip]
        if self.kind == ELLIPSOID:
            self.last = vals[0]
        h = 2.0 * math.pi / N
        phase = ip * h
        if max(vals) - best <= 1e-13 * best:
            return best, phase
        lim = best * (1.0 + REFINE_MARGIN)
        nref = 0
        for i in range(N):
            if nref >= MAX_REFINE:
                break
            if vals[i] > lim:
                continue
            if not (vals[i] <= vals[i - 1] and vals[i] < vals[(i + 1) % N]):
                continue
            nref += 1
            val, arg = self._golden(i * h - h, i * h + h, vals[i])
            if val < best:
                best, phase = val, arg
        return best, phase

    def objective(self, mode, x):
        # x is normalized in place
        x /= math.sqrt(float(x @ x))
        if mode == MODE_RAY:
            return self.ray(x), 0.0
        return self.disc(x)

    # ----------------------------------------------------------- python API
    def ray_distance(self, v):
        return self.ray(np.asarray(v, dtype=np.float64))

    def disc_distance(self, x):
        return self.disc(np.asarray(x, dtype=np.float64))

    def evaluate(self, mode, X):
        Y = np.array(X, dtype=np.float64, copy=True)
        return np.array([self.objective(mode, row)[0] for row in Y])


def quadric_problem(P, b, gamma, centered=False, grid=256, phase_tol=1e-10):
    """Problem for the real quadric ``v'Pv t^2 + 2 v'b t + gamma = 0``."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    p = Problem(QUADRIC, P.shape[0], P.shape[0] // 2, grid, phase_tol, 1e-12, 1e-3)
    p.P = P
    p.b = np.ascontiguousarray(b, dtype=np.float64)
    p.gamma = float(gamma)
    p.centered = bool(centered)
    return p


def ellipsoid_problem(w0, G, weights, exponents, grid=256, phase_tol=1e-10,
                      rel_tol=1e-15, h0=1e-3):
    """Problem for ``sum c_j |w0_j + t (G v)_j|^(2 m_j) = 1``."""
    G = np.ascontiguousarray(G, dtype=np.float64)
    p = Problem(ELLIPSOID, G.shape[1], G.shape[0] // 2, grid, phase_tol, rel_tol, h0)
    p.w0 = np.ascontiguousarray(w0, dtype=np.float64)
    p.G = G
    p.wts = np.ascontiguousarray(weights, dtype=np.float64)
    p.exps = np.ascontiguousarray(exponents, dtype=np.int64)
    return p


# ---------------------------------------------------------------- search
class _Chart:
    def __init__(self, x0, mode):
        m = x0.shape[0]
        self.m = m
        self.x0 = np.array(x0, copy=True)
        fixed = [self.x0]
        if mode == MODE_DISC:
            fixed.append(_times_i(self.x0))
        basis = list(fixed)
        for j in np.argsort(np.abs(self.x0), kind="stable"):
            e = np.zeros(m)
            e[j] = 1.0
            for _ in range(2):
                for r in basis:
                    e -= float(r @ e) * r
            nrm = math.sqrt(float(e @ e))
            if nrm < 1e-6:
                continue
            basis.append(e / nrm)
            if len(basis) == m:
                break
        self.D = np.array(basis[len(fixed):]).reshape(-1, m)
        self.dim = self.D.shape[0]

    def point(self, c):
        return self.x0 + c @ self.D if self.dim else self.x0.copy()


def _chart_eval(p, ch, mode, sigma, c):
    pt = ch.point(np.asarray(c))
    val, ph = p.objective(mode, pt)
    return sigma * val, ph, pt


def _nelder_mead(p, mode, sigma, x0, h, fatol, xatol, maxev):
    """Adaptive Nelder-Mead in a tangent chart at x0.

    Returns ``(x, f, phase, evaluations)``.
    """
    ch = _Chart(np.asarray(x0, dtype=np.float64), mode)
    d = ch.dim
    if d == 0:
        f, ph, pt = _chart_eval(p, ch, mode, sigma, np.zeros(0))
        return pt, f, ph, 1
    chi = 1.0 + 2.0 / d
    psi = 0.75 - 1.0 / (2.0 * d)
    sig = 1.0 - 1.0 / d
    rho = 1.0
    sim = np.zeros((d + 1, d))
    for i in range(d):
        sim[i + 1, i] = h
    fs = np.empty(d + 1)
    phs = np.zeros(d + 1)
    nev = 0
    for i in range(d + 1):
        fs[i], phs[i], _ = _chart_eval(p, ch, mode, sigma, sim[i])
        nev += 1
    while nev < maxev:
        order = np.argsort(fs, kind="stable")
        sim, fs, phs = sim[order], fs[order], phs[order]
        spread = float(np.max(np.abs(fs[1:] - fs[0])))
        xs = float(np.max(np.abs(sim[1:] - sim[0])))
        if spread <= fatol and xs <= xatol:
            break
        xbar = sim[:d].mean(axis=0)
        xr = (1.0 + rho) * xbar - rho * sim[d]
        fr, phr, _ = _chart_eval(p, ch, mode, sigma, xr)
        nev += 1
        if fr < fs[0]:
            xe = (1.0 + rho * chi) * xbar - rho * chi * sim[d]
            fe, phe, _ = _chart_eval(p, ch, mode, sigma, xe)
            nev += 1
            if fe < fr:
                sim[d], fs[d], phs[d] = xe, fe, phe
            else:
                sim[d], fs[d], phs[d] = xr, fr, phr
            continue
        if fr < fs[d - 1]:
            sim[d], fs[d], phs[d] = xr, fr, phr
            continue
        if fr < fs[d]:
            xc = (1.0 + psi * rho) * xbar - psi * rho * sim[d]
            fc, phc, _ = _chart_eval(p, ch, mode, sigma, xc)
            nev += 1
            if fc <= fr:
                sim[d], fs[d], phs[d] = xc, fc, phc
                continue
        else:
            xc = (1.0 - psi) * xbar + psi * sim[d]
            fcc, phc, _ = _chart_eval(p, ch, mode, sigma, xc)
            nev += 1
            if fcc < fs[d]:
                sim[d], fs[d], phs[d] = xc, fcc, phc
                continue
        for i in range(1, d + 1):
            sim[i] = sim[0] + sig * (sim[i] - sim[0])
            fs[i], phs[i], _ = _chart_eval(p, ch, mode, sigma, sim[i])
            nev += 1
    k = int(np.argmin(fs))
    f, ph, pt = _chart_eval(p, ch, mode, sigma, sim[k])
    return pt, f, ph, nev + 1


def _local(p, mode, sigma, x0, h, value_tol, step_tol, maxev):
    """Nelder-Mead with chart re-centering until restarts stop improving."""
    x = np.array(x0, dtype=np.float64, copy=True)
    f, ph = p.objective(mode, x)
    f *= sigma
    nev = 1
    for _ in range(50):
        xn, fn, phn, used = _nelder_mead(p, mode, sigma, x, h, value_tol * abs(f),
                                         step_tol, maxev - nev)
        nev += used
        if mode == MODE_DISC:
            dot = min(_overlap(mode, xn, x) ** 2, 1.0)
            move = math.sqrt(max(0.0, 2.0 - 2.0 * math.sqrt(dot)))
        else:
            move = math.sqrt(float((xn - x) @ (xn - x)))
        improved = fn < f
        if improved:
            x, ph = xn, phn
            gain = f - fn
            f = fn
        if (not improved or gain <= value_tol * abs(f)) and move <= 10.0 * step_tol:
            break
        if nev >= maxev:
            break
        h = min(max(10.0 * move, 100.0 * step_tol), 0.1)
    return x, f, ph, nev


def _overlap(mode, a, b):
    re = float(a @ b)
    if mode == MODE_RAY:
        return re
    im = float(a[0::2] @ b[1::2] - a[1::2] @ b[0::2])
    return math.sqrt(re * re + im * im)


def _flat_result(p, mode, S, svals, sigma, nev):
    x = S[0].copy()
    ph = p.disc_distance(x)[1] if mode == MODE_DISC else 0.0
    return {"x": x, "value": sigma * svals[0], "phase": ph, "start": 0,
            "nfev": nev + 1, "start_values": sigma * svals}


def search(p, mode, sense, starts, n_scout=16, n_polish=3, value_tol=1e-10,
           step_tol=1e-8, scout_evals=0, max_evals=20000, scout_step=0.3,
           polish_step=0.05, basin_overlap=0.99):
    """Multistart extremum of the ray (mode 0) or disc (mode 1) objective.

    ``sense`` is +1 to minimize and -1 to maximize.  Returns a dict with the
    best unit vector, its value, the minimizing disc phase, the index of the
    start that produced it, the number of evaluations and the start values.
    """
    sigma = 1.0 if sense > 0 else -1.0
    S = np.array(starts, dtype=np.float64, copy=True)
    m = p.m
    if scout_evals <= 0:
        scout_evals = 30 * m
    svals = p.evaluate(mode, S) * sigma
    nev = S.shape[0]
    S /= np.linalg.norm(S, axis=1)[:, None]
    if svals.max() - svals.min() <= value_tol * abs(svals.min()):
        # objective constant on every start: keep the first one untouched
        return _flat_result(p, mode, S, svals, sigma, nev)
    order = np.argsort(svals, kind="stable")
    scouted = []
    for r in order[:max(1, n_scout)]:
        xo, f, _, used = _nelder_mead(p, mode, sigma, S[r], scout_step, value_tol,
                                      step_tol, scout_evals)
        nev += used
        if f > svals[r]:
            scouted.append((svals[r], int(r), S[r].copy()))
        else:
            scouted.append((f, int(r), xo))
    scouted.sort(key=lambda t: (t[0], t[1]))
    chosen = []
    for f0, r, x in scouted:
        if any(_overlap(mode, x, y) > basin_overlap for _, _, y in chosen):
            continue
        chosen.append((f0, r, x))
        if len(chosen) >= n_polish:
            break
    results = []
    for _, r, x in chosen:
        xo, f, ph, used = _local(p, mode, sigma, x, polish_step, value_tol,
                                 step_tol, max_evals)
        nev += used
        results.append((f, r, xo, ph))
    fbest = min(t[0] for t in results)
    tie = 1e-9 * max(abs(fbest), 1e-300)
    best = min((t for t in results if t[0] <= fbest + tie), key=lambda t: t[1])
    return {
        "x": best[2],
        "value": sigma * best[0],
        "phase": best[3],
        "start": best[1],
        "nfev": nev,
        "start_values": sigma * svals,
    }
