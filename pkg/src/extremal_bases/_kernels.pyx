# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: ray distances, disc distances and sphere search.

Vectors are real arrays in interleaved layout ``[Re z0, Im z0, Re z1, ...]``,
which is what ``complex_array.view(float64)`` produces.  Multiplication by
``i`` maps ``(x, y)`` to ``(-y, x)`` in each pair.

The pure-Python twin lives in ``_kernels_py``; both expose the same
functions with the same semantics and are checked against each other.
"""
import numpy as np

from libc.math cimport sqrt, cos, sin, atan2, fabs, INFINITY, M_PI

cdef enum:
    QUADRIC = 0
    ELLIPSOID = 1

MODE_RAY = 0
MODE_DISC = 1

cdef double INVPHI = 0.6180339887498949
cdef double REFINE_MARGIN = 1e-2
cdef int MAX_REFINE = 16


cdef inline double _quad_root(double a, double b, double g) noexcept:
    # positive root of a t^2 + 2 b t + g = 0 with g < 0 < a
    cdef double s
    if a <= 0.0:
        return INFINITY
    s = sqrt(b * b - a * g)
    if b >= 0.0:
        return -g / (b + s)
    return (s - b) / a


cdef class Problem:
    """Search-space description of one (domain, base point, frame) triple."""

    cdef readonly int kind, m, n, grid
    cdef readonly bint centered
    cdef readonly double gamma, phase_tol, rel_tol, h0
    cdef double last
    cdef readonly long long nray
    cdef double[:, ::1] P
    cdef double[::1] b
    cdef double[::1] w0
    cdef double[:, ::1] G
    cdef double[::1] wts
    cdef long long[::1] exps
    cdef double[::1] cos_t, sin_t, gvals
    cdef double[::1] d1, d2, dv, u2, pu1, pu2
    # per-direction phase coefficients
    cdef double c11, c12, c22, cb1, cb2

    def __init__(self, int kind, int m, int n, int grid, double phase_tol,
                 double rel_tol, double h0):
        cdef int i
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
        self.cos_t = np.cos(2.0 * np.pi * np.arange(grid) / grid)
        self.sin_t = np.sin(2.0 * np.pi * np.arange(grid) / grid)
        self.gvals = np.empty(grid)
        self.u2 = np.empty(m)
        self.pu1 = np.empty(m)
        self.pu2 = np.empty(m)
        self.d1 = np.empty(2 * n)
        self.d2 = np.empty(2 * n)
        self.dv = np.empty(2 * n)

    # ------------------------------------------------------------------ ray
    cdef double _ray_quad(self, const double[::1] v) noexcept:
        cdef int i, j, m = self.m
        cdef double a = 0.0, bb = 0.0, s
        for i in range(m):
            s = 0.0
            for j in range(m):
                s += self.P[i, j] * v[j]
            a += v[i] * s
            bb += v[i] * self.b[i]
        return _quad_root(a, bb, self.gamma)

    cdef double _ell_eval(self, double t, double* deriv) noexcept:
        cdef int j, e, k
        cdef double x, y, dx, dy, s, pw, val = -1.0, der = 0.0
        for j in range(self.n):
            dx = self.dv[2 * j]
            dy = self.dv[2 * j + 1]
            x = self.w0[2 * j] + t * dx
            y = self.w0[2 * j + 1] + t * dy
            s = x * x + y * y
            e = <int> self.exps[j]
            pw = 1.0
            for k in range(e - 1):
                pw *= s
            val += self.wts[j] * pw * s
            der += self.wts[j] * e * pw * 2.0 * (x * dx + y * dy)
        deriv[0] = der
        return val

    cdef double _ell_root(self, double guess) noexcept:
        # f is convex along the ray with f(0) < 0, so Newton from any point
        # with positive slope converges; bracket bookkeeping guards the rest
        cdef double lo = 0.0, hi = INFINITY, t, f, fp, nt
        cdef int it
        t = guess if guess > 0.0 else self.h0
        for it in range(400):
            f = self._ell_eval(t, &fp)
            if f == 0.0:
                return t
            if f > 0.0:
                hi = t
            else:
                lo = t
            if fp > 0.0:
                nt = t - f / fp
            elif hi == INFINITY:
                nt = 2.0 * t
            else:
                nt = 0.5 * (lo + hi)
            if hi == INFINITY:
                if nt <= lo:
                    nt = 2.0 * t
            elif nt <= lo or nt >= hi:
                nt = 0.5 * (lo + hi)
            if fabs(nt - t) <= self.rel_tol * nt or (hi < INFINITY and hi - lo <= self.rel_tol * hi):
                return nt
            if nt > 1e300:
                return INFINITY
            t = nt
        return t

    cdef double _ray_ell(self, const double[::1] v) noexcept:
        cdef int i, j
        cdef double s
        for i in range(2 * self.n):
            s = 0.0
            for j in range(self.m):
                s += self.G[i, j] * v[j]
            self.dv[i] = s
        self.last = self._ell_root(self.last)
        return self.last

    cdef double ray(self, const double[::1] v) noexcept:
        self.nray += 1
        if self.kind == QUADRIC:
            return self._ray_quad(v)
        return self._ray_ell(v)

    # ----------------------------------------------------------------- disc
    cdef void _prepare_phase(self, const double[::1] x) noexcept:
        cdef int i, j, m = self.m
        cdef double s1, s2
        for i in range(0, m, 2):
            self.u2[i] = -x[i + 1]
            self.u2[i + 1] = x[i]
        if self.kind == QUADRIC:
            for i in range(m):
                s1 = 0.0
                s2 = 0.0
                for j in range(m):
                    s1 += self.P[i, j] * x[j]
                    s2 += self.P[i, j] * self.u2[j]
                self.pu1[i] = s1
                self.pu2[i] = s2
            self.c11 = 0.0
            self.c12 = 0.0
            self.c22 = 0.0
            self.cb1 = 0.0
            self.cb2 = 0.0
            for i in range(m):
                self.c11 += x[i] * self.pu1[i]
                self.c12 += x[i] * self.pu2[i]
                self.c22 += self.u2[i] * self.pu2[i]
                self.cb1 += x[i] * self.b[i]
                self.cb2 += self.u2[i] * self.b[i]
        else:
            for i in range(2 * self.n):
                s1 = 0.0
                s2 = 0.0
                for j in range(m):
                    s1 += self.G[i, j] * x[j]
                    s2 += self.G[i, j] * self.u2[j]
                self.d1[i] = s1
                self.d2[i] = s2

    cdef double _phase_ray(self, double c, double s, double guess) noexcept:
        cdef int i
        self.nray += 1
        if self.kind == QUADRIC:
            return _quad_root(self.c11 * c * c + 2.0 * self.c12 * c * s + self.c22 * s * s,
                              self.cb1 * c + self.cb2 * s, self.gamma)
        for i in range(2 * self.n):
            self.dv[i] = c * self.d1[i] + s * self.d2[i]
        return self._ell_root(guess)

    cdef double _golden(self, double lo, double hi, double guess, double* arg) noexcept:
        cdef double x1, x2, f1, f2
        x1 = hi - INVPHI * (hi - lo)
        x2 = lo + INVPHI * (hi - lo)
        f1 = self._phase_ray(cos(x1), sin(x1), guess)
        f2 = self._phase_ray(cos(x2), sin(x2), guess)
        while hi - lo > self.phase_tol:
            if f1 < f2:
                hi = x2
                x2 = x1
                f2 = f1
                x1 = hi - INVPHI * (hi - lo)
                f1 = self._phase_ray(cos(x1), sin(x1), guess)
            else:
                lo = x1
                x1 = x2
                f1 = f2
                x2 = lo + INVPHI * (hi - lo)
                f2 = self._phase_ray(cos(x2), sin(x2), guess)
        if f1 < f2:
            arg[0] = x1
            return f1
        arg[0] = x2
        return f2

    cdef double disc(self, const double[::1] x, double* phase) noexcept:
        cdef int i, N = self.grid, nref, ip, inx
        cdef double lam, best, gmax, h, val, arg, guess, lim
        self._prepare_phase(x)
        if self.kind == QUADRIC and self.centered:
            lam = 0.5 * (self.c11 + self.c22) + sqrt(
                0.25 * (self.c11 - self.c22) ** 2 + self.c12 * self.c12)
            phase[0] = 0.5 * atan2(2.0 * self.c12, self.c11 - self.c22)
            self.nray += 1
            if lam <= 0.0:
                return INFINITY
            return sqrt(-self.gamma / lam)
        guess = self.last
        best = INFINITY
        gmax = -INFINITY
        ip = 0
        for i in range(N):
            val = self._phase_ray(self.cos_t[i], self.sin_t[i], guess)
            self.gvals[i] = val
            guess = val
            if val < best:
                best = val
                ip = i
            if val > gmax:
                gmax = val
        self.last = self.gvals[0]
        h = 2.0 * M_PI / N
        phase[0] = ip * h
        if gmax - best <= 1e-13 * best:
            return best
        lim = best * (1.0 + REFINE_MARGIN)
        nref = 0
        val = best
        for i in range(N):
            if nref >= MAX_REFINE:
                break
            if self.gvals[i] > lim:
                continue
            if not (self.gvals[i] <= self.gvals[(i + N - 1) % N]
                    and self.gvals[i] < self.gvals[(i + 1) % N]):
                continue
            nref += 1
            val = self._golden(i * h - h, i * h + h, self.gvals[i], &arg)
            if val < best:
                best = val
                phase[0] = arg
        return best

    # ------------------------------------------------------------ objective
    cdef double objective(self, int mode, double[::1] x, double* phase) noexcept:
        # x is normalized in place
        cdef int i
        cdef double nrm = 0.0
        for i in range(self.m):
            nrm += x[i] * x[i]
        nrm = sqrt(nrm)
        for i in range(self.m):
            x[i] /= nrm
        phase[0] = 0.0
        if mode == MODE_RAY:
            return self.ray(x)
        return self.disc(x, phase)

    # ----------------------------------------------------------- python API
    def ray_distance(self, double[::1] v):
        return self.ray(v)

    def disc_distance(self, double[::1] x):
        cdef double phase = 0.0
        cdef double val = self.disc(x, &phase)
        return val, phase

    def evaluate(self, int mode, double[:, ::1] X):
        """Objective at each row of ``X`` (rows normalized in a copy)."""
        cdef Py_ssize_t r
        cdef double phase
        cdef double[:, ::1] Y = np.array(X, dtype=np.float64, copy=True)
        out = np.empty(X.shape[0])
        cdef double[::1] o = out
        for r in range(Y.shape[0]):
            o[r] = self.objective(mode, Y[r], &phase)
        return out


def quadric_problem(P, b, double gamma, bint centered=False, int grid=256,
                    double phase_tol=1e-10):
    """Problem for the real quadric ``v'Pv t^2 + 2 v'b t + gamma = 0``."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    cdef Problem p = Problem(QUADRIC, P.shape[0], P.shape[0] // 2, grid,
                             phase_tol, 1e-12, 1e-3)
    p.P = P
    p.b = np.ascontiguousarray(b, dtype=np.float64)
    p.gamma = gamma
    p.centered = centered
    return p


def ellipsoid_problem(w0, G, weights, exponents, int grid=256,
                      double phase_tol=1e-10, double rel_tol=1e-15,
                      double h0=1e-3):
    """Problem for ``sum c_j |w0_j + t (G v)_j|^(2 m_j) = 1``."""
    G = np.ascontiguousarray(G, dtype=np.float64)
    cdef Problem p = Problem(ELLIPSOID, G.shape[1], G.shape[0] // 2, grid,
                             phase_tol, rel_tol, h0)
    p.w0 = np.ascontiguousarray(w0, dtype=np.float64)
    p.G = G
    p.wts = np.ascontiguousarray(weights, dtype=np.float64)
    p.exps = np.ascontiguousarray(exponents, dtype=np.int64)
    p.P = np.zeros((1, 1))
    p.b = np.zeros(1)
    return p


# ---------------------------------------------------------------- search
cdef class _Chart:
    cdef int m, dim
    cdef double[::1] x0
    cdef double[:, ::1] D
    cdef double[::1] pt

    def __init__(self, double[::1] x0, int mode):
        cdef int m = x0.shape[0]
        cdef int i, j, r, cnt
        cdef double s, nrm
        self.m = m
        self.x0 = np.array(x0, copy=True)
        basis = np.zeros((m + 2, m))
        cdef double[:, ::1] B = basis
        cnt = 0
        for i in range(m):
            B[0, i] = x0[i]
        cnt = 1
        if mode == MODE_DISC:
            for i in range(0, m, 2):
                B[1, i] = -x0[i + 1]
                B[1, i + 1] = x0[i]
            cnt = 2
        ref = cnt
        # coordinate vectors ordered by smallest overlap with the fixed part
        order = np.argsort(np.abs(np.asarray(x0)), kind="stable")
        for j in order:
            for i in range(m):
                B[cnt, i] = 0.0
            B[cnt, j] = 1.0
            for _ in range(2):
                for r in range(cnt):
                    s = 0.0
                    for i in range(m):
                        s += B[r, i] * B[cnt, i]
                    for i in range(m):
                        B[cnt, i] -= s * B[r, i]
            nrm = 0.0
            for i in range(m):
                nrm += B[cnt, i] * B[cnt, i]
            nrm = sqrt(nrm)
            if nrm < 1e-6:
                continue
            for i in range(m):
                B[cnt, i] /= nrm
            cnt += 1
            if cnt == m:
                break
        self.dim = cnt - ref
        self.D = np.ascontiguousarray(basis[ref:cnt])
        self.pt = np.empty(m)

    cdef void point(self, const double[::1] c) noexcept:
        cdef int i, j
        cdef double s
        for i in range(self.m):
            s = self.x0[i]
            for j in range(self.dim):
                s += c[j] * self.D[j, i]
            self.pt[i] = s


cdef double _chart_eval(Problem p, _Chart ch, int mode, double sigma,
                        const double[::1] c, double* phase) noexcept:
    ch.point(c)
    return sigma * p.objective(mode, ch.pt, phase)


cdef void _sort_simplex(double[:, ::1] sim, double[::1] fs, double[::1] phs,
                        int d) noexcept:
    # stable insertion sort of the d + 1 vertices by value
    cdef int i, j, k
    cdef double fv, pv, tmp
    for i in range(1, d + 1):
        j = i
        while j > 0 and fs[j - 1] > fs[j]:
            fv = fs[j]
            fs[j] = fs[j - 1]
            fs[j - 1] = fv
            pv = phs[j]
            phs[j] = phs[j - 1]
            phs[j - 1] = pv
            for k in range(d):
                tmp = sim[j, k]
                sim[j, k] = sim[j - 1, k]
                sim[j - 1, k] = tmp
            j -= 1


cdef int _nelder_mead(Problem p, int mode, double sigma, double[::1] x0,
                      double h, double fatol, double xatol, int maxev,
                      double[::1] xout, double* fout, double* phout) except -1:
    """Adaptive Nelder-Mead in a tangent chart at x0; returns evaluations."""
    cdef _Chart ch = _Chart(x0, mode)
    cdef int d = ch.dim, i, j, nev = 0, k
    cdef double ph, fr, fe, fc, fcc, spread, xs
    cdef double rho = 1.0, chi, psi, sig
    if d == 0:
        for i in range(p.m):
            xout[i] = x0[i]
        fout[0] = _chart_eval(p, ch, mode, sigma, np.zeros(1), phout)
        for i in range(p.m):
            xout[i] = ch.pt[i]
        return 1
    chi = 1.0 + 2.0 / d
    psi = 0.75 - 1.0 / (2.0 * d)
    sig = 1.0 - 1.0 / d
    sim_a = np.zeros((d + 1, d))
    cdef double[:, ::1] sim = sim_a
    fs_a = np.empty(d + 1)
    cdef double[::1] fs = fs_a
    phs_a = np.zeros(d + 1)
    cdef double[::1] phs = phs_a
    cdef double[::1] xbar = np.empty(d)
    cdef double[::1] xr = np.empty(d)
    cdef double[::1] xe = np.empty(d)
    cdef double[::1] xc = np.empty(d)
    for i in range(d):
        sim[i + 1, i] = h
    for i in range(d + 1):
        fs[i] = _chart_eval(p, ch, mode, sigma, sim[i], &ph)
        phs[i] = ph
        nev += 1
    while nev < maxev:
        _sort_simplex(sim, fs, phs, d)
        spread = 0.0
        xs = 0.0
        for i in range(1, d + 1):
            if fabs(fs[i] - fs[0]) > spread:
                spread = fabs(fs[i] - fs[0])
            for j in range(d):
                if fabs(sim[i, j] - sim[0, j]) > xs:
                    xs = fabs(sim[i, j] - sim[0, j])
        if spread <= fatol and xs <= xatol:
            break
        for j in range(d):
            xbar[j] = 0.0
            for i in range(d):
                xbar[j] += sim[i, j]
            xbar[j] /= d
        for j in range(d):
            xr[j] = (1.0 + rho) * xbar[j] - rho * sim[d, j]
        fr = _chart_eval(p, ch, mode, sigma, xr, &ph)
        nev += 1
        if fr < fs[0]:
            for j in range(d):
                xe[j] = (1.0 + rho * chi) * xbar[j] - rho * chi * sim[d, j]
            fe = _chart_eval(p, ch, mode, sigma, xe, &phs[d])
            nev += 1
            if fe < fr:
                for j in range(d):
                    sim[d, j] = xe[j]
                fs[d] = fe
            else:
                for j in range(d):
                    sim[d, j] = xr[j]
                fs[d] = fr
                phs[d] = ph
            continue
        if fr < fs[d - 1]:
            for j in range(d):
                sim[d, j] = xr[j]
            fs[d] = fr
            phs[d] = ph
            continue
        if fr < fs[d]:
            for j in range(d):
                xc[j] = (1.0 + psi * rho) * xbar[j] - psi * rho * sim[d, j]
            fc = _chart_eval(p, ch, mode, sigma, xc, &ph)
            nev += 1
            if fc <= fr:
                for j in range(d):
                    sim[d, j] = xc[j]
                fs[d] = fc
                phs[d] = ph
                continue
        else:
            for j in range(d):
                xc[j] = (1.0 - psi) * xbar[j] + psi * sim[d, j]
            fcc = _chart_eval(p, ch, mode, sigma, xc, &ph)
            nev += 1
            if fcc < fs[d]:
                for j in range(d):
                    sim[d, j] = xc[j]
                fs[d] = fcc
                phs[d] = ph
                continue
        for i in range(1, d + 1):
            for j in range(d):
                sim[i, j] = sim[0, j] + sig * (sim[i, j] - sim[0, j])
            fs[i] = _chart_eval(p, ch, mode, sigma, sim[i], &phs[i])
            nev += 1
    k = int(np.argmin(fs_a))
    fout[0] = _chart_eval(p, ch, mode, sigma, sim[k], phout)
    for i in range(p.m):
        xout[i] = ch.pt[i]
    return nev + 1


cdef int _local(Problem p, int mode, double sigma, double[::1] x0, double h,
                double value_tol, double step_tol, int maxev,
                double[::1] xout, double* fout, double* phout) except -1:
    """Nelder-Mead with chart re-centering until restarts stop improving."""
    cdef double[::1] x = np.array(x0, copy=True)
    cdef double[::1] xn = np.empty(p.m)
    cdef double f, fn, ph, phn, move, dot, phn_re, gain
    cdef int nev = 0, i, rounds
    cdef bint improved
    f = sigma * p.objective(mode, x, &ph)
    nev += 1
    for rounds in range(50):
        nev += _nelder_mead(p, mode, sigma, x, h, value_tol * fabs(f),
                            step_tol, maxev - nev, xn, &fn, &phn)
        move = 0.0
        for i in range(p.m):
            move += (xn[i] - x[i]) ** 2
        move = sqrt(move)
        if mode == 1:
            # phase-invariant displacement
            dot = 0.0
            for i in range(p.m):
                dot += xn[i] * x[i]
            dot = dot * dot
            phn_re = 0.0
            for i in range(0, p.m, 2):
                phn_re += xn[i] * (-x[i + 1]) + xn[i + 1] * x[i]
            dot += phn_re * phn_re
            move = sqrt(max(0.0, 2.0 - 2.0 * sqrt(min(dot, 1.0))))
        improved = fn < f
        gain = 0.0
        if improved:
            gain = f - fn
            for i in range(p.m):
                x[i] = xn[i]
            f = fn
            ph = phn
        if (not improved or gain <= value_tol * fabs(f)) and move <= 10.0 * step_tol:
            break
        if nev >= maxev:
            break
        h = min(max(10.0 * move, 100.0 * step_tol), 0.1)
    for i in range(p.m):
        xout[i] = x[i]
    fout[0] = f
    phout[0] = ph
    return nev


def _overlap(int mode, double[::1] a, double[::1] b):
    cdef int i
    cdef double re = 0.0, im = 0.0
    for i in range(a.shape[0]):
        re += a[i] * b[i]
    if mode == MODE_RAY:
        return re
    for i in range(0, a.shape[0], 2):
        im += a[i] * b[i + 1] - a[i + 1] * b[i]
    return sqrt(re * re + im * im)


def _flat_result(p, mode, S, svals, sigma, nev):
    x = S[0].copy()
    ph = p.disc_distance(x)[1] if mode == MODE_DISC else 0.0
    return {"x": x, "value": sigma * svals[0], "phase": ph, "start": 0,
            "nfev": nev + 1, "start_values": sigma * svals}


def search(Problem p, int mode, int sense, starts, int n_scout=16,
           int n_polish=3, double value_tol=1e-10, double step_tol=1e-8,
           int scout_evals=0, int max_evals=20000, double scout_step=0.3,
           double polish_step=0.05, double basin_overlap=0.99):
    """Multistart extremum of the ray (mode 0) or disc (mode 1) objective.

    ``sense`` is +1 to minimize and -1 to maximize.  Returns a dict with the
    best unit vector, its value, the minimizing disc phase, the index of the
    start that produced it, the number of evaluations and the start values.
    """
    cdef double sigma = 1.0 if sense > 0 else -1.0
    S = np.array(starts, dtype=np.float64, copy=True, order="C")
    cdef int ns = S.shape[0], m = p.m, i, r
    cdef double f, ph
    cdef int nev = 0
    if scout_evals <= 0:
        scout_evals = 30 * m
    svals = p.evaluate(mode, S) * sigma
    nev += ns
    # rows of S are now normalized only in the copy used by evaluate
    norms = np.linalg.norm(S, axis=1)
    S /= norms[:, None]
    if svals.max() - svals.min() <= value_tol * abs(svals.min()):
        # objective constant on every start: keep the first one untouched
        return _flat_result(p, mode, S, svals, sigma, nev)
    order = np.argsort(svals, kind="stable")
    scouted = []
    cdef double[::1] xo = np.empty(m)
    for r in order[:max(1, n_scout)]:
        nev += _nelder_mead(p, mode, sigma, S[r], scout_step, value_tol,
                            step_tol, scout_evals, xo, &f, &ph)
        if f > svals[r]:
            scouted.append((svals[r], int(r), S[r].copy()))
        else:
            scouted.append((f, int(r), np.array(xo, copy=True)))
    scouted.sort(key=lambda t: (t[0], t[1]))
    chosen = []
    for f0, r, x in scouted:
        if any(_overlap(mode, x, y) > basin_overlap for _, _, y in chosen):
            continue
        chosen.append((f0, r, x))
        if len(chosen) >= n_polish:
            break
    results = []
    for f0, r, x in chosen:
        nev += _local(p, mode, sigma, x, polish_step, value_tol, step_tol,
                      max_evals, xo, &f, &ph)
        results.append((f, r, np.array(xo, copy=True), ph))
    fbest = min(t[0] for t in results)
    tie = 1e-9 * max(fabs(fbest), 1e-300)
    best = min((t for t in results if t[0] <= fbest + tie), key=lambda t: t[1])
    return {
        "x": best[2],
        "value": sigma * best[0],
        "phase": best[3],
        "start": best[1],
        "nfev": nev,
        "start_values": sigma * svals,
    }
