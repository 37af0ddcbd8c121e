"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The public names at the bottom dispatch on :data:`cuspkit._accel.USE_NUMBA`.
Both implementations are importable explicitly (``*_numba`` / ``*_numpy``)
so tests and ``benchmarks/bench_kernels.py`` can compare them.
"""
import cmath
import math

import numpy as np

from ._accel import USE_NUMBA, njit

LANCZOS_G = 7.0
LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# log-gamma
# ---------------------------------------------------------------------------

def lgamma_numpy(z):
    """Complex log-gamma (a branch of it) for arrays with no poles.

    Arguments with real part below 0.5 are shifted up by the recursion
    Gamma(z) = Gamma(z + m) / (z (z+1) ... (z+m-1)); exp() of the result is
    Gamma(z) regardless of which logarithm branch each term lands on.
    """
    z = np.asarray(z, dtype=complex)
    acc = np.zeros(z.shape, dtype=complex)
    shift = np.maximum(np.ceil(0.5 - z.real), 0).astype(int)
    w = z.copy()
    for m in range(int(shift.max(initial=0))):
        active = shift > m
        acc[active] -= np.log(w[active])
        w[active] += 1.0
    w = w - 1.0
    a = np.full(w.shape, LANCZOS_COEF[0], dtype=complex)
    for k in range(1, LANCZOS_COEF.size):
        a += LANCZOS_COEF[k] / (w + k)
    t = w + LANCZOS_G + 0.5
    return acc + _HALF_LOG_2PI + (w + 0.5) * np.log(t) - t + np.log(a)


@njit(cache=True)
def _lgamma_scalar(z):
    acc = 0j
    while z.real < 0.5:
        acc -= cmath.log(z)
        z += 1.0
    w = z - 1.0
    a = LANCZOS_COEF[0] + 0j
    for k in range(1, 9):
        a += LANCZOS_COEF[k] / (w + k)
    t = w + LANCZOS_G + 0.5
    return acc + _HALF_LOG_2PI + (w + 0.5) * cmath.log(t) - t + cmath.log(a)


# ---------------------------------------------------------------------------
# spherical function: trapezoid rule in the smoothed angular variable
# ---------------------------------------------------------------------------
#
# Xi_s(r) = (2 r e^{-r/2} / pi) * int_0^pi e^{i s r cos w} F(sin(w/2)) F(cos(w/2)) dw
# with F(x) = x / sqrt(1 - exp(-2 r x^2)), F(0) = 1/sqrt(2 r).  The integrand
# is analytic and even-periodic in w, so the trapezoid rule converges
# geometrically once n exceeds roughly |s| r.

def _angular_weights(r, n):
    w = np.linspace(0.0, np.pi, n + 1)
    a = np.sin(0.5 * w)
    b = np.cos(0.5 * w)
    out = np.empty((2, n + 1))
    for row, x in enumerate((a, b)):
        y = 2.0 * r * x * x
        f = np.full(n + 1, 1.0 / math.sqrt(2.0 * r))
        nz = y > 1e-300
        f[nz] = x[nz] / np.sqrt(-np.expm1(-y[nz]))
        out[row] = f
    g = out[0] * out[1]
    g[0] *= 0.5
    g[-1] *= 0.5
    return np.cos(w), g * (2.0 * r * math.exp(-0.5 * r) / n)


def xi_trapezoid_numpy(s, r, n):
    """Trapezoid values with ``n`` and ``n // 2`` panels (n even)."""
    s = np.asarray(s, dtype=complex)
    cosw, wts = _angular_weights(r, n)
    # wts already carries the half-end factors, so the coarse rule is just
    # every even-index weight doubled.
    wts_half = np.zeros_like(wts)
    wts_half[::2] = 2.0 * wts[::2]
    full = np.empty(s.shape, dtype=complex)
    half = np.empty(s.shape, dtype=complex)
    flat_s = s.ravel()
    chunk = max(1, 2_000_000 // (n + 1))
    ff = full.ravel()
    hf = half.ravel()
    real = np.all(flat_s.imag == 0.0)
    for i0 in range(0, flat_s.size, chunk):
        sc = flat_s[i0:i0 + chunk]
        if real:
            ph = np.cos(np.outer(sc.real * r, cosw))
        else:
            ph = np.exp(1j * r * np.outer(sc, cosw))
        ff[i0:i0 + chunk] = ph @ wts
        hf[i0:i0 + chunk] = ph @ wts_half
    return full, half


@njit(cache=True)
def xi_trapezoid_numba(s, r, n):
    s = s.ravel()
    full = np.empty(s.size, dtype=np.complex128)
    half = np.empty(s.size, dtype=np.complex128)
    cosw = np.empty(n + 1)
    wts = np.empty(n + 1)
    pref = 2.0 * r * math.exp(-0.5 * r) / n
    f0 = 1.0 / math.sqrt(2.0 * r)
    for j in range(n + 1):
        w = math.pi * j / n
        cosw[j] = math.cos(w)
        g = 1.0
        for x in (math.sin(0.5 * w), math.cos(0.5 * w)):
            y = 2.0 * r * x * x
            if y > 1e-300:
                g *= x / math.sqrt(-math.expm1(-y))
            else:
                g *= f0
        if j == 0 or j == n:
            g *= 0.5
        wts[j] = g * pref
    for i in range(s.size):
        sr = s[i] * r
        acc = 0j
        acc2 = 0j
        if sr.imag == 0.0:
            for j in range(n + 1):
                v = math.cos(sr.real * cosw[j]) * wts[j]
                acc += v
                if j % 2 == 0:
                    acc2 += v
        else:
            for j in range(n + 1):
                v = cmath.exp(1j * sr * cosw[j]) * wts[j]
                acc += v
                if j % 2 == 0:
                    acc2 += v
        full[i] = acc
        half[i] = 2.0 * acc2
    return full, half


# ---------------------------------------------------------------------------
# spherical function: Harish-Chandra expansion for large |s| r
# ---------------------------------------------------------------------------
#
# Xi_s(r) = c(s) Phi_s(r) + c(-s) Phi_{-s}(r),
# Phi_s(r) = e^{(i s - 1/2) r} 2F1(1/2, 1/2 - i s; 1 - i s; e^{-2r}),
# c(s) = Gamma(1 + i s) / (sqrt(pi) i s Gamma(1/2 + i s)).

def _log_c_numpy(s):
    s = np.asarray(s, dtype=complex)
    return (lgamma_numpy(1.0 + 1j * s) - lgamma_numpy(0.5 + 1j * s)
            - np.log(1j * s) - 0.5 * math.log(math.pi))


def xi_series_numpy(s, r, tol=1e-16, max_terms=4000):
    """Expansion values and the magnitude of the last retained term."""
    s = np.asarray(s, dtype=complex)
    z = math.exp(-2.0 * r)
    out = np.zeros(s.shape, dtype=complex)
    err = np.zeros(s.shape)
    for sign in (1.0, -1.0):
        ss = sign * s
        b = 0.5 - 1j * ss
        c = 1.0 - 1j * ss
        term = np.ones(s.shape, dtype=complex)
        total = np.ones(s.shape, dtype=complex)
        for k in range(max_terms):
            term = term * ((0.5 + k) * (b + k) / ((c + k) * (k + 1.0)) * z)
            total += term
            if np.all(np.abs(term) <= tol * np.abs(total)):
                break
        logpref = _log_c_numpy(ss) + (1j * ss - 0.5) * r
        pref = np.exp(logpref)
        out += pref * total
        err += np.abs(pref * term) / max(1.0 - z, 1e-300)
    return out, err


@njit(cache=True)
def xi_series_numba(s, r, tol=1e-16, max_terms=4000):
    s = s.ravel()
    z = math.exp(-2.0 * r)
    out = np.zeros(s.size, dtype=np.complex128)
    err = np.zeros(s.size)
    lpi = 0.5 * math.log(math.pi)
    for i in range(s.size):
        for sign in (1.0, -1.0):
            ss = sign * s[i]
            b = 0.5 - 1j * ss
            c = 1.0 - 1j * ss
            term = 1.0 + 0j
            total = 1.0 + 0j
            for k in range(max_terms):
                term = term * ((0.5 + k) * (b + k) / ((c + k) * (k + 1.0)) * z)
                total += term
                if abs(term) <= tol * abs(total):
                    break
            logc = (_lgamma_scalar(1.0 + 1j * ss) - _lgamma_scalar(0.5 + 1j * ss)
                    - cmath.log(1j * ss) - lpi)
            pref = cmath.exp(logc + (1j * ss - 0.5) * r)
            out[i] += pref * total
            err[i] += abs(pref * term) / max(1.0 - z, 1e-300)
    return out, err


# Grid version.  The series coefficients a_k(s) do not depend on r, and
# |a_k| <= (1/2)_k / k! <= 1, so truncating after K terms leaves at most
# z^{K+1} / (1 - z).  Each column s is expanded once and reused for all r.

def xi_series_grid_numpy(s, r, mask, tol=1e-16):
    s = np.asarray(s, dtype=complex)
    r = np.asarray(r, dtype=float)
    vals = np.zeros((r.size, s.size), dtype=complex)
    err = np.zeros((r.size, s.size))
    for i, ri in enumerate(r):
        cols = np.flatnonzero(mask[i])
        if cols.size:
            v, e = xi_series_numpy(s[cols], ri, tol=tol, max_terms=20000)
            vals[i, cols] = v
            err[i, cols] = e
    return vals, err


@njit(cache=True)
def xi_series_grid_numba(s, r, mask, tol=1e-16):
    nr, ns = r.size, s.size
    vals = np.zeros((nr, ns), dtype=np.complex128)
    err = np.zeros((nr, ns))
    lpi = 0.5 * math.log(math.pi)
    zs = np.exp(-2.0 * r)
    nterm = np.empty(nr, dtype=np.int64)
    for i in range(nr):
        z = zs[i]
        if z >= 1.0 - 1e-12:
            nterm[i] = 0
            continue
        nterm[i] = min(20000, max(1, int(math.ceil(math.log(tol * (1.0 - z)) / math.log(z)))))
    coef = np.empty(20001, dtype=np.complex128)
    for j in range(ns):
        kmax = 0
        for i in range(nr):
            if mask[i, j] and nterm[i] > kmax:
                kmax = nterm[i]
        if kmax == 0:
            continue
        for sign in (1.0, -1.0):
            ss = sign * s[j]
            b = 0.5 - 1j * ss
            c = 1.0 - 1j * ss
            coef[0] = 1.0
            for k in range(kmax):
                coef[k + 1] = coef[k] * ((0.5 + k) * (b + k) / ((c + k) * (k + 1.0)))
            logc = (_lgamma_scalar(1.0 + 1j * ss) - _lgamma_scalar(0.5 + 1j * ss)
                    - cmath.log(1j * ss) - lpi)
            for i in range(nr):
                if not mask[i, j]:
                    continue
                z = zs[i]
                n = nterm[i]
                acc = coef[n]
                for k in range(n - 1, -1, -1):
                    acc = acc * z + coef[k]
                pref = cmath.exp(logc + (1j * ss - 0.5) * r[i])
                vals[i, j] += pref * acc
                err[i, j] += abs(pref) * z ** (n + 1) / (1.0 - z)
    return vals, err


# ---------------------------------------------------------------------------
# radial wave equation: leapfrog stepping
# ---------------------------------------------------------------------------
#
# u_tt = u_rr + coth(r) u_r + u/4 on a uniform grid r_j = j dr, with the
# symmetric ghost u_{-1} = u_1 and the limit 2 u_rr at r = 0; u = 0 at the
# outer boundary.

def _radial_operator_numpy(u, dr, coth):
    out = np.empty_like(u)
    out[1:-1] = ((u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dr * dr)
                 + coth[1:-1] * (u[2:] - u[:-2]) / (2.0 * dr))
    out[0] = 4.0 * (u[1] - u[0]) / (dr * dr)
    out[-1] = 0.0
    return out + 0.25 * u


def leapfrog_numpy(u_prev, u_curr, dr, dt, nsteps, coth):
    u_prev = u_prev.copy()
    u_curr = u_curr.copy()
    c2 = dt * dt
    for _ in range(nsteps):
        u_next = 2.0 * u_curr - u_prev + c2 * _radial_operator_numpy(u_curr, dr, coth)
        u_next[-1] = 0.0
        u_prev, u_curr = u_curr, u_next
    return u_prev, u_curr


@njit(cache=True)
def leapfrog_numba(u_prev, u_curr, dr, dt, nsteps, coth):
    m = u_curr.size
    a = u_prev.copy()
    b = u_curr.copy()
    c = np.empty(m)
    idr2 = 1.0 / (dr * dr)
    ih = 0.5 / dr
    c2 = dt * dt
    for _ in range(nsteps):
        c[0] = 2.0 * b[0] - a[0] + c2 * (4.0 * (b[1] - b[0]) * idr2 + 0.25 * b[0])
        for j in range(1, m - 1):
            lap = (b[j + 1] - 2.0 * b[j] + b[j - 1]) * idr2 + coth[j] * (b[j + 1] - b[j - 1]) * ih
            c[j] = 2.0 * b[j] - a[j] + c2 * (lap + 0.25 * b[j])
        c[m - 1] = 0.0
        a, b, c = b, c, a
    return a, b


if USE_NUMBA:
    def xi_trapezoid(s, r, n):
        s = np.asarray(s, dtype=np.complex128)
        full, half = xi_trapezoid_numba(np.ascontiguousarray(s.ravel()), float(r), int(n))
        return full.reshape(s.shape), half.reshape(s.shape)

    def xi_series(s, r, tol=1e-16, max_terms=4000):
        s = np.asarray(s, dtype=np.complex128)
        out, err = xi_series_numba(np.ascontiguousarray(s.ravel()), float(r), tol, max_terms)
        return out.reshape(s.shape), err.reshape(s.shape)

    def xi_series_grid(s, r, mask, tol=1e-16):
        return xi_series_grid_numba(np.ascontiguousarray(s, dtype=np.complex128),
                                    np.ascontiguousarray(r, dtype=float),
                                    np.ascontiguousarray(mask, dtype=np.bool_), float(tol))

    def leapfrog(u_prev, u_curr, dr, dt, nsteps, coth):
        return leapfrog_numba(np.ascontiguousarray(u_prev, dtype=float),
                              np.ascontiguousarray(u_curr, dtype=float),
                              float(dr), float(dt), int(nsteps),
                              np.ascontiguousarray(coth, dtype=float))
else:
    xi_trapezoid = xi_trapezoid_numpy
    xi_series = xi_series_numpy
    xi_series_grid = xi_series_grid_numpy
    leapfrog = leapfrog_numpy
