"""Special functions on the hyperbolic plane.

Gamma (Lanczos), K-Bessel of imaginary order, the hyperbolic distance, the
spherical function Xi_s and the Harish-Chandra c-function with its
Plancherel density.  The metric is ds^2 = (dx^2 + dy^2) / y^2 and the
Laplacian is -y^2 (d_xx + d_yy), so Delta Xi_s = (1/4 + s^2) Xi_s.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, NonFiniteError, PoleError, QuadratureError

__all__ = [
    "HyperbolicPoint", "gamma", "log_gamma", "bessel_k", "hyperbolic_distance",
    "spherical_function", "spherical_grid", "c_function",
    "plancherel_density_arch",
]

MAX_TRAPEZOID_NODES = 1 << 22
# below this radius the hypergeometric series converges too slowly to pay off
SERIES_MIN_R = 0.02


@dataclass(frozen=True)
class HyperbolicPoint:
    """A point x + iy of the upper half-plane."""
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError("hyperbolic point must have finite coordinates")
        if self.y <= 0:
            raise DomainError(f"hyperbolic point needs y > 0, got y={self.y}")

    @property
    def z(self):
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z):
        return cls(float(np.real(z)), float(np.imag(z)))


def _as_point(p):
    if isinstance(p, HyperbolicPoint):
        return p
    return HyperbolicPoint.from_complex(p)


def _check_finite(value, what):
    if not np.all(np.isfinite(value)):
        raise NonFiniteError(f"{what} produced a non-finite value")
    return value


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return value.reshape(()).item()
    return value


def log_gamma(z):
    """A logarithm of Gamma(z); ``exp(log_gamma(z)) == gamma(z)``."""
    za = np.asarray(z, dtype=complex)
    _reject_poles(za)
    return _scalar_or_array(kernels.lgamma_numpy(za), z)


def _reject_poles(za):
    on_axis = (za.imag == 0) & (za.real <= 0) & (za.real == np.round(za.real))
    if np.any(on_axis):
        raise PoleError(f"gamma has a pole at {za[on_axis].ravel()[0].real:g}")


def gamma(z):
    """Complex gamma function.

    Lanczos (g = 7, 9 terms) in log form with upward recursion for
    Re z < 0.5 and the reflection formula for Re z < -20.  Relative error is
    below 1e-12 on |Re z|, |Im z| <= 50.
    """
    za = np.asarray(z, dtype=complex)
    _reject_poles(za)
    out = np.empty(za.shape, dtype=complex)
    far = za.real < -20.0
    near = ~far
    if np.any(near):
        out[near] = np.exp(kernels.lgamma_numpy(za[near]))
    if np.any(far):
        w = za[far]
        out[far] = np.pi / (np.sin(np.pi * w) * np.exp(kernels.lgamma_numpy(1.0 - w)))
    _check_finite(out, "gamma")
    return _scalar_or_array(out, z)


def bessel_k(order, x, tol=1e-15):
    """Modified Bessel function K_{i s}(x) of purely imaginary order.

    Evaluated from K_{is}(x) = 1/2 int_R exp(-x cosh t + i s t) dt on the
    line Im t = theta, where theta passes through (or near) the saddle
    point so the e^{-pi s / 2} size of the result is factored out exactly.
    The trapezoid step is set from the width of the analyticity strip.
    Accurate to ~1e-12 relative to the envelope for |s| <= 100 and
    x in [1e-3, 300].
    """
    order = complex(order)
    if order.real != 0.0:
        raise DomainError("bessel_k supports purely imaginary order only")
    nu = abs(order.imag)
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(xa <= 0):
        raise DomainError("bessel_k requires arg > 0")
    out = np.array([_kis(nu, float(v), tol) for v in xa.ravel()]).reshape(xa.shape)
    _check_finite(out, "bessel_k")
    return _scalar_or_array(out, x)


def _kis(nu, x, tol):
    delta_min = 0.5 / (1.0 + nu)
    theta = min(math.asin(min(nu / x, 1.0)), 0.5 * math.pi - delta_min)
    delta = 0.5 * math.pi - theta
    c, sn = math.cos(theta), math.sin(theta)
    # beyond |t| = T the factor exp(-x c cosh t) is below e^{-40}
    T = math.acosh(max(1.0, 40.0 / (x * c) + 1.0)) + 0.5
    dp = np.linspace(delta / 40.0, delta, 40)
    growth = np.maximum(x * (c - np.cos(theta - dp)) + nu * dp,
                        x * (c - np.cos(theta + dp)) - nu * dp)
    h = np.max(2.0 * np.pi * dp / (math.log(1.0 / tol) + np.maximum(growth, 0.0)
                                   + math.log1p(T)))
    n = int(math.ceil(T / h))
    t = np.linspace(-T, T, 2 * n + 1)
    f = np.exp(-x * c * np.cosh(t) - 1j * (x * sn * np.sinh(t) - nu * t))
    return (0.5 * math.exp(-nu * theta) * (t[1] - t[0]) * np.sum(f)).real


def hyperbolic_distance(z, w):
    """Distance for the curvature -1 metric: cosh d = 1 + |z-w|^2 / (2 y_z y_w)."""
    z, w = _as_point(z), _as_point(w)
    chord = abs(z.z - w.z)
    return 2.0 * math.asinh(chord / (2.0 * math.sqrt(z.y * w.y)))


def _trapezoid_nodes(s_abs_re, s_abs_im, r):
    need = 1.3 * s_abs_re * r + 2.0 * s_abs_im * r + 4.0 * r + 24.0
    return max(32, 1 << int(math.ceil(math.log2(need))))


def spherical_function(s, r, tol=1e-12):
    """Xi_s(r) = (1/pi) int_0^pi (cosh r + sinh r cos phi)^{is - 1/2} dphi.

    Adaptive trapezoid rule in a smoothed angular variable (the substitution
    log(cosh r + sinh r cos phi) = r cos w removes both endpoint
    singularities), doubling the node count until two nested rules agree to
    ``tol`` (relative once |Xi| exceeds 1, which needs complex s).  Raises
    :class:`QuadratureError` rather than returning a value that did not
    converge.
    """
    if r < 0:
        raise DomainError("spherical_function requires r >= 0")
    s = complex(s)
    if r == 0:
        return 1.0 + 0j
    n = _trapezoid_nodes(abs(s.real), abs(s.imag), r)
    sa = np.array([s])
    while n <= MAX_TRAPEZOID_NODES:
        full, half = kernels.xi_trapezoid(sa, r, n)
        if abs(full[0] - half[0]) <= tol * max(1.0, abs(full[0])):
            _check_finite(full, "spherical_function")
            return complex(full[0])
        n *= 2
    raise QuadratureError(
        f"spherical_function(s={s}, r={r}) did not converge with {MAX_TRAPEZOID_NODES} nodes")


def spherical_grid(s, r, tol=1e-12):
    """Xi_s(r) on the outer product of radii ``r`` and parameters ``s``.

    Returns a complex array of shape ``(len(r), len(s))``.  Pairs with large
    |s| r use the Harish-Chandra expansion c(s) Phi_s + c(-s) Phi_{-s};
    the rest use the adaptive trapezoid rule of :func:`spherical_function`.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise DomainError("spherical_grid requires r >= 0")
    series_ok_s = (np.abs(s.real) >= 1.0) & (np.abs(s.imag) <= 0.75)
    mask = ((r[:, None] >= SERIES_MIN_R) & series_ok_s[None, :]
            & (np.abs(s)[None, :] * r[:, None] >= 24.0))
    if np.any(mask):
        out, err = kernels.xi_series_grid(s, r, mask)
        mask &= err <= tol
    else:
        out = np.empty((r.size, s.size), dtype=complex)
    for i, ri in enumerate(r):
        rest = np.flatnonzero(~mask[i])
        if not rest.size:
            continue
        if ri == 0.0:
            out[i, rest] = 1.0
        else:
            out[i, rest] = _trapezoid_block(s[rest], ri, tol)
    _check_finite(out, "spherical_grid")
    return out


def _trapezoid_block(s, r, tol):
    result = np.empty(s.size, dtype=complex)
    pending = np.arange(s.size)
    n = _trapezoid_nodes(np.abs(s.real).max(), np.abs(s.imag).max(), r)
    while pending.size:
        if n > MAX_TRAPEZOID_NODES:
            raise QuadratureError(f"spherical_grid did not converge at r={r}")
        full, half = kernels.xi_trapezoid(s[pending], r, n)
        done = np.abs(full - half) <= tol * np.maximum(1.0, np.abs(full))
        result[pending[done]] = full[done]
        pending = pending[~done]
        n *= 2
    return result


def c_function(s):
    """Harish-Chandra c(s) = pi^{-1/2} Gamma(is) / Gamma(is + 1/2)."""
    sa = np.asarray(s, dtype=complex)
    if np.any(sa == 0):
        raise PoleError("c_function has a pole at s = 0")
    val = np.exp(kernels._log_c_numpy(sa))
    _check_finite(val, "c_function")
    return _scalar_or_array(val, s)


def plancherel_density_arch(s):
    """(1 / 4 pi^2) |c(s)|^{-2} = s tanh(pi s) / (4 pi); zero at s = 0."""
    sa = np.abs(np.asarray(s, dtype=float))
    val = sa * np.tanh(np.pi * sa) / (4.0 * np.pi)
    return _scalar_or_array(val, s)
