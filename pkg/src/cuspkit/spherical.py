"""Spherical transform, its inverse, the Abel transform and related checks.

Normalizations used throughout:

* radial measure on the plane: 2 pi sinh r dr;
* spherical transform: k^(s) = 2 pi int_0^inf k(r) Xi_s(r) sinh r dr;
* inversion: k(r) = int_R k^(s) Xi_s(r) rho(s) ds with
  rho(s) = s tanh(pi s) / (4 pi) = |c(s)|^{-2} / (4 pi^2);
* Abel transform: Sk(u) = e^{u/2} int_R k(d(i, e^u (x + i))) dx, whose
  Fourier transform int Sk(u) e^{isu} du equals k^(s).
"""
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from . import io as _io
from .errors import (DomainError, InsufficientDecayError, PreconditionError,
                     TruncationError)
from .special_fn import plancherel_density_arch, spherical_grid

__all__ = [
    "RadialKernel", "SpectralParameter", "SpectralMultiplier",
    "zero_multiplier", "constant_multiplier", "bspline_window",
    "gaussian_multiplier", "wave_multiplier", "hecke_multiplier",
    "transform_multiplier", "spherical_forward", "spherical_inverse",
    "abel_transform", "abel_fourier", "kernel_norm_sq", "spectral_norm_sq",
    "paley_wiener_check", "PaleyWienerReport", "dkv_decay_check", "DKVReport",
    "plancherel_density_tree", "tree_moment", "standard_kernel_suite",
]

GL_ORDER = 20
MAX_PHASE_PER_PANEL = 8.0


@functools.lru_cache(maxsize=8)
def _leggauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gl_panels(a, b, n_panels, order=GL_ORDER):
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _leggauss(order)
    edges = np.linspace(a, b, int(n_panels) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def clustered_nodes(R, n_panels, order=GL_ORDER):
    """Nodes/weights for int_0^R g(r) dr under r = R (1 - tau^2).

    The substitution turns half-integer power behaviour (R - r)^{j + 1/2}
    at the right endpoint into a smooth function of tau.
    """
    tau, wt = gl_panels(0.0, 1.0, n_panels, order)
    return R * (1.0 - tau * tau), wt * 2.0 * R * tau


# ---------------------------------------------------------------------------
# radial kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialKernel:
    """Radial profile of a bi-K-invariant function on the hyperbolic plane.

    Parameters
    ----------
    grid : array
        Strictly increasing radii starting at 0 and covering the support.
    values : array
        Samples on ``grid``; zero beyond ``support_radius``.
    support_radius : float
        Declared support. Evaluation returns 0 for r > support_radius.
    func : callable, optional
        Exact evaluator on [0, support_radius]. When absent the samples are
        interpolated with a cubic spline.
    meta : dict
        Free-form provenance (tolerances, truncation diagnostics).
    jump_modulus : float, optional
        If given, adjacent samples may differ by at most this much.
    """
    grid: np.ndarray
    values: np.ndarray
    support_radius: float
    func: Optional[Callable] = None
    meta: dict = field(default_factory=dict)
    jump_modulus: Optional[float] = None

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or grid[0] != 0.0:
            raise DomainError("kernel grid must be 1-D and start at r = 0")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("kernel grid must be strictly increasing")
        if values.shape != grid.shape:
            raise DomainError("kernel values must match the grid")
        if not np.all(np.isfinite(values)):
            raise DomainError("kernel values must be finite")
        R = float(self.support_radius)
        if R < 0 or grid[-1] < R - 1e-12:
            raise DomainError("kernel grid must cover [0, support_radius]")
        if np.any(values[grid > R + 1e-12] != 0.0):
            raise DomainError("kernel values beyond support_radius must vanish")
        if self.jump_modulus is not None and grid.size > 1:
            if np.max(np.abs(np.diff(values))) > self.jump_modulus:
                raise DomainError("kernel profile exceeds its declared jump modulus")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "support_radius", R)
        object.__setattr__(self, "meta", dict(self.meta))

    @functools.cached_property
    def _spline(self):
        if self.grid.size < 2:
            return None
        return CubicSpline(self.grid, self.values, bc_type=((1, 0.0), "not-a-knot"))

    @property
    def is_zero(self):
        return self.func is None and not np.any(self.values)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape)
        inside = (r >= 0) & (r <= self.support_radius)
        if np.any(r < 0):
            raise DomainError("radial kernels are evaluated at r >= 0")
        if not np.any(inside) or self.is_zero:
            return out if r.ndim else float(out)
        if self.func is not None:
            out[inside] = self.func(r[inside])
        elif self._spline is not None:
            out[inside] = self._spline(r[inside])
        else:
            out[inside] = self.values[0]
        return out if r.ndim else float(out)

    @classmethod
    def from_function(cls, func, support_radius, n=513, **meta):
        """Sample ``func`` on a uniform grid over [0, support_radius]."""
        R = float(support_radius)
        grid = np.linspace(0.0, R, n) if R > 0 else np.array([0.0])
        vals = np.asarray(func(grid), dtype=float)
        if R == 0:
            vals = np.zeros(1)
        return cls(grid, vals, R, func=func if R > 0 else None, meta=meta)

    @classmethod
    def zero(cls, grid=None):
        grid = np.array([0.0]) if grid is None else np.asarray(grid, dtype=float)
        return cls(grid, np.zeros(grid.size), 0.0)

    def max_abs(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    # serialization ------------------------------------------------------
    def to_files(self, csv_path, json_path=None):
        """Write ``(abscissa, value)`` CSV and a JSON metadata sidecar."""
        _io.write_csv(csv_path, ["abscissa", "value"], zip(self.grid, self.values))
        json_path = json_path or str(csv_path).rsplit(".", 1)[0] + ".json"
        _io.write_json(json_path, {
            "support_radius": self.support_radius,
            "band_limit": self.meta.get("band_limit"),
            "tolerances": {k: v for k, v in self.meta.items() if "tol" in k},
            "meta": self.meta,
        })
        return csv_path, json_path

    @classmethod
    def from_files(cls, csv_path, json_path=None):
        json_path = json_path or str(csv_path).rsplit(".", 1)[0] + ".json"
        header, rows = _io.read_csv(csv_path)
        if header != ["abscissa", "value"]:
            raise DomainError(f"unexpected kernel CSV header {header}")
        arr = np.array(rows, dtype=float)
        info = _io.read_json(json_path)
        return cls(arr[:, 0], arr[:, 1], float(info["support_radius"]), meta=info.get("meta", {}))


# ---------------------------------------------------------------------------
# spectral parameters and multipliers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralParameter:
    """(s, theta): archimedean parameter and optional finite-place angle."""
    s: complex
    theta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        if not (math.isfinite(self.s.real) and math.isfinite(self.s.imag)):
            raise DomainError("spectral parameter must be finite")

    @property
    def tempered(self):
        return self.s.imag == 0.0

    def is_unitary(self, p=None):
        s = self.s
        arch = s.imag == 0.0 or (s.real == 0.0 and abs(s.imag) <= 0.5)
        if self.theta is None:
            return arch
        th = complex(self.theta)
        if th.imag == 0.0:
            return arch
        if p is None:
            raise DomainError("a prime is needed to test the complementary range")
        two_cos = 2.0 * np.cos(th)
        return bool(arch and abs(two_cos.imag) < 1e-12
                    and abs(two_cos.real) <= math.sqrt(p) + 1 / math.sqrt(p))


def _combine_band(a, b, op):
    if a is None or b is None:
        return None
    return op(a, b)


class SpectralMultiplier:
    """Closed-form function h(s, theta) with declared band limit and decay.

    Parameters
    ----------
    evaluator : callable
        ``evaluator(s, theta)`` on broadcastable complex arrays; ``theta`` is
        ``None`` for multipliers that ignore it.
    band_limit : float or None
        Support radius of the associated kernel, ``None`` if not compact.
    decay_order : float
        N such that |h(s)| <= C_N (1 + |s|)^{-N} on the real axis.
    uses_theta : bool
        Whether the finite-place angle is consumed.
    """

    def __init__(self, evaluator, band_limit=None, decay_order=0.0, uses_theta=False,
                 label="h", is_zero=False):
        self._eval = evaluator
        self.band_limit = None if band_limit is None else float(band_limit)
        self.decay_order = float(decay_order)
        self.uses_theta = bool(uses_theta)
        self.label = label
        self.is_zero = bool(is_zero)

    def __repr__(self):
        return (f"SpectralMultiplier({self.label}, band_limit={self.band_limit}, "
                f"decay_order={self.decay_order})")

    def __call__(self, s, theta=None):
        if isinstance(s, SpectralParameter):
            s, theta = s.s, s.theta if theta is None else theta
        sa = np.asarray(s, dtype=complex)
        if self.uses_theta and theta is None:
            raise DomainError(f"multiplier {self.label} needs a finite-place angle theta")
        th = None if theta is None else np.asarray(theta, dtype=complex)
        out = np.asarray(self._eval(sa, th), dtype=complex)
        shape = np.broadcast_shapes(sa.shape, out.shape, () if th is None else th.shape)
        out = np.broadcast_to(out, shape).copy()
        if out.ndim == 0:
            return complex(out)
        return out

    # algebra ------------------------------------------------------------
    @staticmethod
    def _lift(x):
        if isinstance(x, SpectralMultiplier):
            return x
        return constant_multiplier(x)

    def __add__(self, other):
        o = self._lift(other)
        if o.is_zero:
            return self
        if self.is_zero:
            return o
        f, g = self._eval, o._eval
        return SpectralMultiplier(
            lambda s, th: f(s, th) + g(s, th),
            band_limit=_combine_band(self.band_limit, o.band_limit, max),
            decay_order=min(self.decay_order, o.decay_order),
            uses_theta=self.uses_theta or o.uses_theta,
            label=f"({self.label} + {o.label})")

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, SpectralMultiplier):
            c = complex(other)
            if c == 0:
                return zero_multiplier()
            f = self._eval
            return SpectralMultiplier(lambda s, th: c * f(s, th), self.band_limit,
                                      self.decay_order, self.uses_theta,
                                      f"{_fmt_scalar(c)}*{self.label}", self.is_zero)
        if self.is_zero or other.is_zero:
            return zero_multiplier()
        f, g = self._eval, other._eval
        return SpectralMultiplier(
            lambda s, th: f(s, th) * g(s, th),
            band_limit=_combine_band(self.band_limit, other.band_limit, lambda a, b: a + b),
            decay_order=self.decay_order + other.decay_order,
            uses_theta=self.uses_theta or other.uses_theta,
            label=f"{self.label}*{other.label}")

    __rmul__ = __mul__

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            raise DomainError("multipliers only support nonnegative integer powers")
        out = constant_multiplier(1.0)
        for _ in range(k):
            out = out * self
        return out

    def polynomial(self, coeffs):
        """q(h) for q(x) = sum_k coeffs[k] x^k, evaluated by Horner's rule."""
        coeffs = [complex(c) for c in coeffs]
        nz = [k for k, c in enumerate(coeffs) if c != 0]
        if not nz:
            return zero_multiplier()
        deg, low = nz[-1], nz[0]
        f = self._eval
        cs = coeffs[:deg + 1]

        def ev(s, th):
            x = f(s, th)
            acc = np.full(np.shape(x), cs[-1], dtype=complex)
            for c in reversed(cs[:-1]):
                acc = acc * x + c
            return acc
        band = None if self.band_limit is None else deg * self.band_limit
        return SpectralMultiplier(ev, band_limit=band, decay_order=low * self.decay_order,
                                  uses_theta=self.uses_theta, label=f"q({self.label})")

    def scaled(self, t):
        """s -> h(t s); band limit scales by t."""
        t = float(t)
        if t <= 0:
            raise DomainError("scale factor must be positive")
        f = self._eval
        band = None if self.band_limit is None else t * self.band_limit
        return SpectralMultiplier(lambda s, th: f(t * s, th), band, self.decay_order,
                                  self.uses_theta, f"{self.label}(t*s)", self.is_zero)

    def at_theta(self, theta):
        """Freeze the finite-place angle, giving an archimedean multiplier."""
        f = self._eval
        th = np.asarray(theta, dtype=complex)
        return SpectralMultiplier(lambda s, _th: f(s, th), self.band_limit, self.decay_order,
                                  False, f"{self.label}|theta", self.is_zero)

    def weyl_residual(self, samples, theta=None):
        """max |h(s) - h(-s)| over the given samples."""
        s = np.asarray(samples, dtype=complex)
        return float(np.max(np.abs(self(s, theta) - self(-s, theta)))) if s.size else 0.0

    def sample_to_csv(self, path, s_grid, theta=None):
        vals = np.atleast_1d(self(np.asarray(s_grid, dtype=complex), theta))
        rows = [(float(np.real(s)), float(v.real)) for s, v in zip(s_grid, vals)]
        return _io.write_csv(path, ["abscissa", "value"], rows)


def _fmt_scalar(c):
    return f"{c.real:g}" if c.imag == 0 else f"{c}"


def zero_multiplier():
    return SpectralMultiplier(lambda s, th: np.zeros(np.shape(s), dtype=complex),
                              band_limit=0.0, decay_order=math.inf, label="0", is_zero=True)


def constant_multiplier(c):
    c = complex(c)
    if c == 0:
        return zero_multiplier()
    return SpectralMultiplier(lambda s, th: np.full(np.shape(s), c, dtype=complex),
                              band_limit=0.0, decay_order=0.0, label=_fmt_scalar(c))


def _sinc(x):
    x = np.asarray(x, dtype=complex)
    out = np.ones(x.shape, dtype=complex)
    big = np.abs(x) > 1e-4
    out[big] = np.sin(x[big]) / x[big]
    xs = x[~big]
    out[~big] = 1.0 - xs * xs / 6.0 + xs ** 4 / 120.0
    return out


def bspline_window(radius=0.5, order=8):
    """Window (sin(sR/m) / (sR/m))^m with band limit R and decay order m.

    Its Abel-side profile is the m-fold convolution of boxes of width
    2R/m, so the kernel is supported in the ball of radius R.
    """
    R, m = float(radius), int(order)
    if R <= 0 or m < 1:
        raise DomainError("window needs radius > 0 and order >= 1")
    return SpectralMultiplier(lambda s, th: _sinc(s * (R / m)) ** m, band_limit=R,
                              decay_order=m, label=f"B{m}[{R:g}]")


def gaussian_multiplier(width=1.0):
    """exp(-(s / width)^2): rapid decay, not band-limited."""
    w = float(width)
    return SpectralMultiplier(lambda s, th: np.exp(-(s / w) ** 2), band_limit=None,
                              decay_order=math.inf, label=f"G[{w:g}]")


def wave_multiplier(t):
    """2 cos(t s), the symbol of the wave propagator U_t."""
    t = float(t)
    return SpectralMultiplier(lambda s, th: 2.0 * np.cos(t * s), band_limit=abs(t),
                              decay_order=0.0, label=f"U[{t:g}]")


def hecke_multiplier(p):
    """2 cos theta, the Hecke eigenvalue at the finite place (1/sqrt(p) normalized)."""
    return SpectralMultiplier(lambda s, th: 2.0 * np.cos(th), band_limit=0.0,
                              decay_order=0.0, uses_theta=True, label=f"T[{p}]")


def transform_multiplier(k, decay_order):
    """The multiplier s -> k^(s) of a compactly supported kernel."""
    return SpectralMultiplier(lambda s, th: spherical_forward(k, np.asarray(s)),
                              band_limit=k.support_radius, decay_order=decay_order,
                              label="k^")


# ---------------------------------------------------------------------------
# forward transform
# ---------------------------------------------------------------------------

def _radial_panels(R, s_abs_max):
    phase = 2.0 * R * (s_abs_max + 1.0)
    return max(8, int(math.ceil(phase / MAX_PHASE_PER_PANEL)))


def spherical_forward(k, s, tol=1e-12):
    """k^(s) = 2 pi int_0^R k(r) Xi_s(r) sinh r dr.

    Composite Gauss-Legendre in the variable tau with r = R(1 - tau^2);
    accepts scalar or array ``s`` (complex allowed).
    """
    sa = np.atleast_1d(np.asarray(s, dtype=complex))
    if k.is_zero or k.support_radius == 0.0:
        out = np.zeros(sa.shape, dtype=complex)
    else:
        R = k.support_radius
        s_max = float(np.max(np.abs(sa.real))) + float(np.max(np.abs(sa.imag)))
        r, w = clustered_nodes(R, _radial_panels(R, s_max))
        kv = np.asarray(k(r)) * np.sinh(r) * w * (2.0 * np.pi)
        xi = spherical_grid(sa.ravel(), r, tol=tol)
        out = (kv @ xi).reshape(sa.shape)
    return complex(out[0]) if np.ndim(s) == 0 else out


def kernel_norm_sq(k):
    """int |k|^2 over the plane, 2 pi int_0^R |k(r)|^2 sinh r dr."""
    if k.is_zero or k.support_radius == 0.0:
        return 0.0
    r, w = clustered_nodes(k.support_radius, 16)
    return float(2.0 * np.pi * np.sum(w * np.sinh(r) * np.abs(k(r)) ** 2))


def spectral_norm_sq(h, s_max, n_panels=None):
    """int_R |h(s)|^2 rho(s) ds truncated at |s| <= s_max (h even)."""
    n_panels = n_panels or max(16, int(math.ceil(s_max / 2.0)))
    s, w = gl_panels(0.0, s_max, n_panels)
    vals = h(s) if callable(h) else np.asarray(h)
    return float(2.0 * np.sum(w * np.abs(vals) ** 2 * plancherel_density_arch(s)))


# ---------------------------------------------------------------------------
# inverse transform
# ---------------------------------------------------------------------------

def _tail_bound(h, S, N):
    s = np.linspace(0.5 * S, S, 257)
    CN = float(np.max(np.abs(h(s)) * (1.0 + s) ** N))
    # int_S^inf (1+s)^{-N} s/(4 pi) ds <= (1+S)^{2-N} / (4 pi (N-2)), both signs
    return 2.0 * CN * (1.0 + S) ** (2.0 - N) / (4.0 * np.pi * (N - 2.0))


def choose_s_max(h, tol, s_start=8.0, s_cap=2e4):
    """Smallest tried S with the certified tail of int |h| rho below tol * scale."""
    N = h.decay_order if math.isfinite(h.decay_order) else 12.0
    S = s_start
    while S <= s_cap:
        s, w = gl_panels(0.0, S, max(16, int(S)))
        scale = 2.0 * float(np.sum(w * np.abs(h(s)) * plancherel_density_arch(s)))
        tail = _tail_bound(h, S, N)
        if tail <= tol * max(scale, 1e-300):
            return S, tail, scale
        S *= 1.5
    raise TruncationError(f"could not bound the spectral tail of {h.label} below {tol:g}")


def synthesize(h, r, s_max, tol=1e-12):
    """k(r) = 2 int_0^{s_max} h(s) rho(s) Xi_s(r) ds on the radii ``r``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    band = h.band_limit or 0.0
    omega = float(np.max(r)) + band + 1.0
    n_panels = max(16, int(math.ceil(s_max * omega / MAX_PHASE_PER_PANEL)))
    s, w = gl_panels(0.0, s_max, n_panels)
    weights = 2.0 * w * np.asarray(h(s)) * plancherel_density_arch(s)
    xi = spherical_grid(s, r, tol=tol)
    vals = xi @ weights
    return vals.real, float(np.max(np.abs(vals.imag))) if vals.size else 0.0, s.size


def spherical_inverse(h, r_grid=None, *, tol=1e-10, truncate=True, n_r=513,
                      r_cap=12.0, support_tol=1e-6, s_max=None):
    """Synthesize the radial kernel of a multiplier via the inversion formula.

    Parameters
    ----------
    h : SpectralMultiplier
        Archimedean multiplier with ``decay_order >= 4``.
    r_grid : array, optional
        Output radii (must start at 0). Defaults to a uniform grid on
        [0, band_limit], or on [0, r_cap] when no band limit is declared.
    tol : float
        Relative tolerance for the spectral truncation, measured against
        int |h| d(mu_Planch), which bounds sup |k|.
    truncate : bool
        Zero the kernel beyond its support radius. The values removed are
        recorded in ``meta['tail_sup_rel']`` / ``meta['tail_mass_rel']``.
    support_tol : float
        Maximum allowed relative tail beyond the declared band limit.

    Raises
    ------
    InsufficientDecayError
        ``decay_order < 4``.
    TruncationError
        The spectral tail or the support tail cannot be brought below tolerance.
    """
    if h.uses_theta:
        raise PreconditionError("freeze theta with at_theta() before inverting")
    if h.is_zero:
        return RadialKernel.zero(r_grid)
    if h.decay_order < 4:
        raise InsufficientDecayError(
            f"decay_order {h.decay_order:g} < 4: inversion integral may diverge")
    if s_max is None:
        s_max, tail, scale = choose_s_max(h, tol)
    else:
        tail, scale = _tail_bound(h, s_max, h.decay_order if math.isfinite(h.decay_order) else 12.0), None
    band = h.band_limit
    if r_grid is None:
        top = band if band is not None else r_cap
        r_grid = np.linspace(0.0, top, n_r)
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid[0] != 0.0:
        raise DomainError("r_grid must start at 0")
    probe = np.array([])
    if band is not None and truncate:
        probe = np.linspace(band, band + 1.5, 97)[1:]
        probe = probe[probe > r_grid[-1]]
    vals, imag, n_s = synthesize(h, np.concatenate([r_grid, probe]), s_max)
    values, probe_vals = vals[:r_grid.size], vals[r_grid.size:]
    meta = dict(s_max=s_max, spectral_tail=tail, spectral_scale=scale, tol=tol,
                n_s_nodes=n_s, imag_residual=imag, band_limit=band,
                decay_order=h.decay_order, label=h.label)
    peak = max(float(np.max(np.abs(values))), 1e-300)
    if band is not None:
        support = band
    else:
        weighted = np.abs(values) * np.sinh(r_grid)
        wpeak = max(float(np.max(weighted)), 1e-300)
        above = np.flatnonzero(weighted > support_tol * wpeak)
        last = int(above[-1]) if above.size else 0
        if last >= r_grid.size - 1 and truncate:
            raise TruncationError(f"kernel of {h.label} not negligible by r = {r_grid[-1]:g}")
        support = float(r_grid[min(last + 1, r_grid.size - 1)])
    if not truncate:
        support = float(r_grid[-1])
    outside = r_grid > support
    tail_vals = np.concatenate([values[outside], probe_vals])
    tail_r = np.concatenate([r_grid[outside], probe[probe > support] if probe.size else probe])
    meta["tail_sup_rel"] = float(np.max(np.abs(tail_vals))) / peak if tail_vals.size else 0.0
    if tail_vals.size > 1:
        order = np.argsort(tail_r)
        tr, tv = tail_r[order], tail_vals[order]
        inner_r, inner_w = clustered_nodes(support, 16) if support > 0 else (np.zeros(1), np.zeros(1))
        inside_mass = abs(np.sum(inner_w * np.sinh(inner_r)
                                 * np.abs(np.interp(inner_r, r_grid, values))))
        tail_mass = np.trapezoid(np.abs(tv) * np.sinh(tr), tr)
        meta["tail_mass_rel"] = float(tail_mass / max(inside_mass, 1e-300))
    else:
        meta["tail_mass_rel"] = 0.0
    if band is not None and truncate and meta["tail_sup_rel"] > support_tol:
        raise TruncationError(
            f"kernel of {h.label} has relative tail {meta['tail_sup_rel']:.2e} beyond R = {band:g}")
    values = np.where(outside, 0.0, values)
    return RadialKernel(r_grid, values, support, meta=meta)


# ---------------------------------------------------------------------------
# Abel transform
# ---------------------------------------------------------------------------

def abel_transform(k, u, n_panels=8):
    """Sk(u) = sqrt(2) int_R k(rho(u, v)) dv, cosh rho = cosh u + v^2.

    Even in u and zero for |u| >= support_radius. Accepts arrays.
    """
    ua = np.abs(np.atleast_1d(np.asarray(u, dtype=float)))
    out = np.zeros(ua.shape)
    R = k.support_radius
    inside = ua < R
    if np.any(inside) and not k.is_zero:
        sh_u = np.sinh(0.5 * ua[inside]) ** 2
        V = np.sqrt(2.0 * (np.sinh(0.5 * R) ** 2 - sh_u))
        tau, wt = gl_panels(0.0, 1.0, n_panels)
        v = V[:, None] * (1.0 - tau * tau)[None, :]
        wv = V[:, None] * (2.0 * tau * wt)[None, :]
        rho = 2.0 * np.arcsinh(np.sqrt(sh_u[:, None] + 0.5 * v * v))
        rho = np.minimum(rho, R)
        out[inside] = 2.0 * math.sqrt(2.0) * np.sum(np.asarray(k(rho)) * wv, axis=1)
    return float(out[0]) if np.ndim(u) == 0 else out


def abel_fourier(k, s, n_panels=None):
    """int_R Sk(u) e^{isu} du, computed from the Abel transform alone."""
    sa = np.atleast_1d(np.asarray(s, dtype=complex))
    R = k.support_radius
    if k.is_zero or R == 0.0:
        out = np.zeros(sa.shape, dtype=complex)
    else:
        s_max = float(np.max(np.abs(sa)))
        n_panels = n_panels or _radial_panels(R, s_max)
        u, w = clustered_nodes(R, n_panels)
        su = abel_transform(k, u)
        out = 2.0 * (np.cos(np.outer(sa.ravel(), u)) @ (w * su)).reshape(sa.shape)
    return complex(out[0]) if np.ndim(s) == 0 else out


# ---------------------------------------------------------------------------
# Paley-Wiener growth
# ---------------------------------------------------------------------------

@dataclass
class PaleyWienerReport:
    samples: np.ndarray
    ratios: np.ndarray
    C0: float
    C2: float
    radius: float

    @property
    def max_ratio(self):
        return float(np.max(self.ratios)) if self.ratios.size else 0.0

    @property
    def passed(self):
        return self.max_ratio <= 1.0


def _radial_laplacian(k, r, h=1e-3):
    # -(k'' + coth r k'), using a symmetric extension k(-r) = k(r)
    def ev(x):
        return np.asarray(k(np.abs(x)))
    d1 = (ev(r + h) - ev(r - h)) / (2 * h)
    d2 = (ev(r + h) - 2 * ev(r) + ev(r - h)) / (h * h)
    return -(d2 + d1 / np.tanh(r))


def paley_wiener_check(k, samples, radius=None):
    """Check |k^(z)| <= min(C0, C2 / |1/4 + z^2|) e^{R |Im z|} on samples.

    C0 = 2 pi int |k| Xi_0 sinh r dr and C2 is the same for Delta k, so the
    bound follows from |Xi_z(r)| <= Xi_0(r) e^{|Im z| r}. Passing a smaller
    ``radius`` than the true support turns this into a negative control.
    """
    R = k.support_radius if radius is None else float(radius)
    z = np.asarray(samples, dtype=complex)
    Rk = k.support_radius
    r, w = clustered_nodes(Rk, 32)
    xi0 = spherical_grid(np.array([0.0]), r)[:, 0].real
    base = 2.0 * np.pi * w * np.sinh(r) * xi0
    C0 = float(np.sum(base * np.abs(k(r))))
    C2 = float(np.sum(base * np.abs(_radial_laplacian(k, r))))
    C2 *= 1.0 + 1e-3  # finite-difference slack
    vals = np.abs(spherical_forward(k, z))
    bound = np.minimum(C0, C2 / np.maximum(np.abs(0.25 + z * z), 1e-300)) * np.exp(R * np.abs(z.imag))
    return PaleyWienerReport(z, vals / bound, C0, C2, R)


# ---------------------------------------------------------------------------
# decay of spherical functions
# ---------------------------------------------------------------------------

@dataclass
class DKVReport:
    constant: float
    constant_half: float
    s_max: float
    window: tuple

    @property
    def relative_change(self):
        return abs(self.constant - self.constant_half) / self.constant


def dkv_decay_check(s_max, r_window, n_s=401, n_r=41):
    """sup of |Xi_s(r)| (1 + |s|)^{1/2} over s in [0, s_max] and the r window.

    Also reports the same sup restricted to s <= s_max / 2, so callers can
    judge whether the constant has stabilized.
    """
    r1, r2 = map(float, r_window)
    if r1 <= 0 or r2 < r1:
        raise DomainError("the r window must satisfy 0 < r1 <= r2")
    s = np.linspace(0.0, s_max, n_s)
    r = np.linspace(r1, r2, n_r)
    vals = np.abs(spherical_grid(s, r)) * np.sqrt(1.0 + s)[None, :]
    per_s = vals.max(axis=0)
    const = float(per_s.max())
    half = float(per_s[s <= 0.5 * s_max].max())
    if not math.isfinite(const):
        raise DomainError("decay constant is not finite")
    return DKVReport(const, half, float(s_max), (r1, r2))


# ---------------------------------------------------------------------------
# tree Plancherel factor
# ---------------------------------------------------------------------------

def plancherel_density_tree(p, lam):
    """Kesten density of the (p+1)-regular tree in the variable lambda."""
    la = np.asarray(lam, dtype=float)
    four_p = 4.0 * p
    out = np.zeros(la.shape)
    inside = la * la < four_p
    li = la[inside]
    out[inside] = (p + 1) / (2 * np.pi) * np.sqrt(four_p - li * li) / ((p + 1) ** 2 - li * li)
    return float(out) if la.ndim == 0 else out


def tree_moment(p, k, n=4096):
    """int lambda^k f_p(lambda) d lambda via lambda = 2 sqrt(p) cos theta.

    The transformed integrand is smooth and periodic, so the trapezoid rule
    converges geometrically.
    """
    th = np.linspace(0.0, np.pi, n + 1)
    lam = 2.0 * math.sqrt(p) * np.cos(th)
    jac = 2.0 * math.sqrt(p) * np.sin(th)
    f = lam ** k * plancherel_density_tree(p, lam) * jac
    w = np.full(th.size, np.pi / n)
    w[[0, -1]] *= 0.5
    return float(np.sum(w * f))


# ---------------------------------------------------------------------------
# reference kernels
# ---------------------------------------------------------------------------

def standard_kernel_suite():
    """Five compactly supported smooth test kernels used by the transform checks."""
    def poly(R, j):
        return lambda r: np.clip(1.0 - (np.asarray(r) / R) ** 2, 0.0, None) ** j

    def cosh_bump(R, j):
        c = math.cosh(R) - 1.0
        return lambda r: np.clip((math.cosh(R) - np.cosh(r)) / c, 0.0, None) ** j

    def smooth_bump(R):
        def f(r):
            x = np.asarray(r, dtype=float) / R
            out = np.zeros(x.shape)
            m = x < 1
            out[m] = np.exp(1.0 - 1.0 / (1.0 - x[m] ** 2))
            return out
        return f

    def oscillating(R):
        base = poly(R, 8)
        return lambda r: base(r) * np.cos(3.0 * np.asarray(r))

    def heat_tapered(R):
        base = poly(R, 10)
        return lambda r: base(r) * np.exp(-np.asarray(r) ** 2)

    # third entry: a safe decay order for the transform, from the order of
    # vanishing at the support edge (12 stands in for infinite smoothness)
    specs = {
        "poly8_R1": (poly(1.0, 8), 1.0, 8),
        "cosh6_R1.5": (cosh_bump(1.5, 6), 1.5, 6),
        "smooth_R2": (smooth_bump(2.0), 2.0, 12),
        "oscill_R1.2": (oscillating(1.2), 1.2, 8),
        "heat_R2.5": (heat_tapered(2.5), 2.5, 10),
    }
    return {name: RadialKernel.from_function(f, R, name=name, decay_order=N)
            for name, (f, R, N) in specs.items()}
