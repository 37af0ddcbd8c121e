"""Mode-level calculus on the cusp of the modular surface.

A :class:`ModeFunction` is a finite even Fourier expansion
f(x + iy) = sum_n h_n(y) cos(2 pi n x) with each h_n sampled on its own
uniform grid in log y and vanishing below a floor R_n. On such functions
this module implements the Hecke operator T_p (1/sqrt(p) normalization),
convolution with radial kernels, and the cuspidal operator
aleph = T_p - U_{log p}, smoothed by a band-limited window H on both
branches.
"""
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import io as _io
from .errors import (DomainError, InfeasibleError, InsufficientDecayError,
                     PreconditionError)
from .spherical import (RadialKernel, SpectralMultiplier, bspline_window,
                        gl_panels, spherical_inverse, wave_multiplier)

__all__ = [
    "Mode", "ModeFunction", "HeckeParams", "AlephMultiplier", "is_prime",
    "default_window", "bump_mode", "hecke_apply", "hecke_injectivity_check",
    "smoothed_wave_kernel", "window_kernel", "convolve_mode", "aleph_branches",
    "aleph_apply", "constant_term", "eisenstein_line_residual",
    "aleph_spectrum_sup", "weierstrass_multiplier", "inner_product", "norm",
]

DEFAULT_WINDOW_RADIUS = 0.5
DEFAULT_WINDOW_ORDER = 8


def is_prime(p):
    p = int(p)
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class HeckeParams:
    """Prime p for T_p f(z) = p^{-1/2} (f(pz) + sum_k f((z + k) / p))."""
    p: int = 2

    def __post_init__(self):
        if not is_prime(self.p):
            raise DomainError(f"Hecke operator needs a prime, got {self.p}")

    @property
    def normalization(self):
        return 1.0 / math.sqrt(self.p)


# ---------------------------------------------------------------------------
# modes
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Mode:
    """Profile h(y) sampled at log y = log_origin + j * log_step."""
    n: int
    floor: float
    log_origin: float
    log_step: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise DomainError("a mode profile needs at least two samples")
        if self.log_step <= 0:
            raise DomainError("log_step must be positive")
        if not np.all(np.isfinite(vals)):
            raise DomainError("mode profile must be finite")
        if self.floor <= 0:
            raise DomainError("support floor must be positive")
        y = np.exp(self.log_origin + self.log_step * np.arange(vals.size))
        below = y <= self.floor * (1 + 1e-12)
        if np.any(vals[below] != 0.0):
            peak = np.max(np.abs(vals))
            if np.max(np.abs(vals[below])) > 1e-13 * max(peak, 1e-300):
                raise DomainError(f"mode {self.n} profile does not vanish below its floor")
            vals[below] = 0.0
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "floor", float(self.floor))

    @property
    def log_grid(self):
        return self.log_origin + self.log_step * np.arange(self.values.size)

    @property
    def y_grid(self):
        return np.exp(self.log_grid)

    @functools.cached_property
    def _spline(self):
        return CubicSpline(self.log_grid, self.values)

    def profile(self, y):
        """h(y): spline in log y on the sampled range, zero outside it."""
        u = np.log(np.asarray(y, dtype=float))
        out = np.zeros(u.shape)
        lo, hi = self.log_origin, self.log_grid[-1]
        m = (u >= lo) & (u <= hi) & (np.exp(u) > self.floor)
        out[m] = self._spline(u[m])
        return out if out.ndim else float(out)

    def rescaled(self, n, factor, scale, floor):
        """Mode with profile y -> scale * h(factor * y), an exact origin shift."""
        return Mode(n, floor, self.log_origin - math.log(factor), self.log_step,
                    scale * self.values)

    def norm_sq(self):
        # per-mode Petersson norm: int_0^1 cos^2 = 1/2, measure dy / y^2
        u = self.log_grid
        return 0.5 * float(np.trapezoid(self.values ** 2 * np.exp(-u), u)) * (1.0 if self.n else 2.0)


def _aligned(a, b):
    if abs(a.log_step - b.log_step) > 1e-12 * a.log_step:
        return None
    off = (b.log_origin - a.log_origin) / a.log_step
    k = round(off)
    return k if abs(off - k) < 1e-9 else None


def _add_modes(a, b):
    """Sum of two profiles for the same n (exact when the grids align)."""
    k = _aligned(a, b)
    if k is not None:
        lo = min(0, k)
        hi = max(a.values.size, k + b.values.size)
        vals = np.zeros(hi - lo)
        vals[-lo:-lo + a.values.size] += a.values
        vals[k - lo:k - lo + b.values.size] += b.values
        return Mode(a.n, min(a.floor, b.floor), a.log_origin + lo * a.log_step, a.log_step, vals)
    step = min(a.log_step, b.log_step)
    lo = min(a.log_origin, b.log_origin)
    hi = max(a.log_grid[-1], b.log_grid[-1])
    u = lo + step * np.arange(int(math.ceil((hi - lo) / step)) + 1)
    y = np.exp(u)
    return Mode(a.n, min(a.floor, b.floor), lo, step, a.profile(y) + b.profile(y))


class ModeFunction:
    """Even cusp expansion sum_n h_n(y) cos(2 pi n x) with no constant term.

    Parameters
    ----------
    modes : iterable of Mode
        Profiles keyed by n; negative n is folded onto |n| (cosine parity),
        repeated n are summed.
    """

    parity = "even"

    def __init__(self, modes=(), *, allow_constant_term=False):
        table = {}
        for m in modes:
            if m.n == 0 and not allow_constant_term:
                raise DomainError("mode 0 is excluded: mode functions have mean zero")
            if m.n < 0:
                m = Mode(-m.n, m.floor, m.log_origin, m.log_step, m.values)
            table[m.n] = _add_modes(table[m.n], m) if m.n in table else m
        self._modes = {n: table[n] for n in sorted(table)}
        self.cuspidal_by_type = not allow_constant_term

    @classmethod
    def with_constant_term(cls, modes):
        """Diagnostics only: an expansion that may carry a mode-0 profile."""
        return cls(modes, allow_constant_term=True)

    @classmethod
    def zero(cls):
        return cls(())

    @property
    def modes(self):
        return dict(self._modes)

    def mode_set(self):
        return set(self._modes)

    def floors(self):
        return {n: m.floor for n, m in self._modes.items()}

    @property
    def support_floor(self):
        return min((m.floor for m in self._modes.values()), default=math.inf)

    def __getitem__(self, n):
        return self._modes[n]

    def __contains__(self, n):
        return n in self._modes

    def __len__(self):
        return len(self._modes)

    def is_zero(self):
        return all(not np.any(m.values) for m in self._modes.values())

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast_shapes(x.shape, y.shape))
        for n, m in self._modes.items():
            out = out + m.profile(y) * np.cos(2 * np.pi * n * x)
        return out

    def scaled(self, c):
        return ModeFunction([Mode(m.n, m.floor, m.log_origin, m.log_step, c * m.values)
                             for m in self._modes.values()],
                            allow_constant_term=not self.cuspidal_by_type)

    def __add__(self, other):
        return ModeFunction(list(self._modes.values()) + list(other._modes.values()),
                            allow_constant_term=not (self.cuspidal_by_type and other.cuspidal_by_type))

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    # serialization ------------------------------------------------------
    def to_json(self, path=None):
        obj = {"parity": self.parity, "modes": [
            {"n": m.n, "floor": m.floor, "grid": m.y_grid.tolist(),
             "values": m.values.tolist(), "log_origin": m.log_origin,
             "log_step": m.log_step} for m in self._modes.values()]}
        if path is not None:
            _io.write_json(path, obj)
        return obj

    @classmethod
    def from_json(cls, obj_or_path):
        obj = obj_or_path if isinstance(obj_or_path, dict) else _io.read_json(obj_or_path)
        if obj.get("parity", "even") != "even":
            raise DomainError("only even expansions are supported")
        modes = []
        for d in obj["modes"]:
            if "log_origin" in d:
                o, h = float(d["log_origin"]), float(d["log_step"])
            else:
                lg = np.log(np.asarray(d["grid"], dtype=float))
                o, h = float(lg[0]), float(np.mean(np.diff(lg)))
            modes.append(Mode(int(d["n"]), float(d["floor"]), o, h, d["values"]))
        return cls(modes)


def inner_product(f, g):
    """Petersson product int_0^1 int f g dx dy / y^2, mode by mode."""
    total = 0.0
    for n in f.mode_set() & g.mode_set():
        a, b = f[n], g[n]
        k = _aligned(a, b)
        if k is not None:
            lo, hi = max(0, k), min(a.values.size, k + b.values.size)
            if hi <= lo:
                continue
            u = a.log_grid[lo:hi]
            prod = a.values[lo:hi] * b.values[lo - k:hi - k]
        else:
            step = min(a.log_step, b.log_step)
            lo = max(a.log_origin, b.log_origin)
            hi = min(a.log_grid[-1], b.log_grid[-1])
            if hi <= lo:
                continue
            u = lo + step * np.arange(int(math.floor((hi - lo) / step)) + 1)
            prod = a.profile(np.exp(u)) * b.profile(np.exp(u))
        total += (0.5 if n else 1.0) * float(np.trapezoid(prod * np.exp(-u), u))
    return total


def norm(f):
    return math.sqrt(max(inner_product(f, f), 0.0))


def bump_mode(n, floor, log_width=0.35, samples=401, amplitude=1.0):
    """Single-mode function with a smooth compact bump profile above ``floor``.

    The profile is exp(1 - 1/(1 - v^2)) in v = (log y - c) / w, centred so
    that its support is exactly [floor, floor * e^{2w}].
    """
    if n == 0:
        raise DomainError("mode 0 is excluded")
    w = float(log_width)
    lo = math.log(floor)
    u = np.linspace(lo, lo + 2 * w, samples)
    v = (u - (lo + w)) / w
    vals = np.zeros(samples)
    inside = np.abs(v) < 1
    vals[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - v[inside] ** 2))
    return ModeFunction([Mode(n, floor, lo, u[1] - u[0], vals)])


# ---------------------------------------------------------------------------
# Hecke operator
# ---------------------------------------------------------------------------

def hecke_apply(f, hp):
    """T_p on a mode function, by exact bookkeeping of modes and floors.

    Mode n with profile h and floor R contributes mode pn with profile
    h(p y) / sqrt(p) and floor R / p, and, if p divides n, mode n / p with
    profile sqrt(p) h(y / p) and floor p R.
    """
    if isinstance(hp, int):
        hp = HeckeParams(hp)
    p = hp.p
    sp = math.sqrt(p)
    out = []
    for n, m in f.modes.items():
        out.append(m.rescaled(p * n, p, 1.0 / sp, m.floor / p))
        if n % p == 0:
            out.append(m.rescaled(n // p, 1.0 / p, sp, m.floor * p))
    return ModeFunction(out, allow_constant_term=not f.cuspidal_by_type)


def hecke_injectivity_check(f, hp):
    """Recover a single-mode f from the mode-pn component of T_p f.

    Returns True when the recovered profile reproduces f exactly (which also
    shows T_p f = 0 forces f = 0).
    """
    if isinstance(hp, int):
        hp = HeckeParams(hp)
    if len(f) == 0:
        return True
    if len(f) != 1:
        raise PreconditionError("injectivity check expects a single-mode function")
    (n, m), = f.modes.items()
    image = hecke_apply(f, hp)
    if hp.p * n not in image:
        return False
    top = image[hp.p * n]
    back = top.rescaled(n, 1.0 / hp.p, math.sqrt(hp.p), top.floor * hp.p)
    same_grid = (abs(back.log_origin - m.log_origin) <= 1e-12 * max(1.0, abs(m.log_origin))
                 and back.log_step == m.log_step)
    close = np.allclose(back.values, m.values, rtol=1e-15, atol=0.0)
    return bool(same_grid and close)


# ---------------------------------------------------------------------------
# kernels and convolution
# ---------------------------------------------------------------------------

def default_window():
    """The smoothing window H: B-spline power with band limit 0.5 and order 8."""
    return bspline_window(DEFAULT_WINDOW_RADIUS, DEFAULT_WINDOW_ORDER)


def window_kernel(window=None, **kw):
    """Radial kernel of the window alone (the Hecke-branch smoothing)."""
    window = default_window() if window is None else window
    return spherical_inverse(window, **kw)


def smoothed_wave_kernel(t, window=None, **kw):
    """Kernel of H^ (s) * 2 cos(t s): U_t smoothed by the window.

    Supported in the ball of radius t + band_limit(H) by finite propagation
    speed.
    """
    window = default_window() if window is None else window
    if t <= 0:
        raise DomainError("propagation time must be positive")
    if window.is_zero:
        return RadialKernel.zero()
    if window.decay_order < 6:
        raise InsufficientDecayError("the smoothing window needs decay_order >= 6")
    return spherical_inverse(window * wave_multiplier(t), **kw)


def _convolve_profile(mode, k):
    # With x' = sqrt(2 y y') v one has cosh d = cosh(u - u') + v^2, so
    # K_n(y, y') = sqrt(2 y y') int_R k(d) cos(omega v) dv, omega = 2 pi n sqrt(2 y y').
    # On the uniform log grid every offset u - u' recurs, so k is sampled once
    # per offset and the cosine transform is a single matrix product.
    Rk = k.support_radius
    eta = mode.log_step
    pad = int(math.ceil(Rk / eta)) + 1
    out_u = mode.log_origin + eta * np.arange(-pad, mode.values.size + pad)
    out = np.zeros(out_u.size)
    nz = np.flatnonzero(mode.values)
    if nz.size == 0:
        return out_u, out
    j_in = np.arange(nz[0], nz[-1] + 1)
    u_in = mode.log_grid[j_in]
    w_in = eta * mode.values[j_in] * np.exp(-u_in)
    sh2R = math.sinh(0.5 * Rk) ** 2
    two_pi_n = 2.0 * math.pi * mode.n
    for off in range(-pad, pad + 1):
        delta = off * eta
        sh2d = math.sinh(0.5 * delta) ** 2
        if sh2d >= sh2R:
            continue
        V = math.sqrt(2.0 * (sh2R - sh2d))
        scale = np.sqrt(2.0) * np.exp(u_in + 0.5 * delta)
        omega = two_pi_n * scale
        panels = max(2, int(math.ceil(float(omega.max()) * V / 12.0)))
        v, wv = gl_panels(0.0, V, panels)
        d = np.minimum(2.0 * np.arcsinh(np.sqrt(sh2d + 0.5 * v * v)), Rk)
        kv = 2.0 * wv * np.asarray(k(d))
        G = np.cos(np.outer(omega, v)) @ kv
        out[j_in + pad + off] += w_in * scale * G
    return out_u, out


def convolve_mode(f, k):
    """f * k for a radial kernel k, computed mode by mode on the strip.

    Requires every floor R_n > e^{support_radius(k)}, the regime where the
    strip computation agrees with the one on the quotient. Output floors
    are R_n e^{-support_radius}.
    """
    Rk = k.support_radius
    if k.is_zero or Rk == 0.0 and not np.any(k.values):
        return ModeFunction.zero()
    bound = math.exp(Rk)
    for n, m in f.modes.items():
        if m.floor <= bound:
            raise PreconditionError(
                f"mode {n} floor {m.floor:g} must exceed e^(support radius) = {bound:g}")
    out = []
    for n, m in f.modes.items():
        u, vals = _convolve_profile(m, k)
        floor = m.floor * math.exp(-Rk)
        vals = np.where(np.exp(u) <= floor * (1 + 1e-12), 0.0, vals)
        out.append(Mode(n, floor, float(u[0]), m.log_step, vals))
    return ModeFunction(out, allow_constant_term=not f.cuspidal_by_type)


# ---------------------------------------------------------------------------
# the cuspidal operator
# ---------------------------------------------------------------------------

class AlephMultiplier(SpectralMultiplier):
    """aleph^(s, theta) = 2 cos theta - 2 cos(s log p)."""

    def __init__(self, p):
        if not is_prime(p):
            raise DomainError(f"aleph needs a prime, got {p}")
        self.p = int(p)
        lp = math.log(p)
        super().__init__(lambda s, th: 2.0 * np.cos(th) - 2.0 * np.cos(s * lp),
                         band_limit=lp, decay_order=0.0, uses_theta=True,
                         label=f"aleph[{p}]")


@dataclass
class AlephResult:
    output: ModeFunction
    hecke_branch: ModeFunction
    wave_branch: ModeFunction
    smoothed_input: ModeFunction
    kernels: dict = field(default_factory=dict)

    @property
    def branch_inner_product(self):
        return inner_product(self.hecke_branch, self.wave_branch)


def aleph_branches(f, p, window=None, kernels=None):
    """Both smoothed branches of aleph applied to f (see :func:`aleph_apply`)."""
    hp = HeckeParams(p) if isinstance(p, int) else p
    window = default_window() if window is None else window
    RH = window.band_limit
    if RH is None:
        raise PreconditionError("the smoothing window must be band-limited")
    need = hp.p * math.exp(RH)
    for n, m in f.modes.items():
        if m.floor <= need:
            raise PreconditionError(
                f"mode {n} floor R = {m.floor:g} violates the R > p condition "
                f"(with smoothing: R > p e^(R_H) = {need:g})")
    kernels = dict(kernels or {})
    if "window" not in kernels:
        kernels["window"] = window_kernel(window)
    if "wave" not in kernels:
        kernels["wave"] = smoothed_wave_kernel(math.log(hp.p), window)
    smoothed = convolve_mode(f, kernels["window"])
    hecke = hecke_apply(smoothed, hp)
    wave = convolve_mode(f, kernels["wave"])
    overlap = hecke.mode_set() & wave.mode_set()
    if overlap:
        raise PreconditionError(f"branch mode sets overlap at {sorted(overlap)}")
    return AlephResult(hecke - wave, hecke, wave, smoothed, kernels)


def aleph_apply(f, p, window=None, kernels=None):
    """T_p (f * k') - f * k_1: the window-smoothed aleph, landing in cusp forms.

    k' is the kernel of the window H and k_1 that of H^(s) * 2 cos(s log p).
    The mode-n part comes only from the wave branch; modes pn and n/p only
    from the Hecke branch.
    """
    return aleph_branches(f, p, window, kernels).output


def constant_term(f, y):
    """Zeroth Fourier coefficient at height y (zero unless mode 0 was injected)."""
    if y <= 0:
        raise DomainError("height must be positive")
    if 0 in f:
        return float(f[0].profile(y))
    return 0.0


def eisenstein_line_residual(m, p, s_grid):
    """max |m(s, theta)| along theta = s log p (mod 2 pi)."""
    s = np.asarray(s_grid, dtype=float)
    if m.is_zero:
        return 0.0
    theta = np.mod(s * math.log(p), 2 * np.pi)
    return float(np.max(np.abs(m(s, theta))))


def aleph_spectrum_sup(p, n_s=401, n_theta=181, s_max=50.0):
    """sup |aleph^| over a grid of unitary parameters.

    Tempered samples: s real, theta in [0, pi]. Complementary samples:
    s = i sigma with |sigma| <= 1/2 and 2 cos theta real with
    |2 cos theta| <= sqrt(p) + 1/sqrt(p).
    """
    a = AlephMultiplier(p)
    s = np.linspace(-s_max, s_max, n_s)
    th = np.linspace(0.0, np.pi, n_theta)
    tempered = np.abs(a(s[:, None], th[None, :])).max()
    sig = np.linspace(-0.5, 0.5, 41)
    bound = math.sqrt(p) + 1 / math.sqrt(p)
    tau = np.linspace(0.0, math.acosh(bound / 2.0), 41)
    th_c = np.concatenate([th, 1j * tau, np.pi + 1j * tau])
    s_c = np.concatenate([s, 1j * sig])
    comp = np.abs(a(s_c[:, None], th_c[None, :])).max()
    return float(max(tempered, comp))


# ---------------------------------------------------------------------------
# polynomial multipliers in aleph
# ---------------------------------------------------------------------------

@dataclass
class WeierstrassReport:
    degree: int
    bound: float
    measured_deviation: float
    q_zero: float


def weierstrass_multiplier(p, eps, degree=64, delta=0.05, grid_points=10_000):
    """q(aleph^)^2 with q(0) = 0 and q^2 close to 1 on eps <= |t| <= 4 sqrt(p).

    q(t) = 1 - T_N(x(t^2)) / T_N(x(0)) where x maps [eps^2, 16 p] onto
    [-1, 1] and N = degree // 2, so q is an even polynomial of the given
    degree with no constant term. On the annulus |q - 1| <= 1/|T_N(x(0))|
    (Chebyshev extremal property); between 0 and eps, q increases from 0
    to below 1.

    Returns
    -------
    (SpectralMultiplier, WeierstrassReport)

    Raises
    ------
    InfeasibleError
        The guaranteed deviation of q^2 from 1 exceeds ``delta``.
    """
    M = 4.0 * math.sqrt(p)
    if not 0 < eps < M:
        raise DomainError("need 0 < eps < 4 sqrt(p)")
    N = int(degree) // 2
    if N < 1:
        raise InfeasibleError("degree must be at least 2")
    a2, b2 = eps * eps, M * M
    x0 = -(b2 + a2) / (b2 - a2)
    TN0 = math.cosh(N * math.acosh(-x0)) * (-1) ** N
    b = 1.0 / abs(TN0)
    guaranteed = 2 * b + b * b
    if guaranteed > delta:
        raise InfeasibleError(
            f"degree {degree} gives deviation {guaranteed:.3g} > delta = {delta:g}")
    coef = np.zeros(N + 1)
    coef[N] = 1.0

    def q(t):
        x = (2.0 * t * t - b2 - a2) / (b2 - a2)
        return 1.0 - np.polynomial.chebyshev.chebval(x, coef) / TN0

    t = np.linspace(-M, M, grid_points)
    ann = np.abs(t) >= eps
    measured = float(np.max(np.abs(q(t[ann]) ** 2 - 1.0)))
    aleph = AlephMultiplier(p)
    f = aleph._eval
    mult = SpectralMultiplier(lambda s, th: q(f(s, th)) ** 2,
                              band_limit=2 * N * 2 * aleph.band_limit,
                              decay_order=0.0, uses_theta=True, label=f"q(aleph[{p}])^2")
    return mult, WeierstrassReport(int(degree), guaranteed, measured, float(q(np.array(0.0)) ** 2))
