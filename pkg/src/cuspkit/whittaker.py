"""Whittaker functions on the upper half-plane and p-power Poincare-type series.

W(x + iy) = sqrt(y) K_{is}(2 pi y) e^{2 pi i x}. A series
f(z) = sum_k c_k W(p^k z) carries finite-place data in the weights c_k.
Every value comes with a rigorous truncation bound built from
|K_{is}(x)| <= K_0(x) <= sqrt(pi / (2x)) e^{-x}, so that
|W(x + iy)| <= e^{-2 pi y} / 2.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import io as _io
from .errors import DomainError, TailCertificateError
from .special_fn import HyperbolicPoint, bessel_k

__all__ = [
    "WhittakerFunction", "WhittakerSeries", "SeriesValue", "whittaker_eval",
    "whittaker_bound", "casselman_shalika_weights", "series_eval",
    "constant_term_unfold", "siegel_nonvanishing_scan", "ScanRow",
]

# K_{is}(x) < 1e-320 beyond this argument; skip the evaluation
_UNDERFLOW_ARG = 745.0
# relative accuracy of bessel_k against its envelope
_BESSEL_REL = 1e-12


def whittaker_bound(y):
    """Upper bound e^{-2 pi y} / 2 for |W(x + iy)|, any real s."""
    return 0.5 * np.exp(-2.0 * np.pi * np.asarray(y, dtype=float))


@dataclass(frozen=True)
class WhittakerFunction:
    """sqrt(y) K_{is}(2 pi y) e^{2 pi i x} for a real spectral parameter s."""
    s: float

    def __post_init__(self):
        if not math.isfinite(self.s):
            raise DomainError("spectral parameter must be finite")

    def radial(self, y):
        """sqrt(y) K_{is}(2 pi y) (real for real s)."""
        y = np.asarray(y, dtype=float)
        if np.any(y <= 0):
            raise DomainError("height must be positive")
        arg = 2.0 * np.pi * y
        out = np.zeros(y.shape)
        live = arg < _UNDERFLOW_ARG
        if np.any(live):
            k = np.asarray(bessel_k(1j * self.s, arg[live]), dtype=complex).real
            out[live] = np.sqrt(y[live]) * k
        return out

    def __call__(self, x, y=None):
        if isinstance(x, HyperbolicPoint):
            x, y = x.x, x.y
        x = np.asarray(x, dtype=float)
        val = self.radial(y) * np.exp(2j * np.pi * x)
        return complex(val) if np.ndim(val) == 0 else val


def whittaker_eval(w, z):
    """W at a HyperbolicPoint or complex number."""
    if not isinstance(z, HyperbolicPoint):
        z = HyperbolicPoint.from_complex(z)
    return w(z.x, z.y)


def casselman_shalika_weights(p, theta, k_max, allow_degenerate=False):
    """c_k = p^{-k/2} sin((k + 1) theta) / sin(theta), k = 0..k_max.

    This is an external default for the finite-place data, not derived
    here. At theta in {0, pi} the quotient is singular; with
    ``allow_degenerate`` its limit (+-1)^k (k + 1) is used.
    """
    theta = float(theta)
    k = np.arange(k_max + 1)
    scale = float(p) ** (-0.5 * k)
    if not 0.0 < theta < math.pi:
        near0 = abs(math.remainder(theta, 2 * math.pi)) < 1e-12
        nearpi = abs(math.remainder(theta - math.pi, 2 * math.pi)) < 1e-12
        if not (near0 or nearpi) or not allow_degenerate:
            raise DomainError("theta must lie in (0, pi); pass allow_degenerate for 0 or pi")
        sign = 1.0 if near0 else -1.0
        return scale * sign ** k * (k + 1)
    return scale * np.sin((k + 1) * theta) / math.sin(theta)


@dataclass
class WhittakerSeries:
    """f(z) = sum_{k <= K} c_k W(p^k z).

    ``growth`` = (C, rho) bounds the weights beyond the truncation:
    |c_k| <= C rho^k for k > K. The default takes rho = sqrt(p) and the
    smallest C consistent with the given weights.
    """
    base: WhittakerFunction
    p: int
    weights: np.ndarray
    growth: tuple = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex).reshape(-1)
        if w.size == 0:
            raise DomainError("series needs at least one weight")
        self.weights = w
        if self.p < 2:
            raise DomainError("p must be at least 2")
        if self.growth is None:
            rho = math.sqrt(self.p)
            k = np.arange(w.size)
            self.growth = (float(np.max(np.abs(w) / rho ** k)), rho)

    @property
    def k_max(self):
        return self.weights.size - 1

    def tail_bound(self, y, extra=60):
        """Bound on sum_{k > K} |c_k W(p^k z)| at height y."""
        C, rho = self.growth
        k = np.arange(self.k_max + 1, self.k_max + 1 + extra)
        with np.errstate(under="ignore", over="ignore"):
            terms = C * rho ** k * whittaker_bound(float(self.p) ** k * y)
        return float(np.sum(terms))


@dataclass
class SeriesValue:
    value: complex
    certificate: float
    terms: np.ndarray = field(repr=False, default=None)


def series_eval(fs, z, tol=1e-12):
    """sum_k c_k W(p^k z) with a rigorous tail bound.

    Raises
    ------
    TailCertificateError
        The tail bound at this height exceeds ``tol``.
    """
    if not isinstance(z, HyperbolicPoint):
        z = HyperbolicPoint.from_complex(z)
    cert = fs.tail_bound(z.y)
    if cert > tol:
        raise TailCertificateError(f"tail bound {cert:.3g} exceeds {tol:g} at y = {z.y:g}; "
                                   "increase the truncation")
    k = np.arange(fs.k_max + 1)
    scale = float(fs.p) ** k
    terms = fs.weights * fs.base.radial(scale * z.y) * np.exp(2j * np.pi * scale * z.x)
    return SeriesValue(complex(np.sum(terms)), cert, terms)


def _eval_grid(fs, x, y):
    """Series on an (x, y) grid: rows are heights."""
    k = np.arange(fs.k_max + 1)
    scale = float(fs.p) ** k
    out = np.zeros((y.size, x.size), dtype=complex)
    for j, c in enumerate(fs.weights):
        if c == 0:
            continue
        rad = fs.base.radial(scale[j] * y)
        out += c * rad[:, None] * np.exp(2j * np.pi * scale[j] * x)[None, :]
    return out


def constant_term_unfold(fs, y, m, n_nodes=None):
    """int_0^1 f(x + iy) e^{-2 pi i m x} dx by the trapezoid rule.

    f is a trigonometric polynomial in x with frequencies p^k, k <= K, so
    the rule is exact with more than p^K + |m| equispaced nodes.
    """
    if y <= 0:
        raise DomainError("height must be positive")
    need = int(fs.p ** fs.k_max + abs(m)) + 1
    n = need + 1 if n_nodes is None else int(n_nodes)
    if n <= need:
        raise DomainError(f"need more than {need} nodes for exact unfolding")
    x = np.arange(n) / n
    vals = _eval_grid(fs, x, np.array([float(y)]))[0]
    return complex(np.mean(vals * np.exp(-2j * np.pi * m * x)))


@dataclass
class ScanRow:
    T: float
    max_abs: float
    argmax_x: float
    argmax_y: float
    certificate: float
    positive: bool


def siegel_nonvanishing_scan(fs, T_list, n_x=64, n_y=200, span=2.0, path=None):
    """Maximum of |f| over x in [0, 1) and y in [T, T + span] for each T.

    The certificate bounds the gap between the computed and true values of
    f on the grid (tail bound plus evaluation error); a maximum larger than
    it certifies that f is nonzero on the Siegel set above T.
    """
    rows = []
    x = np.arange(n_x) / n_x
    for T in T_list:
        if T <= 0:
            raise DomainError("Siegel heights must be positive")
        y = np.linspace(T, T + span, n_y)
        vals = np.abs(_eval_grid(fs, x, y))
        i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
        top = float(vals[i, j])
        tail = fs.tail_bound(T)
        evalerr = _BESSEL_REL * float(np.sum(np.abs(fs.weights))) * 0.5 * math.exp(-2 * math.pi * T)
        cert = tail + evalerr
        rows.append(ScanRow(float(T), top, float(x[j]), float(y[i]), cert, top > cert))
    if path is not None:
        _io.write_csv(path, ["T", "max", "argmax_x", "argmax_y", "certificate"],
                      [(r.T, r.max_abs, r.argmax_x, r.argmax_y, r.certificate) for r in rows])
    return rows
