"""Band-limited test functions, Plancherel ball masses and Weyl-count harness.

The test function is h = psi^2 with psi the indicator of [-a, a] smoothed
by the normalized window (beta / N_m) sinc^m(beta s). Its inverse Fourier
transform is supported in [-m beta, m beta], so h is band-limited with
radius 2 m beta, and psi decays like |s|^(1 - m).
"""
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import sici

from . import io as _io
from .errors import DomainError, EmptyListError, InfeasibleError
from .special_fn import plancherel_density_arch
from .spherical import SpectralMultiplier, gl_panels, tree_moment

__all__ = [
    "HChoiceFunction", "build_hchoice", "scale_family", "abel_support_check",
    "sinc_power_cdf", "alpha_constant", "AlphaReport", "EigenvalueList", "weyl_count",
    "WeylTable", "synthetic_weyl_list", "ball_mass", "tree_walk_counts",
]

ALPHA_PGL2 = 1.0 / (4.0 * math.pi)
_GL_X, _GL_W = leggauss(64)
_SMALL_X = 8.0


def sinc_power_integral(m):
    """int_R (sin x / x)^m dx for even m."""
    return math.pi / (2 ** (m - 1) * math.factorial(m - 1)) * sum(
        (-1) ** k * math.comb(m, k) * (m - 2 * k) ** (m - 1) for k in range(m // 2 + 1))


def sinc_power_cdf(x, m):
    """int_0^x (sin t / t)^m dt for real x and even m.

    Gauss-Legendre for |x| <= 8. Beyond that, m - 1 integrations by parts
    reduce the integral to sine integrals, which is free of cancellation.
    """
    if m % 2 or m < 2:
        raise DomainError("window order must be even and >= 2")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= _SMALL_X
    xs = ax[small]
    t = 0.5 * xs[:, None] * (_GL_X + 1.0)
    out[small] = 0.5 * xs * np.sum(_GL_W * np.sinc(t / np.pi) ** m, axis=1)
    xl = ax[~small]
    half = m // 2
    # sin^m t = c0 + sum_k b_k cos(w_k t)
    terms = [(math.comb(m, k) * 2 * (-1) ** (half - k) / 2 ** m, m - 2 * k) for k in range(half)]
    c0 = math.comb(m, half) / 2 ** m
    acc = np.zeros_like(xl)
    for j in range(m - 1):
        fac = math.factorial(m - 2 - j) / math.factorial(m - 1)
        gj = sum(b * w ** j * np.cos(w * xl + j * np.pi / 2) for b, w in terms)
        if j == 0:
            gj = gj + c0
        acc -= gj * xl ** (-(m - 1 - j)) * fac
    acc += (-1) ** half / math.factorial(m - 1) * sum(
        b * w ** (m - 1) * sici(w * xl)[0] for b, w in terms)
    out[~small] = acc
    return np.sign(x) * out


def _psi_real(s, a, beta, m):
    c = 1.0 / sinc_power_integral(m)
    return c * (sinc_power_cdf(beta * (s + a), m) - sinc_power_cdf(beta * (s - a), m))


def _psi_complex(s, a, beta, m):
    """Direct quadrature of the window over [s - a, s + a]; any complex s."""
    c = beta / sinc_power_integral(m)
    n_panels = int(beta * a) + 2
    u, w = gl_panels(-a, a, n_panels)
    z = beta * (s[..., None] - u)
    return c * np.sum(w * np.sinc(z / np.pi) ** m, axis=-1)


def _psi(s, a, beta, m):
    s = np.asarray(s, dtype=complex)
    out = np.empty(s.shape, dtype=complex)
    real = s.imag == 0
    out[real] = _psi_real(s.real[real], a, beta, m)
    if np.any(~real):
        out[~real] = _psi_complex(s[~real], a, beta, m)
    return out


@dataclass
class HChoiceFunction:
    """h = psi(s) conj(psi(conj s)) with its verification report.

    Attributes
    ----------
    epsilon, d, r : target tolerance and group dimensions
    order, beta, half_width : window order m, window scale and indicator half-width a
    psi, h : SpectralMultiplier
    band_limit : float
        Support radius 2 m beta of the kernel with transform h.
    report : dict
        One record per property: grid description, measured value, bound, pass flag.
    """
    epsilon: float
    d: int
    r: int
    order: int
    beta: float
    half_width: float
    psi: SpectralMultiplier
    h: SpectralMultiplier
    band_limit: float
    report: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(rec["passed"] for rec in self.report.values() if "passed" in rec)


def _make(eps, d, r, m, beta, a):
    band_psi = m * beta
    decay = float(m - 1)
    psi = SpectralMultiplier(lambda s, th: _psi(s, a, beta, m), band_psi, decay, label=f"psi_m{m}")

    def h_eval(s, th):
        return _psi(s, a, beta, m) * np.conj(_psi(np.conj(s), a, beta, m))
    h = SpectralMultiplier(h_eval, 2 * band_psi, 2 * decay, label=f"h_eps{eps:g}")
    return HChoiceFunction(eps, d, r, m, beta, a, psi, h, 2 * band_psi)


def _property_grids(eps):
    return {
        "p4": np.linspace(0.0, math.sqrt(1 - eps), 401),
        "p6": np.concatenate([np.linspace(1.0, 3.0, 4001), np.linspace(3.0, 100.0, 4001)[1:]]),
        "real": np.concatenate([np.linspace(0.0, 3.0, 3001), np.linspace(3.0, 100.0, 2001)[1:]]),
        "imag": np.linspace(0.0, 0.5, 51),
    }


def _quick_ok(eps, d, m, beta, a, grids):
    hp4 = _psi_real(grids["p4"], a, beta, m) ** 2
    if hp4.min() < 1 - eps:
        return False
    h6 = _psi_real(grids["p6"], a, beta, m) ** 2
    return float(np.max((1 + grids["p6"]) ** (d + 1) * h6)) < eps


def _min_beta(eps, d, m, a, grids, hi=5e3):
    if not _quick_ok(eps, d, m, hi, a, grids):
        return None
    lo = 0.5
    while hi / lo > 1.002:
        mid = math.sqrt(lo * hi)
        if _quick_ok(eps, d, m, mid, a, grids):
            hi = mid
        else:
            lo = mid
    return hi


def _verify(hc, t_small=1e-2):
    eps, d = hc.epsilon, hc.d
    g = _property_grids(eps)
    h = hc.h
    rep = {}
    s = g["real"]
    hs = h(s)
    rep["p1_even"] = dict(grid="[0, 100], 5001 pts", value=float(np.max(np.abs(h(-s) - hs))),
                          bound=0.0)
    rep["p1_even"]["passed"] = rep["p1_even"]["value"] == 0.0
    him = h(1j * g["imag"])
    neg = float(max(np.max(-hs.real), np.max(-him.real), 0.0))
    imag = float(max(np.max(np.abs(hs.imag)), np.max(np.abs(him.imag) / np.maximum(1, np.abs(him)))))
    rep["p2_real_nonneg"] = dict(grid="real [0,100] and i[0, 1/2]", value=neg, imag_part=imag,
                                 bound=1e-14, passed=neg <= 1e-14 and imag <= 1e-6)
    top = float(np.max(hs.real))
    rep["p3_le_one"] = dict(grid="real [0, 100]", value=top, bound=1.0, passed=top <= 1.0)
    low = float(np.min(h(g["p4"]).real))
    rep["p4_ge_1_minus_eps"] = dict(grid=f"[0, sqrt(1-eps)], {g['p4'].size} pts", value=low,
                                    bound=1 - eps, passed=low >= 1 - eps)
    lim = plancherel_limit(hc)
    rep["p5_plancherel"] = dict(limit=lim, alpha=ALPHA_PGL2,
                                constant=abs(lim - ALPHA_PGL2) / eps,
                                at_t=t_small, value_at_t=scaled_plancherel_mass(hc, t_small))
    sup6 = float(np.max((1 + g["p6"]) ** (d + 1) * np.abs(h(g["p6"]))))
    rep["p6_decay"] = dict(grid="[1, 100], 8001 pts", value=sup6, bound=eps, passed=sup6 < eps)
    hc.report = rep
    return hc


def build_hchoice(eps, d=2, r=1, orders=(6, 8), margin=1.05):
    """Construct and verify the test function for tolerance ``eps``.

    For each window order in turn, the half-width a is scanned over
    (sqrt(1 - eps), 1), the smallest window scale beta passing the
    property 4 and 6 grids is found by bisection, and the candidate with
    the smallest band limit is inflated by ``margin`` and verified.

    Raises
    ------
    InfeasibleError
        No order produced a function passing every property.
    """
    if not 0 < eps < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    if r != 1:
        raise DomainError("only rank one is implemented")
    grids = _property_grids(eps)
    lo_a = math.sqrt(1 - eps)
    failures = []
    for m in orders:
        best = None
        for a in np.linspace(lo_a, 1.0, 41)[1:-1]:
            beta = _min_beta(eps, d, m, a, grids)
            if beta is not None and (best is None or beta < best[1]):
                best = (float(a), beta)
        if best is None:
            failures.append(f"order {m}: no feasible window scale")
            continue
        hc = _verify(_make(eps, d, r, m, margin * best[1], best[0]))
        if hc.passed:
            return hc
        failures.append(f"order {m}: " + ", ".join(k for k, v in hc.report.items()
                                                   if not v.get("passed", True)))
    raise InfeasibleError("; ".join(failures))


def scale_family(hc, t):
    """s -> h(t s) with band limit t * R."""
    if not 0 < t <= 1:
        raise DomainError("scale must lie in (0, 1]")
    h = hc.h if isinstance(hc, HChoiceFunction) else hc
    return h if t == 1 else h.scaled(t)


def abel_support_check(h, u_probe=None, s_max=None, phase_per_panel=8.0):
    """Inverse Fourier transform of h on the flat side, beyond the band limit.

    g(u) = (1/pi) int_0^S h(s) cos(s u) ds is the Abel transform of the
    kernel with spherical transform h. Returns (max |g| beyond the band,
    |g(0)|); the support of g equals the support of the kernel.
    """
    R = h.band_limit
    if R is None:
        raise DomainError("multiplier has no band limit")
    if u_probe is None:
        u_probe = R * np.linspace(1.02, 1.5, 25)
    if s_max is None:
        h0 = abs(h(0.0))
        s_max = 8.0
        while np.max(np.abs(h(np.linspace(0.5 * s_max, s_max, 64)))) > 1e-13 * h0:
            s_max *= 2.0
    u_probe = np.asarray(u_probe, dtype=float)
    n_panels = int(math.ceil(s_max * max(u_probe.max(), 1.0) / phase_per_panel)) + 1
    s, w = gl_panels(0.0, s_max, n_panels)
    hw = h(s).real * w
    g = np.array([np.dot(hw, np.cos(s * u)) for u in u_probe]) / math.pi
    g0 = float(np.sum(hw)) / math.pi
    return float(np.max(np.abs(g))), abs(g0)


def scaled_plancherel_mass(hc, t, s_max=None):
    """t^d int_R h(t s) rho(s) ds."""
    h = hc.h
    S = 100.0 / t if s_max is None else s_max
    s, w = gl_panels(0.0, S, int(S * t * 8) + 8)
    val = 2.0 * float(np.sum(w * h(t * s).real * plancherel_density_arch(s)))
    return t ** hc.d * val


def plancherel_limit(hc, s_max=100.0):
    """t -> 0 limit of the scaled mass: (1/(2 pi)) int_0^inf h(s) s ds (d = 2)."""
    s, w = gl_panels(0.0, s_max, 800)
    return float(np.sum(w * hc.h(s).real * s)) / (2 * math.pi)


# ---------------------------------------------------------------------------
# Plancherel ball masses
# ---------------------------------------------------------------------------

def ball_mass(T):
    """M(T) = int_{|s| <= sqrt(T)} rho(s) ds."""
    S = math.sqrt(T)
    s, w = gl_panels(0.0, S, max(4, int(S) + 1))
    return 2.0 * float(np.sum(w * plancherel_density_arch(s)))


@dataclass
class AlphaReport:
    alpha: float
    T_grid: np.ndarray
    masses: np.ndarray
    ratios: np.ndarray
    fit_alpha: float
    fit_remainder: float
    tree_mass: float
    differences: np.ndarray


def alpha_constant(T_grid, p=None, d=2):
    """Estimate alpha with M(T) ~ alpha T^{d/2}.

    The returned value is the ratio M(T)/T at the largest T; the report
    also has a least-squares fit of ratio = alpha + c / T. With a prime
    ``p`` the masses are multiplied by the total tree Plancherel mass.
    """
    T = np.asarray(T_grid, dtype=float)
    if T.ndim != 1 or T.size < 1 or np.any(np.diff(T) <= 0) or T[0] <= 0:
        raise DomainError("T_grid must be positive and increasing")
    tree = 1.0 if p is None else tree_moment(p, 0)
    masses = np.array([ball_mass(t) for t in T]) * tree
    ratios = masses / T ** (d / 2)
    if T.size >= 2:
        A = np.stack([np.ones_like(T), 1.0 / T], axis=1)
        (fa, fc), *_ = np.linalg.lstsq(A, ratios, rcond=None)
    else:
        fa, fc = ratios[-1], 0.0
    rep = AlphaReport(float(ratios[-1]), T, masses, ratios, float(fa), float(fc), float(tree),
                      np.abs(np.diff(ratios)))
    return rep


def tree_walk_counts(p, k_max):
    """Closed walks of length k from the root of the (p+1)-regular tree, k <= k_max."""
    depth = k_max // 2 + 1
    # vertices by level: root has p+1 children, others p
    parents = [-1]
    level_start = [0]
    frontier = [0]
    for lev in range(depth):
        nxt = []
        for v in frontier:
            for _ in range(p + 1 if v == 0 else p):
                parents.append(v)
                nxt.append(len(parents) - 1)
        level_start.append(len(parents))
        frontier = nxt
    n = len(parents)
    A = np.zeros((n, n), dtype=np.int64)
    for v, par in enumerate(parents):
        if par >= 0:
            A[v, par] = A[par, v] = 1
    e0 = np.zeros(n, dtype=np.int64)
    e0[0] = 1
    vec = e0.copy()
    counts = [1]
    for _ in range(k_max):
        vec = A @ vec
        counts.append(int(vec[0]))
    return counts


# ---------------------------------------------------------------------------
# eigenvalue lists and Weyl counting
# ---------------------------------------------------------------------------

class EigenvalueList:
    """Sorted Laplace eigenvalues lambda = 1/4 + s^2."""

    def __init__(self, lambdas, source=None):
        lam = np.sort(np.asarray(lambdas, dtype=float).reshape(-1))
        if not np.all(np.isfinite(lam)) or np.any(lam < 0):
            raise DomainError("eigenvalues must be finite and nonnegative")
        self.lambdas = lam
        self.source = source or {}

    @classmethod
    def from_parameters(cls, s, source=None):
        s = np.asarray(s, dtype=float)
        return cls(0.25 + s * s, source)

    @classmethod
    def from_csv(cls, path):
        header, rows = _io.read_csv(path)
        if len(header) != 1 or header[0].strip().lower() not in ("lambda", "s"):
            raise DomainError("eigenvalue CSV needs a single 'lambda' or 's' column")
        vals = [float(r[0]) for r in rows if r and r[0].strip()]
        meta = {"path": str(path), "column": header[0].strip().lower()}
        if meta["column"] == "s":
            return cls.from_parameters(vals, meta)
        return cls(vals, meta)

    def to_csv(self, path):
        return _io.write_csv(path, ["lambda"], [(x,) for x in self.lambdas])

    def __len__(self):
        return int(self.lambdas.size)

    @property
    def norm_sq(self):
        """<nu, nu> = lambda - 1/4 (negative for exceptional eigenvalues)."""
        return self.lambdas - 0.25

    @property
    def parameters(self):
        return np.sqrt(np.maximum(self.norm_sq, 0.0))


@dataclass
class WeylTable:
    T: np.ndarray
    counts: np.ndarray
    prediction: np.ndarray
    ratio: np.ndarray
    smoothed: list

    def rows(self):
        return [(float(t), int(n), float(pr), float(r))
                for t, n, pr, r in zip(self.T, self.counts, self.prediction, self.ratio)]

    def to_files(self, csv_path, json_path=None):
        _io.write_csv(csv_path, ["T", "N", "prediction", "ratio"], self.rows())
        if json_path is not None:
            _io.write_json(json_path, {"rows": self.rows(), "smoothed": self.smoothed})


def _tail_bound(eps, t, vol, d=2, alpha=ALPHA_PGL2, n_terms=60):
    n = np.arange(n_terms)
    return float(np.sum(2 * eps * t ** (-d) * alpha * vol * 2.0 ** ((n + 1) * d)
                        / (1 + 2.0 ** n) ** (d + 1)))


def weyl_count(eigs, volume, T_grid, hchoice=None, t_grid=(), alpha=ALPHA_PGL2, d=2):
    """N(T) = #{nu : <nu, nu> <= T} against alpha vol T^{d/2}, plus smoothed sums.

    For each t in ``t_grid`` the smoothed record holds sum h(t s_nu), the
    prediction t^{-d} alpha vol, the measured constant
    (t^d sum / vol - alpha) / eps, the part of the sum with |t s| > 1 and
    the dyadic tail bound for it.
    """
    if len(eigs) == 0:
        raise EmptyListError("eigenvalue list is empty")
    if volume <= 0:
        raise DomainError("volume must be positive")
    T = np.asarray(T_grid, dtype=float)
    ns = eigs.norm_sq
    counts = np.searchsorted(ns, T, side="right")
    pred = alpha * volume * T ** (d / 2)
    smoothed = []
    if hchoice is not None:
        s = eigs.parameters
        for t in t_grid:
            vals = hchoice.h(t * s).real
            total = float(np.sum(vals))
            tail = float(np.sum(vals[t * s > 1]))
            smoothed.append(dict(
                t=float(t), sum=total, prediction=t ** (-d) * alpha * volume,
                sharp_count=int(np.searchsorted(ns, t ** -2, side="right")),
                constant=(t ** d * total / volume - alpha) / hchoice.epsilon,
                tail=tail, tail_bound=_tail_bound(hchoice.epsilon, t, volume, d, alpha)))
    return WeylTable(T, counts, pred, counts / pred, smoothed)


def synthetic_weyl_list(n, s_max, seed=0):
    """n parameters drawn from rho on [0, s_max]; returns (list, volume).

    The volume is chosen so that vol * M(s_max^2) = n, which makes the list
    Weyl-consistent by construction.
    """
    grid = np.linspace(0.0, s_max, 20001)
    dens = plancherel_density_arch(grid)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    s = np.interp(rng.random(n), cdf, grid)
    volume = n / ball_mass(s_max ** 2)
    return EigenvalueList.from_parameters(s, {"synthetic": True, "seed": seed}), volume
