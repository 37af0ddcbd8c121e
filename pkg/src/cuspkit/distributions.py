"""Finite point-mass distributions on R^a x Z^b and their convolution algebra.

Integer coordinates are exact; real coordinates are floats identified
within ``merge_tolerance``. Provides the cancellation construction for
finitely many cyclic subgroups, cyclic pushforwards, characters, the
P_n polynomial calculus and a Monte Carlo estimate of small-value sets of
exponential sums.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import comb

from . import io as _io
from .errors import (AmbiguousGroupingError, AtomOverflowError, DomainError,
                     InfeasibleError)

__all__ = [
    "AmbientGroup", "PointMassDistribution", "SubgroupSpec", "FiniteGroupAction",
    "delta", "convolve", "involution", "lemma2_build", "pushforward_cyclic",
    "fourier_eval", "spectral_sup", "spectral_norm", "pn_apply", "pn_origin_weight",
    "satake_condition_residual", "aleph_satake_profile", "small_value_measure",
    "small_value_table", "smooth_profile",
]

DEFAULT_MERGE_TOL = 1e-9
DEFAULT_ATOM_CAP = 10 ** 6
SAFETY_FACTOR = 1.05


@dataclass(frozen=True)
class AmbientGroup:
    """R^a x Z^b."""
    a: int = 0
    b: int = 1

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b < 1:
            raise DomainError("ambient group needs a, b >= 0 and a + b >= 1")

    @property
    def dim(self):
        return self.a + self.b


def _group_rows(reals, ints, weights, tol):
    """Merge atoms whose integer parts agree and real parts are within tol."""
    n = weights.size
    if n == 0:
        return reals, ints, weights
    q = np.round(reals / tol).astype(np.int64) if reals.shape[1] else np.zeros((n, 0), np.int64)
    keys = np.concatenate([ints, q], axis=1)
    if keys.shape[1] == 0:
        return reals[:1], ints[:1], np.array([weights.sum()])
    order = np.lexsort(keys.T[::-1])
    keys_s = keys[order]
    reals_s = reals[order]
    new = np.ones(n, dtype=bool)
    same_int = np.all(keys_s[1:, :ints.shape[1]] == keys_s[:-1, :ints.shape[1]], axis=1)
    if reals.shape[1]:
        close = np.all(np.abs(reals_s[1:] - reals_s[:-1]) <= tol, axis=1)
    else:
        close = np.ones(n - 1, dtype=bool)
    new[1:] = ~(same_int & close)
    gid = np.cumsum(new) - 1
    w = weights[order]
    out_w = (np.bincount(gid, weights=w.real) + 1j * np.bincount(gid, weights=w.imag))
    first = np.flatnonzero(new)
    return reals_s[first], ints[order][first], out_w


class PointMassDistribution:
    """sum_j w_j delta_{x_j} on R^a x Z^b.

    Parameters
    ----------
    ambient : AmbientGroup
    reals : (N, a) array
    ints : (N, b) integer array
    weights : (N,) complex array
    merge_tolerance : float
        Real coordinates closer than this are treated as the same point.
    """

    def __init__(self, ambient, reals, ints, weights, merge_tolerance=DEFAULT_MERGE_TOL,
                 zero_tol=1e-14):
        self.ambient = ambient
        self.merge_tolerance = float(merge_tolerance)
        w = np.asarray(weights, dtype=complex).reshape(-1)
        reals = np.asarray(reals, dtype=float).reshape(w.size, ambient.a)
        ints = np.asarray(ints, dtype=np.int64).reshape(w.size, ambient.b)
        if not (np.all(np.isfinite(reals)) and np.all(np.isfinite(w))):
            raise DomainError("atoms must have finite coordinates and weights")
        reals, ints, w = _group_rows(reals, ints, w, self.merge_tolerance)
        scale = float(np.sum(np.abs(w))) if w.size else 0.0
        keep = np.abs(w) > zero_tol * scale
        self.reals = reals[keep]
        self.ints = ints[keep]
        self.weights = w[keep]
        for arr in (self.reals, self.ints, self.weights):
            arr.setflags(write=False)

    # construction -------------------------------------------------------
    @classmethod
    def from_atoms(cls, ambient, atoms, **kw):
        """``atoms``: iterable of (point, weight), point = reals + ints."""
        atoms = list(atoms)
        pts = np.array([list(p) for p, _ in atoms], dtype=float).reshape(len(atoms), ambient.dim)
        w = np.array([complex(wt) for _, wt in atoms], dtype=complex)
        ints = pts[:, ambient.a:]
        if np.any(ints != np.round(ints)):
            raise DomainError("lattice coordinates must be integers")
        return cls(ambient, pts[:, :ambient.a], ints.astype(np.int64), w, **kw)

    @classmethod
    def zero(cls, ambient, **kw):
        return cls(ambient, np.zeros((0, ambient.a)), np.zeros((0, ambient.b), np.int64),
                   np.zeros(0, complex), **kw)

    def _like(self, reals, ints, weights):
        return PointMassDistribution(self.ambient, reals, ints, weights, self.merge_tolerance)

    # views --------------------------------------------------------------
    def __len__(self):
        return int(self.weights.size)

    @property
    def points(self):
        return np.concatenate([self.reals, self.ints.astype(float)], axis=1)

    def atoms(self):
        return [(tuple(p), complex(w)) for p, w in zip(self.points, self.weights)]

    def is_zero(self):
        return self.weights.size == 0

    def weight_at(self, point):
        p = np.asarray(point, dtype=float)
        a = self.ambient.a
        hit = np.all(self.ints == p[a:].astype(np.int64), axis=1)
        if a:
            hit &= np.all(np.abs(self.reals - p[:a]) <= self.merge_tolerance, axis=1)
        return complex(self.weights[hit].sum())

    def l1_norm(self):
        return float(np.sum(np.abs(self.weights)))

    def same_atoms(self, other, tol=0.0):
        """Atom-set equality (points within merge tolerance, weights within tol)."""
        if len(self) != len(other):
            return False
        d = (self - other)
        return d.is_zero() or float(np.max(np.abs(d.weights))) <= tol

    # algebra ------------------------------------------------------------
    def __add__(self, other):
        return self._like(np.concatenate([self.reals, other.reals]),
                          np.concatenate([self.ints, other.ints]),
                          np.concatenate([self.weights, other.weights]))

    def __mul__(self, c):
        return self._like(self.reals, self.ints, complex(c) * self.weights)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def map(self, M):
        """Push forward along a linear map on R^a x Z^b (matrix on column points)."""
        pts = self.points @ np.asarray(M, dtype=float).T
        a = self.ambient.a
        ints = np.round(pts[:, a:])
        if np.any(np.abs(pts[:, a:] - ints) > 1e-9):
            raise DomainError("map does not preserve the lattice part")
        return self._like(pts[:, :a], ints.astype(np.int64), self.weights)

    # serialization ------------------------------------------------------
    def to_json(self, path=None):
        obj = {"ambient": {"a": self.ambient.a, "b": self.ambient.b},
               "merge_tolerance": self.merge_tolerance,
               "atoms": [{"point": [float(x) for x in p[:self.ambient.a]]
                          + [int(x) for x in p[self.ambient.a:]],
                          "weight": {"re": float(w.real), "im": float(w.imag)}}
                         for p, w in self.atoms()]}
        if path is not None:
            _io.write_json(path, obj)
        return obj

    @classmethod
    def from_json(cls, obj_or_path):
        obj = obj_or_path if isinstance(obj_or_path, dict) else _io.read_json(obj_or_path)
        amb = AmbientGroup(int(obj["ambient"]["a"]), int(obj["ambient"]["b"]))
        atoms = [(d["point"], _io.complex_from_json(d["weight"])) for d in obj["atoms"]]
        return cls.from_atoms(amb, atoms,
                              merge_tolerance=obj.get("merge_tolerance", DEFAULT_MERGE_TOL))


def delta(ambient, point=None, weight=1.0, **kw):
    point = [0] * ambient.dim if point is None else point
    return PointMassDistribution.from_atoms(ambient, [(point, weight)], **kw)


def convolve(f, g, cap=DEFAULT_ATOM_CAP):
    """f * g: pairwise sums of points with multiplied weights, merged."""
    if f.ambient != g.ambient:
        raise DomainError("distributions live on different ambient groups")
    if len(f) * len(g) > 50 * cap:
        raise AtomOverflowError(f"{len(f)} x {len(g)} atom products exceed the cap {cap}")
    if f.is_zero() or g.is_zero():
        return PointMassDistribution.zero(f.ambient, merge_tolerance=f.merge_tolerance)
    n_out = len(f) * len(g)
    reals = (f.reals[:, None, :] + g.reals[None, :, :]).reshape(n_out, f.ambient.a)
    ints = (f.ints[:, None, :] + g.ints[None, :, :]).reshape(n_out, f.ambient.b)
    w = (f.weights[:, None] * g.weights[None, :]).reshape(-1)
    out = f._like(reals, ints, w)
    if len(out) > cap:
        raise AtomOverflowError(f"convolution produced {len(out)} atoms (cap {cap})")
    return out


def involution(f):
    """f-check(x) = conj(f(-x))."""
    return f._like(-f.reals, -f.ints, np.conj(f.weights))


# ---------------------------------------------------------------------------
# subgroups and finite group actions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubgroupSpec:
    """Cyclic subgroup generated by one nonzero point of R^a x Z^b."""
    generator: tuple

    def __post_init__(self):
        g = tuple(float(x) for x in self.generator)
        if all(x == 0 for x in g):
            raise DomainError("subgroup generators must be nonzero")
        object.__setattr__(self, "generator", g)

    def as_array(self):
        return np.asarray(self.generator, dtype=float)


class FiniteGroupAction:
    """A finite group of linear maps on R^a x Z^b (closure is verified)."""

    def __init__(self, ambient, elements, tol=1e-12):
        self.ambient = ambient
        mats = [np.asarray(m, dtype=float).reshape(ambient.dim, ambient.dim) for m in elements]
        a = ambient.a
        for M in mats:
            if np.any(M[a:, :a] != 0) or np.any(M[a:, a:] != np.round(M[a:, a:])):
                raise DomainError("group elements must preserve the lattice part")
            if abs(abs(np.linalg.det(M[a:, a:])) - 1.0) > 1e-9 if ambient.b else False:
                raise DomainError("lattice part must be invertible over Z")
        ident = np.eye(ambient.dim)
        if not any(np.allclose(M, ident, atol=tol) for M in mats):
            raise DomainError("group action must contain the identity")
        for A in mats:
            for B in mats:
                if not any(np.allclose(A @ B, C, atol=tol) for C in mats):
                    raise DomainError("listed maps are not closed under composition")
        self.elements = mats

    @classmethod
    def trivial(cls, ambient):
        return cls(ambient, [np.eye(ambient.dim)])

    @classmethod
    def sign(cls, ambient):
        """{+1, -1}."""
        return cls(ambient, [np.eye(ambient.dim), -np.eye(ambient.dim)])

    def __len__(self):
        return len(self.elements)


def _same_cyclic(g, h, tol):
    return np.allclose(g, h, atol=tol) or np.allclose(g, -h, atol=tol)


def lemma2_build(subgroups, W, ambient=None, merge_tolerance=DEFAULT_MERGE_TOL, cap=DEFAULT_ATOM_CAP):
    """Nonzero W-invariant distribution annihilating every A_i-invariant function.

    The generator list is first closed under W (so each W-translate of the
    construction still cancels along every subgroup). Then
    f_j = delta_{a_j} - delta_0, f_A = f_1 * ... * f_n, f_B = f_A * f_A-check
    and f = sum_{w in W} w(f_B). The result is checked for nonvanishing,
    W-invariance and zero pushforward along each input subgroup.
    """
    ambient = ambient or W.ambient
    gens = []
    for sg in subgroups:
        g0 = sg.as_array()
        if g0.size != ambient.dim:
            raise DomainError("generator dimension does not match the ambient group")
        for M in W.elements:
            g = M @ g0
            if not any(_same_cyclic(g, h, merge_tolerance) for h in gens):
                gens.append(g)
    zero = delta(ambient, merge_tolerance=merge_tolerance)
    fA = zero
    for g in gens:
        fA = convolve(fA, delta(ambient, g, merge_tolerance=merge_tolerance) - zero, cap)
    fB = convolve(fA, involution(fA), cap)
    f = PointMassDistribution.zero(ambient, merge_tolerance=merge_tolerance)
    for M in W.elements:
        f = f + fB.map(M)
    if f.is_zero():
        raise InfeasibleError("construction cancelled to zero (should be impossible)")
    for M in W.elements:
        if not f.same_atoms(f.map(M), tol=1e-12 * f.l1_norm()):
            raise InfeasibleError("construction is not W-invariant")
    for sg in subgroups:
        if not pushforward_cyclic(f, sg).is_zero():
            raise InfeasibleError("pushforward along an input subgroup is nonzero")
    return f


def _class_representatives(f, g, tol):
    """Shift each atom by k g so that a chosen coordinate lands in [0, |g_i|)."""
    a = f.ambient.a
    pts = f.points
    gi = np.flatnonzero(g[a:] != 0)
    if gi.size:
        i = a + gi[0]
        k = np.floor(pts[:, i] / g[i])
    else:
        i = int(np.flatnonzero(np.abs(g[:a]) > tol)[0])
        k = np.floor(pts[:, i] / g[i] + tol / abs(g[i]))
    reps = pts - k[:, None] * g[None, :]
    if not gi.size:
        period = abs(g[i])
        wrap = reps[:, i] >= period - tol
        reps[wrap] -= np.sign(g[i]) * g[None, :] if np.ndim(g) else 0
    return reps


def pushforward_cyclic(f, subgroup):
    """Sum of weights over each class x ~ x + k g (a distribution of representatives).

    Raises
    ------
    AmbiguousGroupingError
        Two different classes have representatives closer than
        1000 * merge_tolerance, so the grouping cannot be trusted.
    """
    g = subgroup.as_array() if isinstance(subgroup, SubgroupSpec) else np.asarray(subgroup, float)
    a = f.ambient.a
    if np.any(g[a:] != np.round(g[a:])):
        raise DomainError("lattice part of the generator must be integral")
    if f.is_zero():
        return f
    tol = f.merge_tolerance
    reps = _class_representatives(f, g, tol)
    out = f._like(reps[:, :a], np.round(reps[:, a:]).astype(np.int64), f.weights)
    raw = f._like(reps[:, :a], np.round(reps[:, a:]).astype(np.int64),
                  np.ones(len(f)))  # all classes, including cancelled ones
    if a and len(raw) > 1:
        P = raw.points
        for j in range(len(raw)):
            d = np.max(np.abs(P - P[j]), axis=1)
            d[j] = np.inf
            if np.any(d < 1e3 * tol):
                raise AmbiguousGroupingError("class representatives collide within tolerance")
    return out


def fourier_eval(f, xi=None, phi=None):
    """sum_j w_j exp(i <xi, x_j>) exp(i <phi, m_j>) for one or many characters.

    ``xi`` has trailing dimension a and ``phi`` trailing dimension b; both
    may be complex (nonunitary characters).
    """
    a, b = f.ambient.a, f.ambient.b
    xi = np.zeros((1, a)) if xi is None else np.asarray(xi, dtype=complex)
    phi = np.zeros((1, b)) if phi is None else np.asarray(phi, dtype=complex)
    single = xi.ndim <= 1 and phi.ndim <= 1
    xi = xi.reshape(-1, a) if a else np.zeros((max(phi.reshape(-1, b).shape[0], 1), 0))
    phi = phi.reshape(-1, b) if b else np.zeros((xi.shape[0], 0))
    n = max(xi.shape[0], phi.shape[0])
    xi = np.broadcast_to(xi, (n, a))
    phi = np.broadcast_to(phi, (n, b))
    phase = xi @ f.reals.T.astype(complex) + phi @ f.ints.T.astype(complex)
    vals = np.exp(1j * phase) @ f.weights if len(f) else np.zeros(n, complex)
    return complex(vals[0]) if single else vals


# ---------------------------------------------------------------------------
# spectral norm and P_n
# ---------------------------------------------------------------------------

def _default_xi_max(f):
    if f.ambient.a == 0 or len(f) < 2:
        return 0.0
    x = np.abs(f.reals[np.any(f.reals != 0, axis=1)])
    m = float(x[x > 0].min()) if np.any(x > 0) else 1.0
    return 4.0 * np.pi / m


def spectral_sup(f, strip_bound=0.5, grid=None, xi_max=None, refine=True):
    """sup |f^| over unitary characters: a torus/box plus an imaginary strip.

    Real parts range over [-xi_max, xi_max]^a x [0, 2 pi)^b, imaginary parts
    over [-strip_bound, strip_bound]^(a+b). A coarse grid is followed by
    local bounded optimization from the best grid points.
    """
    a, b = f.ambient.a, f.ambient.b
    d = a + b
    if f.is_zero():
        return 0.0
    xi_max = _default_xi_max(f) if xi_max is None else xi_max
    grid = grid or {1: 256, 2: 48, 3: 16}.get(d, 8)
    lo = np.array([-xi_max] * a + [0.0] * b)
    hi = np.array([xi_max] * a + [2 * np.pi] * b)
    axes = [np.linspace(l, h, grid, endpoint=(k < a)) for k, (l, h) in enumerate(zip(lo, hi))]
    re = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, d)
    ims = [np.zeros(d)]
    if strip_bound > 0:
        corners = np.stack(np.meshgrid(*[[-strip_bound, 0.0, strip_bound]] * d, indexing="ij"), -1)
        ims = list(corners.reshape(-1, d))

    def absval(z):
        return np.abs(fourier_eval(f, z[..., :a], z[..., a:]))
    best_vals, best_pts = [], []
    for im in ims:
        z = re + 1j * im[None, :]
        vals = absval(z)
        top = np.argsort(vals)[-5:]
        best_vals.extend(vals[top])
        best_pts.extend(z[top])
    sup = float(max(best_vals))
    if refine:
        bounds = [(l, h) for l, h in zip(lo, hi)] + [(-strip_bound, strip_bound)] * d
        order = np.argsort(best_vals)[-8:]
        for j in order:
            z0 = best_pts[j]
            x0 = np.concatenate([z0.real, z0.imag])
            res = optimize.minimize(lambda v: -absval((v[:d] + 1j * v[d:])[None, :])[0], x0,
                                    method="L-BFGS-B", bounds=bounds)
            sup = max(sup, float(-res.fun))
    return sup


def spectral_norm(f, strip_bound=0.5, grid=None, xi_max=None, safety=SAFETY_FACTOR):
    """K = safety * sup |f^| over the unitary region (see :func:`spectral_sup`)."""
    return safety * spectral_sup(f, strip_bound, grid, xi_max)


def pn_apply(f, K, n, cap=DEFAULT_ATOM_CAP):
    """f_n with f_n^ = P_n(f^), P_n(x) = 1 - (1 - x^2/K^2)^n.

    With g = f * f / K^2 this is delta_0 - (delta_0 - g)^{*n}, formed by
    repeated squaring. Expanding the binomial sum term by term gives the
    same distribution but loses about 2^n ulps to cancellation.
    """
    if n < 1 or K <= 0:
        raise DomainError("need n >= 1 and K > 0")
    one = delta(f.ambient, merge_tolerance=f.merge_tolerance)
    base = one - convolve(f, f, cap) * (1.0 / (K * K))
    acc = one
    k = int(n)
    while True:
        if k & 1:
            acc = convolve(acc, base, cap)
        k >>= 1
        if not k:
            break
        base = convolve(base, base, cap)
    return one - acc


def pn_origin_weight(f, K, n, cap=DEFAULT_ATOM_CAP):
    """Weight at 0 of f_n from the alternating binomial sum of powers of g."""
    g = convolve(f, f, cap) * (1.0 / (K * K))
    origin = [0] * f.ambient.dim
    power, total = g, 0j
    for j in range(1, n + 1):
        if j > 1:
            power = convolve(power, g, cap)
        total += comb(n, j, exact=True) * (-1) ** (j + 1) * power.weight_at(origin)
    return total


# ---------------------------------------------------------------------------
# Satake-type cancellation conditions
# ---------------------------------------------------------------------------

def satake_condition_residual(profile, lattice, test_points, k_max=None):
    """max over test points a of |sum_k profile(a + k gamma)|.

    ``profile`` is either a PointMassDistribution (sums are class weights)
    or a callable on points of R^a x Z^b with compact support, in which case
    ``k_max`` bounds the lattice sum.
    """
    gamma = lattice.as_array() if isinstance(lattice, SubgroupSpec) else np.asarray(lattice, float)
    pts = np.atleast_2d(np.asarray(test_points, dtype=float))
    if isinstance(profile, PointMassDistribution):
        push = pushforward_cyclic(profile, gamma)
        if push.is_zero():
            return 0.0
        probe = profile._like(pts[:, :profile.ambient.a],
                              np.round(pts[:, profile.ambient.a:]).astype(np.int64),
                              np.ones(len(pts)))
        reps = _class_representatives(probe, gamma, profile.merge_tolerance)
        return float(max(abs(push.weight_at(r)) for r in reps))
    if k_max is None:
        raise DomainError("k_max is required for callable profiles")
    ks = np.arange(-k_max, k_max + 1)
    res = 0.0
    for p in pts:
        total = sum(profile(p + k * gamma) for k in ks)
        res = max(res, abs(total))
    return float(res)


def aleph_satake_profile(p, kernel, abel=None):
    """Abel-Satake profile of the window-smoothed aleph on R x Z.

    With g the Abel transform of the window kernel, the profile is
    g(u) at m = +-1 and -(g(u - log p) + g(u + log p)) at m = 0: the inverse
    Fourier transform of (2 cos theta - 2 cos(s log p)) H^(s).
    """
    if abel is None:
        from .spherical import abel_transform as abel
    L = math.log(p)

    def prof(point):
        u, m = float(point[0]), int(round(point[1]))
        if m in (1, -1):
            return float(abel(kernel, u))
        if m == 0:
            return -float(abel(kernel, u - L)) - float(abel(kernel, u + L))
        return 0.0
    return prof


def smooth_profile(f, width=None):
    """Callable smoothing of f on R^a x Z^b by a radial bump in the real part.

    The default width is a quarter of the smallest distance between distinct
    real coordinates, so smoothed supports of distinct atoms stay disjoint.
    The bump exp(1 - 1/(1 - |x|^2/w^2)) is invariant under any orthogonal
    action on R^a.
    """
    a = f.ambient.a
    if width is None:
        if a == 0 or len(f) < 2:
            width = 0.25
        else:
            P = f.reals
            dists = [np.linalg.norm(P[i] - P[j]) for i in range(len(P)) for j in range(i)]
            dists = [d for d in dists if d > f.merge_tolerance]
            width = 0.25 * min(dists) if dists else 0.25

    def prof(point):
        pt = np.asarray(point, dtype=float)
        same = np.all(f.ints == np.round(pt[a:]).astype(np.int64), axis=1)
        r2 = np.sum((f.reals - pt[:a]) ** 2, axis=1) / width ** 2
        m = same & (r2 < 1)
        bump = np.exp(1.0 - 1.0 / (1.0 - r2[m]))
        return complex(np.sum(f.weights[m] * bump))
    prof.width = width
    return prof


# ---------------------------------------------------------------------------
# small values of exponential sums
# ---------------------------------------------------------------------------

@dataclass
class SmallValueResult:
    fraction: float
    stderr: float
    samples: int
    eps: float
    T: float
    seed: int


def _check_characters(freqs, coeffs):
    keys = [tuple(np.atleast_1d(l).tolist()) + tuple(np.atleast_1d(m).tolist()) for l, m in freqs]
    if len(set(keys)) != len(keys):
        raise DomainError("characters must be distinct")
    if any(c == 0 for c in coeffs):
        raise DomainError("coefficients must be nonzero")


def small_value_measure(frequencies, coefficients, eps, T, samples=10 ** 6, seed=0,
                        chunks=8):
    """Monte Carlo fraction of B(T) x torus where |F| <= eps.

    F(x, phi) = sum_i a_i exp(i <lambda_i, x>) exp(i <m_i, phi>), x uniform in
    the Euclidean ball of radius T in R^d and phi uniform on the torus. The
    sample budget is split over ``chunks`` independent streams spawned from
    ``seed``, so the result is reproducible for a given seed.
    """
    freqs = [(np.atleast_1d(np.asarray(l, dtype=float)), np.atleast_1d(np.asarray(m, dtype=float)))
             for l, m in frequencies]
    coeffs = np.asarray(coefficients, dtype=complex)
    _check_characters(freqs, coeffs)
    d = freqs[0][0].size
    e = freqs[0][1].size
    lam = np.array([l for l, _ in freqs]).reshape(len(freqs), d)
    mm = np.array([m for _, m in freqs]).reshape(len(freqs), e)
    streams = np.random.SeedSequence(seed).spawn(chunks)
    per = [samples // chunks + (1 if j < samples % chunks else 0) for j in range(chunks)]
    hits = 0
    for ss, n in zip(streams, per):
        rng = np.random.default_rng(ss)
        hits += _count_small(rng, n, lam, mm, coeffs, eps, T)
    frac = hits / samples
    return SmallValueResult(frac, math.sqrt(max(frac * (1 - frac), 0.0) / samples),
                            samples, float(eps), float(T), int(seed))


def _count_small(rng, n, lam, mm, coeffs, eps, T, block=200_000):
    d, e = lam.shape[1], mm.shape[1]
    hits = 0
    for start in range(0, n, block):
        m = min(block, n - start)
        if d:
            g = rng.standard_normal((m, d))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            x = g * (T * rng.random(m) ** (1.0 / d))[:, None]
        else:
            x = np.zeros((m, 0))
        phi = rng.random((m, e)) * 2 * np.pi
        F = np.exp(1j * (x @ lam.T + phi @ mm.T)) @ coeffs
        hits += int(np.count_nonzero(np.abs(F) <= eps))
    return hits


def small_value_table(frequencies, coefficients, eps_list, T_list, samples=10 ** 5, seed=0,
                      path=None):
    """Rows (eps, T, fraction, stderr); written as CSV when ``path`` is given."""
    rows = []
    for T in T_list:
        for eps in eps_list:
            r = small_value_measure(frequencies, coefficients, eps, T, samples, seed)
            rows.append((float(eps), float(T), r.fraction, r.stderr))
    if path is not None:
        _io.write_csv(path, ["eps", "T", "fraction", "stderr"], rows)
    return rows
