"""Command-line front end: one subcommand per experiment, CSV/JSON outputs.

Exit codes: 0 success, 1 configuration or usage error, 2 tolerance
breach, 3 I/O failure. Every run writes ``manifest.json`` next to its
outputs with the resolved configuration, seed, versions and a pass/fail
summary.
"""
import argparse
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import io as _io
from ._accel import backend_name
from .errors import CuspkitError

EXIT_OK, EXIT_CONFIG, EXIT_TOL, EXIT_IO = 0, 1, 2, 3


class ConfigError(Exception):
    """Bad configuration file, key or value."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _floats(text):
    return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _rows(text):
    """'1,0; 0,1' -> [[1.0, 0.0], [0.0, 1.0]]."""
    return [[float(v) for v in row.split(",") if v.strip()]
            for row in str(text).split(";") if row.strip()]


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key] = value
    return out


# key -> (parser, default) per command
SCHEMAS = {
    "transform": {
        "s_max": (float, 10.0), "n_s": (int, 41), "roundtrip": (_bool, True),
        "broken_normalization": (_bool, False), "tol": (float, 1e-6),
    },
    "cusp": {
        "p": (int, 2), "n": (int, 1), "floor": (float, 9.0), "window_radius": (float, 0.5),
        "window_order": (int, 8), "tol": (float, 1e-10),
    },
    "lemma2": {
        "ambient_real": (int, 0), "ambient_int": (int, 2), "generators": (_rows, "1,0; 0,1"),
        "weyl": (str, "sign"), "tol": (float, 1e-12), "characters": (int, 1000),
    },
    "smallvalue": {
        "frequencies": (_rows, "1; -1"), "coefficients": (_floats, "1, 1"),
        "eps": (_floats, "0.4, 0.2, 0.1, 0.05"), "T": (_floats, "1570.7963267948965"),
        "samples": (int, 100000), "tol": (float, 3.0),
    },
    "alpha": {"T": (_floats, "25, 100, 400"), "p": (int, 0), "tol": (float, 0.01)},
    "weyl": {
        "eigenvalues": (str, ""), "volume": (float, 0.0), "synthetic_n": (int, 100000),
        "synthetic_s_max": (float, 60.0), "T": (_floats, "400, 900, 1600, 2500, 3600"),
        "eps": (float, 0.2), "t": (_floats, "0.2, 0.1, 0.05"), "tol": (float, 0.02),
    },
    "whittaker": {
        "s": (float, 2.0), "p": (int, 2), "theta": (float, math.pi / 3), "k_max": (int, 5),
        "y": (float, 1.0), "modes": (_floats, "1, 2, 3, 4, 5, 6, 8"),
        "T": (_floats, "0.5, 1, 2, 3"), "tol": (float, 1e-10),
    },
    "wave": {
        "window_radius": (float, 0.5), "window_order": (int, 8),
        "t": (float, 0.6931471805599453), "dr": (float, 2e-3), "tol": (float, 2e-3),
    },
}

COMMON = {"seed": (int, 0), "out": (str, "")}


def resolve(command, file_cfg, overrides):
    schema = dict(COMMON, **SCHEMAS[command])
    raw = {k: v[1] for k, v in schema.items()}
    for source in (file_cfg, overrides):
        for key, value in source.items():
            if value is None:
                continue
            if key not in schema:
                raise ConfigError(f"unknown key {key!r} for {command}")
            raw[key] = value
    cfg = {}
    for key, (conv, _) in schema.items():
        try:
            val = raw[key]
            cfg[key] = conv(val) if isinstance(val, str) or conv in (int, float) else val
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from exc
    if "tol" in cfg and not cfg["tol"] > 0:
        raise ConfigError("tol must be positive")
    return cfg


# ---------------------------------------------------------------------------
# commands: each returns (checks: dict name -> bool, outputs: list of paths, extra: dict)
# ---------------------------------------------------------------------------

def cmd_transform(cfg, out):
    from .spherical import (abel_fourier, kernel_norm_sq, spectral_norm_sq, spherical_forward,
                            spherical_inverse, standard_kernel_suite, transform_multiplier)
    s = np.linspace(-cfg["s_max"], cfg["s_max"], cfg["n_s"])
    factor = 2.0 if cfg["broken_normalization"] else 1.0
    rows, checks = [], {}
    for name, k in standard_kernel_suite().items():
        fwd = factor * np.asarray(spherical_forward(k, s)).real
        ab = np.asarray(abel_fourier(k, s)).real
        diag = float(np.max(np.abs(fwd - ab)))
        ratio = float(np.median(fwd / np.where(ab == 0, np.nan, ab)))
        h = transform_multiplier(k, decay_order=k.meta["decay_order"])
        iso = abs(kernel_norm_sq(k) - spectral_norm_sq(h, 60.0)) / kernel_norm_sq(k)
        rt = float("nan")
        if cfg["roundtrip"]:
            back = spherical_inverse(h, k.grid, tol=1e-8)
            rt = float(np.max(np.abs(back.values - k.values)) / k.max_abs())
        rows.append((name, diag, ratio, iso, rt))
        checks[f"{name}_diagram"] = diag <= cfg["tol"]
        checks[f"{name}_isometry"] = iso <= 1e-5
        if cfg["roundtrip"]:
            checks[f"{name}_roundtrip"] = rt <= cfg["tol"]
    path = _io.write_csv(out / "transform_residuals.csv",
                         ["kernel", "diagram_residual", "ratio", "isometry_rel", "roundtrip"], rows)
    return checks, [path], {}


def cmd_cusp(cfg, out):
    from .modular import (AlephMultiplier, ModeFunction, aleph_branches, bump_mode,
                          constant_term, eisenstein_line_residual, inner_product, norm)
    from .spherical import bspline_window
    p, n, R = cfg["p"], cfg["n"], cfg["floor"]
    f = bump_mode(n, R)
    res = aleph_branches(f, p, window=bspline_window(cfg["window_radius"], cfg["window_order"]))
    g = res.output
    heights = np.linspace(R / p, 4 * R, 40)
    const = max(abs(constant_term(g, y)) for y in heights)
    line = eisenstein_line_residual(AlephMultiplier(p), p, np.linspace(-50, 50, 2001))
    path = out / "cusp_output.json"
    g.to_json(path)
    back = ModeFunction.from_json(path)
    round_trip = abs(norm(back - g)) == 0.0
    rows = [(m, mode.floor, mode.norm_sq()) for m, mode in sorted(g.modes.items())]
    table = _io.write_csv(out / "cusp_modes.csv", ["n", "floor", "norm_sq"], rows)
    checks = {
        "nonzero": norm(g) > 0,
        "branch_orthogonal": inner_product(res.hecke_branch, res.wave_branch) == 0.0,
        "constant_term_zero": const == 0.0,
        "eisenstein_line": line <= cfg["tol"],
        "json_round_trip": round_trip,
    }
    extra = {"input_norm": norm(f), "output_norm": norm(g), "line_residual": line,
             "modes": sorted(g.mode_set())}
    return checks, [path, table], extra


def _weyl_group(name, ambient):
    from .distributions import FiniteGroupAction
    if name == "trivial":
        return FiniteGroupAction.trivial(ambient)
    if name == "sign":
        return FiniteGroupAction.sign(ambient)
    raise ConfigError(f"weyl must be 'trivial' or 'sign', got {name!r}")


def cmd_lemma2(cfg, out, seed):
    from .distributions import (AmbientGroup, SubgroupSpec, fourier_eval, lemma2_build,
                                pushforward_cyclic)
    amb = AmbientGroup(cfg["ambient_real"], cfg["ambient_int"])
    gens = cfg["generators"]
    if any(len(g) != amb.dim for g in gens):
        raise ConfigError("generator length does not match the ambient dimension")
    subs = [SubgroupSpec(tuple(g)) for g in gens]
    f = lemma2_build(subs, _weyl_group(cfg["weyl"], amb))
    path = out / "lemma2.json"
    f.to_json(path)
    rng = np.random.default_rng(seed)
    nch = cfg["characters"]
    xi = rng.uniform(-10, 10, (nch, amb.a))
    phi = rng.uniform(0, 2 * np.pi, (nch, amb.b))
    vals = fourier_eval(f, xi, phi)
    rows = [(i, float(max(abs(w) for _, w in pushforward_cyclic(f, s).atoms()) if
                      len(pushforward_cyclic(f, s)) else 0.0)) for i, s in enumerate(subs)]
    table = _io.write_csv(out / "lemma2_pushforward.csv", ["subgroup", "max_class_weight"], rows)
    checks = {
        "nonzero": not f.is_zero(),
        "pushforward_zero": all(r[1] == 0.0 for r in rows),
        "fourier_nonnegative": float(vals.real.min()) >= -cfg["tol"] * f.l1_norm(),
    }
    return checks, [path, table], {"atoms": len(f), "fourier_min": float(vals.real.min())}


def cmd_smallvalue(cfg, out, seed):
    from .distributions import small_value_table
    freqs = [((f[0],), tuple(f[1:])) for f in cfg["frequencies"]]
    coeffs = cfg["coefficients"]
    if len(coeffs) != len(freqs):
        raise ConfigError("need one coefficient per frequency")
    eps = sorted(cfg["eps"], reverse=True)
    rows = small_value_table(freqs, coeffs, eps, cfg["T"], cfg["samples"], seed,
                             path=out / "smallvalue.csv")
    z = cfg["tol"]
    mono = True
    for T in cfg["T"]:
        sub = [r for r in rows if r[1] == T]
        for big, small in zip(sub, sub[1:]):
            mono &= small[2] <= big[2] + z * math.hypot(big[3], small[3])
    checks = {"monotone_in_eps": bool(mono)}
    if len(freqs) == 2 and freqs[0][0][0] == -freqs[1][0][0] and coeffs == [1.0, 1.0]:
        # F = 2 cos(lambda x): closed-form measure
        dev = max(abs(r[2] - 2 / math.pi * math.asin(min(r[0] / 2, 1.0))) / max(r[3], 1e-300)
                  for r in rows)
        checks["arcsin_oracle"] = dev <= z
    return checks, [out / "smallvalue.csv"], {}


def cmd_alpha(cfg, out):
    from .testfn import ALPHA_PGL2, alpha_constant
    rep = alpha_constant(cfg["T"])
    rows = [(t, m, r) for t, m, r in zip(rep.T_grid, rep.masses, rep.ratios)]
    path = _io.write_csv(out / "alpha.csv", ["T", "mass", "ratio"], rows)
    checks = {"alpha_close": abs(rep.alpha - ALPHA_PGL2) <= cfg["tol"] * ALPHA_PGL2}
    extra = {"alpha": rep.alpha, "fit_alpha": rep.fit_alpha, "target": ALPHA_PGL2}
    if cfg["p"]:
        rep_p = alpha_constant(cfg["T"], p=cfg["p"])
        checks["s_independent"] = abs(rep_p.alpha - rep.alpha) <= 1e-10
        extra["alpha_with_tree"] = rep_p.alpha
    return checks, [path], extra


def cmd_weyl(cfg, out, seed):
    from .testfn import EigenvalueList, build_hchoice, synthetic_weyl_list, weyl_count
    if cfg["eigenvalues"]:
        eigs = EigenvalueList.from_csv(cfg["eigenvalues"])
        vol = cfg["volume"]
        if vol <= 0:
            raise ConfigError("volume must be given and positive for an eigenvalue file")
    else:
        eigs, vol = synthetic_weyl_list(cfg["synthetic_n"], cfg["synthetic_s_max"], seed)
    hc = build_hchoice(cfg["eps"]) if cfg["eps"] > 0 else None
    tab = weyl_count(eigs, vol, cfg["T"], hc, cfg["t"] if hc else ())
    tab.to_files(out / "weyl.csv", out / "weyl.json")
    top = tab.ratio[-max(1, len(tab.ratio) // 10):]
    checks = {"ratio_top_decile": bool(np.all(np.abs(top - 1) <= cfg["tol"]))}
    if hc is not None:
        checks["tail_within_bound"] = all(r["tail"] <= r["tail_bound"] for r in tab.smoothed)
    return checks, [out / "weyl.csv", out / "weyl.json"], {"volume": vol, "entries": len(eigs)}


def cmd_whittaker(cfg, out):
    from .whittaker import (WhittakerFunction, WhittakerSeries, casselman_shalika_weights,
                            constant_term_unfold, siegel_nonvanishing_scan)
    p, y = cfg["p"], cfg["y"]
    W = WhittakerFunction(cfg["s"])
    c = casselman_shalika_weights(p, cfg["theta"], cfg["k_max"])
    fs = WhittakerSeries(W, p, c)
    powers = {p ** k: k for k in range(cfg["k_max"] + 1)}
    rows, ok = [], True
    for m in cfg["modes"]:
        m = int(m)
        val = constant_term_unfold(fs, y, m)
        exp = c[powers[m]] * W(0.0, p ** powers[m] * y) if m in powers else 0.0
        err = abs(val - exp)
        rows.append((m, val.real, val.imag, complex(exp).real, err))
        ok &= err <= (1e-8 if m in powers else cfg["tol"])
    unfold = _io.write_csv(out / "whittaker_unfold.csv", ["m", "re", "im", "expected", "error"], rows)
    scan = siegel_nonvanishing_scan(fs, cfg["T"], path=out / "whittaker_scan.csv")
    checks = {"unfolding": bool(ok), "siegel_positive": all(r.positive for r in scan)}
    return checks, [unfold, out / "whittaker_scan.csv"], {}


def cmd_wave(cfg, out):
    from .modular import smoothed_wave_kernel, window_kernel
    from .spherical import bspline_window
    from .wave_oracle import support_extent, wave_propagate
    window = bspline_window(cfg["window_radius"], cfg["window_order"])
    t = cfg["t"]
    fd = wave_propagate(window_kernel(window), t, dr=cfg["dr"])
    spec = smoothed_wave_kernel(t, window)
    r = np.linspace(0.0, spec.support_radius + 0.5, 801)
    diff = np.abs(fd(r) - spec(r))
    err = float(diff.max())
    path = _io.write_csv(out / "wave_snapshot.csv", ["r", "fd", "spectral", "diff"],
                         zip(r, fd(r), spec(r), diff))
    # support measured at 1e-4 of the sup norm
    reach = support_extent(fd.grid, fd.values, 1e-4)
    checks = {
        "fd_vs_spectral": err <= cfg["tol"],
        "finite_speed": reach <= window.band_limit + t + 2 * fd.meta["dr"],
    }
    return checks, [path], {"sup_error": err, "error_estimate": fd.meta["error_estimate"],
                            "fd_support": reach}


COMMANDS = {
    "transform": (cmd_transform, "forward/inverse/Abel round trips and residual tables"),
    "cusp": (cmd_cusp, "apply the cuspidal operator to a single-mode bump"),
    "lemma2": (cmd_lemma2, "point-mass cancellation construction for cyclic subgroups"),
    "smallvalue": (cmd_smallvalue, "Monte Carlo small-value table of an exponential sum"),
    "alpha": (cmd_alpha, "Plancherel ball-mass constant"),
    "weyl": (cmd_weyl, "Weyl counting harness on an eigenvalue list"),
    "whittaker": (cmd_whittaker, "Whittaker series unfolding and Siegel-set scan"),
    "wave": (cmd_wave, "finite-difference wave propagation vs spectral synthesis"),
}
_SEEDED = {"lemma2", "smallvalue", "weyl"}


def build_parser():
    parser = _Parser(prog="cuspkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", help="flat key = value file")
        sp.add_argument("--out", help="output directory (created if missing)")
        sp.add_argument("--seed", type=int, help="random seed")
        sp.add_argument("--tol", type=float, help="tolerance for the pass/fail checks")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any configuration key; repeatable")
        keys = ", ".join(sorted(SCHEMAS[name]))
        sp.epilog = f"configuration keys: {keys}"
    return parser


def _versions():
    import numba  # noqa: F401  (version only)
    import scipy
    return {"cuspkit": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "python": platform.python_version(),
            "backend": backend_name()}


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        raise ConfigError("missing command")
    file_cfg = read_config(args.config) if args.config else {}
    overrides = {"seed": args.seed, "tol": args.tol, "out": args.out}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    cfg = resolve(args.command, file_cfg, overrides)
    out = Path(cfg["out"] or f"cuspkit_out/{args.command}")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    func = COMMANDS[args.command][0]
    t0 = time.perf_counter()
    if args.command in _SEEDED:
        checks, outputs, extra = func(cfg, out, cfg["seed"])
    else:
        checks, outputs, extra = func(cfg, out)
    elapsed = time.perf_counter() - t0
    passed = all(bool(v) for v in checks.values())
    manifest = {"command": args.command, "config": cfg, "seed": cfg["seed"],
                "tolerance": cfg.get("tol"), "versions": _versions(),
                "outputs": [str(p) for p in outputs], "checks": checks, "passed": passed,
                "runtime_s": elapsed, "results": extra}
    _io.write_json(out / "manifest.json", manifest)
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if passed else EXIT_TOL


def main(argv=None):
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"cuspkit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CuspkitError, ValueError) as exc:
        print(f"cuspkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cuspkit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
