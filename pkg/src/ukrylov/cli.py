"""Command-line front end.

Usage::

    ukrylov --config run.json --out results/ [--threads N] [--precision DIGITS]

The config is a single JSON document with at least ``command`` and
``backend``.  Every CSV gets a JSON sidecar with the full config, seeds,
precision and package version; identical configs give identical bytes.
Exit codes: 0 ok, 2 configuration error, 3 numerical failure.
"""
import argparse
from concurrent.futures import ProcessPoolExecutor
import json
import os
import sys

import mpmath as mp
import numpy as np

from . import analysis, clifford, dual_unitary, free_fermion, spectral
from .circuits import circuit_from_config, gate_from_config, PAULI
from .errors import ConfigError, UKrylovError
from .io import write_csv, write_json, write_sidecar
from .krylov import (MomentSequence, autocorrelation_ed, krylov_complexity, krylov_explicit,
                     krylov_from_moments)

COMMANDS = ("krylov", "complexity", "spectral", "transition-scan", "otoc", "clifford", "fit")
BACKENDS = ("ed", "moments", "free-fermion", "dual-unitary", "clifford")


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return validate(cfg)


def validate(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("command") not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}")
    if cfg.get("backend") not in BACKENDS:
        raise ConfigError(f"backend must be one of {BACKENDS}")
    digits = int(cfg.get("precision_digits", 16))
    if digits < 16:
        raise ConfigError("precision_digits must be >= 16")
    grid = cfg.get("grid", {})
    for key, vals in grid.items():
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"grid.{key} must be a nonempty list")
    return cfg


def _grid_points(cfg):
    """(dt, s) pairs in deterministic grid order."""
    grid = cfg.get("grid", {})
    dts = grid.get("dt", [cfg.get("dt")])
    ss = grid.get("s", [cfg.get("s", 2)])
    if None in dts:
        raise ConfigError("free-fermion runs need grid.dt (or dt)")
    return [(float(dt), int(s)) for s in ss for dt in dts]


def _seeds(cfg):
    seeds = list(cfg.get("grid", {}).get("seeds", []))
    for key in ("circuit", "gate"):
        if key in cfg and "seed" in cfg[key]:
            seeds.append(cfg[key]["seed"])
    return [int(s) for s in seeds]


def _parse_moment(x, digits):
    if isinstance(x, (list, tuple)):
        re, im = x
    else:
        re, im = x, 0
    if digits > 16:
        return mp.mpc(mp.mpf(str(re)), mp.mpf(str(im)))
    return complex(float(re), float(im))


# --------------------------------------------------------------------------
# moment sources
# --------------------------------------------------------------------------

def _moment_sources(cfg, digits):
    """List of ``(label columns, MomentSequence)`` for the configured backend."""
    backend = cfg["backend"]
    T = int(cfg.get("T", 20))
    if backend == "ed":
        circ = circuit_from_config(_need(cfg, "circuit"))
        op = cfg.get("operator", {"pauli": "z", "sites": [0]})
        return [((), autocorrelation_ed(circ, op, T, digits=digits))]
    if backend == "moments":
        raw = _need(cfg, "moments")
        with mp.workdps(digits):
            vals = [_parse_moment(x, digits) for x in raw]
        if digits > 16:
            return [((), MomentSequence([complex(v) for v in vals], digits, vals))]
        return [((), MomentSequence(vals))]
    if backend == "free-fermion":
        N = int(cfg.get("N", 200))
        return [((dt, s), free_fermion.spin_moment_sequence(dt, T, N, s, digits))
                for dt, s in _grid_points(cfg)]
    if backend == "dual-unitary":
        op = cfg.get("operator", {"kind": "single-site"})
        kind = op.get("kind", "single-site")
        if kind == "single-site":
            S = np.zeros(T + 1, dtype=complex)
            S[0] = 1
            return [((), MomentSequence(S))]
        if kind == "eigenmode":
            return [((), dual_unitary.eigenmode_moments(float(_need(op, "lambda")), T))]
        if kind == "sum":
            g = gate_from_config(cfg.get("gate", {"family": "dual-unitary", "seed": 0}))
            ch = dual_unitary.transfer_channel(g, op.get("sublattice", "odd"))
            sigma = PAULI[op.get("pauli", "z")]
            return [((), dual_unitary.channel_autocorrelation(ch, sigma, T))]
        raise ConfigError(f"unknown dual-unitary operator kind {kind!r}")
    raise ConfigError(f"backend {backend!r} does not provide moments")


def _need(cfg, key):
    if key not in cfg:
        raise ConfigError(f"config is missing {key!r}")
    return cfg[key]


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _label_header(cfg):
    return ["dt", "s"] if cfg["backend"] == "free-fermion" else []


def cmd_krylov(cfg, out, digits, threads):
    rows = []
    route = cfg.get("route", "moments")
    method = cfg.get("method", "cholesky")
    if cfg["backend"] == "ed" and route == "explicit":
        circ = circuit_from_config(_need(cfg, "circuit"))
        d, _ = krylov_explicit(circ, cfg.get("operator", {"pauli": "z", "sites": [0]}),
                               int(cfg.get("nmax", cfg.get("T", 20))))
        decomps = [((), d)]
    else:
        decomps = [(lab, krylov_from_moments(m, method=method, nmax=cfg.get("nmax")))
                   for lab, m in _moment_sources(cfg, digits)]
    for lab, d in decomps:
        for n in range(max(len(d.a), len(d.b))):
            rows.append(list(lab) + [n] + _coef_row(d, n))
    path = os.path.join(out, "krylov.csv")
    write_csv(path, _label_header(cfg) + ["n", "re_a", "im_a", "abs_b", "abs_c"], rows, digits)
    write_sidecar(path, cfg, _seeds(cfg), digits, {"rank": [int(d.rank) for _, d in decomps]})
    return [path]


def _coef_row(d, n):
    """re a_n, im a_n, |b_n|, |c_n|; blank where a coefficient is undefined."""
    ex = d.exact or {}

    def pick(key, arr):
        if n >= len(arr) or (key == "b" and n == 0):
            return None
        if key in ex and n < len(ex[key]) and ex[key][n] is not None:
            return mp.mpc(ex[key][n])
        return complex(arr[n])

    a, b, c = pick("a", d.a), pick("b", d.b), pick("c", d.c)
    return [None if a is None else a.real, None if a is None else a.imag,
            None if b is None else abs(b), None if c is None else abs(c)]


def cmd_complexity(cfg, out, digits, threads):
    rows = []
    for lab, m in _moment_sources(cfg, digits):
        cc = krylov_complexity(krylov_from_moments(m))
        rows += [list(lab) + [t, k] for t, k in enumerate(cc.K)]
    path = os.path.join(out, "complexity.csv")
    write_csv(path, _label_header(cfg) + ["t", "K"], rows, digits)
    write_sidecar(path, cfg, _seeds(cfg), digits)
    return [path]


def cmd_spectral(cfg, out, digits, threads):
    nb = int(cfg.get("num_bins", 1000))
    tmax = int(cfg.get("T", 20))
    backend = cfg["backend"]
    if backend == "ed":
        circ = circuit_from_config(_need(cfg, "circuit"))
        f = spectral.spectral_function_ed(circ, cfg.get("operator", {"pauli": "z", "sites": [0]}), nb)
    elif backend == "dual-unitary":
        gamma = float(_need(cfg, "gamma"))
        f = spectral.from_density(lambda w: dual_unitary.eigenmode_spectral(gamma, w), nb)
    elif backend == "free-fermion":
        dt = float(_need(cfg, "dt"))
        _, dens = free_fermion.spin_spectral_density(dt, nb)
        f = spectral.SpectralFunction(dens)
    else:
        raise ConfigError(f"spectral does not support backend {backend!r}")
    p1 = os.path.join(out, "spectral.csv")
    write_csv(p1, ["omega", "density"], zip(f.centers, f.bins), digits)
    write_sidecar(p1, cfg, _seeds(cfg), digits)
    S = spectral.fourier_modes(f, tmax)
    p2 = os.path.join(out, "modes.csv")
    write_csv(p2, ["t", "re_S", "im_S"], [(t, s.real, s.imag) for t, s in enumerate(S)], digits)
    write_sidecar(p2, cfg, _seeds(cfg), digits)
    return [p1, p2]


def _scan_point(args):
    dt, s, N, nmax, digits, window, max_digits = args
    r = free_fermion.transition_point(dt, s, N, nmax, digits, window, "szego", max_digits)
    return {k: v for k, v in r.items() if k != "decomposition"}


def cmd_transition_scan(cfg, out, digits, threads):
    if cfg["backend"] != "free-fermion":
        raise ConfigError("transition-scan needs the free-fermion backend")
    N = int(cfg.get("N", 200))
    nmax = int(cfg.get("nmax", 200))
    window = cfg.get("window")
    window = tuple(window) if window else None
    max_digits = int(cfg.get("max_digits", 1200))
    jobs = [(dt, s, N, nmax, digits, window, max_digits) for dt, s in _grid_points(cfg)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_scan_point, jobs))
    else:
        results = [_scan_point(j) for j in jobs]
    rows = [(r["dt"], r["s"], r["onset_present"], r["b_inf_mean"], r["gap"], r["rank"],
             r["digits"]) for r in results]
    path = os.path.join(out, "scan.csv")
    write_csv(path, ["dt", "s", "onset_present", "b_inf_mean", "gap", "rank", "digits"],
              rows, digits)
    write_sidecar(path, cfg, _seeds(cfg), digits)
    return [path]


def cmd_otoc(cfg, out, digits, threads):
    if cfg["backend"] != "ed":
        raise ConfigError("otoc needs the ed backend")
    circ = circuit_from_config(_need(cfg, "circuit"))
    nmax = int(cfg.get("nmax", 10))
    _, ops = krylov_explicit(circ, cfg.get("operator", {"pauli": "z", "sites": [0]}), nmax)
    L = circ.num_sites
    rows, fits = [], []
    for n, O in enumerate(ops):
        prof = analysis.otoc_profile(O, L)
        rows += [(n, j, v) for j, v in enumerate(prof)]
        try:
            fr = analysis.fit_error_function(prof)
            fits.append((n, fr.params["a"], fr.params["ell"], fr.params["D"], fr.residual, True))
        except UKrylovError:
            fits.append((n, np.nan, np.nan, np.nan, np.nan, False))
    p1 = os.path.join(out, "otoc.csv")
    write_csv(p1, ["n", "j", "otoc"], rows, digits)
    write_sidecar(p1, cfg, _seeds(cfg), digits)
    p2 = os.path.join(out, "otoc_fit.csv")
    write_csv(p2, ["n", "a", "ell", "D", "residual", "converged"], fits, digits)
    write_sidecar(p2, cfg, _seeds(cfg), digits)
    return [p1, p2]


def cmd_clifford(cfg, out, digits, threads):
    if cfg["backend"] != "clifford":
        raise ConfigError("clifford needs the clifford backend")
    L = int(cfg.get("num_sites", 12))
    tmax = int(cfg.get("tmax", 1000))
    boundary = cfg.get("boundary", "periodic")
    uniform = bool(cfg.get("uniform", False))
    seeds = [int(s) for s in cfg.get("grid", {}).get("seeds", [cfg.get("seed", 0)])]
    p0 = clifford.pauli_from_letters(cfg["initial"]) if "initial" in cfg else \
        clifford.single_site_pauli(L, int(cfg.get("site", 0)), "Z")
    if cfg.get("scan", False):
        found = clifford.find_recurrent_realization(L, tmax, seeds, boundary,
                                                    int(cfg.get("site", 0)), uniform)
        if found is None:
            raise UKrylovError("no recurrent realization among the scanned seeds")
        seed, circ, _ = found
    else:
        seed = seeds[0]
        circ = clifford.random_clifford_brickwork(L, seed, boundary, uniform)
    seq = clifford.propagate_pauli(circ, p0, tmax)
    ck = clifford.clifford_krylov(seq)
    S = ck.moments.values
    path = os.path.join(out, "clifford.csv")
    write_csv(path, ["t", "K", "re_overlap", "im_overlap"],
              [(t, int(k), S[t].real, S[t].imag) for t, k in enumerate(ck.complexity)], digits)
    write_sidecar(path, cfg, [seed], digits,
                  {"seed_used": seed, "period_bits": ck.period_bits,
                   "period_full": ck.period_full, "gate_indices": circ.gate_indices})
    seq_path = os.path.join(out, "clifford_sequence.txt")
    with open(seq_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(clifford.format_pauli(p) for p in seq) + "\n")
    return [path, seq_path]


def cmd_fit(cfg, out, digits, threads):
    spec = _need(cfg, "fit")
    kind = spec.get("kind")
    if kind == "power_law":
        fr = analysis.fit_power_law(spec["xs"], spec["ys"])
    elif kind == "exponential_decay":
        w = spec.get("window")
        fr = analysis.fit_exponential_decay(spec["a"], tuple(w) if w else None)
    elif kind == "error_function":
        fr = analysis.fit_error_function(spec["profile"])
    elif kind == "scaling_collapse":
        curves = {float(k): (v[0], v[1]) for k, v in spec["curves"].items()}
        res = analysis.scaling_collapse(curves, spec.get("dt_target"))
        fr = analysis.FitResult({"g": res.g_extrapolated}, 0.0,
                                extra={"dt_mid": res.dt_mid, "g_pairs": res.g})
    else:
        raise ConfigError(f"unknown fit kind {kind!r}")
    path = os.path.join(out, "fit.csv")
    write_csv(path, ["param", "value"], sorted(fr.params.items()), digits)
    write_sidecar(path, cfg, _seeds(cfg), digits)
    jpath = os.path.join(out, "fit_report.json")
    write_json(jpath, analysis.fit_report(kind, fr))
    return [path, jpath]


DISPATCH = {
    "krylov": cmd_krylov,
    "complexity": cmd_complexity,
    "spectral": cmd_spectral,
    "transition-scan": cmd_transition_scan,
    "otoc": cmd_otoc,
    "clifford": cmd_clifford,
    "fit": cmd_fit,
}


def run(cfg, out, threads=1, precision=None):
    """Execute one validated config; returns the written paths."""
    cfg = validate(dict(cfg))
    if precision is not None:
        if precision < 16:
            raise ConfigError("precision must be >= 16 digits")
        cfg["precision_digits"] = int(precision)
    digits = int(cfg.get("precision_digits", 16))
    os.makedirs(out, exist_ok=True)
    return DISPATCH[cfg["command"]](cfg, out, digits, threads)


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get("UKRYLOV_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError("UKRYLOV_THREADS must be an integer") from exc
    return 1


def main(argv=None):
    parser = argparse.ArgumentParser(prog="ukrylov", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--threads", type=int, default=None, help="worker processes for scans")
    parser.add_argument("--precision", type=int, default=None, help="working precision in digits")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        run(cfg, args.out, _threads(args.threads), args.precision)
    except UKrylovError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.code}
        print(json.dumps(err), file=sys.stderr)
        return exc.code
    except (KeyError, TypeError, ValueError) as exc:
        err = {"error": "ConfigError", "message": f"{type(exc).__name__}: {exc}", "exit_code": 2}
        print(json.dumps(err), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
