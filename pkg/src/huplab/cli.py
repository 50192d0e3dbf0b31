"""Command-line experiment harness.

Every subcommand reads one optional JSON config file, applies flag
overrides on top (flags win), and writes a single report.  CSV reports
start with ``#`` comment lines holding the command, timestamp, seed and
resolved config; JSON reports carry the same fields at top level.
Apart from the timestamp, reruns with the same config are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 numerical
non-convergence (or a size cap), 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import _backend
from .errors import ConvergenceError, DomainError, ParameterError, ResourceError
from .escape import METHODS, escape_profile
from .gaussmap import MapParams
from .hyperbola_ft import HyperbolaMeasure, LatticeCross, ft_on_cross
from .operators import identity_suite
from .separation import poisson_consistency, singular_pair, solve_separation, \
    verify_separation_or_annihilation
from .ulam import default_cutoff, spectral_top, ulam_assemble

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

COMMANDS = ("spectrum-scan", "escape", "cross-residual", "separate",
            "identity-check", "poisson-check")
DEFAULT_FORMAT = {"spectrum-scan": "csv", "escape": "csv", "cross-residual": "json",
                  "separate": "json", "identity-check": "json", "poisson-check": "json"}

DEFAULTS = {
    "p": 1, "q": 1, "beta": 1.0,
    "betas": None, "beta_min": None, "beta_max": None, "beta_steps": None,
    "n_bins": [256], "J": None,
    "n_steps": 20, "method": "exact-intervals", "n_samples": 1_000_000,
    "N": 50, "tol": 1e-10, "vanish_tol": 1e-12,
    "measure": {"kind": "singular-pair", "k": 1, "m": 1},
    "n_functions": 100, "n_points": 10_000,
    "poisson_n": 3, "zs": [[0.0, 1.0], [1.0, 2.0]], "poisson_tol": 1e-6,
    "seed": 0, "output": "-", "format": None,
}


class ConfigError(Exception):
    pass


# -- configuration -------------------------------------------------------------

def _int(cfg, key, lo, hi, optional=False):
    v = cfg[key]
    if v is None and optional:
        return
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    v = int(v)
    if not lo <= v <= hi:
        raise ConfigError(f"{key}={v} outside [{lo}, {hi}]")
    cfg[key] = v


def _real(cfg, key, lo, hi, optional=False, open_lo=False):
    v = cfg[key]
    if v is None and optional:
        return
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key} must be a finite number, got {v!r}")
    v = float(v)
    if v < lo or v > hi or (open_lo and v == lo):
        raise ConfigError(f"{key}={v} outside {'(' if open_lo else '['}{lo}, {hi}]")
    cfg[key] = v


def resolve_config(command: str, file_cfg: dict, overrides: dict) -> dict:
    """Merge defaults, file values and flag overrides, then validate bounds."""
    unknown = set(file_cfg) - set(DEFAULTS) - {"command"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if file_cfg.get("command", command) != command:
        raise ConfigError(f"config is for {file_cfg['command']!r}, not {command!r}")
    cfg = dict(DEFAULTS)
    cfg.update({k: v for k, v in file_cfg.items() if k != "command"})
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    _int(cfg, "p", 1, 10_000)
    _int(cfg, "q", -10**9, 10**9)
    _real(cfg, "beta", 0.0, 1e6, open_lo=True)
    for key in ("beta_min", "beta_max"):
        _real(cfg, key, 0.0, 1e6, optional=True, open_lo=True)
    _int(cfg, "beta_steps", 0, 100_000, optional=True)
    if cfg["betas"] is not None:
        if not isinstance(cfg["betas"], list):
            raise ConfigError("betas must be a list of numbers")
        for i, b in enumerate(cfg["betas"]):
            if isinstance(b, bool) or not isinstance(b, (int, float)) or not 0 < b <= 1e6:
                raise ConfigError(f"betas[{i}]={b!r} must be a number in (0, 1e6]")
        cfg["betas"] = [float(b) for b in cfg["betas"]]
    nb = cfg["n_bins"]
    nb = [nb] if not isinstance(nb, list) else nb
    for i, n in enumerate(nb):
        if isinstance(n, bool) or not isinstance(n, (int, float)) or int(n) != n or not 2 <= n <= 2**20:
            raise ConfigError(f"n_bins[{i}]={n!r} must be an integer in [2, 2^20]")
    cfg["n_bins"] = [int(n) for n in nb]
    _int(cfg, "J", 2, 10**7, optional=True)
    _int(cfg, "n_steps", 1, 1000)
    if cfg["method"] not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}")
    _int(cfg, "n_samples", 1, 10**9)
    _int(cfg, "N", 0, 10**6)
    _real(cfg, "tol", 1e-15, 1.0)
    _real(cfg, "vanish_tol", 0.0, 1.0)
    _real(cfg, "poisson_tol", 0.0, 1.0, open_lo=True)
    _int(cfg, "n_functions", 1, 10**6)
    _int(cfg, "n_points", 1, 10**8)
    _int(cfg, "poisson_n", 0, 10_000)
    _int(cfg, "seed", 0, 2**63 - 1)
    zs = cfg["zs"]
    if not isinstance(zs, list) or not all(
            isinstance(z, list) and len(z) == 2 and all(isinstance(c, (int, float)) for c in z)
            and z[1] > 0 for z in zs):
        raise ConfigError("zs must be a list of [re, im] pairs with im > 0")
    cfg["zs"] = [[float(a), float(b)] for a, b in zs]
    if not isinstance(cfg["measure"], dict) or "kind" not in cfg["measure"]:
        raise ConfigError("measure must be an object with a 'kind' field")
    fmt = cfg["format"] or DEFAULT_FORMAT[command]
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    cfg["format"] = fmt
    if not isinstance(cfg["output"], str) or not cfg["output"]:
        raise ConfigError("output must be a path or '-'")
    return cfg


def _params(cfg, beta=None) -> MapParams:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return MapParams(cfg["p"], cfg["beta"] if beta is None else beta)


# -- commands --------------------------------------------------------------------

def _map_ordered(fn, items):
    """Apply ``fn`` across ``items`` with up to ``HUPLAB_THREADS`` workers, keeping order."""
    workers = _backend.thread_cap() or 1
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def cmd_spectrum_scan(cfg):
    if cfg["betas"] is not None:
        betas = cfg["betas"]
    elif cfg["beta_steps"] is not None:
        lo = cfg["beta_min"] if cfg["beta_min"] is not None else cfg["beta"]
        hi = cfg["beta_max"] if cfg["beta_max"] is not None else lo
        betas = [float(b) for b in np.linspace(lo, hi, cfg["beta_steps"])]
    else:
        betas = [cfg["beta"]]
    jobs = [(b, n) for b in betas for n in cfg["n_bins"]]

    def one(job):
        beta, n = job
        params = _params(cfg, beta)
        J = cfg["J"] if cfg["J"] is not None else default_cutoff(n, params)
        M = ulam_assemble(n, params, J)
        row = {"beta": beta, "n_bins": n, "J": J, "tail_bound": M.tail_mass_bound}
        try:
            rep = spectral_top(M, k=2)
            ev = rep.eigenvalues
            second = ev[1] if ev.size > 1 else complex("nan")
            row.update(spectral_radius=rep.spectral_radius, second_eigenvalue=second.real,
                       second_eigenvalue_imag=second.imag, status="ok")
        except ConvergenceError as exc:
            est = np.asarray(exc.estimate if exc.estimate is not None else [np.nan, np.nan])
            row.update(spectral_radius=float(abs(est[0])),
                       second_eigenvalue=float(np.real(est[1])) if est.size > 1 else math.nan,
                       second_eigenvalue_imag=float(np.imag(est[1])) if est.size > 1 else math.nan,
                       status="nonconverged")
        return row

    cols = ["beta", "n_bins", "J", "spectral_radius", "second_eigenvalue",
            "second_eigenvalue_imag", "tail_bound", "status"]
    rows = _map_ordered(one, jobs)
    failed = sum(r["status"] != "ok" for r in rows)
    return cols, rows, {"n_rows": len(jobs), "n_nonconverged": failed}


def cmd_escape(cfg):
    params = _params(cfg)
    prof = escape_profile(cfg["n_steps"], params, cfg["method"],
                          n_samples=cfg["n_samples"], seed=cfg["seed"])
    rows = [{"n": int(n), "measure": float(m), "error_bound": float(e)}
            for n, m, e in zip(prof.n_steps, prof.measure, prof.error_bound)]
    summary = {"method": prof.method,
               "nonincreasing": bool(np.all(np.diff(prof.measure) <= 0))}
    return ["n", "measure", "error_bound"], rows, summary


def _measure_from_config(cfg):
    desc = cfg["measure"]
    kind = desc["kind"]
    if kind == "zero":
        return HyperbolaMeasure.zero(), None
    if kind == "gaussian":
        scale = float(desc.get("scale", 1.0))
        if not scale > 0:
            raise ConfigError("gaussian scale must be positive")
        return HyperbolaMeasure.density(lambda t: np.exp(-(t / scale) ** 2),
                                        window=4 * scale, tol=cfg["tol"]), None
    if kind == "atoms":
        try:
            return HyperbolaMeasure.atoms(desc["t"], desc["w"]), None
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad atoms measure: {exc}") from None
    if kind == "singular-pair":
        k, m = desc.get("k", 1), desc.get("m", 1)
        if not all(isinstance(v, int) and not isinstance(v, bool) and v != 0 for v in (k, m)):
            raise ConfigError("singular-pair needs nonzero integers k and m")
        pair = singular_pair(cfg["p"], cfg["beta"], k, m)
        if pair is None:
            return None, None
        return pair.measure(), pair
    raise ConfigError(f"unknown measure kind {kind!r}")


def cmd_cross_residual(cfg):
    mu, pair = _measure_from_config(cfg)
    cols = ["axis", "index", "xi1", "xi2", "re", "im", "abs", "quad_error"]
    summary = {"measure": cfg["measure"]}
    if mu is None:
        summary.update(verdict="no-pair", max_modulus=None)
        return cols, [], summary
    cross = LatticeCross(cfg["p"], cfg["q"], cfg["beta"], cfg["N"])
    res = ft_on_cross(mu, cross, cfg["tol"])
    P = res.points
    rows = [{"axis": P.axis[i], "index": int(P.index[i]), "xi1": float(P.xi1[i]),
             "xi2": float(P.xi2[i]), "re": float(res.values[i].real),
             "im": float(res.values[i].imag), "abs": float(abs(res.values[i])),
             "quad_error": float(res.errors[i])} for i in range(len(P))]
    threshold = max(cfg["vanish_tol"], 2 * res.max_error)
    summary.update(max_modulus=res.max_modulus, max_quad_error=res.max_error,
                   zero_measure=mu.is_zero,
                   verdict="annihilating" if res.max_modulus <= threshold else "non-vanishing")
    if pair is not None:
        summary.update(u0=pair.u0, v0=pair.v0,
                       congruences_exact=pair.congruences_exact(cfg["q"], cfg["N"]))
    return cols, rows, summary


def cmd_separate(cfg):
    sol = solve_separation(cfg["p"], cfg["beta"])
    summary = sol.to_dict()
    if not sol.exists:
        return ["n", "ep", "ebeta"], [], summary
    rep = verify_separation_or_annihilation(sol, cfg["p"], cfg["beta"], N=cfg["N"])
    summary.update(max_residual=rep.max_residual, tolerance=rep.tol, passed=rep.passed)
    return ["n", "ep", "ebeta"], rep.table, summary


def cmd_identity_check(cfg):
    suite = identity_suite(_params(cfg), cfg["n_functions"], cfg["n_points"], cfg["seed"])
    tol = 1e-12
    rows = [{"check": "ts_equals_koopman_squared", "residual": suite.identity,
             "tolerance": tol, "passed": suite.identity < tol},
            {"check": "factorization", "residual": suite.factorization,
             "tolerance": tol, "passed": suite.factorization < tol}]
    return ["check", "residual", "tolerance", "passed"], rows, \
        {"passed": all(r["passed"] for r in rows)}


def cmd_poisson_check(cfg):
    n = cfg["poisson_n"]
    zs = [complex(a, b) for a, b in cfg["zs"]]
    tol = cfg["poisson_tol"]
    raw = poisson_consistency(cfg["p"], cfg["beta"], range(-n, n + 1), zs,
                              tol=min(cfg["tol"], tol / 10))
    rows = [{"family": r["family"], "n": r["n"], "z_re": r["z"][0], "z_im": r["z"][1],
             "poisson_re": r["poisson"][0], "poisson_im": r["poisson"][1],
             "closed_re": r["closed_form"][0], "closed_im": r["closed_form"][1],
             "abs_diff": r["abs_diff"]} for r in raw]
    worst = max((r["abs_diff"] for r in rows), default=0.0)
    cols = ["family", "n", "z_re", "z_im", "poisson_re", "poisson_im",
            "closed_re", "closed_im", "abs_diff"]
    return cols, rows, {"max_abs_diff": worst, "tolerance": tol, "passed": worst < tol}


HANDLERS = {"spectrum-scan": cmd_spectrum_scan, "escape": cmd_escape,
            "cross-residual": cmd_cross_residual, "separate": cmd_separate,
            "identity-check": cmd_identity_check, "poisson-check": cmd_poisson_check}


# -- serialisation ---------------------------------------------------------------

def _clean(obj):
    """Make a value JSON-safe: numpy scalars unwrapped, non-finite floats become null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render(command, cfg, cols, rows, summary, timestamp) -> str:
    meta = {"command": command, "timestamp": timestamp, "seed": cfg["seed"],
            "backend": _backend.backend_name(), "config": cfg}
    if cfg["format"] == "json":
        doc = dict(meta, summary=summary, columns=cols, rows=rows)
        return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key in ("command", "timestamp", "seed", "backend"):
        buf.write(f"# {key}: {meta[key]}\n")
    buf.write("# config: " + json.dumps(_clean(cfg), sort_keys=True) + "\n")
    buf.write("# summary: " + json.dumps(_clean(summary), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


# -- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override its values)")
    common.add_argument("-o", "--output", help="output path, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--p", type=int)
    common.add_argument("--q", type=int)
    common.add_argument("--beta", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--N", type=int, help="lattice index window |n|, |m| <= N")

    ap = argparse.ArgumentParser(prog="huplab", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum-scan", parents=[common], help="Ulam spectra over beta and n_bins")
    s.add_argument("--betas", type=float, nargs="*")
    s.add_argument("--beta-min", dest="beta_min", type=float)
    s.add_argument("--beta-max", dest="beta_max", type=float)
    s.add_argument("--beta-steps", dest="beta_steps", type=int)
    s.add_argument("--n-bins", dest="n_bins", type=int, nargs="+")
    s.add_argument("--J", type=int, help="branch cutoff (default: exact tail lumping)")

    s = sub.add_parser("escape", parents=[common], help="measures of the escape sets E(n)")
    s.add_argument("--n-steps", dest="n_steps", type=int)
    s.add_argument("--method", choices=METHODS)
    s.add_argument("--n-samples", dest="n_samples", type=int)

    s = sub.add_parser("cross-residual", parents=[common],
                       help="transform of a hyperbola measure on a lattice cross")
    s.add_argument("--measure", help="measure kind or a JSON object")
    s.add_argument("--k", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--vanish-tol", dest="vanish_tol", type=float)

    sub.add_parser("separate", parents=[common], help="solve and verify the separation system")

    s = sub.add_parser("identity-check", parents=[common], help="operator identity suites")
    s.add_argument("--n-functions", dest="n_functions", type=int)
    s.add_argument("--n-points", dest="n_points", type=int)

    s = sub.add_parser("poisson-check", parents=[common],
                       help="Poisson integrals against closed-form extensions")
    s.add_argument("--poisson-n", dest="poisson_n", type=int)
    s.add_argument("--poisson-tol", dest="poisson_tol", type=float)
    return ap


def _overrides(args, file_cfg) -> dict:
    ov = {k: v for k, v in vars(args).items() if k not in ("command", "config", "measure", "k", "m")}
    measure = getattr(args, "measure", None)
    k, m = getattr(args, "k", None), getattr(args, "m", None)
    if measure is not None or k is not None or m is not None:
        base = dict(file_cfg.get("measure", DEFAULTS["measure"]))
        if measure is not None:
            try:
                base = json.loads(measure) if measure.lstrip().startswith("{") \
                    else {"kind": measure}
            except json.JSONDecodeError as exc:
                raise ConfigError(f"--measure is not valid JSON: {exc}") from None
        if k is not None:
            base["k"] = k
        if m is not None:
            base["m"] = m
        ov["measure"] = base
    return ov


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_cfg = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
            if not isinstance(file_cfg, dict):
                raise ConfigError("config file must hold a JSON object")
        cfg = resolve_config(args.command, file_cfg, _overrides(args, file_cfg))
        cols, rows, summary = HANDLERS[args.command](cfg)
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        text = render(args.command, cfg, cols, rows, summary, stamp)
        if cfg["output"] == "-":
            sys.stdout.write(text)
        else:
            with open(cfg["output"], "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        if summary.get("n_nonconverged"):
            # the report is still written; the exit code flags the failed rows
            print(f"huplab: {summary['n_nonconverged']} row(s) did not converge", file=sys.stderr)
            return EXIT_NUMERIC
    except (ConfigError, json.JSONDecodeError, ParameterError, DomainError) as exc:
        print(f"huplab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ResourceError) as exc:
        print(f"huplab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"huplab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
