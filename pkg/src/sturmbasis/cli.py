"""Batch command line: coefficient tables, spectra, hypothesis checks, Gram reports.

Every run is described by a :class:`RunConfig` that is validated in full
before any computation.  JSON output is canonical (floats printed with 17
significant digits, fixed key order); CSV is a flat projection of the main
table of each report.

Exit codes: 0 success (whatever the verdict), 2 configuration error,
3 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from typing import Any, Optional, Sequence

import numpy as np

from . import diagnostics, floquet
from .diagnostics import DensityError
from .floquet import FloquetOptions, SolverError
from .potential import (
    Potential,
    PotentialError,
    fourier_coefficients,
    load_potential,
    make_counterexample,
    potential_to_dict,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

COMMANDS = ("coeffs", "spectrum", "check", "gram", "density", "counterexample")

# per-command default for --n-max
_N_MAX_DEFAULT = {"coeffs": 16, "spectrum": 10, "gram": 16, "density": 256, "check": None}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    potential: Optional[str] = None
    bc_case: int = 1
    m: int = 0
    n0: int = 1
    n_max: Optional[int] = None
    grid: Optional[int] = None
    tol: float = floquet.DEFAULT_OPTIONS.tol
    theta: float = 4.0
    sigma_min: float = 0.1
    c_floor: float = 1e-6
    fmt: str = "json"
    out: Optional[str] = None
    # command specific
    theorem: Optional[int] = None
    oracle: bool = False
    sweep: bool = False
    method: str = "shooting"
    delta: float = 1e-3
    target: str = diagnostics.NON_BASIS_LIKE
    eps1: Optional[float] = None
    eps2: Optional[float] = None
    K: Optional[int] = None

    @property
    def window_top(self) -> int:
        if self.n_max is not None:
            return self.n_max
        if self.command == "check":
            return 64 if self.theorem == 1 else 256
        return _N_MAX_DEFAULT[self.command]

    @property
    def options(self) -> FloquetOptions:
        return FloquetOptions(tol=self.tol)


def validate(cfg: RunConfig) -> Optional[Potential]:
    """Check every field; return the loaded potential (``None`` for ``counterexample``)."""
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.bc_case not in (1, 2):
        raise ConfigError(f"--case must be 1 or 2, got {cfg.bc_case}")
    if cfg.fmt not in ("json", "csv"):
        raise ConfigError(f"--format must be json or csv, got {cfg.fmt!r}")
    for name in ("tol", "theta", "sigma_min", "c_floor", "delta"):
        v = getattr(cfg, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ConfigError(f"--{name.replace('_', '-')} must be a positive number, got {v!r}")
    if cfg.theta <= 1:
        raise ConfigError(f"--theta must exceed 1, got {cfg.theta}")
    if cfg.m < 0:
        raise ConfigError(f"--m must be non-negative, got {cfg.m}")
    if cfg.n0 < 0:
        raise ConfigError(f"--n0 must be non-negative, got {cfg.n0}")

    if cfg.command == "counterexample":
        if cfg.eps1 is None or cfg.eps2 is None or cfg.K is None:
            raise ConfigError("counterexample needs --eps1, --eps2 and --K")
        try:
            make_counterexample(cfg.bc_case, cfg.eps1, cfg.eps2, cfg.K, cfg.m)
        except PotentialError as exc:
            raise ConfigError(str(exc)) from exc
        return None

    if cfg.potential is None:
        raise ConfigError(f"{cfg.command} needs --potential")
    try:
        q = load_potential(cfg.potential)
    except OSError as exc:
        raise ConfigError(f"cannot read potential: {exc}") from exc
    except PotentialError as exc:
        raise ConfigError(str(exc)) from exc

    top = cfg.window_top
    if top < 1:
        raise ConfigError(f"--n-max must be positive, got {top}")
    if cfg.n0 >= top:
        raise ConfigError(f"window bounds out of order: n0={cfg.n0} >= n-max={top}")
    if cfg.command == "check":
        if cfg.theorem not in (1, 2):
            raise ConfigError("check needs --theorem 1 or 2")
        if cfg.theorem == 1 and top < 2 * cfg.n0:
            raise ConfigError(f"theorem 1 window needs n-max >= 2 n0, got n0={cfg.n0}, n-max={top}")
    if cfg.command == "gram":
        if cfg.method not in ("shooting", "galerkin"):
            raise ConfigError(f"--method must be shooting or galerkin, got {cfg.method!r}")
        if cfg.n0 < 1:
            raise ConfigError("gram windows start at n0 >= 1")
        if cfg.sweep and not _sweep_windows(cfg.n0, top):
            raise ConfigError(f"no dyadic window [n0, 2^j] with 8 <= 2^j <= {top}")
        if cfg.grid is not None and cfg.grid < 4 * top + 1:
            raise ConfigError(f"--grid must be at least 4 n-max + 1 = {4 * top + 1}")
    if cfg.command == "density":
        if cfg.target not in (diagnostics.BASIS_LIKE, diagnostics.NON_BASIS_LIKE):
            raise ConfigError(f"--target must be {diagnostics.BASIS_LIKE} or {diagnostics.NON_BASIS_LIKE}")
    if cfg.grid is not None and cfg.grid < 2 * q.K + 1:
        raise ConfigError(f"--grid must be at least 2K+1 = {2 * q.K + 1}")
    return q


def _sweep_windows(n0: int, top: int) -> list[tuple[int, int]]:
    return [(n0, 2**j) for j in range(3, 32) if 2**j <= top and 2**j > n0]


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _num(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return "%.17g" % x


def _plain(obj: Any) -> Any:
    """Reduce reports to dicts, lists, strings, ints, floats and complexes."""
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)
                if f.name not in ("perturbed", "chain_partner")}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.complexfloating,)):
        return complex(obj)
    return obj


def dumps(obj: Any) -> str:
    """Deterministic JSON with 17 significant digits; complexes become ``{"re", "im"}``."""
    obj = _plain(obj)
    out: list[str] = []

    def emit(o):
        if o is None:
            out.append("null")
        elif isinstance(o, bool):
            out.append("true" if o else "false")
        elif isinstance(o, int):
            out.append(str(o))
        elif isinstance(o, float):
            out.append(_num(o))
        elif isinstance(o, complex):
            out.append('{"re": %s, "im": %s}' % (_num(o.real), _num(o.imag)))
        elif isinstance(o, str):
            out.append(json.dumps(o))
        elif isinstance(o, dict):
            out.append("{")
            for i, (k, v) in enumerate(o.items()):
                if i:
                    out.append(", ")
                emit(k)
                out.append(": ")
                emit(v)
            out.append("}")
        elif isinstance(o, list):
            out.append("[")
            for i, v in enumerate(o):
                if i:
                    out.append(", ")
                emit(v)
            out.append("]")
        else:
            raise TypeError(f"cannot serialize {type(o).__name__}")

    emit(obj)
    return "".join(out) + "\n"


def _csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    flat = []
    for r in rows:
        f = {}
        for k, v in _plain(r).items():
            if isinstance(v, complex):
                f[f"{k}_re"] = _num(v.real)
                f[f"{k}_im"] = _num(v.imag)
            elif isinstance(v, float):
                f[k] = _num(v).strip('"')
            elif isinstance(v, (dict, list)):
                continue
            else:
                f[k] = v
        flat.append(f)
    w = csv.DictWriter(buf, fieldnames=list(flat[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(flat)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cfg_block(cfg: RunConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(cfg) if f.name not in ("out", "fmt")}


def cmd_coeffs(cfg: RunConfig, q: Potential):
    rows = []
    for n in range(max(cfg.n0, 1), cfg.window_top + 1):
        c = fourier_coefficients(q, n)
        mg = diagnostics.margins(q, [n], cfg.m)[0]
        rows.append({"n": n, "alpha": c.alpha, "beta": c.beta,
                     "alpha_margin": mg.alpha_margin, "beta_margin": mg.beta_margin,
                     "r": mg.r, "R": mg.R})
    return {"command": "coeffs", "config": _cfg_block(cfg), "rows": rows}, rows


def cmd_spectrum(cfg: RunConfig, q: Potential):
    rows = []
    opts = cfg.options
    for n in range(max(cfg.n0, 1), cfg.window_top + 1):
        row: dict = {"n": n}
        try:
            p = floquet.find_pair(q, cfg.bc_case, n, opts)
        except SolverError as exc:
            row["error"] = str(exc)
            rows.append(row)
            continue
        row.update({"coeff_index": p.coeff_index, "rho": p.rho, "lambda_minus": p.lambda_minus,
                    "lambda_plus": p.lambda_plus, "classification": p.classification})
        if cfg.oracle:
            K_matrix = max(n + 16, q.K + 4)
            g = np.sort_complex(floquet.galerkin_pair(q, cfg.bc_case, n, K_matrix)[0])
            s = np.sort_complex(np.array([p.lambda_minus, p.lambda_plus]))
            row["galerkin_minus"] = complex(g[0])
            row["galerkin_plus"] = complex(g[1])
            row["max_rel_deviation"] = float(np.max(np.abs(g - s)) / max(abs(g[0]), 1.0))
        rows.append(row)
    report = {"command": "spectrum", "config": _cfg_block(cfg), "rows": rows}
    if cfg.oracle:
        devs = [r["max_rel_deviation"] for r in rows if "max_rel_deviation" in r]
        report["max_deviation"] = max(devs) if devs else None
    return report, rows


def cmd_check(cfg: RunConfig, q: Potential):
    if cfg.theorem == 1:
        v = diagnostics.check_theorem1(q, cfg.bc_case, cfg.m, cfg.n0, cfg.window_top, cfg.theta)
    else:
        v = diagnostics.check_theorem2(q, cfg.bc_case, cfg.m, cfg.window_top, cfg.c_floor, cfg.sigma_min)
    return {"command": "check", "config": _cfg_block(cfg), "report": v}, v.margins


def cmd_gram(cfg: RunConfig, q: Potential):
    opts = cfg.options
    if cfg.sweep:
        reports = diagnostics.gram_sweep(q, cfg.bc_case, _sweep_windows(cfg.n0, cfg.window_top),
                                         cfg.grid, opts, cfg.method)
        rows = [{"window_lo": r.window[0], "window_hi": r.window[1], "system_size": r.system_size,
                 "mu_min": r.mu_min, "mu_max": r.mu_max, "riesz_ratio": r.riesz_ratio,
                 "top_angle": r.angles[-1].angle if r.angles else math.nan} for r in reports]
        return {"command": "gram", "config": _cfg_block(cfg), "sweep": reports}, rows
    r = diagnostics.gram_report(q, cfg.bc_case, cfg.n0, cfg.window_top, cfg.grid, opts, method=cfg.method)
    return {"command": "gram", "config": _cfg_block(cfg), "report": r}, r.angles


def cmd_density(cfg: RunConfig, q: Potential):
    rep = diagnostics.density_demo(q, cfg.delta, cfg.target, cfg.window_top, cfg.bc_case, cfg.m,
                                   cfg.n0, cfg.theta, cfg.sigma_min, cfg.c_floor,
                                   grid_size=cfg.grid, opts=cfg.options)
    body = _plain(rep)
    body["flipped"] = rep.flipped
    body["perturbed_potential"] = potential_to_dict(rep.perturbed)
    rows = [{"which": "start", "class": rep.start_class,
             "theorem1": rep.start_verdicts[0].verdict, "theorem2": rep.start_verdicts[1].verdict},
            {"which": "perturbed", "class": rep.perturbed_class,
             "theorem1": rep.perturbed_verdicts[0].verdict, "theorem2": rep.perturbed_verdicts[1].verdict}]
    return {"command": "density", "config": _cfg_block(cfg), "report": body}, rows


def cmd_counterexample(cfg: RunConfig, _q):
    q = make_counterexample(cfg.bc_case, cfg.eps1, cfg.eps2, cfg.K, cfg.m)
    d = potential_to_dict(q)
    return d, [d]


_DISPATCH = {"coeffs": cmd_coeffs, "spectrum": cmd_spectrum, "check": cmd_check,
             "gram": cmd_gram, "density": cmd_density, "counterexample": cmd_counterexample}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    p.add_argument("--potential", default=S, help="JSON file or inline JSON object")
    p.add_argument("--case", dest="bc_case", type=int, default=S, help="1 periodic, 2 antiperiodic")
    p.add_argument("--m", type=int, default=S)
    p.add_argument("--n0", type=int, default=S)
    p.add_argument("--n-max", dest="n_max", type=int, default=S)
    p.add_argument("--grid", type=int, default=S)
    p.add_argument("--tol", type=float, default=S)
    p.add_argument("--theta", type=float, default=S)
    p.add_argument("--sigma-min", dest="sigma_min", type=float, default=S)
    p.add_argument("--c-floor", dest="c_floor", type=float, default=S)
    p.add_argument("--format", dest="fmt", default=S, choices=("json", "csv"))
    p.add_argument("--out", default=S)
    return p


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="sturmbasis", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("coeffs", parents=[common], help="alpha_n, beta_n and margins")
    sp = sub.add_parser("spectrum", parents=[common], help="periodic/antiperiodic eigenvalue pairs")
    sp.add_argument("--oracle", action="store_true", help="add Galerkin columns")
    ck = sub.add_parser("check", parents=[common], help="coefficient hypothesis check")
    ck.add_argument("--theorem", type=int, choices=(1, 2), required=True)
    gr = sub.add_parser("gram", parents=[common], help="Gram matrix of the root system")
    gr.add_argument("--sweep", action="store_true", help="windows [n0, 2^j], 8 <= 2^j <= n-max")
    gr.add_argument("--method", default="shooting", choices=("shooting", "galerkin"))
    de = sub.add_parser("density", parents=[common], help="small perturbation flipping the class")
    de.add_argument("--delta", type=float, default=1e-3)
    de.add_argument("--target", default=diagnostics.NON_BASIS_LIKE,
                    choices=(diagnostics.BASIS_LIKE, diagnostics.NON_BASIS_LIKE))
    ce = sub.add_parser("counterexample", parents=[common], help="emit a lacunary potential file")
    ce.add_argument("--eps1", type=float, required=True)
    ce.add_argument("--eps2", type=float, required=True)
    ce.add_argument("--K", type=int, required=True)
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = vars(build_parser().parse_args(list(argv)))
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in ns.items() if k in known})


def execute(cfg: RunConfig, q: Optional[Potential]) -> str:
    report, rows = _DISPATCH[cfg.command](cfg, q)
    return dumps(report) if cfg.fmt == "json" else _csv(rows)


def run(cfg: RunConfig) -> str:
    return execute(cfg, validate(cfg))


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        q = validate(cfg)
    except (ConfigError, PotentialError) as exc:
        sys.stderr.write(dumps({"error": str(exc), "kind": "config"}))
        return EXIT_CONFIG
    try:
        text = execute(cfg, q)
    except (SolverError, DensityError) as exc:
        sys.stderr.write(dumps({"error": str(exc), "kind": "solver"}))
        return EXIT_SOLVER
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
