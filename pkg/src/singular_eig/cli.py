"""Command-line front end.

Subcommands ``eig``, ``sweep``, ``solve`` and ``verify``. Options may also
come from a flat ``key = value`` file given by ``--config``; command-line
flags win over the file.

Exit codes: 0 success, 1 configuration error, 2 solver error, 3 a sweep
row failed, 4 a verification check failed.
"""
from __future__ import annotations

import argparse
import itertools
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable

import numpy as np

from . import __version__
from .core import PotentialSpec, RadialOperator, dimension_like, explicit_lambda2
from .errors import SingularEigError
from .extrapolate import richardson_gamma_limit
from .output import dumps_csv, dumps_json, write_text

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_SWEEP, EXIT_VERIFY = 0, 1, 2, 3, 4
ENGINES = ("shoot", "var", "fd")


class ConfigError(ValueError):
    """Invalid or inconsistent options."""


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc
    if not vals:
        raise ConfigError("empty list")
    return vals


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in str(text).split(",") if x.strip()]


# option name -> (converter, default)
OPTIONS: dict[str, tuple[Callable, Any]] = {
    "engine": (str, "shoot"),
    "engines": (_str_list, ["fd"]),
    "operator": (str, "pucci+"),
    "lam": (float, 1.0),
    "Lam": (float, 1.0),
    "dim": (int, 3),
    "gamma": (float, 0.0),
    "gammas": (_float_list, None),
    "eps": (float, 0.0),
    "epss": (_float_list, None),
    "delta": (float, 0.0),
    "deltas": (_float_list, None),
    "mu": (float, None),
    "beta": (float, 0.0),
    "rhs": (float, -1.0),
    "boundary": (float, 0.0),
    "nodes": (int, None),
    "tol": (float, None),
    "samples": (int, 101),
    "format": (str, "json"),
    "out": (str, None),
    "jobs": (int, 1),
    "only": (_str_list, None),
    "inject_bug": (bool, False),
}

FLAG_HELP = {
    "engine": "solver engine: shoot, var or fd",
    "engines": "comma-separated engines for sweep",
    "operator": "pucci+, pucci-, laplacian or mix:THETA",
    "lam": "lower ellipticity constant",
    "Lam": "upper ellipticity constant",
    "dim": "space dimension N",
    "gamma": "exponent of the singular potential",
    "gammas": "comma-separated gamma schedule",
    "eps": "potential smoothing radius (ball, fd engine)",
    "epss": "comma-separated eps schedule",
    "delta": "inner radius of the annulus (fd engine)",
    "deltas": "comma-separated delta schedule",
    "mu": "zero-order coefficient (solve) or shooting coefficient (eig)",
    "beta": "absorption coefficient (solve)",
    "rhs": "constant right-hand side f (solve)",
    "boundary": "Dirichlet boundary value (solve)",
    "nodes": "grid or mesh size",
    "tol": "solver tolerance",
    "samples": "eigenfunction samples in the output",
    "format": "csv or json",
    "out": "output path (stdout when omitted)",
    "jobs": "parallel workers for sweep",
}


def _read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def _convert(key: str, value):
    conv, _ = OPTIONS[key]
    if conv is bool:
        if isinstance(value, bool):
            return value
        return str(value).strip().lower() in ("1", "true", "yes", "on")
    if not isinstance(value, str) and conv in (float, int, str):
        return conv(value)
    try:
        return conv(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, the config file and explicit flags (in that order)."""
    cfg = {k: default for k, (_, default) in OPTIONS.items()}
    if getattr(args, "config", None):
        for k, v in _read_config(args.config).items():
            cfg[k] = _convert(k, v)
    for k in OPTIONS:
        if hasattr(args, k):
            cfg[k] = _convert(k, getattr(args, k))
    cfg["command"] = args.command
    return cfg


def _params(cfg: dict):
    try:
        return dimension_like(cfg["lam"], cfg["Lam"], cfg["dim"], strict=False)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _operator(cfg: dict, params) -> RadialOperator:
    try:
        return RadialOperator.parse(cfg["operator"], params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _check_point(engine: str, gamma: float, delta: float, eps: float) -> None:
    if engine not in ENGINES:
        raise ConfigError(f"unknown engine {engine!r}; choose from {', '.join(ENGINES)}")
    if not (math.isfinite(gamma) and gamma >= 0):
        raise ConfigError(f"gamma must be a finite number >= 0, got {gamma}")
    if eps < 0:
        raise ConfigError("eps must be >= 0")
    if not 0 <= delta < 1:
        raise ConfigError("delta must lie in [0, 1)")
    if engine in ("shoot", "var") and gamma >= 2:
        raise ConfigError(f"engine {engine} needs gamma < 2")
    if engine == "fd" and delta == 0 and eps == 0 and gamma > 0:
        raise ConfigError("engine fd needs eps > 0 or delta > 0 (the bare potential "
                          "cannot be put on a grid touching the origin)")


def _validate_common(cfg: dict) -> None:
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if cfg["nodes"] is not None and cfg["nodes"] < 5:
        raise ConfigError("nodes must be at least 5")
    if cfg["tol"] is not None and not cfg["tol"] > 0:
        raise ConfigError("tol must be positive")
    if cfg["samples"] < 2:
        raise ConfigError("samples must be at least 2")
    if cfg["jobs"] < 1:
        raise ConfigError("jobs must be at least 1")


def run_engine(engine: str, operator: RadialOperator, gamma: float, delta: float,
               eps: float, nodes: int | None, tol: float | None,
               mu: float | None = None) -> dict:
    """Run one engine and return a plain record (no profile arrays)."""
    from .fd_eig import fd_principal_eigenvalue, make_grid
    from .ode_shoot import shoot_eigenvalue
    from .rayleigh import variational_eigenvalue

    rec: dict = {"engine": engine}
    if engine == "shoot":
        res = shoot_eigenvalue(operator.params, gamma, operator, mu=mu or 1.0)
        rec.update(eigenvalue=res.eigenvalue, first_zero=res.first_zero,
                   log_first_zero=res.diagnostics["log_first_zero"])
        rec["diagnostics"] = dict(res.diagnostics)
        rec["_profile"] = res.profile
    elif engine == "var":
        kw = {"mesh_size": nodes} if nodes else {}
        if tol:
            kw["tol"] = tol
        res = variational_eigenvalue(operator.params, gamma, operator_kind=operator.kind, **kw)
        rec.update(eigenvalue=res.bridge_eigenvalue, lambda_var=res.lambda_var,
                   bridge_eigenvalue=res.bridge_eigenvalue,
                   exploratory=res.exploratory)
        rec["diagnostics"] = dict(res.diagnostics)
        rec["_profile"] = res.minimizer
    else:
        pot = PotentialSpec(gamma, eps if delta == 0 else 0.0)
        grid = make_grid(delta, nodes or 8192, pot)
        kw = {"tol": tol} if tol else {}
        res = fd_principal_eigenvalue(operator, pot, grid, **kw)
        diag = dict(res.diagnostics)
        diag["history_length"] = len(diag.pop("history"))
        rec.update(eigenvalue=res.eigenvalue)
        rec["diagnostics"] = diag
        rec["_profile"] = res.profile
    return rec


def _sample_profile(profile, k: int, normalize: bool = True) -> dict:
    r = np.linspace(0.0, 1.0, k)
    u = profile.sample(r)
    if normalize:
        # engines normalize differently; report sup norm 1
        peak = u[np.argmax(np.abs(u))]
        if peak != 0:
            u = u / peak
    return {"r": r, "u": u}


def _emit(cfg: dict, text: str) -> None:
    write_text(cfg["out"], text, sys.stdout)


def _public_config(cfg: dict) -> dict:
    return {k: v for k, v in sorted(cfg.items()) if k not in ("only", "inject_bug")}


def cmd_eig(cfg: dict) -> int:
    _validate_common(cfg)
    params = _params(cfg)
    op = _operator(cfg, params)
    engine = cfg["engine"]
    _check_point(engine, cfg["gamma"], cfg["delta"], cfg["eps"])
    if engine == "var" and op.kind not in ("pucci_plus", "pucci_minus"):
        raise ConfigError("engine var supports pucci+ and pucci- only")
    try:
        rec = run_engine(engine, op, cfg["gamma"], cfg["delta"], cfg["eps"],
                         cfg["nodes"], cfg["tol"], cfg["mu"])
    except SingularEigError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    prof = rec.pop("_profile")
    samples = _sample_profile(prof, cfg["samples"])
    if cfg["format"] == "json":
        record = {"command": "eig", "config": _public_config(cfg), **rec,
                  "eigenfunction": samples}
        _emit(cfg, dumps_json(record))
    else:
        head = ["engine", "operator", "lam", "Lam", "dim", "gamma", "eps", "delta",
                "eigenvalue", "first_zero", "lambda_var", "r", "u"]
        fixed = [engine, op.label, cfg["lam"], cfg["Lam"], cfg["dim"], cfg["gamma"],
                 cfg["eps"], cfg["delta"], rec["eigenvalue"], rec.get("first_zero"),
                 rec.get("lambda_var")]
        rows = [fixed + [r, u] for r, u in zip(samples["r"], samples["u"])]
        _emit(cfg, dumps_csv(head, rows))
    return EXIT_OK


def _sweep_row(args) -> dict:
    engines, op, gamma, delta, eps, nodes, tol = args
    row: dict = {"gamma": gamma, "delta": delta, "eps": eps, "status": "ok"}
    for eng in engines:
        try:
            _check_point(eng, gamma, delta, eps)
            rec = run_engine(eng, op, gamma, delta, eps, nodes, tol)
            row[eng] = rec["eigenvalue"]
        except (SingularEigError, ConfigError, ValueError) as exc:
            row[eng] = math.nan
            row["status"] = "failed"
            row.setdefault("errors", []).append(f"{eng}: {type(exc).__name__}: {exc}")
    return row


def _axis(rows) -> str | None:
    changed = set()
    for a, b in zip(rows, rows[1:]):
        diff = [k for k in ("gamma", "delta", "eps") if a[k] != b[k]]
        changed.update(diff if len(diff) == 1 else ["mixed"])
    return changed.pop() if len(changed) == 1 else None


def _step_flags(rows, eng: str, axis: str | None) -> list:
    flags = [None]
    for a, b in zip(rows, rows[1:]):
        va, vb = a[eng], b[eng]
        if axis is None or not (math.isfinite(va) and math.isfinite(vb)):
            flags.append(None)
        elif axis in ("delta", "eps"):
            # proven direction: eigenvalue increases with the regularization
            flags.append(bool((b[axis] - a[axis]) * (vb - va) > 0))
        else:
            flags.append(bool((b["gamma"] - a["gamma"]) * (vb - va) < 0))
    return flags


def cmd_sweep(cfg: dict) -> int:
    _validate_common(cfg)
    params = _params(cfg)
    op = _operator(cfg, params)
    engines = cfg["engines"]
    gammas = cfg["gammas"] or [cfg["gamma"]]
    deltas = cfg["deltas"] or [cfg["delta"]]
    epss = cfg["epss"] or [cfg["eps"]]
    for eng in engines:
        if eng not in ENGINES:
            raise ConfigError(f"unknown engine {eng!r}")
    for g, d, e in itertools.product(gammas, deltas, epss):
        if not (math.isfinite(g) and g >= 0) or e < 0 or not 0 <= d < 1:
            raise ConfigError(f"invalid schedule point gamma={g}, delta={d}, eps={e}")
    schedule = [(tuple(engines), op, g, d, e, cfg["nodes"], cfg["tol"])
                for g, d, e in itertools.product(gammas, deltas, epss)]
    if cfg["jobs"] > 1 and len(schedule) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            rows = list(pool.map(_sweep_row, schedule))
    else:
        rows = [_sweep_row(s) for s in schedule]
    axis = _axis(rows)
    flags = {eng: _step_flags(rows, eng, axis) for eng in engines}
    limits = {}
    ref = None
    if axis == "gamma" and op.kind in ("pucci_plus", "pucci_minus", "laplacian"):
        ref = explicit_lambda2(params, "pucci_minus" if op.kind == "pucci_minus"
                               else "pucci_plus")
    for eng in engines:
        vals = [r[eng] for r in rows]
        gs = [r["gamma"] for r in rows]
        ok = (axis == "gamma" and len(vals) >= 3 and all(map(math.isfinite, vals[-3:]))
              and all(g < 2 for g in gs[-3:]))
        limits[eng] = richardson_gamma_limit(gs[-3:], vals[-3:]) if ok else None
    monotone = {eng: (all(f for f in flags[eng][1:]) if axis and len(rows) > 1 else None)
                for eng in engines}
    failed = any(r["status"] != "ok" for r in rows)
    if cfg["format"] == "json":
        record = {"command": "sweep", "config": _public_config(cfg), "axis": axis,
                  "rows": rows, "monotone": monotone, "limit": limits,
                  "explicit_lambda2": ref}
        for i, r in enumerate(rows):
            r["step_monotone"] = {eng: flags[eng][i] for eng in engines}
        _emit(cfg, dumps_json(record))
    else:
        head = ["index", "gamma", "delta", "eps"]
        for eng in engines:
            head += [f"{eng}_eigenvalue", f"{eng}_monotone", f"{eng}_limit"]
        head += ["status", "explicit_lambda2"]
        table = []
        for i, r in enumerate(rows):
            line = [i, r["gamma"], r["delta"], r["eps"]]
            for eng in engines:
                line += [r[eng], flags[eng][i], limits[eng]]
            line += [r["status"], ref]
            table.append(line)
        _emit(cfg, dumps_csv(head, table))
    for r in rows:
        for msg in r.get("errors", []):
            print(f"row gamma={r['gamma']:g} delta={r['delta']:g} eps={r['eps']:g}: "
                  f"{msg}", file=sys.stderr)
    return EXIT_SWEEP if failed else EXIT_OK


def cmd_solve(cfg: dict) -> int:
    from .fd_eig import DirichletProblem, make_grid, pucci_dirichlet_solve

    _validate_common(cfg)
    params = _params(cfg)
    op = _operator(cfg, params)
    _check_point("fd", cfg["gamma"], cfg["delta"], cfg["eps"])
    if cfg["beta"] < 0:
        raise ConfigError("beta must be >= 0")
    mu = cfg["mu"] if cfg["mu"] is not None else 0.0
    pot = PotentialSpec(cfg["gamma"], cfg["eps"] if cfg["delta"] == 0 else 0.0)
    grid = make_grid(cfg["delta"], cfg["nodes"] or 8192, pot)
    problem = DirichletProblem(mu, cfg["rhs"], op, pot, cfg["beta"], cfg["boundary"])
    try:
        prof, info = pucci_dirichlet_solve(problem, grid, return_info=True,
                                           tol=cfg["tol"] or 1e-12)
    except SingularEigError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    samples = _sample_profile(prof, cfg["samples"], normalize=False)
    if cfg["format"] == "json":
        record = {"command": "solve", "config": _public_config(cfg),
                  "iterations": info["iterations"],
                  "policy_iterations": info["policy_iterations"],
                  "sup_norm": float(np.max(np.abs(prof.values))),
                  "solution": samples}
        _emit(cfg, dumps_json(record))
    else:
        rows = list(zip(samples["r"], samples["u"]))
        _emit(cfg, dumps_csv(["r", "u"], rows))
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    from .suite import CHECKS, run_suite

    only = cfg["only"]
    if only:
        unknown = [n for n in only if n not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown check(s) {', '.join(unknown)}; available: "
                              f"{', '.join(CHECKS)}")
    results = run_suite(only, inject_bug=cfg["inject_bug"])
    width = max(len(r["name"]) for r in results)
    lines = [f"{'check':<{width}}  status  detail"]
    for r in results:
        lines.append(f"{r['name']:<{width}}  {'PASS' if r['passed'] else 'FAIL':<6}  "
                     f"{r['detail']}")
    n_fail = sum(not r["passed"] for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    text = "\n".join(lines) + "\n"
    if cfg["format"] == "json" and cfg["out"]:
        write_text(cfg["out"], dumps_json({"command": "verify", "results": results}))
        sys.stdout.write(text)
    else:
        _emit(cfg, text)
    return EXIT_VERIFY if n_fail else EXIT_OK


COMMANDS = {"eig": cmd_eig, "sweep": cmd_sweep, "solve": cmd_solve, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singular-eig",
        description="Principal eigenvalues of radial Pucci operators with a "
                    "singular potential r^-gamma on the unit ball.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(p, *names):
        for name in names:
            flag = "--" + name.replace("_", "-")
            p.add_argument(flag, dest=name, default=argparse.SUPPRESS,
                           help=FLAG_HELP.get(name))

    common = ("operator", "lam", "Lam", "dim", "gamma", "eps", "delta", "nodes",
              "tol", "format", "out")
    p = sub.add_parser("eig", help="principal eigenvalue with one engine")
    add(p, "engine", *common, "mu", "samples")
    p = sub.add_parser("sweep", help="eigenvalues along a (gamma, delta, eps) schedule")
    add(p, "engines", *common, "gammas", "deltas", "epss", "jobs")
    p = sub.add_parser("solve", help="Dirichlet problem by the monotone recursion")
    add(p, *common, "mu", "beta", "rhs", "boundary", "samples")
    p = sub.add_parser("verify", help="run the built-in verification suite")
    add(p, "only", "format", "out")
    p.add_argument("--inject-bug", dest="inject_bug", action="store_true",
                   default=argparse.SUPPRESS,
                   help="flip a sign inside the checks (the suite must then fail)")
    for sp in sub.choices.values():
        sp.add_argument("--config", help="flat key = value file; flags win")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
