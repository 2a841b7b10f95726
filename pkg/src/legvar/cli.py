"""Command-line driver: identity suites, refinement studies, density scans, counterexample table.

Exit status is 0 when every check passes, 1 when a check fails and 2 on
usage or input errors. Reports are deterministic for a fixed configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import studies
from ._accel import apply_thread_limit, default_backend
from .errors import DiagnosticError, DomainError, ParseError
from .sphere import OBSERVABLES
from .varifold import DiscreteVarifold

log = logging.getLogger("legvar")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SURFACE_TOLERANCES = {"order": studies.ORDER, "energy_rel": 2e-3, "area_rel": 1e-3, "metric_offdiag": 1e-12}
DENSITY_TOLERANCES = {"violation_rel": 0.01, "density_rel": 0.01}
COUNTEREXAMPLE_TOLERANCES = {"slope_center": -1.0, "slope_halfwidth": 0.3, "mass_rel": 1e-10}

# per-family density accuracy for the built-ins
BUILTIN_DENSITY_TOL = {"plane": 0.005, "plane2": 0.005, "clifford-blowdown": 0.01, "clifford": 0.01}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    grid: list = field(default_factory=list)
    radii: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "json"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.grid and any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise UsageError("--grid sizes must be strictly increasing")


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of numbers, got {text!r}") from None


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of integers, got {text!r}") from None


def _parse_tol(text: str | None, defaults: dict) -> dict:
    """``--tol 1e-9`` overrides every entry; ``--tol key=val,key=val`` overrides named ones."""
    tols = dict(defaults)
    if text is None:
        return tols
    if "=" not in text:
        try:
            v = float(text)
        except ValueError:
            raise UsageError(f"bad --tol value {text!r}") from None
        return {k: v for k in tols}
    for item in text.split(","):
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in tols:
            raise UsageError(f"unknown tolerance {key!r}; known: {', '.join(sorted(tols))}")
        try:
            tols[key] = float(val)
        except ValueError:
            raise UsageError(f"bad tolerance value for {key!r}: {val!r}") from None
    return tols


def _clean(obj):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


# ---------------------------------------------------------------- commands

def cmd_identities(cfg: RunConfig) -> tuple[dict, list, list]:
    res = studies.identity_suite(cfg.seed, cfg.params.get("n", 1000), cfg.tolerances)
    rows = [[c["name"], c["value"], c["tol"], c["passed"]] for c in res["checks"]]
    return res, ["name", "value", "tol", "passed"], rows


def _ladder_rows(res: dict, grid_key: str = "grid") -> list:
    rows = []
    for key, val in sorted(res.items()):
        if isinstance(val, dict) and "values" in val:
            ns = val.get("grid", res.get(grid_key, []))
            for n, x in zip(ns, val["values"]):
                rows.append([key, n, x])
    for i, st in enumerate(res.get("stationarity", [])):
        for n, x in zip(res.get("stationarity_grid", res.get("grid")), st["values"]):
            rows.append([f"stationarity_{i}", n, x])
    return rows


def _ladder_ok(ladder: dict, order: float) -> bool:
    vals = ladder["values"]
    if abs(vals[-1]) <= 1e-12:
        return True
    return ladder["slope"] is not None and math.isfinite(ladder["slope"]) and ladder["slope"] >= order


def cmd_surface(cfg: RunConfig) -> tuple[dict, list, list]:
    fam = cfg.params["family"]
    tol = cfg.tolerances
    grid = tuple(cfg.grid)
    order = tol["order"]
    if fam == "clifford":
        res = studies.clifford_study(grid or (32, 64, 128), seed=cfg.seed)
        checks = {k: _ladder_ok(res[k], order)
                  for k in ("legendrian_residual", "conformality_residual", "isometry_defect")}
        checks["dirichlet_energy"] = res["dirichlet_energy"]["rel_error"] <= tol["energy_rel"]
        checks["stationarity"] = all(_ladder_ok(s, order) for s in res["stationarity"])
    elif fam == "sw_cone":
        p, q = cfg.params["p"], cfg.params["q"]
        kw = {"seed": cfg.seed}
        if grid:
            kw.update(ns=grid, stationarity_ns=tuple(2 * n for n in grid))
        res = studies.sw_cone_study(p, q, **kw)
        checks = {k: _ladder_ok(res[k], order) for k in ("conformality_residual", "phi_lift", "flat_pde_residual")}
        checks["maslov_winding"] = res["maslov_winding"]["passed"]
        checks["stationarity"] = all(_ladder_ok(s, order) for s in res["stationarity"])
    elif fam == "appendix":
        k = cfg.params["k"]
        res = studies.appendix_study(k, grid or (64, 128, 256))
        checks = {"metric_g11": _ladder_ok(res["metric"]["g11"], order),
                  "metric_g22": _ladder_ok(res["metric"]["g22"], order),
                  "metric_g12": res["metric"]["g12_max"] <= tol["metric_offdiag"],
                  "area": res["area"]["rel_error"] <= tol["area_rel"],
                  "pde_residual": _ladder_ok(res["pde_residual"], order),
                  "legendrian_residual": _ladder_ok(res["legendrian_residual"], order)}
    else:
        raise UsageError(f"unknown surface family {fam!r}")
    res["checks"] = {k: bool(v) for k, v in checks.items()}
    res["passed"] = all(checks.values())
    rows = _ladder_rows(res)
    return res, ["quantity", "n", "value"], rows


def cmd_density(cfg: RunConfig) -> tuple[dict, list, list]:
    tol = dict(cfg.tolerances)
    src = cfg.params.get("input")
    if src:
        v = DiscreteVarifold.from_csv(src)
        centre = np.zeros(5)
        target = None
        radii = None
        source = {"input": src}
    else:
        name = cfg.params["family"]
        if name not in studies.BUILTINS:
            raise UsageError(f"unknown built-in varifold {name!r}; known: {', '.join(studies.BUILTINS)}")
        v, centre, target, radii = studies.builtin_varifold(name)
        if "density_rel" not in cfg.params.get("tol_overrides", ()):
            tol["density_rel"] = BUILTIN_DENSITY_TOL.get(name, tol["density_rel"])
        source = {"family": name}
    if cfg.params.get("center") is not None:
        centre = np.asarray(cfg.params["center"], dtype=float)
    if cfg.radii:
        radii = np.asarray(cfg.radii, dtype=float)
    if radii is None:
        raise UsageError("--radii is required with --input")
    res = studies.density_study(v, centre, radii, target, cfg.params.get("cutoff", "bump"))
    res.update(source)
    checks = {"monotonicity": res["relative_violation"] <= tol["violation_rel"]}
    if target is not None:
        checks["density"] = res["rel_error"] <= tol["density_rel"]
    res["checks"] = checks
    res["passed"] = all(checks.values())
    cfg.tolerances = tol
    rows = [[a, t, lv, ok] for a, t, lv, ok in zip(res["radii"], res["theta_values"],
                                                    res["limit_values"], res["valid"])]
    return res, ["radius", "theta", "theta_limit_integrand", "valid"], rows


def cmd_counterexample(cfg: RunConfig) -> tuple[dict, list, list]:
    ks = tuple(cfg.params["k"])
    panel = cfg.params["panel"]
    if not panel:
        raise UsageError("the observable panel is empty")
    unknown = [p for p in panel if p not in OBSERVABLES]
    if unknown:
        raise UsageError(f"unknown observables {unknown}; known: {', '.join(OBSERVABLES)}")
    if any(k < 2 for k in ks):
        raise UsageError("every k must be >= 2")
    tol = cfg.tolerances
    res = studies.counterexample_study(ks, panel)
    lo = tol["slope_center"] - tol["slope_halfwidth"]
    hi = tol["slope_center"] + tol["slope_halfwidth"]
    checks = {f"slope_{n}": bool(lo <= f["slope"] <= hi) for n, f in res["fits"].items()
              if len(ks) >= 2}
    if "one" in panel:
        checks["mass_closed_form"] = all(abs(m["pairing"] - m["closed_form"]) <= tol["mass_rel"] * m["closed_form"]
                                         for m in res["mass"])
    res["checks"] = checks
    res["passed"] = all(checks.values())
    rows = [[r["k"], r["observable_id"], r["pairing"], r["limit"], r["abs_err"]] for r in res["rows"]]
    return res, ["k", "observable_id", "pairing", "limit", "abs_err"], rows


COMMANDS = {
    "identities": (cmd_identities, studies.DEFAULT_TOLERANCES),
    "surface": (cmd_surface, SURFACE_TOLERANCES),
    "density": (cmd_density, DENSITY_TOLERANCES),
    "counterexample": (cmd_counterexample, COUNTEREXAMPLE_TOLERANCES),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="legvar", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"legvar {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", default=None, help="a number, or key=value pairs separated by commas")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("identities", help="pointwise identity suite")
    common(p)
    p.add_argument("--n", type=int, default=1000, help="random configurations")

    p = sub.add_parser("surface", help="refinement study of a surface family")
    common(p)
    p.add_argument("--family", required=True, choices=("clifford", "sw_cone", "appendix"))
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--grid", default=None, help="increasing grid sizes, e.g. 32,64,128")

    p = sub.add_parser("density", help="monotonicity scan and density estimate")
    common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", choices=studies.BUILTINS)
    src.add_argument("--input", help="varifold CSV file")
    p.add_argument("--center", default=None, help="x1,y1,x2,y2,phi")
    p.add_argument("--radii", default=None, help="decreasing radii, e.g. 1.2,0.8,0.5")
    p.add_argument("--cutoff", choices=("bump", "poly"), default="bump")

    p = sub.add_parser("counterexample", help="pairings of the sphere family against its limit")
    common(p)
    p.add_argument("--k", default="2,4,8,16,32")
    p.add_argument("--panel", default=",".join(OBSERVABLES), help="observable names")
    return ap


def config_from_args(args) -> RunConfig:
    defaults = COMMANDS[args.command][1]
    params: dict = {}
    grid: list = []
    radii: list = []
    if args.command == "identities":
        if args.n < 1:
            raise UsageError("--n must be positive")
        params["n"] = args.n
    elif args.command == "surface":
        params["family"] = args.family
        if args.family == "sw_cone":
            if args.p < 1 or args.q < 1:
                raise UsageError("--p and --q must be positive integers")
            params.update(p=args.p, q=args.q)
        if args.family == "appendix":
            if args.k < 2:
                raise UsageError("--k must be >= 2")
            params["k"] = args.k
        if args.grid:
            grid = _ints(args.grid, "--grid")
            if len(grid) < 2 or min(grid) < 8:
                raise UsageError("--grid needs at least two sizes, each >= 8")
    elif args.command == "density":
        params.update(family=args.family, input=args.input, cutoff=args.cutoff)
        if args.center is not None:
            c = _floats(args.center, "--center")
            if len(c) != 5:
                raise UsageError("--center needs 5 coordinates")
            params["center"] = c
        if args.radii:
            radii = _floats(args.radii, "--radii")
    elif args.command == "counterexample":
        params["k"] = _ints(args.k, "--k")
        params["panel"] = [s.strip() for s in args.panel.split(",") if s.strip()]
    tols = _parse_tol(args.tol, defaults)
    if args.tol is not None and "=" in args.tol:
        params["tol_overrides"] = sorted(item.partition("=")[0].strip() for item in args.tol.split(","))
    elif args.tol is not None:
        params["tol_overrides"] = sorted(tols)
    return RunConfig(args.command, args.seed, grid, radii, tols, args.out, args.format, params)


def run(cfg: RunConfig) -> tuple[int, str, list]:
    fn = COMMANDS[cfg.command][0]
    res, header, rows = fn(cfg)
    report = {
        "command": cfg.command,
        "version": __version__,
        "config": asdict(cfg),
        "tolerances": cfg.tolerances,
        "backend": default_backend(),
        "result": res,
        "passed": bool(res["passed"]),
    }
    if cfg.format == "csv":
        text = _csv_text(header, rows)
    else:
        text = json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"
    checks = res.get("checks", [])
    if isinstance(checks, dict):
        failed = sorted(k for k, v in checks.items() if not v)
    else:
        failed = [c["name"] for c in checks if not c["passed"]]
    return (EXIT_OK if report["passed"] else EXIT_FAIL), text, failed


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    apply_thread_limit()
    try:
        cfg = config_from_args(args)
        status, text, failed = run(cfg)
    except (UsageError, ParseError, DomainError, OSError) as e:
        print(f"legvar: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DiagnosticError as e:
        print(f"legvar: diagnostic failed: {e}", file=sys.stderr)
        return EXIT_FAIL
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status != EXIT_OK:
        print(f"legvar: failed checks: {', '.join(failed)}", file=sys.stderr)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
