"""Command-line frontend.

    pendulum-eigen solve --potential sech_well --param lam=0.8 --out run/
    pendulum-eigen winding-scan --potential eq10_example --points 200
    pendulum-eigen construct --curve sech --param lam=0.5
    pendulum-eigen verify

Every command writes a JSON report (floats with 17 significant digits) and,
where it makes sense, CSV tables with a header row.
"""

import argparse
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import constructor, oracle, zs
from .errors import (ConsistencyError, IntegrationError, NotOnBoundStateBranchError,
                     ParameterError, PendulumEigenError, SingularConstructionError)
from .forcefields import BoundaryClass, Partner, catalog
from .spectrum import (SolverConfig, count_bound_states, default_grid, find_eigenvalues,
                       isospectral_check, reconstruct_eigenfunction, schrodinger_residual,
                       unit_jumps, winding_scan)

log = logging.getLogger("pendulum_eigen")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SUSPECT = 2
EXIT_SINGULAR = 3
EXIT_VERIFY = 4

COMMANDS = ("solve", "winding-scan", "count", "construct", "zs-check", "oracle", "verify")

DEFAULTS = {
    "potential": None,
    "params": {},
    "curve": None,
    "L": None,
    "tol": 1e-10,
    "tol_lambda": 1e-10,
    "lambda_min": 0.0,
    "lambda_max": None,
    "points": 200,
    "M": 4000,
    "k": 5,
    "threads": 1,
    "seed": 0,
    "pairs": 200,
    "out": ".",
    "catalog": None,
}

# force functions exercised by `verify` when no selection is given
VERIFY_CATALOG = [
    {"potential": "sech_well", "params": {"lam": 0.8}},
    {"potential": "eq10_example", "params": {}},
    {"potential": "eq14_generated", "params": {}},
    {"potential": "linear_harmonic", "params": {}, "lambda_max": 3.1},
    {"potential": "constant", "params": {}},
]


class ConfigError(ParameterError):
    pass


# -- serialization ---------------------------------------------------------

def _encode(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{_encode(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return "%.17g" % v if math.isfinite(v) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def dumps(obj):
    """Deterministic JSON with '%.17g' floats."""
    return _encode(obj) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def write_csv(path, header, columns):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join("%.17g" % float(v) for v in row) + "\n")


# -- configuration -----------------------------------------------------------

def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_params(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--param expects k=v, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def load_config(args):
    cfg = dict(DEFAULTS)
    cfg["params"] = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - set(DEFAULTS) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        cfg.update(data)
    for key in ("potential", "curve", "L", "tol", "tol_lambda", "lambda_min",
                "lambda_max", "points", "M", "k", "threads", "seed", "pairs", "out"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    cfg["params"] = {**cfg["params"], **parse_params(args.param)}
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    if cfg["L"] is not None and not cfg["L"] > 0:
        raise ConfigError("L must be positive")
    for key in ("tol", "tol_lambda"):
        if not cfg[key] > 0:
            raise ConfigError(f"{key} must be positive")
    if cfg["lambda_max"] is not None and not cfg["lambda_max"] > cfg["lambda_min"]:
        raise ConfigError("lambda_max must exceed lambda_min")
    if cfg["lambda_min"] < 0:
        raise ConfigError("lambda_min must be >= 0")
    for key in ("points", "M", "k", "threads", "pairs"):
        if int(cfg[key]) < 1:
            raise ConfigError(f"{key} must be >= 1")
    lam = cfg["params"].get("lam")
    sech = cfg.get("potential") == "sech_well" or cfg.get("curve") == "sech"
    if sech and lam is not None and not (isinstance(lam, (int, float)) and 0 < lam < 1):
        raise ConfigError("parameter lam must lie in (0, 1)")


def solver_config(cfg):
    return SolverConfig(L=cfg["L"], tol=cfg["tol"], tol_lambda=cfg["tol_lambda"],
                        threads=int(cfg["threads"]))


def build_force(cfg):
    if cfg["potential"] is None:
        raise ConfigError("no potential given (--potential or config 'potential')")
    return catalog(cfg["potential"], **cfg["params"])


def lambda_range(force, cfg):
    if cfg["lambda_max"] is None:
        if force.boundary_class is BoundaryClass.DIVERGENT:
            raise ConfigError(f"{force.name} needs --lambda-max")
        return (cfg["lambda_min"], 1.0)
    return (cfg["lambda_min"], cfg["lambda_max"])


def _out(cfg, name):
    os.makedirs(cfg["out"], exist_ok=True)
    return os.path.join(cfg["out"], name)


def _header(cfg, force, command):
    return {"command": command, "force": force.name,
            "params": {k: v for k, v in sorted(force.params.items())},
            "boundary_class": force.boundary_class.value if force.boundary_class else None,
            "tol": cfg["tol"], "tol_lambda": cfg["tol_lambda"],
            "L": SolverConfig(L=cfg["L"]).domain(force)}


# -- commands --------------------------------------------------------------

def _spectrum_report(force, cfg, write_files=True):
    conf = solver_config(cfg)
    rng = lambda_range(force, cfg)
    spec = find_eigenvalues(force, rng, conf)
    jumps = unit_jumps(force, spec, conf)
    V = force.potential(Partner.MINUS)
    levels = []
    for lv, jump in zip(spec, jumps):
        ep = reconstruct_eigenfunction(force, lv.lam, lv.n, None, conf, check_nodes=False)
        res = schrodinger_residual(ep.x, ep.psi, V, lv.E)
        levels.append({"n": lv.n, "lambda": lv.lam, "E": lv.E,
                       "bracket": [lv.lo, lv.hi], "jump": jump, "nodes": ep.nodes,
                       "residual": res / float(np.max(np.abs(ep.psi)))})
        if write_files:
            write_csv(_out(cfg, f"eigenfunction_{lv.n}.csv"),
                      ["x", "psi", "alpha", "log_rho"],
                      [ep.x, ep.psi, ep.alpha, ep.log_rho])
    report = _header(cfg, force, "solve")
    report.update({"lambda_range": list(rng), "levels": levels,
                   "suspects": [{"lo": s.lo, "hi": s.hi, "reason": s.reason}
                                for s in spec.suspects]})
    return report


def cmd_solve(cfg):
    force = build_force(cfg)
    report = _spectrum_report(force, cfg)
    write_json(_out(cfg, "spectrum.json"), report)
    for lv in report["levels"]:
        print(f"n={lv['n']}  lambda={lv['lambda']:.12g}  E={lv['E']:.12g}")
    if not report["levels"]:
        print("no bound states")
    if report["suspects"]:
        log.warning("%d suspect interval(s)", len(report["suspects"]))
        return EXIT_SUSPECT
    return EXIT_OK


def cmd_winding_scan(cfg):
    force = build_force(cfg)
    lo, hi = lambda_range(force, cfg)
    n = int(cfg["points"])
    # open interval: the endpoints are where the count is ambiguous
    lams = np.linspace(lo, hi, n + 2)[1:-1]
    W, counts = winding_scan(force, lams, solver_config(cfg))
    write_csv(_out(cfg, "winding_scan.csv"), ["lambda", "W", "count"], [lams, W, counts])
    steps = [float(lams[i + 1]) for i in np.nonzero(np.diff(counts))[0]]
    report = _header(cfg, force, "winding-scan")
    report.update({"points": n, "lambda_range": [lo, hi], "steps_after": steps,
                   "max_count": int(np.max(counts))})
    write_json(_out(cfg, "winding_scan.json"), report)
    print(f"{n} points, count rises {int(counts[-1] - counts[0])} time(s)")
    return EXIT_OK


def cmd_count(cfg):
    force = build_force(cfg)
    L = SolverConfig(L=cfg["L"]).domain(force)
    n = count_bound_states(force, L, cfg["tol"])
    report = _header(cfg, force, "count")
    report["bound_states"] = n
    write_json(_out(cfg, "count.json"), report)
    print(n)
    return EXIT_OK


def cmd_construct(cfg):
    if cfg["curve"] is None:
        raise ConfigError("construct needs --curve")
    c = constructor.curve(cfg["curve"], **cfg["params"])
    force = constructor.force_from_curve(c)
    conf = solver_config(cfg)
    x = default_grid(force, conf)
    Vm, Vp = force.potential(Partner.MINUS), force.potential(Partner.PLUS)
    write_csv(_out(cfg, "constructed.csv"), ["x", "A", "V", "V_partner"],
              [x, force.value(x), Vm(x), Vp(x)])
    report = _header(cfg, force, "construct")
    report["curve"] = {"name": c.name, "lambda": c.lam, "start": c.start, "end": c.end}
    target = c.lam ** 2
    if force.boundary_class is BoundaryClass.WELL_SHAPED:
        spec = find_eigenvalues(force, (0.0, 1.0), conf)
        L = conf.domain(force)
        edge = float(min(Vm(-L), Vm(L)))
        orc = oracle.lowest_eigenvalues(Vm, L, int(cfg["M"]), max(1, len(spec) + 1),
                                        edge=edge, vectors=False)
        energies = [float(e) for e in spec.energies]
        ref = [float(e) for e in orc.extrapolated]
        n_ok = len(energies) == len(ref)
        diff = [abs(a - b) for a, b in zip(energies, ref)]
        ver = {"energies": energies, "oracle": ref, "oracle_uncertainty": orc.uncertainty,
               "oracle_differences": diff}
        if c.lam < 1:
            # the curve itself is the critical solution at E = lam^2
            hit = min((abs(e - target) for e in energies), default=math.inf)
            ver.update({"target_E": target, "target_error": hit})
            ok = hit < 1e-6
        else:
            # a curve on the continuum edge fixes the number of levels below it
            expected = int(round((c.end - c.start) / (2 * math.pi)))
            counted = count_bound_states(force, L, cfg["tol"])
            ver.update({"expected_bound_states": expected, "bound_states": counted})
            ok = counted == expected == len(energies)
        ver["passed"] = bool(n_ok and ok and all(d < 1e-4 for d in diff))
        report["verification"] = ver
    else:
        report["verification"] = {"passed": None,
                                  "note": "constructed force is not well-shaped; "
                                          "round-trip skipped"}
    write_json(_out(cfg, "construct.json"), report)
    ver = report["verification"]
    print(f"{force.name}: lambda {c.lam:.12g}, verification "
          f"{'passed' if ver['passed'] else 'skipped' if ver['passed'] is None else 'FAILED'}")
    return EXIT_OK if ver["passed"] is not False else EXIT_VERIFY


ZS_ALPHA_TOL = 1e-6
ZS_RESIDUAL_TOL = 1e-5


def _zs_report(force, cfg):
    conf = solver_config(cfg)
    rep = zs.zs_check(force, conf, lambda_range(force, cfg))
    ok = all(lv["alpha_deviation"] < ZS_ALPHA_TOL
             and lv["residual_minus"] < ZS_RESIDUAL_TOL
             and lv["residual_plus"] < ZS_RESIDUAL_TOL for lv in rep["levels"])
    rep["passed"] = ok
    return rep


def cmd_zs_check(cfg):
    force = build_force(cfg)
    report = _header(cfg, force, "zs-check")
    report.update(_zs_report(force, cfg))
    write_json(_out(cfg, "zs_check.json"), report)
    print(f"ZS cross-check {'passed' if report['passed'] else 'FAILED'} "
          f"on {len(report['levels'])} level(s)")
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def cmd_oracle(cfg):
    force = build_force(cfg)
    V = force.potential(Partner.MINUS)
    L = SolverConfig(L=cfg["L"]).domain(force)
    edge = None
    if force.boundary_class is BoundaryClass.WELL_SHAPED:
        edge = float(min(V(-L), V(L)))
    spec = oracle.lowest_eigenvalues(V, L, int(cfg["M"]), int(cfg["k"]), edge=edge)
    report = _header(cfg, force, "oracle")
    report.update(spec.to_report())
    write_json(_out(cfg, "oracle.json"), report)
    for lv in report["levels"]:
        print(f"n={lv['n']}  E={lv['E_extrapolated']:.12g}  +/- {lv['uncertainty']:.2g}")
    return EXIT_OK


# -- verify ----------------------------------------------------------------

def _monotonicity(force, cfg, rng_lams):
    """Random pairs must not decrease the count; steps between sorted
    samples and across every level bracket must be 0 or 1 and 1."""
    conf = solver_config(cfg)
    lo, hi = rng_lams
    rng = np.random.default_rng(int(cfg["seed"]))
    pairs = int(cfg["pairs"])
    a = rng.uniform(lo, hi, pairs)
    b = rng.uniform(lo, hi, pairs)
    lams = np.concatenate([np.minimum(a, b), np.maximum(a, b)])
    _, counts = winding_scan(force, lams, conf)
    c_lo, c_hi = counts[:pairs], counts[pairs:]
    violations = int(np.count_nonzero(c_hi < c_lo))
    order = np.argsort(lams)
    steps = np.diff(counts[order])
    multi = int(np.count_nonzero((steps < 0) | (steps > 1)))
    spec = find_eigenvalues(force, rng_lams, conf)
    jumps = [lv.winding_above - lv.winding_below for lv in spec]
    ok = violations == 0 and multi == 0 and all(j == 1 for j in jumps) and not spec.suspects
    return {"pairs": pairs, "violations": violations, "non_unit_sample_steps": multi,
            "jumps": jumps, "suspects": len(spec.suspects), "passed": bool(ok)}


def _residuals(force, cfg, rng_lams):
    conf = solver_config(cfg)
    spec = find_eigenvalues(force, rng_lams, conf)
    V = force.potential(Partner.MINUS)
    out = []
    ok = True
    for lv in spec:
        ep = reconstruct_eigenfunction(force, lv.lam, lv.n, None, conf, check_nodes=False)
        r = schrodinger_residual(ep.x, ep.psi, V, lv.E) / float(np.max(np.abs(ep.psi)))
        passed = r < 1e-4 and ep.nodes == lv.n
        ok &= passed
        out.append({"n": lv.n, "relative_residual": r, "nodes": ep.nodes, "passed": passed})
    return {"levels": out, "passed": bool(ok)}


def _oracle_diff(force, cfg, rng_lams):
    conf = solver_config(cfg)
    spec = find_eigenvalues(force, rng_lams, conf)
    V = force.potential(Partner.MINUS)
    L = conf.domain(force)
    edge = float(min(V(-L), V(L))) if force.boundary_class is BoundaryClass.WELL_SHAPED else None
    k = max(1, len(spec))
    orc = oracle.lowest_eigenvalues(V, L, int(cfg["M"]), k + (edge is not None),
                                    edge=edge, vectors=False)
    ref = list(orc.extrapolated[:len(spec)]) if edge is None else list(orc.extrapolated)
    diffs = [abs(a - b) for a, b in zip(spec.energies, ref)]
    bound = [max(1e-4, 10 * u) for u in orc.uncertainty]
    ok = len(ref) == len(spec) and all(d < b for d, b in zip(diffs, bound))
    return {"energies": list(spec.energies), "oracle": ref, "differences": diffs,
            "passed": bool(ok)}


def _isospectral(force, cfg):
    rep = isospectral_check(force, SolverConfig(L=cfg["L"]).domain(force), k=5)
    ok = rep.same_count and bool(np.all(rep.differences < 1e-5))
    out = rep.to_report()
    out["passed"] = ok
    return out


def cmd_verify(cfg):
    selection = cfg["catalog"]
    if selection is None:
        selection = VERIFY_CATALOG if cfg["potential"] is None else [
            {"potential": cfg["potential"], "params": cfg["params"],
             "lambda_max": cfg["lambda_max"]}]
    report = {"command": "verify", "tol": cfg["tol"], "seed": cfg["seed"],
              "entries": [], "warnings": []}
    if not selection:
        msg = "empty catalog selection; nothing to verify"
        log.warning(msg)
        report["warnings"].append(msg)
    all_ok = True
    for entry in selection:
        sub = {**cfg, "params": {}, "lambda_max": None, **entry}
        validate_config(sub)
        force = build_force(sub)
        rng = lambda_range(force, sub)
        suites = {}
        t0 = time.perf_counter()
        for name, run in (("monotonicity", lambda: _monotonicity(force, sub, rng)),
                          ("residual", lambda: _residuals(force, sub, rng)),
                          ("oracle_diff", lambda: _oracle_diff(force, sub, rng)),
                          ("isospectral", lambda: _isospectral(force, sub)),
                          ("zs", lambda: _zs_report(force, sub))):
            if name in ("isospectral", "zs") and \
                    force.boundary_class is not BoundaryClass.WELL_SHAPED:
                continue
            try:
                suites[name] = run()
            except (ConsistencyError, NotOnBoundStateBranchError, IntegrationError) as exc:
                suites[name] = {"passed": False, "error": str(exc)}
        ok = all(s["passed"] for s in suites.values())
        all_ok &= ok
        report["entries"].append({"force": force.name, "params": force.params,
                                  "suites": suites, "passed": ok})
        flags = " ".join(f"{k}={'ok' if v['passed'] else 'FAIL'}" for k, v in suites.items())
        print(f"{force.name}: {flags}  ({time.perf_counter() - t0:.1f}s)")
    report["passed"] = bool(all_ok)
    write_json(_out(cfg, "verify.json"), report)
    print("verify", "passed" if all_ok else "FAILED")
    return EXIT_OK if all_ok else EXIT_VERIFY


HANDLERS = {
    "solve": cmd_solve,
    "winding-scan": cmd_winding_scan,
    "count": cmd_count,
    "construct": cmd_construct,
    "zs-check": cmd_zs_check,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
}


def build_parser():
    p = argparse.ArgumentParser(prog="pendulum-eigen",
                                description="Bound states via the pendulum equation.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--potential", help="catalog id of the force function")
    p.add_argument("--curve", help="critical-curve id for construct")
    p.add_argument("--param", action="append", metavar="K=V",
                   help="force/curve parameter, repeatable")
    p.add_argument("--L", type=float, help="half-width of the domain")
    p.add_argument("--tol", type=float, help="integrator tolerance")
    p.add_argument("--tol-lambda", dest="tol_lambda", type=float,
                   help="eigenvalue bracket width")
    p.add_argument("--lambda-min", dest="lambda_min", type=float)
    p.add_argument("--lambda-max", dest="lambda_max", type=float)
    p.add_argument("--points", type=int, help="winding-scan grid size")
    p.add_argument("--M", type=int, help="oracle interior points")
    p.add_argument("--k", type=int, help="oracle levels")
    p.add_argument("--pairs", type=int, help="random pairs for the monotonicity suite")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args)
        return HANDLERS[args.command](cfg)
    except SingularConstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PendulumEigenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
