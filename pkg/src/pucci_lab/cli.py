"""Command line front end: ``pucci-lab {solve,measure,certify,dini,sweep}``.

Experiments are described by JSON configs; flags only pick the config and
override ``h``, ``W`` and ``tol``.  Outputs go to the config's ``output``
directory, resolved against ``$PUCCI_LAB_OUTPUT`` when relative.

Exit codes: 0 success/pass, 2 failed verdict, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import jsonschema

from . import kernels
from .certify import IterationParams, ak_sequence
from .dini import Modulus, dini_integral, rescale_to_small
from .errors import ConfigError, PucciLabError
from .geometry import DomainSpec, rasterize
from .harness import DataSpec, ProblemSpec, make_function, run_scenario, solve_spec
from .pucci import EllipticityPair
from .solver import DEFAULT_TOL, solve_dirichlet
from .stencil import build_stencil

OUTPUT_ENV = "PUCCI_LAB_OUTPUT"
SWEEP_AXES = ("h", "W", "omega_param", "a_notch")

_NUM = {"type": "number"}
MODULUS_SCHEMA = {
    "type": "object",
    "required": ["family"],
    "properties": {
        "family": {"enum": ["zero", "constant", "power", "log_inverse", "tabulated"]},
        "k": _NUM, "alpha": _NUM, "c": _NUM, "p": _NUM, "arg_scale": _NUM,
        "domain_radius": _NUM,
        "knots": {"type": "array", "items": {"type": "array", "items": _NUM,
                                             "minItems": 2, "maxItems": 2}},
        "knots_csv": {"type": "string"},
    },
    "additionalProperties": False,
}
DATA_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["zero", "constant", "linear", "product", "radial_power",
                          "half_plane_harmonic", "wall_outer", "notch_shelf"]},
        "value": _NUM, "scale": _NUM, "p": _NUM, "wall": _NUM, "outer": _NUM,
        "c": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
    },
    "additionalProperties": False,
}
CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "scenario": {"enum": ["lipschitz", "anti_lipschitz", "hopf", "anti_hopf",
                              "flat_c1alpha", "flat_hopf", "notch_hopf"]},
        "domain": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["half_ball", "graph", "notch", "wedge"]},
                "R": {"type": "number", "exclusiveMinimum": 0},
                "side": {"enum": ["exterior_minus", "interior_plus"]},
                "omega": MODULUS_SCHEMA,
                "a": _NUM, "k": _NUM,
            },
            "additionalProperties": False,
        },
        "operator": {
            "type": "object",
            "properties": {
                "tag": {"enum": ["pucci_plus", "pucci_minus", "laplace"]},
                "lambda": {"type": "number", "exclusiveMinimum": 0},
                "Lambda": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "data": {
            "type": "object",
            "properties": {"g": DATA_SCHEMA, "f": DATA_SCHEMA, "omega_g": MODULUS_SCHEMA,
                           "omega_f": MODULUS_SCHEMA},
            "additionalProperties": False,
        },
        "numerics": {
            "type": "object",
            "properties": {
                "h": {"type": "number", "exclusiveMinimum": 0},
                "W": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 1},
                "method": {"enum": ["howard", "jacobi"]},
            },
            "additionalProperties": False,
        },
        "probe": {
            "type": "object",
            "properties": {
                "l": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "K": {"type": "integer", "minimum": 3},
            },
            "additionalProperties": False,
        },
        "certify": {
            "type": "object",
            "required": ["omega"],
            "properties": {
                "omega": MODULUS_SCHEMA,
                "c0": _NUM, "eta": _NUM, "alpha0": _NUM,
                "K": {"type": "integer", "minimum": 1},
                "rescale": {"type": "boolean"},
                "constants": {"type": "object",
                              "properties": {"C_hat": _NUM, "C_bar": _NUM, "a_tilde": _NUM},
                              "additionalProperties": False},
            },
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "required": ["axis", "values"],
            "properties": {"axis": {"enum": list(SWEEP_AXES)},
                           "values": {"type": "array", "items": _NUM, "minItems": 1}},
            "additionalProperties": False,
        },
        "output": {"type": "string"},
    },
    "additionalProperties": False,
}


# --------------------------------------------------------------------------
# config handling
# --------------------------------------------------------------------------


def _pointer(path):
    return "/" + "/".join(str(p) for p in path)


def validate_config(cfg):
    """Raise ConfigError (with a JSON pointer) if ``cfg`` violates the schema."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    err = jsonschema.exceptions.best_match(validator.iter_errors(cfg))
    if err is not None:
        ptr = _pointer(err.absolute_path)
        raise ConfigError(err.message, ptr)


def load_config(path, overrides=None):
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})", "") from exc
    validate_config(cfg)
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg.setdefault("numerics", {})[key] = val
    validate_config(cfg)
    return cfg


def _require(cfg, *keys):
    for k in keys:
        if k not in cfg:
            raise ConfigError("required for this command", f"/{k}")


def _problem(cfg, base_dir):
    _require(cfg, "scenario", "domain")
    try:
        return ProblemSpec.from_dict(cfg, base_dir)
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc), "/") from exc


def output_dir(cfg, cli_out=None):
    out = Path(cli_out or cfg.get("output", "."))
    if not out.is_absolute():
        out = Path(os.environ.get(OUTPUT_ENV, ".")) / out
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _solve_plain(cfg, base_dir, workers):
    """Solve a config without a scenario block."""
    _require(cfg, "domain")
    op = cfg.get("operator", {})
    num = cfg.get("numerics", {})
    data = cfg.get("data", {})
    try:
        domain = DomainSpec.from_dict(cfg["domain"], base_dir)
        ell = EllipticityPair(float(op.get("lambda", 1.0)), float(op.get("Lambda", 1.0)))
        g = DataSpec.from_dict(data.get("g", {"kind": "zero"}))
        f = DataSpec.from_dict(data.get("f", {"kind": "zero"}))
        mask = rasterize(domain, float(num.get("h", 1.0 / 64)), build_stencil(int(num.get("W", 3))))
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc), "/") from exc
    f_fn = make_function(f, domain)
    field = solve_dirichlet(
        mask, op.get("tag", "laplace"), ell,
        f=None if f.kind == "zero" else (lambda x1, x2: f_fn(x1, x2)),
        g=make_function(g, domain), tol=float(num.get("tol", DEFAULT_TOL)),
        max_iter=num.get("max_iter"), method=num.get("method", "howard"), workers=workers,
        f_handle=f.to_dict(), g_handle=g.to_dict(),
    )
    echo = {k: cfg[k] for k in ("domain", "operator", "data", "numerics") if k in cfg}
    return field, echo


def cmd_solve(cfg, base_dir, out, workers=None):
    if "scenario" in cfg:
        spec = _problem(cfg, base_dir)
        field = solve_spec(spec, workers)
        echo = spec.to_dict()
    else:
        field, echo = _solve_plain(cfg, base_dir, workers)
    field.write_csv(out / "field.csv")
    meta = field.metadata()
    meta["config"] = echo
    _dump_json(meta, out / "metadata.json")
    print(f"solve: {field.iterations} iterations, residual {field.residual_inf:.3e}")
    return 0


def cmd_measure(cfg, base_dir, out, workers=None):
    spec = _problem(cfg, base_dir)
    field, report = run_scenario(spec, workers=workers)
    report.write_csv(out / "growth.csv")
    _dump_json({"config": spec.to_dict(), "report": report.to_dict()}, out / "report.json")
    for name, ok in report.verdicts.items():
        print(f"{spec.scenario} {name}: {'PASS' if ok else 'FAIL'}")
    return 0 if report.passed else 2


def _certify_parts(cfg, base_dir):
    c = cfg["certify"]
    omega = Modulus.from_dict(c["omega"], base_dir)
    c0 = float(c.get("c0", 0.25))
    r1 = 1.0
    if c.get("rescale", True) and omega.family != "zero":
        r1, omega = rescale_to_small(omega, c0)
    p = IterationParams(c0, float(c.get("eta", 1.0 / 16)), float(c.get("alpha0", 0.25)),
                        int(c.get("K", 200)))
    return omega, r1, p, c.get("constants", {})


def cmd_certify(cfg, base_dir, out):
    _require(cfg, "certify")
    try:
        omega, r1, p, consts = _certify_parts(cfg, base_dir)
    except ValueError as exc:
        raise ConfigError(str(exc), "/certify") from exc
    rep = ak_sequence(omega, p, **consts)
    rep.write_csv(out / "certify.csv")
    d = rep.to_dict()
    d["r1"] = r1
    _dump_json(d, out / "certify.json")
    print(f"sum A_k = {rep.partial_sum:.17g} (3 c0 = {3 * p.c0:g}): "
          f"{'PASS' if rep.bound_3c0_ok else 'FAIL'}")
    for name, cond in rep.conditions.items():
        print(f"condition {name}: {'holds' if cond.holds else 'fails'} (slack {cond.slack:.6g})")
    return 0 if rep.bound_3c0_ok else 2


def cmd_dini(modulus, r0):
    v = dini_integral(modulus, r0)
    d = v.to_dict()
    print(f"is_dini={str(v.is_dini).lower()} integral={d['integral_value']} "
          f"witness={d['lower_bound_witness']} method={v.method}")
    return 0


def _sweep_spec(spec, axis, value):
    if axis == "h":
        return replace(spec, h=float(value))
    if axis == "W":
        return replace(spec, W=int(value))
    if axis == "a_notch":
        return replace(spec, domain=replace(spec.domain, a=float(value)))
    om = spec.domain.omega
    field = {"power": "alpha", "log_inverse": "p", "constant": "k"}.get(om.family)
    if field is None:
        raise ConfigError(f"omega family {om.family} has no sweepable parameter", "/domain/omega")
    return replace(spec, domain=replace(spec.domain, omega=replace(om, **{field: float(value)})))


def _sweep_one(args):
    spec, axis, value = args
    _, rep = run_scenario(spec)
    return axis, value, rep


def cmd_sweep(cfg, base_dir, out, jobs=1):
    _require(cfg, "sweep")
    spec = _problem(cfg, base_dir)
    axis, values = cfg["sweep"]["axis"], cfg["sweep"]["values"]
    try:
        tasks = [(_sweep_spec(spec, axis, v), axis, v) for v in values]
    except ValueError as exc:
        raise ConfigError(str(exc), "/sweep") from exc
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    all_pass = True
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["axis", "value", "k", "r", "Q", "q", "omega_tilde_predicted", "verdict"])
        for ax, val, rep in results:
            all_pass &= rep.passed
            for n in range(len(rep.k)):
                w.writerow([ax, repr(float(val)), int(rep.k[n]), f"{rep.radii[n]:.17g}",
                            f"{rep.Q[n]:.17g}", f"{rep.q[n]:.17g}", f"{rep.omega_tilde[n]:.17g}",
                            "pass" if rep.row_verdict[n] else "fail"])
            print(f"{axis}={val}: {'PASS' if rep.passed else 'FAIL'} {rep.verdicts}")
    return 0 if all_pass else 2


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="pucci-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("solve", "measure", "certify", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("config", help="experiment config (JSON)")
        p.add_argument("--out", help="output directory (overrides the config)")
        if name != "certify":
            p.add_argument("--h", type=float)
            p.add_argument("--W", type=int)
            p.add_argument("--tol", type=float)
            p.add_argument("--workers", type=int, help="numba threads")
        if name == "sweep":
            p.add_argument("--jobs", type=int, default=1, help="parallel scenario runs")
    p = sub.add_parser("dini")
    p.add_argument("modulus", help="modulus JSON: inline object or path to a file")
    p.add_argument("--r0", type=float, default=1.0)
    return ap


def _parse_modulus(text):
    path = Path(text)
    base = None
    if not text.lstrip().startswith("{") and path.exists():
        base = path.parent
        text = path.read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid modulus JSON ({exc})", "") from exc
    err = jsonschema.exceptions.best_match(
        jsonschema.Draft202012Validator(MODULUS_SCHEMA).iter_errors(d))
    if err is not None:
        ptr = _pointer(err.absolute_path)
        raise ConfigError(err.message, ptr)
    return Modulus.from_dict(d, base)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "dini":
            return cmd_dini(_parse_modulus(args.modulus), args.r0)
        overrides = {}
        if args.command != "certify":
            overrides = {"h": args.h, "W": args.W, "tol": args.tol}
        cfg = load_config(args.config, overrides)
        base_dir = Path(args.config).parent
        out = output_dir(cfg, args.out)
        workers = getattr(args, "workers", None)
        if workers:
            kernels.set_workers(workers)
        if args.command == "solve":
            return cmd_solve(cfg, base_dir, out, workers)
        if args.command == "measure":
            return cmd_measure(cfg, base_dir, out, workers)
        if args.command == "certify":
            return cmd_certify(cfg, base_dir, out)
        return cmd_sweep(cfg, base_dir, out, args.jobs)
    except ConfigError as exc:
        print(f"config error at {exc.pointer or '/'}: {exc}", file=sys.stderr)
        return 1
    except (PucciLabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
