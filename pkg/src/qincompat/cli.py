"""Command-line front end: single-point reports, noise sweeps and probe designs.

Model configurations are UTF-8 JSON. Complex numbers are ``[re, im]`` pairs
(plain numbers are read as real), matrices are lists of rows::

    {
      "dimension": 2,
      "parameters": 2,
      "generators": [[[[0, 0], [0, -1]], [[0, 1], [0, 0]]],
                     [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]],
      "probe": {"pure": [[1, 0], [0, 0]]},
      "theta": [0, 0],
      "noise": {"kind": "global-depolarizing", "lambda": 0.5}
    }

``noise.site_dims`` lists the qubit sites for local noise, and an optional
``lift_sites`` lifts single-site generators to ``U^{x n}`` on that many copies.

Exit codes: 0 success, 1 input error, 2 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import designs, estimation, holevo, numerics
from .errors import (DegenerateModel, InvalidInput, ModelNotDifferentiable, NoConstructionNeeded,
                     QIncompatError, SingularFisher, SingularMatrix)
from .model import (NOISE_KINDS, GeneratorSet, NoiseSpec, StatisticalModel, depolarizing_range,
                    encode, lift_local_generators, pure_state)

log = logging.getLogger("qincompat")

SWEEP_COLUMNS = ("lambda", "I", "Istar", "r", "C_S", "C_H", "C_Z", "purity")
QUANTITIES = SWEEP_COLUMNS[1:]
REPORT_COLUMNS = ("I", "Istar", "r", "C_S", "C_H", "C_Z", "purity", "separable_bound",
                  "separable_exact", "status")
ENDPOINT_SHRINK = 1e-6

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2
INPUT_ERRORS = (InvalidInput, SingularFisher, ModelNotDifferentiable, DegenerateModel,
                SingularMatrix)


class ConfigError(InvalidInput):
    pass


def fmt(x) -> str:
    """12 significant digits; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    x = float(x)
    return "" if np.isnan(x) else "%.12g" % x


# ---------------------------------------------------------------- config parsing

def _complex(value, where):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number or [re, im] pair")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def _vector(value, where):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}: expected a nonempty list")
    return np.array([_complex(v, f"{where}[{i}]") for i, v in enumerate(value)])


def _matrix(value, where):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}: expected a nonempty list of rows")
    rows = [_vector(r, f"{where}[{i}]") for i, r in enumerate(value)]
    if len({len(r) for r in rows}) != 1:
        raise ConfigError(f"{where}: rows have different lengths")
    return np.array(rows)


def _real_list(value, where):
    if not isinstance(value, list) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
        raise ConfigError(f"{where}: expected a list of real numbers")
    return np.array(value, dtype=float)


def parse_json(text: str, source: str = "<config>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise ConfigError(f"{source}: invalid JSON at byte {offset} "
                          f"(line {exc.lineno}, column {exc.colno}): {exc.msg}") from None


def read_json(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path}: not UTF-8 at byte {exc.start}") from None
    return parse_json(text, path)


def model_from_config(cfg) -> StatisticalModel:
    """Build a :class:`StatisticalModel`, naming the offending field on failure."""
    if not isinstance(cfg, dict):
        raise ConfigError("config: expected a JSON object")
    known = {"dimension", "parameters", "generators", "probe", "theta", "noise", "lift_sites"}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")
    for key in ("generators", "probe"):
        if key not in cfg:
            raise ConfigError(f"config: missing field {key!r}")
    gens = cfg["generators"]
    if not isinstance(gens, list) or not gens:
        raise ConfigError("generators: expected a nonempty list of matrices")
    mats = tuple(_matrix(m, f"generators[{j}]") for j, m in enumerate(gens))
    try:
        g = GeneratorSet(mats)
    except InvalidInput as exc:
        raise ConfigError(f"generators: {exc}") from None
    sites = cfg.get("lift_sites")
    if sites is not None:
        if isinstance(sites, bool) or not isinstance(sites, int) or sites < 1:
            raise ConfigError("lift_sites: expected a positive integer")
        g = lift_local_generators(g, sites)
    if "parameters" in cfg and cfg["parameters"] != g.d:
        raise ConfigError(f"parameters: {cfg['parameters']} given but {g.d} generators listed")
    if "dimension" in cfg and cfg["dimension"] != g.dim:
        raise ConfigError(f"dimension: {cfg['dimension']} given but generators act on {g.dim}")

    probe = cfg["probe"]
    if not isinstance(probe, dict) or len(probe) != 1 or next(iter(probe)) not in ("pure", "mixed"):
        raise ConfigError('probe: expected {"pure": vector} or {"mixed": matrix}')
    try:
        if "pure" in probe:
            rho = pure_state(_vector(probe["pure"], "probe.pure"))
        else:
            rho = _matrix(probe["mixed"], "probe.mixed")
    except ConfigError:
        raise
    except InvalidInput as exc:
        raise ConfigError(f"probe: {exc}") from None

    theta = _real_list(cfg["theta"], "theta") if "theta" in cfg else None
    noise_cfg = cfg.get("noise", {"kind": "none"})
    if not isinstance(noise_cfg, dict):
        raise ConfigError("noise: expected an object")
    extra = set(noise_cfg) - {"kind", "lambda", "site_dims"}
    if extra:
        raise ConfigError(f"noise: unknown field(s) {sorted(extra)}")
    kind = noise_cfg.get("kind", "none")
    if kind not in NOISE_KINDS:
        raise ConfigError(f"noise.kind: expected one of {NOISE_KINDS}, got {kind!r}")
    lam = noise_cfg.get("lambda", 1.0)
    if isinstance(lam, bool) or not isinstance(lam, (int, float)):
        raise ConfigError("noise.lambda: expected a real number")
    site_dims = noise_cfg.get("site_dims")
    if site_dims is None and kind == "local-depolarizing":
        n = int(round(np.log2(g.dim)))
        if 2 ** n != g.dim:
            raise ConfigError("noise.site_dims: required unless the dimension is a power of 2")
        site_dims = [2] * n
    site_dims = [] if site_dims is None else [int(k) for k in _real_list(site_dims, "noise.site_dims")]
    try:
        noise = NoiseSpec(kind, lam, tuple(site_dims))
        noise.check_dim(g.dim)
    except InvalidInput as exc:
        raise ConfigError(f"noise.lambda: {exc}" if "lambda" in str(exc) else f"noise: {exc}") from None
    try:
        return StatisticalModel(rho, g, noise, theta)
    except InvalidInput as exc:
        raise ConfigError(f"config: {exc}") from None


def _pairs(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in M]
    return [_pairs(row) for row in M]


def model_to_config(model: StatisticalModel, pure_vector=None) -> dict:
    noise = {"kind": model.noise.kind, "lambda": model.noise.lam}
    if model.noise.site_dims:
        noise["site_dims"] = list(model.noise.site_dims)
    probe = {"pure": _pairs(pure_vector)} if pure_vector is not None else {"mixed": _pairs(model.probe)}
    return {
        "dimension": model.dim,
        "parameters": model.d,
        "generators": [_pairs(H) for H in model.generators],
        "probe": probe,
        "theta": [float(t) for t in model.theta],
        "noise": noise,
    }


# ---------------------------------------------------------------- commands

def _tolerances(args):
    return {"gap_tol": getattr(args, "gap_tol", None), "feas_tol": getattr(args, "feas_tol", None)}


def _write_csv(rows, header, out):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_report(args) -> int:
    model = model_from_config(read_json(args.model))
    rep = holevo.r_figure(encode(model), **_tolerances(args))
    values = {
        "I": rep.incompat, "Istar": rep.istar, "r": rep.r, "C_S": rep.c_s_identity,
        "C_H": rep.c_h_identity, "C_Z": rep.c_z_identity, "purity": rep.purity,
        "separable_bound": rep.separable_bound, "separable_exact": rep.separable_exact,
        "status": rep.status,
    }
    if args.out:
        _write_csv([[fmt(values[k]) for k in REPORT_COLUMNS]], REPORT_COLUMNS, args.out)
    width = max(map(len, REPORT_COLUMNS))
    for k in REPORT_COLUMNS:
        print(f"{k:<{width}}  {fmt(values[k])}")
    if not rep.optimal:
        print(f"solver failure: {rep.message}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _sweep_point(task):
    model, lam, quantities, tol = task
    row = {"lambda": lam}
    m = model.with_noise(NoiseSpec(model.noise.kind, lam, model.noise.site_dims))
    enc = encode(m)
    if "purity" in quantities:
        row["purity"] = float(np.real(np.trace(enc.rho @ enc.rho)))
    if lam == 0:
        return row, "undefined"
    try:
        bundle = estimation.info_bundle(enc)
        eye = np.eye(enc.d)
        if "Istar" in quantities:
            row["Istar"] = estimation.istar(bundle)
        if "C_S" in quantities:
            row["C_S"] = estimation.c_s(eye, bundle.F)
        if "C_Z" in quantities:
            row["C_Z"] = estimation.c_z(eye, bundle)
        status = "Optimal"
        if {"I", "r", "C_H"} & set(quantities):
            need_r = bool({"I", "r"} & set(quantities))
            if need_r:
                rep = holevo.r_figure(enc, include_identity_bound="C_H" in quantities, **tol)
                status = rep.status
                row["r"], row["I"], row["C_H"] = rep.r, rep.incompat, rep.c_h_identity
            else:
                try:
                    row["C_H"], _ = holevo.holevo_bound(eye, enc, **tol)
                except QIncompatError as exc:
                    status = str(getattr(exc, "status", type(exc).__name__))
        for k in ("I", "r", "C_H"):
            if k not in quantities:
                row.pop(k, None)
        return row, status
    except QIncompatError as exc:
        return row, type(exc).__name__


def sweep_grid(model: StatisticalModel, lam_from: float, lam_to: float, steps: int) -> np.ndarray:
    kind = model.noise.kind
    if kind == "none":
        raise InvalidInput("sweeps need a noise kind in the model config")
    lo, hi = depolarizing_range(2 if kind == "local-depolarizing" else model.dim)
    if steps < 2:
        raise InvalidInput("steps must be at least 2")
    for v in (lam_from, lam_to):
        if not lo - 1e-15 <= v <= hi + 1e-15:
            raise InvalidInput(f"lambda={v} outside the admissible interval [{lo:.12g}, {hi:.12g}]")
    a = lo + ENDPOINT_SHRINK if abs(lam_from - lo) <= 1e-15 else lam_from
    a = hi - ENDPOINT_SHRINK if abs(lam_from - hi) <= 1e-15 else a
    b = hi - ENDPOINT_SHRINK if abs(lam_to - hi) <= 1e-15 else lam_to
    b = lo + ENDPOINT_SHRINK if abs(lam_to - lo) <= 1e-15 else b
    grid = np.linspace(a, b, steps)
    grid[np.abs(grid) < 1e-14] = 0.0
    return grid


def run_sweep(model, grid, quantities=QUANTITIES, workers=1, tol=None):
    """Rows ``(lambda, {quantity: value}, status)`` sorted by lambda."""
    tasks = [(model, float(lam), tuple(quantities), tol or {}) for lam in grid]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    return sorted(((row["lambda"], row, status) for row, status in results), key=lambda t: t[0])


def cmd_sweep(args) -> int:
    model = model_from_config(read_json(args.model))
    quantities = tuple(args.quantities.split(",")) if args.quantities else QUANTITIES
    bad = [q for q in quantities if q not in QUANTITIES]
    if bad:
        raise InvalidInput(f"unknown quantities {bad}; choose from {QUANTITIES}")
    grid = sweep_grid(model, args.lam_from, args.lam_to, args.steps)
    workers = args.workers or os.cpu_count() or 1
    rows = run_sweep(model, grid, quantities, workers, _tolerances(args))
    out = [[fmt(lam)] + [fmt(row.get(k)) for k in QUANTITIES] + [status]
           for lam, row, status in rows]
    _write_csv(out, SWEEP_COLUMNS + ("status",), args.out)
    failed = [s for _, _, s in rows if s not in ("Optimal", "undefined")]
    if failed:
        print(f"{len(failed)} grid point(s) did not solve: {sorted(set(failed))}", file=sys.stderr)
    return EXIT_OK


def _generators_file(path):
    cfg = read_json(path)
    if isinstance(cfg, list):
        cfg = {"generators": cfg}
    if not isinstance(cfg, dict) or "generators" not in cfg:
        raise ConfigError(f"{path}: expected a list of matrices or an object with 'generators'")
    mats = tuple(_matrix(m, f"generators[{j}]") for j, m in enumerate(cfg["generators"]))
    g = GeneratorSet(mats)
    theta = _real_list(cfg["theta"], "theta") if "theta" in cfg else np.zeros(g.d)
    states = None
    if "states" in cfg:
        if not isinstance(cfg["states"], list):
            raise ConfigError("states: expected a list of vectors")
        states = [_vector(v, f"states[{i}]") for i, v in enumerate(cfg["states"])]
    return g, theta, states


def cmd_design(args) -> int:
    g, theta, states = _generators_file(args.generators)
    pure = None
    if args.kind == "max-entangled":
        build = designs.double_model if args.variant == "double" else designs.ancilla_model
        model = build(g, theta)
        pure = designs.max_entangled_state(g.dim)
    elif args.kind == "antiparallel":
        subset = tuple(args.subset or (1,))
        phases = list(args.phases or [])
        if phases and len(phases) != 2 * len(subset):
            raise InvalidInput("--phases needs 2*|subset| values: the phases of psi1 then psi2")
        spec = designs.AntiparallelSpec(subset, tuple(args.signs or ()),
                                        tuple(phases[:len(subset)]), tuple(phases[len(subset):]))
        try:
            model, p1, p2 = designs.antiparallel_model(g, theta, spec, add_null=args.add_null)
        except NoConstructionNeeded as exc:
            print(f"no construction needed: {exc}")
            return EXIT_OK
        pure = np.kron(p1, p2)
    else:
        if args.states:
            states = [_vector(v, f"states[{i}]") for i, v in enumerate(read_json(args.states))]
        if states is None:
            raise InvalidInput("basis-product needs 'states' in the generators file or --states")
        model = designs.basis_product_model(states, g, theta)
        pure = np.ravel(np.array(1.0))
        for v in states:
            pure = np.kron(pure, v / np.linalg.norm(v))
    config = model_to_config(model, pure)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(config, fh, indent=1)
            fh.write("\n")
    cert = designs.certify(model, run_sdp=args.sdp, require_regular=args.kind != "basis-product")
    print(json.dumps(cert.as_dict()))
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    tol = argparse.ArgumentParser(add_help=False)
    tol.add_argument("--gap-tol", type=float, default=argparse.SUPPRESS,
                     help="SDP duality-gap tolerance")
    tol.add_argument("--feas-tol", type=float, default=argparse.SUPPRESS,
                     help="SDP feasibility tolerance")
    parser = argparse.ArgumentParser(prog="qincompat", parents=[tol],
                                     description="Multiparameter incompatibility figures.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("report", parents=[tol], help="I, I*, r and bounds at one model point")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sweep", parents=[tol], help="CSV of the figures along the noise parameter")
    p.add_argument("--model", required=True)
    p.add_argument("--from", dest="lam_from", type=float, required=True)
    p.add_argument("--to", dest="lam_to", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=0, help="processes (default: all cores)")
    p.add_argument("--quantities", help=f"comma-separated subset of {','.join(QUANTITIES)}")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("design", parents=[tol], help="build a compatible probe and certify it")
    p.add_argument("--kind", required=True, choices=("max-entangled", "antiparallel", "basis-product"))
    p.add_argument("--generators", required=True,
                   help="JSON list of generator matrices, or object with generators/theta/states")
    p.add_argument("--variant", choices=("ancilla", "double"), default="ancilla")
    p.add_argument("--subset", type=int, nargs="+")
    p.add_argument("--signs", type=int, nargs="+")
    p.add_argument("--phases", type=float, nargs="+")
    p.add_argument("--add-null", action="store_true")
    p.add_argument("--states", help="JSON list of basis vectors for basis-product")
    p.add_argument("--sdp", action="store_true", help="also solve the SDP for r")
    p.add_argument("--out", help="write the constructed model config here")
    p.set_defaults(func=cmd_design)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        numerics.get()
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: numerics config {os.environ.get(numerics.ENV_VAR)}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QIncompatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
