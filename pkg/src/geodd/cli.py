"""Command-line front end: parse plant files, run analyze/solve/verify,
emit compensators, certificates, and reports.

Problem files are UTF-8 JSON with the matrix names used throughout the
package (A, B, H, C, D_y, G_y, E, D_z, G_z), a dims block, a time_domain
string, and optional tolerance overrides. Matrices may be nested row lists
or flat row-major arrays.

Exit codes: 0 solved/verified/analysis-clean, 1 usage or parse error,
2 infeasible (or failed verification), 3 well-posedness obstruction,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys

import numpy as np

from .errors import (
    GeoddError,
    Infeasible,
    ParseError,
    ShapeError,
    WellPosednessObstruction,
)
from .lattice import PlantSystem
from .subspaces import CONTINUOUS, DISCRETE, ToleranceProfile
from .synthesis import Compensator, close_loop, recover_parameters, solve
from .verify import certify_decoupled, default_lambdas, stability_check, transfer_samples

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_OBSTRUCTION = 3
EXIT_NUMERICAL = 4

_MATRIX_SHAPES = {
    "A": ("n", "n"), "B": ("n", "m"), "H": ("n", "q"),
    "C": ("p", "n"), "D_y": ("p", "m"), "G_y": ("p", "q"),
    "E": ("r", "n"), "D_z": ("r", "m"), "G_z": ("r", "q"),
}


def _shape_from_dims(dims: dict, name: str):
    rows, cols = _MATRIX_SHAPES[name]
    return dims[rows], dims[cols]


def _parse_matrix(name: str, raw, shape) -> np.ndarray:
    rows, cols = shape
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as err:
        raise ParseError(f"matrix {name} is not numeric: {err}") from None
    if arr.ndim == 1:
        if arr.size != rows * cols:
            raise ShapeError(
                f"matrix {name} has {arr.size} entries, expected {rows}x{cols}")
        arr = arr.reshape(rows, cols)
    elif arr.shape != (rows, cols):
        raise ShapeError(
            f"matrix {name} has shape {arr.shape}, expected {(rows, cols)}")
    if arr.size and not np.isfinite(arr).all():
        raise ParseError(f"matrix {name} contains non-finite entries")
    return arr


def parse_problem(path: str):
    """Read a plant file; returns (PlantSystem, ToleranceProfile)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: invalid JSON at line {err.lineno}: {err.msg}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object at top level")
    dims = data.get("dims")
    if not isinstance(dims, dict):
        raise ParseError(f"{path}: missing dims block")
    for key in ("n", "m", "q", "p", "r"):
        if not isinstance(dims.get(key), int) or dims[key] < 0:
            raise ParseError(f"{path}: dims.{key} must be a nonnegative integer")
    matrices = {}
    for name in _MATRIX_SHAPES:
        if name not in data:
            raise ParseError(f"{path}: missing matrix {name}")
        matrices[name] = _parse_matrix(name, data[name], _shape_from_dims(dims, name))
    domain = data.get("time_domain", CONTINUOUS)
    if domain not in (CONTINUOUS, DISCRETE):
        raise ParseError(f"{path}: time_domain must be continuous or discrete")
    overrides = data.get("tolerances", {})
    if not isinstance(overrides, dict):
        raise ParseError(f"{path}: tolerances must be an object")
    known = {"rank_rel", "angle", "residual"}
    unknown = set(overrides) - known
    if unknown:
        raise ParseError(f"{path}: unknown tolerance fields {sorted(unknown)}")
    tol = ToleranceProfile(**{k: float(v) for k, v in overrides.items()})
    sys_ = PlantSystem(**matrices, time_domain=domain)
    return sys_, tol


def problem_dict(sys_: PlantSystem) -> dict:
    """Normalized serialization; parse(serialize(sys)) round-trips."""
    out = {
        "dims": {"n": sys_.n, "m": sys_.m, "q": sys_.q, "p": sys_.p, "r": sys_.r},
        "time_domain": sys_.time_domain,
    }
    for name in _MATRIX_SHAPES:
        out[name] = getattr(sys_, name).tolist()
    return out


def parse_compensator(path: str) -> Compensator:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: invalid JSON: {err.msg}") from None
    if "compensator" in data:
        data = data["compensator"]
    try:
        return Compensator(
            np.asarray(data["A_c"], dtype=float),
            np.asarray(data["B_c"], dtype=float),
            np.asarray(data["C_c"], dtype=float),
            np.asarray(data["D_c"], dtype=float),
        )
    except KeyError as err:
        raise ParseError(f"{path}: missing compensator matrix {err}") from None


def compensator_dict(comp: Compensator) -> dict:
    return {
        "A_c": comp.A_c.tolist(), "B_c": comp.B_c.tolist(),
        "C_c": comp.C_c.tolist(), "D_c": comp.D_c.tolist(),
    }


def _write_result(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _certificate_dict(cert) -> dict:
    return {
        "invariant_dim": cert.invariant_subspace.dim,
        "residual_invariance": cert.residual_invariance,
        "residual_kernel": cert.residual_kernel,
        "feedthrough_norm": cert.feedthrough_norm,
        "valid": cert.valid,
    }


def _verdict_exit(overall: str) -> int:
    if overall == "solvable":
        return EXIT_OK
    if overall == "well_posedness_obstruction":
        return EXIT_OBSTRUCTION
    if overall.startswith("infeasible"):
        return EXIT_INFEASIBLE
    return EXIT_NUMERICAL


def run(command: str, args) -> int:
    """Dispatch one subcommand; returns the process exit code."""
    sys_, tol = parse_problem(args.input)
    if args.tol is not None:
        tol = ToleranceProfile(rank_rel=args.tol, angle=tol.angle,
                               residual=tol.residual)

    if command == "analyze":
        from .synthesis import analyze_p1, analyze_p2

        analyze = analyze_p1 if args.problem == "p1" else analyze_p2
        report = analyze(sys_, tol, seed=args.seed)
        payload = {"command": "analyze", "seed": args.seed,
                   "report": report.to_dict()}
        _write_result(args.output, payload)
        return _verdict_exit(report.overall)

    if command == "solve":
        try:
            comp, report = solve(sys_, args.problem, tol, seed=args.seed)
        except WellPosednessObstruction as err:
            payload = {"command": "solve", "seed": args.seed,
                       "verdict": "well_posedness_obstruction",
                       "report": err.report.to_dict()}
            _write_result(args.output, payload)
            print("well-posedness obstruction: " + str(err), file=_sys.stderr)
            return EXIT_OBSTRUCTION
        except Infeasible as err:
            payload = {"command": "solve", "seed": args.seed,
                       "verdict": "infeasible",
                       "report": err.report.to_dict()}
            _write_result(args.output, payload)
            print("infeasible: " + str(err), file=_sys.stderr)
            return EXIT_INFEASIBLE
        cl = close_loop(sys_, comp, tol)
        cert = certify_decoupled(cl, tol)
        K, F, G = recover_parameters(sys_, comp)
        samples = transfer_samples(cl, default_lambdas(cl, args.samples, args.seed))
        stable, _ = stability_check(cl.A_hat, sys_.region)
        payload = {
            "command": "solve",
            "seed": args.seed,
            "verdict": "solved",
            "report": report.to_dict(),
            "compensator": compensator_dict(comp),
            "K": K.tolist(),
            "F": F.tolist(),
            "G": G.tolist(),
            "certificate": _certificate_dict(cert),
            "max_sample_norm": samples,
            "stable": bool(stable),
        }
        _write_result(args.output, payload)
        return EXIT_OK

    if command == "verify":
        comp = parse_compensator(args.compensator)
        cl = close_loop(sys_, comp, tol)
        cert = certify_decoupled(cl, tol)
        samples = transfer_samples(cl, default_lambdas(cl, args.samples, args.seed))
        stable, eigs = stability_check(cl.A_hat, sys_.region)
        decoupled = cert.valid and samples <= 1e-8
        want_stable = args.problem == "p2"
        verified = decoupled and (stable or not want_stable)
        payload = {
            "command": "verify",
            "seed": args.seed,
            "verdict": "verified" if verified else "not_verified",
            "certificate": _certificate_dict(cert),
            "max_sample_norm": samples,
            "stable": bool(stable),
            "spectrum": [[l.real, l.imag] for l in eigs],
        }
        _write_result(args.output, payload)
        return EXIT_OK if verified else EXIT_INFEASIBLE

    raise ValueError(f"unknown command {command!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors exit 1, not argparse's default 2
        self.print_usage(_sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geodd",
                     description="Disturbance decoupling by dynamic output feedback")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_comp in (("analyze", False), ("solve", False), ("verify", True)):
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="plant JSON file")
        p.add_argument("--problem", choices=["p1", "p2"], default="p1")
        p.add_argument("--tol", type=float, default=None,
                       help="override the relative rank threshold")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=20,
                       help="number of frequency samples")
        p.add_argument("--output", default=None, help="result JSON file")
        if needs_comp:
            p.add_argument("--compensator", required=True,
                           help="compensator JSON file (or a solve result)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_USAGE
    try:
        return run(args.command, args)
    except ParseError as err:
        print(f"error: {err}", file=_sys.stderr)
        return EXIT_USAGE
    except GeoddError as err:
        print(f"numerical failure: {err}", file=_sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
