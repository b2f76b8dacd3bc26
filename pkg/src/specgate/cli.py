"""Command line front end.

Exit codes: 0 on success, 2 for invalid input (including I/O problems),
3 when a numerical routine fails.  Scan-type commands emit a report
``{"meta", "rows"}`` as JSON or CSV; the others emit a flat JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diveq, eiglab, lagrange, potentials, setopt, windows
from .errors import BadFlag, IoFailure, NumericalError, SpecGateError, UnknownCommand, ValidationError
from .grid import GridFunction, VectorFieldGrid, read_sgf, write_sgf
from .measure_core import DiscreteMeasureSpace
from .report import ReportRow, ScanReport, dumps, report_to_csv, write_report, write_text

COMMANDS = ("scan", "madic", "density", "setopt", "lagrange", "diveq", "gate-fourier", "gate-lattice", "eig",
            "constants")

__all__ = ["RunConfig", "run", "execute", "write_report", "main", "build_parser"]


@dataclass
class RunConfig:
    command: str
    args: dict = field(default_factory=dict)
    output: str = "-"
    fmt: str = "json"
    seed: int = 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise BadFlag(message)


def _vector(text: str, cast=float) -> tuple:
    try:
        return tuple(cast(x) for x in text.split(","))
    except ValueError as exc:
        raise BadFlag(f"cannot parse vector {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="specgate", description="Localization diagnostics for Schroedinger-type operators.")
    ap.add_argument("--out", default="-", help="output path, '-' for stdout")
    ap.add_argument("--format", default="json", choices=("json", "csv"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--config", default=None, help="JSON file with flag values (flags win)")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--out", default=argparse.SUPPRESS)
        p.add_argument("--format", default=argparse.SUPPRESS, choices=("json", "csv"))
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        p.add_argument("--config", default=argparse.SUPPRESS, help="JSON file with flag values (flags win)")
        return p

    p = common(sub.add_parser("constants", help="C(d), c_d and G_d"))
    p.add_argument("--d", type=int, required=True)

    helps = {"setopt": "set minimisation on a JSON list of [value, weight] atoms",
             "lagrange": "moment lower bound for the same problem on a probability space"}
    for name in ("setopt", "lagrange"):
        p = common(sub.add_parser(name, help=helps[name]))
        p.add_argument("--atoms", required=True)
        p.add_argument("--t", type=float, required=True)
        if name == "setopt":
            p.add_argument("--mode", default="both", choices=("fractional", "binary", "both"))

    p = common(sub.add_parser("scan", help="window statistics along a ray"))
    p.add_argument("--potential", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--alpha", type=float, default=None, help="gamma exponent (default d/(d-2))")
    p.add_argument("--K", "--gamma-k", dest="K", type=float, default=1.0, help="gamma prefactor")
    p.add_argument("--dir", default=None, help="comma-separated lattice direction (default e1)")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--resolution", type=int, default=32)
    p.add_argument("--gmd-delta", type=float, default=0.5)
    p.add_argument("--quadrature", default="auto", choices=("auto", "exact", "grid"))

    p = common(sub.add_parser("madic", help="minimum of V^* over m-adic cells of a dense system"))
    p.add_argument("--potential", required=True)
    p.add_argument("--l", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--system", default="cantor", choices=("cantor", "cantor-odd"))
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--K", "--gamma-k", dest="K", type=float, default=1.0)
    p.add_argument("--resolution", type=int, default=None)

    p = common(sub.add_parser("density", help="randomised (log_m, theta)-density check"))
    p.add_argument("--system", default="cantor", choices=("cantor", "cantor-odd"))
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--theta", type=float, default=1 / 9)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--r-min", type=float, default=1e-4)

    p = common(sub.add_parser("diveq", help="solve div Gamma = W for an SGF1 grid"))
    p.add_argument("--input", required=True)
    p.add_argument("--method", default="antiderivative", choices=("antiderivative", "periodic"))
    p.add_argument("--field-out", default=None, help="write Gamma as SGF1")

    p = common(sub.add_parser("gate-fourier", help="Fourier gate on one unit cell"))
    p.add_argument("--input", default=None, help="SGF1 cell samples")
    p.add_argument("--potential", default=None)
    p.add_argument("--l", default=None)
    p.add_argument("--resolution", type=int, default=32)

    p = common(sub.add_parser("gate-lattice", help="lattice gate for N(l) V_r(m x) potentials"))
    p.add_argument("--N", default="1 + log(1 + L)")
    p.add_argument("--m", default="2**(L + 1)")
    p.add_argument("--r", default="1/4")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--l-max", type=int, default=8)
    p.add_argument("--k-band", type=int, default=32)

    p = common(sub.add_parser("eig", help="ground-state energies along a ray"))
    p.add_argument("--potential", required=True)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--dir", default=None)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--bc", default="dirichlet", choices=("dirichlet", "neumann"))
    p.add_argument("--resolution", type=int, default=32)
    p.add_argument("--kinetic", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-8)
    return ap


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise IoFailure(f"{path}: invalid JSON ({exc})") from exc


def _load_atoms(path: str) -> DiscreteMeasureSpace:
    obj = _load_json(path)
    atoms = obj.get("atoms") if isinstance(obj, dict) else obj
    try:
        return DiscreteMeasureSpace.from_atoms((float(v), float(w)) for v, w in atoms)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise BadFlag("atoms must be a list of [value, weight] pairs") from exc


def _schedule(args: dict, d: int) -> windows.GammaSchedule:
    alpha = args.get("alpha")
    return windows.GammaSchedule(args.get("K", 1.0), d / (d - 2) if alpha is None and d > 2 else (alpha or 1.0))


def _system(name: str, d: int) -> potentials.DenseSystemSpec:
    gen = "CantorAdjacent" if d == 1 else "ProductWithCube"
    return potentials.DenseSystemSpec(gen, d, parity="odd" if name == "cantor-odd" else None)


def _opt_dict(res: setopt.OptResult) -> dict:
    w = res.witness
    return {"value": res.value, "full_atoms": list(w.full_atoms), "partial_atom": w.partial_atom,
            "partial_fraction": w.partial_fraction, "mass": w.mass}


def execute(config: RunConfig):
    """Execute one command and return its report or result dictionary."""
    a = config.args
    cmd = config.command
    if cmd not in COMMANDS:
        raise UnknownCommand(f"unknown command {cmd!r}; expected one of {COMMANDS}")
    if cmd == "constants":
        c = diveq.constants(a["d"])
        return {"d": a["d"], "C": c.C, "c": c.c, "G": c.G, "G_volume_reading": c.G_volume_reading,
                "fourier_threshold": diveq.fourier_threshold(a["d"])}
    if cmd == "setopt":
        space = _load_atoms(a["atoms"])
        out = {"t": a["t"]}
        if a.get("mode", "both") in ("fractional", "both"):
            out["fractional"] = _opt_dict(setopt.solve_fractional(space, a["t"]))
        if a.get("mode", "both") in ("binary", "both"):
            out["binary"] = _opt_dict(setopt.solve_binary_bruteforce(space, a["t"]))
        return out
    if cmd == "lagrange":
        space = _load_atoms(a["atoms"])
        lb = lagrange.lagrange_bound(space, a["t"])
        st = lagrange.moments(space)
        frac = setopt.solve_fractional(space, a["t"]).value
        return {"t": a["t"], "bound": lb.bound, "lambda_star": lb.lambda_star, "nu_star": lb.nu_star,
                "expectation": st.expectation, "deviation": st.deviation, "fractional": frac}
    if cmd == "scan":
        pot = potentials.PotentialSpec.from_json(_load_json(a["potential"]))
        direction = _vector(a["dir"], int) if a.get("dir") else (1,) + (0,) * (pot.d - 1)
        return windows.ray_scan(pot, direction, a["steps"], a["r"], _schedule(a, pot.d), a["resolution"],
                                a["gmd_delta"], a["quadrature"])
    if cmd == "madic":
        pot = potentials.PotentialSpec.from_json(_load_json(a["potential"]))
        l = _vector(a["l"], int)
        res = windows.madic_scan(pot, l, a["n"], a["m"], _system(a["system"], pot.d), _schedule(a, pot.d),
                                 a.get("resolution"))
        return {"l": list(l), "n": a["n"], "m": a["m"], "psi": res.psi, "min_vstar": res.min_vstar,
                "argmin_cell": list(res.argmin), "cells": res.cells}
    if cmd == "density":
        res = windows.verify_logm_theta_density(_system(a["system"], a["d"]), a["m"], a["theta"], a["trials"],
                                                config.seed, a["r_min"])
        return {"passed": res.passed, "trials": res.trials, "failures": len(res.failures),
                "first_failure": list(res.failures[0][0]) + [res.failures[0][1]] if res.failures else None}
    if cmd == "diveq":
        w = read_sgf(a["input"])
        if isinstance(w, VectorFieldGrid):
            raise BadFlag("diveq input must be a scalar field")
        out = {"method": a["method"], "W_norm_d": w.lp_norm(w.d)}
        if a["method"] == "antiderivative":
            gamma = diveq.antiderivative_solution(w)
        else:
            sol = diveq.periodic_potential_solution(w)
            gamma = sol.gamma
            out["G_lq_norm"] = sol.lq_norms[w.d]
            out["G_tail_norm"] = sol.tail_norms[w.d]
        out["Gamma_norm_d"] = gamma.lp_norm(w.d)
        if a.get("field_out"):
            write_sgf(a["field_out"], gamma)
        return out
    if cmd == "gate-fourier":
        if a.get("input"):
            cell = read_sgf(a["input"])
        elif a.get("potential") and a.get("l"):
            pot = potentials.PotentialSpec.from_json(_load_json(a["potential"]))
            cell = GridFunction.sample(pot, _vector(a["l"], int), 1.0, a["resolution"])
        else:
            raise BadFlag("gate-fourier needs --input or --potential with --l")
        res = diveq.fourier_gate(cell)
        return {"lhs": res.lhs, "threshold": res.threshold, "pass": res.passed, "tail": res.tail,
                "d_bar_bound": res.d_bar_bound, "sigma_lower": res.sigma_lower}
    if cmd == "gate-lattice":
        d = a["d"]
        laws = [potentials.GrowthLaw(a[k], d) for k in ("N", "m", "r")]

        def at(law):
            return lambda l: float(law(max(abs(v) for v in l)))
        l_range = [(k,) + (0,) * (d - 1) for k in range(a["l_max"] + 1)]
        return diveq.lattice_gate(*(at(law) for law in laws), l_range, d, a["k_band"])
    pot = potentials.PotentialSpec.from_json(_load_json(a["potential"]))
    direction = _vector(a["dir"], int) if a.get("dir") else (1,) + (0,) * (pot.d - 1)
    return eiglab.localization_scan(pot, a["r"], direction, a["steps"], a["bc"], a["resolution"], a["kinetic"],
                                    a["tol"])


def _flatten(obj: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in obj.items():
        key = prefix + str(k)
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = ";".join(str(x) for x in v)
        else:
            out[key] = v
    return out


def emit(result, config: RunConfig) -> None:
    if isinstance(result, ScanReport):
        write_report(result, config.output, config.fmt)
        return
    if config.fmt == "csv":
        flat = _flatten(result)
        write_text(config.output, report_to_csv(ScanReport([ReportRow((), flat)], {"command": config.command})))
        return
    write_text(config.output, dumps(result) + "\n")


def _config_path(argv) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_config(argv) -> RunConfig:
    """Flags plus an optional JSON config file whose keys use the flag names."""
    argv = list(argv)
    parser = build_parser()
    path = _config_path(argv)
    if path is not None:
        overrides = _load_json(path)
        if not isinstance(overrides, dict):
            raise BadFlag("config file must hold a JSON object")
        overrides = {k.lstrip("-").replace("-", "_"): v for k, v in overrides.items()}
        command = next((tok for tok in argv if tok in COMMANDS), None)
        if command is None:
            raise UnknownCommand(f"a command is required; expected one of {COMMANDS}")
        subparser = parser._subparsers._group_actions[0].choices[command]
        known = {a.dest: a for a in subparser._actions}
        unknown = set(overrides) - set(known)
        if unknown:
            raise BadFlag(f"unknown config keys {sorted(unknown)}")
        for key in overrides:
            known[key].required = False
        subparser.set_defaults(**overrides)
    try:
        ns = parser.parse_args(argv)
    except BadFlag as exc:
        if "invalid choice" in str(exc):
            raise UnknownCommand(f"unknown command; expected one of {COMMANDS}") from exc
        raise
    if ns.command is None:
        raise UnknownCommand(f"a command is required; expected one of {COMMANDS}")
    args = {k: v for k, v in vars(ns).items() if k not in ("command", "out", "format", "seed", "config")}
    return RunConfig(ns.command, args, ns.out, ns.format, ns.seed)


def run(argv=None) -> int:
    """Parse ``argv``, execute and write the result; returns the exit code."""
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
        emit(execute(config), config)
    except NumericalError as exc:
        print(f"specgate: numerical failure: {exc}", file=sys.stderr)
        return 3
    except SpecGateError as exc:
        print(f"specgate: {type(exc).__name__}: {exc}", file=sys.stderr)
        if isinstance(exc, (BadFlag, UnknownCommand)):
            print(build_parser().format_usage(), file=sys.stderr, end="")
        return 2
    return 0


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
