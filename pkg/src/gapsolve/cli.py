"""Command-line front end.

Subcommands: delta0, tau, curve, solve, tc, surface, check-t1, contraction,
validate-kernel.  Exit codes: 0 success, 1 domain/validation/usage error,
2 numerical non-convergence.  Parameters come from defaults, then an
optional config file, then individual flags; all numerics run in
normalized units and outputs are rescaled back to the input units.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace

import numpy as np

from . import _core
from .errors import ConvergenceError, DomainError, GapsolveError
from .kernel import (Kernel, constant_kernel, kernel_bounds, load_tabulated,
                     separable_kernel)
from .params import (PhysicalParams, SolverConfig, default_u0,
                     load_config, normalize, validate)
from .output import RunManifest, atomic_write_text
from . import simple_gap
from . import bcs_solver
from . import contraction as contraction_mod

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_NUMERIC = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value configuration file")
    for name in ("epsilon", "debye", "u0", "u1", "u2"):
        parser.add_argument(f"--{name}", type=float)
    parser.add_argument("--out", help="output file stem or path")
    parser.add_argument("--manifest", help="manifest path (default <out>.manifest.json)")
    parser.add_argument("--json", action="store_true", dest="emit_json",
                        help="emit JSON alongside/instead of CSV where applicable")
    parser.add_argument("--csv", action="store_true", dest="emit_csv",
                        help="emit CSV (default where applicable)")


def build_parser() -> _Parser:
    parser = _Parser(prog="gapsolve", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("delta0", help="zero-temperature gap for one coupling")
    _add_param_flags(p)
    p.add_argument("--coupling", default="u1",
                   help="u0|u1|u2 or a number (default u1)")

    p = sub.add_parser("tau", help="critical temperature for one coupling")
    _add_param_flags(p)
    p.add_argument("--coupling", default="u1")

    p = sub.add_parser("curve", help="gap curves over a temperature grid")
    _add_param_flags(p)
    p.add_argument("--couplings", default="u0,u1,u2",
                   help="comma list of u0|u1|u2 or numbers")
    p.add_argument("--t-points", type=int, default=200)
    p.add_argument("--t-max", type=float,
                   help="grid upper end (input units; default 1.02 * largest tau)")

    p = sub.add_parser("solve", help="one slice of the full gap equation")
    _add_param_flags(p)
    p.add_argument("--kernel", required=True,
                   help="const:<c> | sep:<level>:<amplitude>[:<shape>] | file:<path>")
    p.add_argument("--T", type=float, required=True, dest="temperature",
                   help="temperature (input units)")
    p.add_argument("--init", default="upper", choices=("upper", "lower"))

    p = sub.add_parser("tc", help="transition temperature of the full equation")
    _add_param_flags(p)
    p.add_argument("--kernel", required=True)

    p = sub.add_parser("surface", help="gap surface over a temperature grid")
    _add_param_flags(p)
    p.add_argument("--kernel", required=True)
    p.add_argument("--t-points", type=int, default=20)
    p.add_argument("--t-max", type=float)

    p = sub.add_parser("check-t1", help="contraction window of the parameter set")
    _add_param_flags(p)

    p = sub.add_parser("contraction", help="empirical contraction factor")
    _add_param_flags(p)
    p.add_argument("--kernel", required=True)
    p.add_argument("--T", type=float, dest="temperature",
                   help="temperature (input units; default the largest admissible t1)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("validate-kernel", help="check a kernel against the coupling band")
    _add_param_flags(p)
    p.add_argument("--kernel", required=True)
    p.add_argument("--samples", type=int, default=101)

    return parser


def resolve_params(args) -> tuple[PhysicalParams, SolverConfig, PhysicalParams]:
    """Defaults <- config file <- flags; returns (physical, solver, normalized)."""
    pvals: dict[str, float] = {}
    svals: dict[str, float] = {}
    if args.config:
        pvals, svals = load_config(args.config)
    for name in ("epsilon", "debye", "u0", "u1", "u2"):
        v = getattr(args, name, None)
        if v is not None:
            pvals[name] = v
    if "u1" in pvals and "u0" not in pvals:
        pvals["u0"] = default_u0(pvals["u1"])
    if pvals:
        base = asdict(PhysicalParams())
        base.update(pvals)
        physical = PhysicalParams(**base)
    else:
        physical = PhysicalParams()
    cfg = replace(SolverConfig(), **svals) if svals else SolverConfig()
    report = validate(physical)
    if not report.ok:
        raise DomainError("; ".join(report.violations))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return physical, cfg, normalize(physical)


def resolve_coupling(token: str, p: PhysicalParams) -> tuple[str, float]:
    token = token.strip()
    if token in ("u0", "u1", "u2"):
        return token, p.coupling(token)
    try:
        return token, float(token)
    except ValueError:
        raise DomainError(f"coupling {token!r} is neither u0/u1/u2 nor a number") from None


def parse_kernel(spec: str, physical: PhysicalParams, pn: PhysicalParams) -> Kernel:
    head, _, rest = spec.partition(":")
    if head == "const":
        try:
            return constant_kernel(float(rest), pn)
        except ValueError:
            raise DomainError(f"const kernel needs a number, got {rest!r}") from None
    if head == "sep":
        parts = rest.split(":")
        if len(parts) not in (2, 3):
            raise DomainError("sep kernel syntax: sep:<level>:<amplitude>[:<shape>]")
        try:
            level, amplitude = float(parts[0]), float(parts[1])
        except ValueError:
            raise DomainError(f"sep kernel needs numbers, got {rest!r}") from None
        shape = parts[2] if len(parts) == 3 else "ramp"
        return separable_kernel(level, amplitude, pn, shape=shape)
    if head == "file":
        if not rest:
            raise DomainError("file kernel syntax: file:<path>")
        return load_tabulated(rest, physical)
    raise DomainError(f"unknown kernel spec {spec!r}; use const:, sep: or file:")


def _threads() -> int:
    raw = os.environ.get("GAPSOLVE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"GAPSOLVE_THREADS={raw!r} is not an integer") from None
    return max(1, n)


def _param_echo(physical: PhysicalParams, pn: PhysicalParams, cfg: SolverConfig,
                extra: dict | None = None) -> dict:
    out = {
        "physical": asdict(physical),
        "normalized": asdict(pn),
        "unit_scale": physical.debye,
        "solver": asdict(cfg),
        "backend": _core.BACKEND,
    }
    if extra:
        out.update(extra)
    return out


def _emit(path: str, text: str, manifest: RunManifest) -> None:
    atomic_write_text(path, text)
    manifest.outputs.append(path)


def _finish(manifest: RunManifest, path: str, started: float) -> None:
    manifest.wall_time = time.monotonic() - started
    manifest.write(path)


def _manifest_path(args, default_stem: str) -> str:
    if getattr(args, "manifest", None):
        return args.manifest
    out = getattr(args, "out", None)
    stem = os.path.splitext(out)[0] if out else default_stem
    return stem + ".manifest.json"


def _csv_table(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


# --- subcommand bodies ------------------------------------------------------

def _cmd_delta0(args, physical, cfg, pn, manifest):
    name, u = resolve_coupling(args.coupling, pn)
    value = simple_gap.delta_zero(u, pn) * physical.debye
    manifest.parameters["coupling"] = {name: u}
    print(f"delta0({name}) = {value!r}")
    return EXIT_OK


def _cmd_tau(args, physical, cfg, pn, manifest):
    name, u = resolve_coupling(args.coupling, pn)
    value = simple_gap.tau(u, pn, cfg) * physical.debye
    manifest.parameters["coupling"] = {name: u}
    print(f"tau({name}) = {value!r}")
    return EXIT_OK


def _cmd_curve(args, physical, cfg, pn, manifest):
    tokens = [tok for tok in args.couplings.split(",") if tok.strip()]
    if not tokens:
        raise DomainError("--couplings is empty")
    if args.t_points < 2:
        raise DomainError("--t-points must be >= 2")
    resolved = [resolve_coupling(tok, pn) for tok in tokens]
    taus = [simple_gap.tau(u, pn, cfg) for _, u in resolved]
    t_max = args.t_max / physical.debye if args.t_max is not None else 1.02 * max(taus)
    if t_max <= 0:
        raise DomainError("--t-max must be > 0")
    grid = np.linspace(0.0, t_max, args.t_points)
    workers = _threads()
    def solve_one(pair):
        u, t = pair
        return simple_gap.solve_gap_at(u, t, pn, cfg)
    jobs = [(u, t) for _, u in resolved for t in grid]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(solve_one, jobs))
    else:
        flat = [solve_one(job) for job in jobs]
    scale = physical.debye
    columns = np.array(flat).reshape(len(resolved), grid.size) * scale
    header = ["T"] + [f"delta_{name}" for name, _ in resolved]
    rows = [[t * scale] + list(columns[:, i]) for i, t in enumerate(grid)]
    out = args.out or "curves.csv"
    _emit(out, _csv_table(header, rows), manifest)
    manifest.parameters["couplings"] = {name: u for name, u in resolved}
    manifest.parameters["t_points"] = int(args.t_points)
    manifest.parameters["t_grid_max"] = float(grid[-1] * scale)
    print(f"wrote {out} ({grid.size} temperatures x {len(resolved)} couplings)")
    return EXIT_OK


def _cmd_solve(args, physical, cfg, pn, manifest):
    kernel = parse_kernel(args.kernel, physical, pn)
    t = args.temperature / physical.debye
    sl = bcs_solver.solve_fixed_point(t, kernel, pn, cfg, init=args.init)
    scale = physical.debye
    out = args.out or "slice.csv"
    stem = os.path.splitext(out)[0]
    rows = zip(np.asarray(sl.nodes) * scale, np.asarray(sl.values) * scale)
    if args.emit_csv or not args.emit_json:
        _emit(out, _csv_table(["x", "u"], rows), manifest)
    sidecar = {
        "temperature": sl.temperature * scale,
        "residual": sl.residual,
        "iterations": sl.iterations,
        "envelope": {"delta1": sl.envelope[0] * scale, "delta2": sl.envelope[1] * scale},
        "converged": sl.converged,
        "damping_used": sl.damping_used,
        "values": [float(v) * scale for v in sl.values],
        "nodes": [float(x) * scale for x in sl.nodes],
    }
    _emit(stem + ".json", json.dumps(sidecar, sort_keys=True) + "\n", manifest)
    manifest.parameters["kernel"] = args.kernel
    manifest.parameters["T"] = args.temperature
    manifest.parameters["init"] = args.init
    print(f"solved T={args.temperature!r}: residual={sl.residual!r} "
          f"iterations={sl.iterations}")
    return EXIT_OK


def _cmd_tc(args, physical, cfg, pn, manifest):
    kernel = parse_kernel(args.kernel, physical, pn)
    tc = bcs_solver.transition_temperature(kernel, pn, cfg) * physical.debye
    manifest.parameters["kernel"] = args.kernel
    manifest.parameters["bounds"] = list(kernel.declared_bounds)
    print(f"T_c = {tc!r}")
    return EXIT_OK


def _cmd_surface(args, physical, cfg, pn, manifest):
    kernel = parse_kernel(args.kernel, physical, pn)
    if args.t_points < 1:
        raise DomainError("--t-points must be >= 1")
    t2 = simple_gap.tau(kernel.u_hi, pn, cfg)
    t_max = args.t_max / physical.debye if args.t_max is not None else t2
    grid = np.linspace(0.0, min(t_max, t2), args.t_points)
    surface = bcs_solver.gap_surface(kernel, grid, pn, cfg)
    scale = physical.debye
    out = args.out or "surface.csv"
    stem = os.path.splitext(out)[0]
    rows = [(sl.temperature * scale, float(x) * scale, float(u) * scale)
            for sl in surface.slices for x, u in zip(sl.nodes, sl.values)]
    _emit(out, _csv_table(["T", "x", "u"], rows), manifest)
    meta = {
        "refinement_delta": surface.refinement_delta * scale,
        "t_grid": [t * scale for t in surface.t_grid],
        "kernel": args.kernel,
    }
    _emit(stem + ".json", json.dumps(meta, sort_keys=True) + "\n", manifest)
    manifest.parameters["kernel"] = args.kernel
    manifest.parameters["t_points"] = int(args.t_points)
    print(f"wrote {out}; refinement_delta = {surface.refinement_delta * scale!r}")
    return EXIT_OK


def _cmd_check_t1(args, physical, cfg, pn, manifest):
    t1 = contraction_mod.max_admissible_t1(pn, cfg)
    report = contraction_mod.condition20_margin(t1, pn, cfg)
    tau2 = simple_gap.tau(pn.u2, pn, cfg)
    scale = physical.debye
    payload = {
        "t1": t1 * scale,
        "t1_over_tau2": t1 / tau2,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "constraint_ok": report.constraint_ok,
        "satisfied": report.satisfied,
    }
    if args.out:
        _emit(args.out, json.dumps(payload, sort_keys=True) + "\n", manifest)
    manifest.parameters["t1"] = t1 * scale
    print(f"contraction window holds up to t1 = {t1 * scale!r} "
          f"(t1/tau2 = {t1 / tau2!r}, lhs = {report.lhs!r} > rhs = {report.rhs!r})")
    return EXIT_OK


def _cmd_contraction(args, physical, cfg, pn, manifest):
    kernel = parse_kernel(args.kernel, physical, pn)
    if args.temperature is not None:
        t = args.temperature / physical.debye
    else:
        t = contraction_mod.max_admissible_t1(pn, cfg)
    estimate = contraction_mod.empirical_contraction_factor(
        kernel, t, args.trials, args.seed, pn, cfg)
    verdict = "contractive" if estimate.max_ratio < 1.0 else "NOT contractive"
    scale = physical.debye
    payload = json.loads(estimate.to_json())
    payload["temperature"] = estimate.temperature * scale
    if args.out:
        _emit(args.out, json.dumps(payload, sort_keys=True) + "\n", manifest)
    manifest.parameters.update(
        {"kernel": args.kernel, "T": estimate.temperature * scale,
         "trials": args.trials, "seed": args.seed})
    print(f"{verdict}: max ratio {estimate.max_ratio!r} over {estimate.trials} trials "
          f"at T = {estimate.temperature * scale!r} (seed {estimate.seed})"
          + (" [degenerate band]" if estimate.degenerate_band else ""))
    return EXIT_OK


def _cmd_validate_kernel(args, physical, cfg, pn, manifest):
    kernel = parse_kernel(args.kernel, physical, pn)
    lo, hi = kernel_bounds(kernel, args.samples)
    problems = []
    if lo < pn.u1 - 1e-12:
        problems.append(f"kernel minimum {lo!r} below u1={pn.u1!r}")
    if hi > pn.u2 + 1e-12:
        problems.append(f"kernel maximum {hi!r} above u2={pn.u2!r}")
    manifest.parameters["kernel"] = args.kernel
    manifest.parameters["sampled_bounds"] = [lo, hi]
    if problems:
        for prob in problems:
            print(f"violation: {prob}", file=sys.stderr)
        manifest.status = "error"
        manifest.message = "; ".join(problems)
        return EXIT_DOMAIN
    print(f"kernel within band: sampled bounds [{lo!r}, {hi!r}] "
          f"inside [{pn.u1!r}, {pn.u2!r}]")
    return EXIT_OK


_COMMANDS = {
    "delta0": _cmd_delta0,
    "tau": _cmd_tau,
    "curve": _cmd_curve,
    "solve": _cmd_solve,
    "tc": _cmd_tc,
    "surface": _cmd_surface,
    "check-t1": _cmd_check_t1,
    "contraction": _cmd_contraction,
    "validate-kernel": _cmd_validate_kernel,
}


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_DOMAIN
    started = time.monotonic()
    manifest = RunManifest(command=args.command, parameters={})
    manifest_path = _manifest_path(args, f"gapsolve-{args.command}")
    try:
        physical, cfg, pn = resolve_params(args)
    except GapsolveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        manifest.status = "error"
        manifest.message = str(exc)
        _finish(manifest, manifest_path, started)
        return EXIT_DOMAIN
    manifest.parameters = _param_echo(physical, pn, cfg)
    if getattr(args, "seed", None) is not None:
        manifest.parameters["seed"] = args.seed
    try:
        code = _COMMANDS[args.command](args, physical, cfg, pn, manifest)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        manifest.status = "error"
        manifest.message = str(exc)
        code = EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        manifest.status = "error"
        manifest.message = str(exc)
        code = EXIT_NUMERIC
    _finish(manifest, manifest_path, started)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
