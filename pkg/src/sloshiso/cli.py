"""Batch command-line front end.

Subcommands: ``mesh`` (triangulate and export), ``eig`` (membrane
eigenvalues of a shape), ``slosh`` (dispersion over depth), ``check``
(inequality verdicts for one shape), ``sweep`` (a shape family to CSV),
``troesch`` (radial-basin bound check).  Outputs are deterministic:
identical invocations produce byte-identical files.

Exit codes: 0 success, 2 usage error, 3 numerical failure (a partial
report with a failure note is still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

from . import inequalities, troesch as troesch_mod
from .fem import DEFAULT_SEED, NoConvergenceError, assemble, neumann_eigs
from .geometry import build_shape, load_shape_spec, save_mesh, shape_id_for, spec_from_dict, triangulate
from .sloshing import DepthSpec, PhysicalContext, angular_frequency, depth_curve, slosh_eig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

JSON_SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    """Common flags of one invocation."""

    command: str
    input_path: Optional[str] = None
    mesh_level: int = 5
    modes: int = 4
    depth: DepthSpec = DepthSpec.infinite()
    output_path: Optional[str] = None
    format: str = "csv"
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not 0 <= self.mesh_level <= 9:
            raise ValueError(f"mesh level must be in [0, 9], got {self.mesh_level}")
        if not 1 <= self.modes <= 20:
            raise ValueError(f"modes must be in [1, 20], got {self.modes}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format}")


def _parse_depth(text: str) -> DepthSpec:
    if text.lower() in ("inf", "infinite"):
        return DepthSpec.infinite()
    try:
        return DepthSpec.finite(float(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad depth {text!r}: {exc}")


def _parse_seed(text: str) -> int:
    return int(text, 0)


def _parse_float_list(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}: {exc}")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _diagnostic(code: str, message: str) -> None:
    print(f"sloshiso: error[{code}]: {message}", file=sys.stderr)


def _write_text(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _config(args, command: str) -> RunConfig:
    return RunConfig(
        command=command,
        input_path=getattr(args, "shape", None),
        mesh_level=getattr(args, "level", 5),
        modes=getattr(args, "modes", 4),
        depth=getattr(args, "depth", DepthSpec.infinite()),
        output_path=getattr(args, "output", None),
        format=getattr(args, "format", "csv"),
        seed=getattr(args, "seed", DEFAULT_SEED),
    )


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_mesh(args) -> int:
    cfg = _config(args, "mesh")
    shape = build_shape(load_shape_spec(cfg.input_path))
    mesh = triangulate(shape, cfg.mesh_level)
    if cfg.output_path is None:
        save_mesh(mesh, sys.stdout)
    else:
        with open(cfg.output_path, "w", encoding="utf-8", newline="\n") as fh:
            save_mesh(mesh, fh)
    return EXIT_OK


def _cmd_eig(args) -> int:
    cfg = _config(args, "eig")
    spec = load_shape_spec(cfg.input_path)
    shape = build_shape(spec)
    mesh = triangulate(shape, cfg.mesh_level)
    stiffness, mass = assemble(mesh)
    sid = shape_id_for(spec)
    try:
        spectrum = neumann_eigs(stiffness, mass, cfg.modes, seed=cfg.seed)
    except NoConvergenceError as exc:
        _write_eig_failure(cfg, sid, exc)
        _diagnostic("no-convergence", str(exc))
        return EXIT_NUMERICAL
    rows = []
    for i, mu in enumerate(spectrum.values):
        rows.append({
            "mode": i + 1,
            "mu": float(mu),
            "nu": slosh_eig(float(mu), cfg.depth),
            "residual": float(spectrum.residuals[i]),
        })
    if cfg.format == "json":
        text = _json_dump({
            "schema": JSON_SCHEMA_VERSION, "command": "eig", "shape_id": sid,
            "level": cfg.mesh_level, "depth": str(cfg.depth),
            "iterations": spectrum.iterations, "modes": rows,
        })
    else:
        lines = ["mode,mu,nu,residual"]
        lines += [f"{r['mode']},{_fmt(r['mu'])},{_fmt(r['nu'])},{r['residual']:.3e}"
                  for r in rows]
        text = "\n".join(lines) + "\n"
    _write_text(cfg.output_path, text)
    return EXIT_OK


def _write_eig_failure(cfg: RunConfig, sid: str, exc: NoConvergenceError) -> None:
    if cfg.output_path is None:
        return
    if cfg.format == "json":
        text = _json_dump({
            "schema": JSON_SCHEMA_VERSION, "command": "eig", "shape_id": sid,
            "error": "no-convergence", "detail": str(exc),
            "best_values": None if exc.values is None else [float(v) for v in exc.values],
        })
    else:
        text = "mode,mu,nu,residual\n# error[no-convergence]: " + str(exc) + "\n"
    _write_text(cfg.output_path, text)


def _cmd_slosh(args) -> int:
    cfg = _config(args, "slosh")
    if (args.mu is None) == (args.shape is None):
        _diagnostic("usage", "give exactly one of --mu or --shape")
        return EXIT_USAGE
    if args.mu is not None:
        mu = args.mu
        sid = "mu"
    else:
        spec = load_shape_spec(args.shape)
        shape = build_shape(spec)
        mesh = triangulate(shape, cfg.mesh_level)
        stiffness, mass = assemble(mesh)
        try:
            spectrum = neumann_eigs(stiffness, mass, 1, seed=cfg.seed)
        except NoConvergenceError as exc:
            _diagnostic("no-convergence", str(exc))
            return EXIT_NUMERICAL
        mu = float(spectrum.values[0])
        sid = shape_id_for(spec)
    ctx = PhysicalContext(g=args.g)
    table = depth_curve(mu, args.depths)
    if cfg.format == "json":
        text = _json_dump({
            "schema": JSON_SCHEMA_VERSION, "command": "slosh", "shape_id": sid,
            "mu": mu, "g": ctx.g,
            "rows": [{"d": float(d), "nu": float(nu),
                      "omega": angular_frequency(float(nu), ctx)}
                     for d, nu in table],
        })
    else:
        lines = ["d,nu,omega"]
        lines += [f"{_fmt(d)},{_fmt(nu)},{_fmt(angular_frequency(nu, ctx))}"
                  for d, nu in table]
        text = "\n".join(lines) + "\n"
    _write_text(cfg.output_path, text)
    return EXIT_OK


def verdict(record) -> str:
    """PASS / PASS(equality) / CONJECTURAL / FAIL for one record."""
    if not record.applicable:
        return "CONJECTURAL"
    equality_tol = max(2.0 * record.uncertainty, 5e-3 * record.bound)
    if abs(record.margin) <= equality_tol:
        return "PASS(equality)"
    if record.margin >= -record.uncertainty:
        return "PASS"
    return "FAIL"


def _cmd_check(args) -> int:
    cfg = _config(args, "check")
    if cfg.mesh_level < 2:
        _diagnostic("usage", "check needs --level >= 2 for extrapolation")
        return EXIT_USAGE
    spec = load_shape_spec(cfg.input_path)
    shape = build_shape(spec)
    sid = shape_id_for(spec)
    try:
        est = inequalities.estimate_mu1(shape, cfg.mesh_level, seed=cfg.seed)
    except NoConvergenceError as exc:
        if cfg.output_path is not None:
            _write_text(cfg.output_path, _json_dump({
                "schema": JSON_SCHEMA_VERSION, "command": "check",
                "shape_id": sid, "error": "no-convergence", "detail": str(exc)})
                if cfg.format == "json"
                else ",".join(inequalities.CSV_HEADER)
                + "\n# error[no-convergence]: " + str(exc) + "\n")
        _diagnostic("no-convergence", str(exc))
        return EXIT_NUMERICAL
    report = inequalities.evaluate(shape, (est.mu1, est.error_gauge),
                                   cfg.depth, shape_id=sid)
    for name in inequalities.FUNCTIONAL_NAMES:
        rec = report.record(name)
        print(f"{sid} {name} {verdict(rec)} value={_fmt(rec.value)} "
              f"bound={_fmt(rec.bound)} margin={_fmt(rec.margin)} "
              f"band={_fmt(rec.uncertainty)}")
    if cfg.output_path is not None:
        if cfg.format == "json":
            _write_text(cfg.output_path, _json_dump({
                "schema": JSON_SCHEMA_VERSION, "command": "check",
                "depth": str(cfg.depth), "report": _report_obj(report),
                "verdicts": {name: verdict(report.record(name))
                             for name in inequalities.FUNCTIONAL_NAMES},
            }))
        else:
            inequalities.reports_to_csv([report], cfg.output_path)
    return EXIT_OK


def _report_obj(report) -> dict:
    return {
        "shape_id": report.shape_id, "P": report.P, "A": report.A,
        "mu1": report.mu1, "mu1_err": report.mu1_err,
        "nu1": report.nu1, "nu1_inf": report.nu1_inf,
        "records": {
            rec.name: {
                "value": rec.value, "bound": rec.bound, "margin": rec.margin,
                "uncertainty": rec.uncertainty, "applicable": rec.applicable,
                "reason": rec.applicability_reason,
            } for rec in report.records.values()
        },
    }


def _load_family(path):
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    entries = obj["family"] if isinstance(obj, dict) else obj
    family = []
    for i, entry in enumerate(entries):
        if "shape" in entry:
            family.append((float(entry.get("param", i)), spec_from_dict(entry["shape"])))
        else:
            family.append((float(entry.get("param", i)), spec_from_dict(entry)))
    return family


def _cmd_sweep(args) -> int:
    cfg = _config(args, "sweep")
    if cfg.mesh_level < 2:
        _diagnostic("usage", "sweep needs --level >= 2 for extrapolation")
        return EXIT_USAGE
    family = _load_family(args.family)
    result = inequalities.sweep_family(family, cfg.depth, cfg.mesh_level,
                                       seed=cfg.seed, workers=args.workers)
    good = [row.report for row in result.rows if row.report is not None]
    for row in result.rows:
        if row.error is not None:
            _diagnostic("shape-failure", f"{row.shape_id}: {row.error}")
    for name in inequalities.FUNCTIONAL_NAMES:
        if name in result.argmax:
            row = result.argmax[name]
            print(f"argmax {name}: {row.shape_id} param={_fmt(row.param)} "
                  f"value={_fmt(row.report.record(name).value)}")
    if cfg.format == "json":
        text = _json_dump({
            "schema": JSON_SCHEMA_VERSION, "command": "sweep",
            "depth": str(cfg.depth), "level": cfg.mesh_level,
            "rows": [{
                "param": row.param, "shape_id": row.shape_id,
                "report": None if row.report is None else _report_obj(row.report),
                "error": row.error,
            } for row in result.rows],
            "argmax": {name: result.argmax[name].shape_id for name in result.argmax},
        })
        _write_text(cfg.output_path, text)
    else:
        if cfg.output_path is None:
            inequalities.reports_to_csv(good, sys.stdout)
        else:
            inequalities.reports_to_csv(good, cfg.output_path)
    return EXIT_OK if good else EXIT_NUMERICAL


def _cmd_troesch(args) -> int:
    cfg = _config(args, "troesch")
    try:
        basin = _build_basin(args)
    except ValueError as exc:
        _diagnostic("invalid-parameter", str(exc))
        return EXIT_USAGE
    try:
        report = troesch_mod.verify_troesch(basin, n=args.n, seed=cfg.seed)
    except NoConvergenceError as exc:
        _diagnostic("no-convergence", str(exc))
        return EXIT_NUMERICAL
    print(f"{args.basin} nu1={_fmt(report.nu1)} bound={_fmt(report.bound)} "
          f"ratio={_fmt(report.ratio)} equality={str(report.equality).lower()} "
          f"in_regime={str(report.in_regime).lower()}")
    if cfg.output_path is not None:
        if cfg.format == "json":
            text = _json_dump({
                "schema": JSON_SCHEMA_VERSION, "command": "troesch",
                "profile": args.basin, "r0": basin.r0, "m": 1, "n": args.n,
                "nu1": report.nu1, "bound": report.bound, "ratio": report.ratio,
                "equality": report.equality, "in_regime": report.in_regime,
            })
        else:
            text = ("profile,nu1,bound,ratio,equality,in_regime\n"
                    f"{args.basin},{_fmt(report.nu1)},{_fmt(report.bound)},"
                    f"{_fmt(report.ratio)},{str(report.equality).lower()},"
                    f"{str(report.in_regime).lower()}\n")
        _write_text(cfg.output_path, text)
    return EXIT_OK


def _build_basin(args):
    if args.basin == "tabulated":
        if args.profile_file is None:
            raise ValueError("tabulated basin needs --profile-file")
        return troesch_mod.load_tabulated_basin(args.profile_file)
    if args.basin == "parabolic" and args.nu is not None:
        return troesch_mod.parabolic_basin(args.nu, args.r0)
    h0 = args.h0
    if h0 is None:
        raise ValueError(f"{args.basin} basin needs --h0 (or --nu for parabolic)")
    maker = {
        "parabolic": troesch_mod.RadialBasin.parabolic,
        "conical": troesch_mod.RadialBasin.conical,
        "flat": troesch_mod.RadialBasin.flat,
        "quartic": troesch_mod.RadialBasin.quartic,
    }[args.basin]
    return maker(h0, args.r0)


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sloshiso",
        description="Sloshing eigenvalues of vertical-wall containers and "
                    "their isoperimetric bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_modes=False, level_default=5):
        p.add_argument("--level", type=int, default=level_default,
                       help="mesh refinement level, 0..9 (default %(default)s)")
        if with_modes:
            p.add_argument("--modes", type=int, default=4,
                           help="number of eigenvalues, 1..20 (default %(default)s)")
        p.add_argument("--depth", type=_parse_depth, default=DepthSpec.infinite(),
                       help="container depth: positive number or 'inf' (default inf)")
        p.add_argument("--seed", type=_parse_seed, default=DEFAULT_SEED,
                       help="eigensolver start-vector seed (default 0x5EED)")
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="output format (default %(default)s)")

    p = sub.add_parser("mesh", help="triangulate a shape and export the mesh")
    p.add_argument("--shape", required=True, help="shape spec JSON file")
    common(p, level_default=3)
    p.set_defaults(func=_cmd_mesh)

    p = sub.add_parser("eig", help="membrane eigenvalues of a shape")
    p.add_argument("--shape", required=True, help="shape spec JSON file")
    common(p, with_modes=True)
    p.set_defaults(func=_cmd_eig)

    p = sub.add_parser("slosh", help="sloshing eigenvalue over a depth list")
    p.add_argument("--shape", help="shape spec JSON file (mu1 from FEM)")
    p.add_argument("--mu", type=float, help="membrane eigenvalue given directly")
    p.add_argument("--depths", type=_parse_float_list, required=True,
                   help="comma-separated ascending depths")
    p.add_argument("--g", type=float, default=9.81,
                   help="gravitational acceleration (default %(default)s)")
    common(p)
    p.set_defaults(func=_cmd_slosh)

    p = sub.add_parser("check", help="inequality verdicts for one shape")
    p.add_argument("--shape", required=True, help="shape spec JSON file")
    common(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("sweep", help="evaluate a shape family")
    p.add_argument("--family", required=True, help="family JSON file")
    p.add_argument("--workers", type=int, default=None,
                   help="worker pool size (default: SLOSH_ISO_THREADS or CPU count)")
    common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("troesch", help="radial-basin bound check")
    p.add_argument("--basin", required=True,
                   choices=("parabolic", "conical", "flat", "quartic", "tabulated"))
    p.add_argument("--nu", type=float, help="parabolic basin eigenvalue parameter")
    p.add_argument("--h0", type=float, help="center depth")
    p.add_argument("--r0", type=float, default=1.0,
                   help="free-surface radius (default %(default)s)")
    p.add_argument("--n", type=int, default=2000,
                   help="radial grid size (default %(default)s)")
    p.add_argument("--profile-file", help="two-column (r, h) text file")
    common(p)
    p.set_defaults(func=_cmd_troesch)
    return parser


def run(argv) -> int:
    """Parse and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _config(args, args.command)  # validate common invariants up front
    except ValueError as exc:
        _diagnostic("usage", str(exc))
        return EXIT_USAGE
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _diagnostic("io-error", str(exc))
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        _diagnostic("invalid-parameter", str(exc))
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
