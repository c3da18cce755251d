"""Batch driver: single solves, parameter sweeps, and convergence studies.

Command verbs: ``mesh``, ``solve``, ``sweep``, ``converge``, ``analytic``.
Each run writes CSV/VTK artifacts plus a metadata JSON into the output
directory; re-running with identical configuration yields byte-identical
files.  Exit statuses: 0 success, 1 usage/config error, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import postproc
from .assembly import AssemblyError, Method, assemble_all, build_system
from .config import ConfigError, ScatterConfig, shape_to_dict
from .dtn import IncidentField, assemble_tbc, incident_load
from .geometry import (Circle, Ellipse, Kite, Mesh, MeshError, export_mesh,
                       generate_mesh, generate_mesh_for_h, import_mesh, refine,
                       refine_nested)
from .postproc import ErrorReport, boundary_trace, compute_errors, fe_evaluator
from .series import SeriesSolution
from .solve import SolverError, recover_fields, solve_system

#: Analytic-oracle mode count; above the FEM DtN truncation so oracle
#: truncation error sits far below discretization error.
ORACLE_MODES = 25


class RunError(Exception):
    """Numerical failure while executing a run."""


# ---------------------------------------------------------------------------
# Core runs
# ---------------------------------------------------------------------------

def build_config_mesh(config: ScatterConfig) -> Mesh:
    if config.mesh_path is not None:
        return import_mesh(Path(config.mesh_path).read_text())
    return generate_mesh_for_h(config.shape, config.R, config.h_target)


def solve_once(config: ScatterConfig, mesh: Mesh):
    """Assemble and solve one configuration on a given mesh."""
    scalars = assemble_all(mesh)
    tbc = assemble_tbc(mesh, config.kappa, config.R, config.N)
    load = incident_load(mesh, config.kappa, config.R, config.alpha, config.N)
    system = build_system(mesh, scalars, tbc, load, config.kappa, config.method)
    w_vec, residual = solve_system(system)
    incident = IncidentField(config.kappa, config.alpha)
    return recover_fields(w_vec, system, mesh, incident, residual), system


def oracle_evaluator(config: ScatterConfig):
    """Exact-field evaluator per the configured oracle, or None."""
    if config.oracle == "none":
        return None
    if config.oracle == "series":
        if not isinstance(config.shape, Circle):
            raise ConfigError("the series oracle applies only to circular cavities")
        sol = SeriesSolution.build(config.kappa, config.shape.radius,
                                   config.alpha, ORACLE_MODES)
        return sol.evaluator()
    if config.oracle.startswith("reference:"):
        ref_dir = Path(config.oracle.split(":", 1)[1])
        return load_reference(ref_dir)
    raise ConfigError(f"unknown oracle {config.oracle!r}")


def load_reference(run_dir: Path):
    """Evaluator backed by the mesh.txt/field.csv of a previous run."""
    mesh = import_mesh((run_dir / "mesh.txt").read_text())
    field = _read_field_csv((run_dir / "field.csv").read_text(), mesh)
    return fe_evaluator(field, mesh)


def _read_field_csv(text: str, mesh: Mesh):
    from .solve import SolutionField

    rows = text.strip().splitlines()
    if rows[0] != "node_id,x,y,class,Re_p,Im_p,Re_q,Im_q,Re_v,Im_v,Re_w,Im_w":
        raise RunError("unrecognized field CSV header")
    data = np.array([[float(v) for v in r.split(",")[4:]] for r in rows[1:]])
    if len(data) != mesh.n_nodes:
        raise RunError("field CSV does not match the mesh")
    p = data[:, 0] + 1j * data[:, 1]
    q = data[:, 2] + 1j * data[:, 3]
    v = data[:, 4] + 1j * data[:, 5]
    w = data[:, 6] + 1j * data[:, 7]
    return SolutionField(p=p, q=q, u=q - p, v=v, w=w, p_scat=(w - v) / 2,
                         q_scat=(w + v) / 2, residual=0.0)


def run_solve(config: ScatterConfig, out_dir: Path) -> ErrorReport | None:
    """Single solve; writes mesh, field, trace, metadata, optional errors."""
    out_dir.mkdir(parents=True, exist_ok=True)
    mesh = build_config_mesh(config)
    field, system = solve_once(config, mesh)

    (out_dir / "mesh.txt").write_text(export_mesh(mesh))
    (out_dir / "field.csv").write_text(postproc.field_csv(field, mesh))
    (out_dir / "field.vtk").write_text(postproc.vtk_field(field, mesh))
    trace = boundary_trace(field, mesh)
    (out_dir / "trace.csv").write_text(postproc.trace_csv(trace))

    report = None
    exact = oracle_evaluator(config)
    if exact is not None:
        report = compute_errors(field, mesh, exact, config.method,
                                config.kappa, config.N)
        (out_dir / "errors.csv").write_text(postproc.error_csv([report]))

    meta = {
        "config": config.to_dict(),
        "h": mesh.h,
        "dofs": mesh.n_dofs,
        "solver_residual": field.residual,
        "linear_system": "total-field (scattered quantities recovered algebraically)",
        "trace_total_variation": trace.total_variation,
    }
    (out_dir / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return report


def run_sweep(config: ScatterConfig, parameter: str, values: list[float],
              out_dir: Path) -> list[ErrorReport | None]:
    """One error row per parameter value; mesh and all else held fixed."""
    if parameter not in ("gamma", "eta", "kappa"):
        raise ConfigError(f"unknown sweep parameter {parameter!r}")
    if any(v <= 0 for v in values) or list(values) != sorted(values):
        raise ConfigError("sweep values must be positive and sorted")
    out_dir.mkdir(parents=True, exist_ok=True)
    mesh = build_config_mesh(config)
    scalars = assemble_all(mesh)

    reports: list[ErrorReport | None] = []
    failures: list[str] = []
    for value in values:
        kappa = config.kappa
        if parameter == "gamma":
            method = Method.interior_penalty(value)
        elif parameter == "eta":
            method = Method.boundary_penalty(value)
        else:
            kappa = value
            method = config.method
        try:
            tbc = assemble_tbc(mesh, kappa, config.R, config.N)
            load = incident_load(mesh, kappa, config.R, config.alpha, config.N)
            system = build_system(mesh, scalars, tbc, load, kappa, method)
            w_vec, residual = solve_system(system)
            field = recover_fields(w_vec, system, mesh,
                                   IncidentField(kappa, config.alpha), residual)
            cfg = ScatterConfig(**{**config.to_dict(),
                                   "shape": config.shape, "method": method,
                                   "kappa": kappa})
            exact = oracle_evaluator(cfg)
            if exact is None:
                raise ConfigError("sweep requires an oracle to report errors")
            reports.append(compute_errors(field, mesh, exact, method, kappa, config.N))
        except (SolverError, AssemblyError, MeshError) as exc:
            reports.append(None)
            failures.append(f"{parameter}={value!r}: {exc}")

    rows = [r for r in reports if r is not None]
    (out_dir / f"sweep_{parameter}.csv").write_text(postproc.error_csv(rows))
    if failures:
        (out_dir / f"sweep_{parameter}_failures.txt").write_text("\n".join(failures) + "\n")
    return reports


def observed_orders(reports: list[ErrorReport]) -> dict[str, float]:
    """Least-squares slope of log(error) against log(h) per error column."""
    h = np.log([r.h for r in reports])
    out = {}
    for name in ("e_l2_v", "e_h1_v", "e_l2_w", "e_h1_w"):
        e = np.log([getattr(r, name) for r in reports])
        out[name] = float(np.polyfit(h, e, 1)[0])
    return out


def run_convergence(config: ScatterConfig, levels: int, out_dir: Path,
                    reference_extra_refines: int = 2):
    """Solve on successively refined meshes and report observed orders.

    Every level is regenerated at doubled resolution, so each mesh
    resolves the exact curved cavity.  With the series oracle (circular
    cavity) errors are measured against the analytic solution; otherwise
    the truth is an interior-penalty solve on a mesh
    ``reference_extra_refines`` refinements beyond the finest level.
    """
    if levels < 3:
        raise ConfigError("convergence study needs at least 3 levels")
    if config.mesh_path is not None:
        raise ConfigError("convergence study requires a generated mesh")
    out_dir.mkdir(parents=True, exist_ok=True)

    meshes = [generate_mesh_for_h(config.shape, config.R, config.h_target)]
    for _ in range(levels - 1):
        meshes.append(refine(meshes[-1]))

    if isinstance(config.shape, Circle) and config.oracle == "series":
        exact = oracle_evaluator(config)
    else:
        ref_mesh = meshes[-1]
        for _ in range(reference_extra_refines):
            ref_mesh = refine(ref_mesh)
        ref_cfg = ScatterConfig(**{**config.to_dict(), "shape": config.shape,
                                   "method": Method.interior_penalty(config.kappa * 1e-3)})
        ref_field, _ = solve_once(ref_cfg, ref_mesh)
        exact = fe_evaluator(ref_field, ref_mesh)

    reports = []
    for mesh in meshes:
        field, _ = solve_once(config, mesh)
        reports.append(compute_errors(field, mesh, exact, config.method,
                                      config.kappa, config.N))

    (out_dir / "convergence.csv").write_text(postproc.error_csv(reports))
    orders = observed_orders(reports)
    (out_dir / "orders.json").write_text(json.dumps(orders, indent=2, sort_keys=True) + "\n")
    return reports, orders


def run_analytic(config: ScatterConfig, n_radial: int, n_angular: int,
                 out_dir: Path) -> None:
    """Dump the series-oracle fields on a polar grid."""
    if not isinstance(config.shape, Circle):
        raise ConfigError("analytic dump applies only to circular cavities")
    out_dir.mkdir(parents=True, exist_ok=True)
    sol = SeriesSolution.build(config.kappa, config.shape.radius, config.alpha,
                               ORACLE_MODES)
    r = np.linspace(config.shape.radius, config.R, n_radial)
    th = np.linspace(0.0, 2.0 * math.pi, n_angular, endpoint=False)
    rr, tt = np.meshgrid(r, th, indexing="ij")
    out = sol.eval_polar(rr.ravel(), tt.ravel())
    lines = ["r,theta,Re_v,Im_v,Re_w,Im_w"]
    for rv, tv, v, w in zip(rr.ravel(), tt.ravel(), out["v"], out["w"]):
        rv, tv, v, w = float(rv), float(tv), complex(v), complex(w)
        lines.append(f"{rv!r},{tv!r},{v.real!r},{v.imag!r},{w.real!r},{w.imag!r}")
    (out_dir / "analytic.csv").write_text("\n".join(lines) + "\n")
    (out_dir / "modes.csv").write_text(sol.coefficients_csv())


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------

def _parse_shape(text: str):
    kind, _, rest = text.partition(":")
    try:
        params = [float(x) for x in rest.split(",")] if rest else []
        if kind == "circle" and len(params) == 1:
            return Circle(*params)
        if kind == "ellipse" and len(params) == 2:
            return Ellipse(*params)
        if kind == "kite" and len(params) == 3:
            return Kite(*params)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    raise argparse.ArgumentTypeError(
        "expected circle:R, ellipse:a,b or kite:a,b,c")


def _parse_method(text: str):
    kind, _, rest = text.partition(":")
    try:
        if kind == "regular" and not rest:
            return Method.regular()
        if kind == "ip":
            return Method.interior_penalty(float(rest))
        if kind == "bp":
            return Method.boundary_penalty(float(rest))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    raise argparse.ArgumentTypeError("expected regular, ip:<gamma> or bp:<eta>")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--kappa", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--R", type=float, dest="R")
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--h", type=float, dest="h_target")
    p.add_argument("--shape", type=_parse_shape)
    p.add_argument("--method", type=_parse_method)
    p.add_argument("--mesh", dest="mesh_path", help="import mesh from file")
    p.add_argument("--oracle", help="series | none | reference:<run dir>")


def _config_from_args(args) -> ScatterConfig:
    if args.config:
        cfg = ScatterConfig.from_json(Path(args.config).read_text())
    else:
        cfg = ScatterConfig()
    for key in ("kappa", "alpha", "R", "N", "h_target", "mesh_path", "oracle"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "shape", None) is not None:
        cfg.shape = args.shape
    if getattr(args, "method", None) is not None:
        cfg.method = args.method
    if args.out:
        cfg.out_dir = args.out
    cfg.__post_init__()
    return cfg


def _parse_values(args) -> list[float]:
    if args.values:
        return [float(v) for v in args.values.split(",")]
    lo, hi, count = args.logspace
    return list(np.logspace(math.log10(lo), math.log10(hi), int(count)))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="flexscat",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="generate a mesh and write it as ASCII")
    _add_common(p)

    p = sub.add_parser("solve", help="single solve with artifact export")
    _add_common(p)

    p = sub.add_parser("sweep", help="parameter sweep at fixed mesh")
    _add_common(p)
    p.add_argument("--param", required=True, choices=("gamma", "eta", "kappa"))
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--values", help="comma-separated values")
    group.add_argument("--logspace", nargs=3, type=float,
                       metavar=("LO", "HI", "COUNT"))

    p = sub.add_parser("converge", help="refinement study with observed orders")
    _add_common(p)
    p.add_argument("--levels", type=int, default=4)

    p = sub.add_parser("analytic", help="dump the series oracle on a grid")
    _add_common(p)
    p.add_argument("--nr", type=int, default=32)
    p.add_argument("--ntheta", type=int, default=128)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; remap to the 1 contract
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = _config_from_args(args)
        out_dir = Path(cfg.out_dir)
        if args.command == "mesh":
            mesh = build_config_mesh(cfg)
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "mesh.txt").write_text(export_mesh(mesh))
            meta = {"h": mesh.h, "dofs": mesh.n_dofs,
                    "nodes": mesh.n_nodes, "triangles": mesh.n_triangles,
                    "shape": shape_to_dict(cfg.shape)}
            (out_dir / "mesh_metadata.json").write_text(
                json.dumps(meta, indent=2, sort_keys=True) + "\n")
        elif args.command == "solve":
            run_solve(cfg, out_dir)
        elif args.command == "sweep":
            run_sweep(cfg, args.param, _parse_values(args), out_dir)
        elif args.command == "converge":
            run_convergence(cfg, args.levels, out_dir)
        elif args.command == "analytic":
            run_analytic(cfg, args.nr, args.ntheta, out_dir)
    except (ConfigError, FileNotFoundError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MeshError, AssemblyError, SolverError, RunError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
