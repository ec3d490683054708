"""Command-line driver.

Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure,
3 mesh/problem validation failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from vem2d import benchmarks
from vem2d.assembly import ConvergenceError, LoadCase, SingularSystemError, build_system, reactions, solve
from vem2d.element import (
    DEFAULT_STABILIZATION,
    ElementError,
    ElementGeometry,
    element_stiffness,
    element_strain,
    element_stress,
    parse_stabilization,
)
from vem2d.geometry import GeometryError
from vem2d.material import Material, PlaneMode
from vem2d.mesh import validate
from vem2d.meshgen import MeshGenerationError, RectDomain, generate_structured, generate_voronoi
from vem2d.postproc import beam_theory_tip, recover_fields, scalar_metrics, write_csv, write_vtk
from vem2d.problem import Problem, ProblemFormatError, format_problem, read_problem

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_INVALID = 0, 1, 2, 3

log = logging.getLogger("vem2d")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _stab(text):
    try:
        return parse_stabilization(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vem2d", description="Virtual element method (k=1) for 2D linear elasticity.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def numerics(sp):
        sp.add_argument("--stab", type=_stab, default=DEFAULT_STABILIZATION,
                        help=f"stabilization, 'trace:TAU' or 'diag:ALPHA0' (default {DEFAULT_STABILIZATION})")
        sp.add_argument("--tol", type=_positive, default=1e-10, help="relative residual tolerance")
        sp.add_argument("--verify", action="store_true", help="cross-check G_tilde by direct boundary quadrature")

    s = sub.add_parser("solve", help="solve a problem file and write results")
    s.add_argument("problem")
    s.add_argument("--out", default="out", help="output directory")
    s.add_argument("--probe", nargs=2, type=float, metavar=("X", "Y"), help="report displacement of the node nearest to (X, Y)")
    numerics(s)

    s = sub.add_parser("element-check", help="dump element matrices for a one-element problem")
    s.add_argument("problem")
    numerics(s)

    s = sub.add_parser("meshgen", help="generate a problem file")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--structured", nargs=4, metavar=("W", "H", "NX", "NY"))
    g.add_argument("--voronoi", nargs=3, metavar=("W", "H", "N"))
    s.add_argument("--lloyd", type=int, default=0, help="Lloyd smoothing passes")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--hole", type=float, default=0.0, help="quarter-hole radius at the lower-left corner (Voronoi only)")
    s.add_argument("--preset", choices=("none", "cantilever", "plate"), default="none",
                   help="add supports and loads for a reference problem")
    s.add_argument("--load", type=float, default=None, help="total end load (cantilever) or traction (plate)")
    s.add_argument("--E", type=_positive, default=1000.0)
    s.add_argument("--nu", type=float, default=0.3)
    s.add_argument("--mode", choices=[m.value for m in PlaneMode], default="plane_stress")
    s.add_argument("--thickness", type=_positive, default=1.0)
    s.add_argument("-o", "--output", help="output file (default: stdout)")

    s = sub.add_parser("convergence", help="refinement study on a generated domain")
    s.add_argument("--case", choices=("cantilever", "plate"), default="cantilever")
    s.add_argument("--levels", nargs="+", type=int, required=True, help="element counts")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--lloyd", type=int, default=None)
    s.add_argument("--out", default=None, help="directory for convergence.csv")
    numerics(s)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"solve": cmd_solve, "element-check": cmd_element_check, "meshgen": cmd_meshgen,
               "convergence": cmd_convergence}[args.command]
    try:
        handler(args)
    except CliError as exc:
        print(f"vem2d: error: {exc}", file=sys.stderr)
        return exc.code
    except (SingularSystemError, ConvergenceError, ElementError) as exc:
        print(f"vem2d: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GeometryError, MeshGenerationError) as exc:
        print(f"vem2d: invalid geometry: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"vem2d: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def _load(path) -> Problem:
    try:
        problem = read_problem(path)
    except ProblemFormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVALID) from None
    report = validate(problem.mesh)
    if not report.ok:
        raise CliError(f"{path}: invalid mesh\n{report}", EXIT_INVALID)
    return problem


def cmd_solve(args) -> dict:
    problem = _load(args.problem)
    system = build_system(problem.mesh, problem.material, problem.loads, args.stab, problem.thickness, verify=args.verify)
    u = solve(system, tol=args.tol)
    field = recover_fields(problem.mesh, problem.material, u)
    metrics = scalar_metrics(field, problem.mesh, args.probe)
    r = reactions(system, u)
    metrics["reaction_x"] = float(r[0::2].sum())
    metrics["reaction_y"] = float(r[1::2].sum())
    metrics["n_elements"] = problem.mesh.n_elements
    metrics["n_nodes"] = problem.mesh.n_nodes
    metrics["stabilization"] = str(args.stab)

    os.makedirs(args.out, exist_ok=True)
    write_csv(args.out, problem.mesh, field)
    write_vtk(os.path.join(args.out, "solution.vtk"), problem.mesh, field)
    with open(os.path.join(args.out, "metrics.kv"), "w", newline="\n") as f:
        for k, v in metrics.items():
            f.write(f"{k}={v!r}\n" if isinstance(v, float) else f"{k}={v}\n")
    summary = _metrics_summary(metrics)
    with open(os.path.join(args.out, "metrics.txt"), "w", newline="\n") as f:
        f.write(summary)
    print(summary, end="")
    return metrics


def _metrics_summary(metrics: dict) -> str:
    lines = [f"elements: {metrics['n_elements']}  nodes: {metrics['n_nodes']}  stabilization: {metrics['stabilization']}"]
    if "tip_uy" in metrics:
        lines.append(
            f"probe node {metrics['probe_node']} at ({metrics['probe_x']:.4f}, {metrics['probe_y']:.4f}): "
            f"ux = {metrics['tip_ux']:.6g}, uy = {metrics['tip_uy']:.6g}"
        )
    for c in ("xx", "yy", "xy"):
        lines.append(f"sigma_{c}: min {metrics[f'min_sigma_{c}']:.4f}  max {metrics[f'max_sigma_{c}']:.4f}")
    lines.append(f"max |u|: {metrics['max_displacement']:.6g}")
    lines.append(f"reaction sum: ({metrics['reaction_x']:.6g}, {metrics['reaction_y']:.6g})")
    return "\n".join(lines) + "\n"


def format_matrix(A) -> str:
    """Fixed 4-decimal columns of width 10; exact zeros print as ``0``."""
    A = np.atleast_2d(A)
    rows = []
    for row in A:
        cells = []
        for v in row:
            if v == 0.0:
                cells.append(f"{'0':>10}")
            else:
                s = f"{v:10.4f}"
                cells.append(s.replace("-0.0000", " 0.0000") if s.strip() == "-0.0000" else s)
        rows.append("".join(cells))
    return "\n".join(rows)


def element_check_report(problem: Problem, stab=DEFAULT_STABILIZATION, tol: float = 1e-10, verify: bool = False) -> str:
    if problem.mesh.n_elements != 1:
        raise CliError("element-check requires exactly one element", EXIT_INVALID)
    mesh, mat = problem.mesh, problem.material
    geom = ElementGeometry.from_vertices(mesh.element_vertices(0))
    k_E, proj = element_stiffness(geom, mat, stab, problem.thickness, element_id=1, verify=verify)
    system = build_system(mesh, mat, problem.loads, stab, problem.thickness, verify=verify)
    u = solve(system, tol=tol)
    u_e = u[mesh.element_dofs(0)]
    strain = element_strain(proj, geom.frame, u_e)
    stress = element_stress(mat, strain)
    c = geom.frame.centroid
    out = [
        f"Centroid location: x={c[0]:.4f}, y={c[1]:.4f}",
        f"Number of vertices: n_v={geom.n_vertices}",
        f"Number of dofs: 2n_d={2 * geom.n_vertices}",
        f"Polygon Diameter: h_E={geom.frame.diameter:.4f}",
        f"Polygon Area: |E|={geom.area:.4f}",
        "B_bar matrix:", format_matrix(proj.B_bar),
        "D matrix:", format_matrix(proj.D),
        "G matrix:", format_matrix(proj.G),
        "Pi_tilde matrix:", format_matrix(proj.Pi_tilde),
        "Pi matrix:", format_matrix(proj.Pi),
        "kE, element stiffness matrix:", format_matrix(k_E),
        "u_x, u_y, nodal displacements:", format_matrix(u_e.reshape(-1, 2)),
        "strains (eps_x, eps_y, gamma_xy):", format_matrix(strain[:, None]),
        "stresses (sigma_x, sigma_y, sigma_xy):", format_matrix(stress[:, None]),
    ]
    return "\n".join(out) + "\n"


def cmd_element_check(args) -> str:
    problem = _load(args.problem)
    text = element_check_report(problem, args.stab, args.tol, args.verify)
    print(text, end="")
    return text


def cmd_meshgen(args) -> str:
    try:
        material = Material(args.E, args.nu, PlaneMode(args.mode))
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    try:
        if args.structured:
            w, h, nx, ny = float(args.structured[0]), float(args.structured[1]), int(args.structured[2]), int(args.structured[3])
            if args.hole:
                raise CliError("--hole is only supported with --voronoi", EXIT_USAGE)
            mesh = generate_structured(w, h, nx, ny)
        else:
            w, h, n = float(args.voronoi[0]), float(args.voronoi[1]), int(args.voronoi[2])
            mesh = generate_voronoi(RectDomain(w, h, hole_radius=args.hole), n, args.lloyd, args.seed)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None

    if args.preset == "cantilever":
        problem = benchmarks.cantilever_problem(mesh, args.load if args.load is not None else benchmarks.CANTILEVER_LOAD, material)
    elif args.preset == "plate":
        problem = benchmarks.plate_problem(mesh, args.load if args.load is not None else benchmarks.PLATE_TRACTION, material)
    else:
        problem = Problem(mesh, material, LoadCase())
    problem.thickness = args.thickness
    report = validate(mesh)
    if not report.ok:
        raise CliError(f"generated mesh is invalid\n{report}", EXIT_INVALID)
    text = format_problem(problem)
    if args.output:
        d = os.path.dirname(os.path.abspath(args.output))
        os.makedirs(d, exist_ok=True)
        with open(args.output, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return text


def convergence_study(case: str, levels, seed: int = 0, lloyd=None, stab=DEFAULT_STABILIZATION, tol: float = 1e-10):
    """Rows of ``(n_elements, tip_displacement, max_sigma_xx)``.

    For the cantilever the tip displacement is ``|uy|`` at the node nearest to
    the end mid-depth; for the plate it is ``ux`` at the loaded corner.
    """
    rows = []
    for n in levels:
        if case == "cantilever":
            mesh = benchmarks.cantilever_mesh(n, seed=seed, lloyd_iters=20 if lloyd is None else lloyd)
            problem = benchmarks.cantilever_problem(mesh)
            probe = benchmarks.cantilever_tip()
        elif case == "plate":
            mesh = benchmarks.plate_mesh(n, seed=seed, lloyd_iters=5 if lloyd is None else lloyd)
            problem = benchmarks.plate_problem(mesh)
            probe = (benchmarks.PLATE_SIZE, benchmarks.PLATE_SIZE)
        else:
            raise ValueError(f"unknown case {case!r}")
        res = benchmarks.run(problem, stab, probe=probe, tol=tol)
        tip = abs(res.metrics["tip_uy"]) if case == "cantilever" else res.metrics["tip_ux"]
        rows.append((mesh.n_elements, tip, res.metrics["max_sigma_xx"]))
    return rows


def cmd_convergence(args):
    rows = convergence_study(args.case, args.levels, args.seed, args.lloyd, args.stab, args.tol)
    header = ("n_elements", "tip_displacement", "max_sigma_xx")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "convergence.csv"), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            w.writerows([(n, repr(t), repr(s)) for n, t, s in rows])
    print(f"{header[0]:>12} {header[1]:>18} {header[2]:>14}")
    for n, t, s in rows:
        print(f"{n:>12d} {t:>18.6f} {s:>14.6f}")
    if args.case == "cantilever":
        ref = beam_theory_tip(benchmarks.CANTILEVER_LOAD, benchmarks.CANTILEVER_LENGTH, benchmarks.STEEL_LIKE.youngs_modulus,
                              benchmarks.CANTILEVER_DEPTH**3 / 12.0)
        print(f"beam theory tip displacement: {ref:.6f}")
    return rows


if __name__ == "__main__":
    sys.exit(main())
