"""Reference problems: single pentagon, end-loaded cantilever, plate with hole."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vem2d.assembly import LoadCase, build_system, solve
from vem2d.element import DEFAULT_STABILIZATION, Stabilization
from vem2d.material import Material, PlaneMode
from vem2d.mesh import Mesh
from vem2d.meshgen import RectDomain, generate_structured, generate_voronoi
from vem2d.postproc import SolutionField, recover_fields, scalar_metrics
from vem2d.problem import Problem

PENTAGON = np.array([(0.0, 0.0), (3.0, 0.0), (3.0, 2.0), (1.5, 4.0), (0.0, 4.0)])

CANTILEVER_LENGTH = 12.0
CANTILEVER_DEPTH = 1.0
CANTILEVER_LOAD = 0.1
PLATE_SIZE = 10.0
PLATE_HOLE_RADIUS = 1.0
PLATE_TRACTION = 1.0
STEEL_LIKE = Material(1000.0, 0.3, PlaneMode.PLANE_STRESS)


def pentagon_problem() -> Problem:
    mesh = Mesh(PENTAGON, [[0, 1, 2, 3, 4]], {"support": [0, 4]})
    loads = LoadCase()
    loads.fix(0, ux=0.0, uy=0.0)
    loads.fix(4, ux=0.0)
    for node, fx in ((1, 40.0), (2, 80.0), (3, 40.0)):
        loads.add_load(node, fx=fx)
    return Problem(mesh, STEEL_LIKE, loads, 1.0)


def edge_traction_loads(mesh: Mesh, on_edge, traction) -> list[tuple[int, float, float]]:
    """Lump a uniform traction onto the end nodes of every boundary edge whose
    two nodes satisfy ``on_edge(x, y)``; half of each edge's force per node."""
    on = on_edge(mesh.nodes[:, 0], mesh.nodes[:, 1])
    tx, ty = traction
    acc: dict[int, list[float]] = {}
    for a, b in mesh.boundary_edges():
        if on[a] and on[b]:
            half = 0.5 * np.linalg.norm(mesh.nodes[b] - mesh.nodes[a])
            for n in (a, b):
                f = acc.setdefault(n, [0.0, 0.0])
                f[0] += half * tx
                f[1] += half * ty
    return [(n, fx, fy) for n, (fx, fy) in sorted(acc.items())]


def cantilever_problem(mesh: Mesh, load: float = CANTILEVER_LOAD, material: Material = STEEL_LIKE) -> Problem:
    """Every node on ``x = 0`` pinned; total downward ``load`` spread uniformly
    over the free end ``x = L``."""
    x0, x1 = mesh.bounding_box()[0][0], mesh.bounding_box()[1][0]
    depth = np.ptp(mesh.nodes[:, 1])
    tol = 1e-9 * mesh.diameter()
    loads = LoadCase()
    for n in mesh.nodes_where(lambda x, y: np.abs(x - x0) <= tol):
        loads.fix(n, 0.0, 0.0)
    for n, fx, fy in edge_traction_loads(mesh, lambda x, y: np.abs(x - x1) <= tol, (0.0, -load / depth)):
        loads.add_load(n, fx, fy)
    return Problem(mesh, material, loads, 1.0)


def cantilever_mesh(n_elements: int | None = None, structured: tuple[int, int] | None = None, seed: int = 0, lloyd_iters: int = 20) -> Mesh:
    if structured is not None:
        return generate_structured(CANTILEVER_LENGTH, CANTILEVER_DEPTH, *structured)
    return generate_voronoi(RectDomain(CANTILEVER_LENGTH, CANTILEVER_DEPTH), n_elements, lloyd_iters, seed)


def plate_problem(mesh: Mesh, traction: float = PLATE_TRACTION, material: Material = STEEL_LIKE) -> Problem:
    """Quadrant of a plate with a central hole under uniaxial x tension.
    Symmetry supports: ``ux = 0`` on ``x = 0``, ``uy = 0`` on ``y = 0``."""
    lo, hi = mesh.bounding_box()
    tol = 1e-9 * mesh.diameter()
    loads = LoadCase()
    for n in mesh.nodes_where(lambda x, y: np.abs(x - lo[0]) <= tol):
        loads.fix(n, ux=0.0)
    for n in mesh.nodes_where(lambda x, y: np.abs(y - lo[1]) <= tol):
        loads.fix(n, uy=0.0)
    for n, fx, fy in edge_traction_loads(mesh, lambda x, y: np.abs(x - hi[0]) <= tol, (traction, 0.0)):
        loads.add_load(n, fx, fy)
    return Problem(mesh, material, loads, 1.0)


def plate_mesh(n_elements: int, seed: int = 0, lloyd_iters: int = 5) -> Mesh:
    dom = RectDomain(PLATE_SIZE, PLATE_SIZE, hole_radius=PLATE_HOLE_RADIUS)
    return generate_voronoi(dom, n_elements, lloyd_iters, seed)


@dataclass(eq=False)
class RunResult:
    problem: Problem
    u: np.ndarray
    field: SolutionField
    metrics: dict[str, float]
    system: object


def run(problem: Problem, variant: Stabilization = DEFAULT_STABILIZATION, probe=None, tol: float = 1e-10) -> RunResult:
    system = build_system(problem.mesh, problem.material, problem.loads, variant, problem.thickness)
    u = solve(system, tol=tol)
    field = recover_fields(problem.mesh, problem.material, u)
    return RunResult(problem, u, field, scalar_metrics(field, problem.mesh, probe), system)


def cantilever_tip() -> tuple[float, float]:
    return CANTILEVER_LENGTH, 0.5 * CANTILEVER_DEPTH
