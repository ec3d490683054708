"""Global stiffness assembly, point loads, Dirichlet elimination and solve."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components

from vem2d.element import DEFAULT_STABILIZATION, ElementError, ElementGeometry, Stabilization, element_stiffness
from vem2d.geometry import GeometryError
from vem2d.material import Material
from vem2d.mesh import Mesh

log = logging.getLogger(__name__)

DIRECT_MAX_DOFS = 200_000


class SingularSystemError(ArithmeticError):
    """The reduced stiffness is singular: insufficient restraints or a disconnected mesh."""


class ConvergenceError(ArithmeticError):
    pass


@dataclass
class LoadCase:
    """Nodal point loads and prescribed displacements (0-based node ids).

    ``point_loads`` holds ``(node, fx, fy)`` entries; repeated nodes add up.
    ``dirichlet`` maps a global dof ``2 * node + component`` to its value.
    """

    point_loads: list[tuple[int, float, float]] = field(default_factory=list)
    dirichlet: dict[int, float] = field(default_factory=dict)

    def add_load(self, node: int, fx: float = 0.0, fy: float = 0.0) -> None:
        self.point_loads.append((int(node), float(fx), float(fy)))

    def fix(self, node: int, ux: float | None = None, uy: float | None = None) -> None:
        if ux is not None:
            self.dirichlet[2 * int(node)] = float(ux)
        if uy is not None:
            self.dirichlet[2 * int(node) + 1] = float(uy)

    def check(self, n_nodes: int) -> None:
        for node, _, _ in self.point_loads:
            if not 0 <= node < n_nodes:
                raise ValueError(f"load references unknown node {node + 1}")
        for dof in self.dirichlet:
            if not 0 <= dof < 2 * n_nodes:
                raise ValueError(f"constraint references unknown node {dof // 2 + 1}")
        for node, fx, fy in self.point_loads:
            for comp, f in ((0, fx), (1, fy)):
                if f != 0.0 and 2 * node + comp in self.dirichlet:
                    raise ValueError(f"dof {'xy'[comp]} of node {node + 1} is both loaded and constrained")


@dataclass(eq=False)
class GlobalSystem:
    K: sp.csr_matrix
    F: np.ndarray
    constraints: dict[int, float] = field(default_factory=dict)

    @property
    def n_dofs(self) -> int:
        return self.K.shape[0]


def element_matrices(mesh: Mesh, material: Material, variant: Stabilization = DEFAULT_STABILIZATION, thickness: float = 1.0, verify: bool = False):
    """Yield ``(e, k_E, projectors)`` for every element."""
    for e in range(mesh.n_elements):
        try:
            geom = ElementGeometry.from_vertices(mesh.element_vertices(e))
            k_E, proj = element_stiffness(geom, material, variant, thickness, element_id=e + 1, verify=verify)
        except GeometryError as exc:
            raise GeometryError(f"element {e + 1}: {exc}") from exc
        except ElementError as exc:
            raise ElementError(f"element {e + 1}: {exc}") from exc
        yield e, k_E, proj


def assemble(mesh: Mesh, material: Material, variant: Stabilization = DEFAULT_STABILIZATION, thickness: float = 1.0, verify: bool = False) -> sp.csr_matrix:
    """Global stiffness ``K`` (CSR), global dof ``2 * node + component``."""
    rows, cols, vals = [], [], []
    for e, k_E, _ in element_matrices(mesh, material, variant, thickness, verify):
        dofs = mesh.element_dofs(e)
        rows.append(np.repeat(dofs, len(dofs)))
        cols.append(np.tile(dofs, len(dofs)))
        vals.append(k_E.ravel())
    n = mesh.n_dofs
    if not vals:
        return sp.csr_matrix((n, n))
    K = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()
    K.sum_duplicates()
    return K


def assemble_loads(mesh: Mesh, loads: LoadCase) -> np.ndarray:
    F = np.zeros(mesh.n_dofs)
    for node, fx, fy in loads.point_loads:
        if not 0 <= node < mesh.n_nodes:
            raise ValueError(f"load references unknown node {node + 1}")
        F[2 * node] += fx
        F[2 * node + 1] += fy
    return F


def build_system(mesh: Mesh, material: Material, loads: LoadCase, variant: Stabilization = DEFAULT_STABILIZATION, thickness: float = 1.0, verify: bool = False) -> GlobalSystem:
    loads.check(mesh.n_nodes)
    check_restraints(mesh, loads.dirichlet)
    K = assemble(mesh, material, variant, thickness, verify)
    return GlobalSystem(K, assemble_loads(mesh, loads), dict(loads.dirichlet))


def check_restraints(mesh: Mesh, constraints) -> None:
    """Raise :class:`SingularSystemError` unless every connected part of the
    mesh has its three rigid-body modes removed by the constrained dofs."""
    constrained = np.zeros(mesh.n_dofs, dtype=bool)
    constrained[list(constraints)] = True
    n = mesh.n_nodes
    if mesh.n_elements:
        r = np.concatenate([np.repeat(c, len(c)) for c in mesh.elements])
        c = np.concatenate([np.tile(c, len(c)) for c in mesh.elements])
        adj = sp.coo_matrix((np.ones(len(r)), (r, c)), shape=(n, n))
        n_parts, labels = connected_components(adj, directed=False)
    else:
        n_parts, labels = n, np.arange(n)
    used = np.zeros(n, dtype=bool)
    for conn in mesh.elements:
        used[conn] = True
    for part in range(n_parts):
        nodes = np.flatnonzero(labels == part)
        if not used[nodes].any():
            if not constrained[np.concatenate([2 * nodes, 2 * nodes + 1])].all():
                raise SingularSystemError(
                    f"insufficient restraints or disconnected mesh: node {nodes[0] + 1} belongs to no element and is not fully constrained"
                )
            continue
        xy = mesh.nodes[nodes]
        xy = (xy - xy.mean(axis=0)) / max(np.ptp(xy, axis=0).max(), 1e-300)
        R = np.zeros((2 * len(nodes), 3))
        R[0::2, 0] = 1.0
        R[1::2, 1] = 1.0
        R[0::2, 2] = -xy[:, 1]
        R[1::2, 2] = xy[:, 0]
        mask = constrained[np.column_stack([2 * nodes, 2 * nodes + 1]).ravel()]
        if np.linalg.matrix_rank(R[mask], tol=1e-10) < 3:
            raise SingularSystemError(
                "insufficient restraints or disconnected mesh: rigid-body motion of the part "
                f"containing node {nodes[0] + 1} is not restrained"
            )


def solve(system: GlobalSystem, tol: float = 1e-10, method: str = "auto") -> np.ndarray:
    """Solve ``K u = F`` with prescribed dofs eliminated symmetrically.

    ``method`` is ``"direct"`` (sparse LU), ``"cg"`` (Jacobi-preconditioned
    conjugate gradients) or ``"auto"`` (direct up to ``DIRECT_MAX_DOFS`` free
    dofs, falling back to CG if the factorization runs out of memory).
    """
    n = system.n_dofs
    u = np.zeros(n)
    fixed = np.array(sorted(system.constraints), dtype=np.int64)
    if fixed.size:
        u[fixed] = [system.constraints[d] for d in fixed]
    free = np.setdiff1d(np.arange(n), fixed)
    if free.size == 0:
        return u
    K = system.K.tocsr()
    K_ff = K[free][:, free].tocsc()
    rhs = system.F[free] - (K[free][:, fixed] @ u[fixed] if fixed.size else 0.0)
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        return u

    if method == "auto":
        method = "direct" if free.size <= DIRECT_MAX_DOFS else "cg"
    if method == "direct":
        try:
            u_f = _solve_direct(K_ff, rhs, tol, rhs_norm)
        except MemoryError:
            log.warning("direct factorization ran out of memory; falling back to CG")
            u_f = _solve_cg(K_ff, rhs, tol, rhs_norm)
    elif method == "cg":
        u_f = _solve_cg(K_ff, rhs, tol, rhs_norm)
    else:
        raise ValueError(f"unknown solver method {method!r}")
    u[free] = u_f
    return u


def _solve_direct(K_ff, rhs, tol, rhs_norm):
    try:
        lu = spla.splu(K_ff)
    except RuntimeError as exc:
        raise SingularSystemError(f"singular reduced stiffness (insufficient restraints or disconnected mesh): {exc}") from exc
    x = lu.solve(rhs)
    for _ in range(3):
        r = rhs - K_ff @ x
        if np.linalg.norm(r) <= tol * rhs_norm:
            break
        x = x + lu.solve(r)
    res = np.linalg.norm(rhs - K_ff @ x)
    if not np.isfinite(res) or res > tol * rhs_norm:
        raise SingularSystemError(f"reduced stiffness is numerically singular (relative residual {res / rhs_norm:.3g})")
    return x


def _solve_cg(K_ff, rhs, tol, rhs_norm):
    diag = K_ff.diagonal()
    if np.any(diag <= 0):
        raise SingularSystemError("reduced stiffness has a non-positive diagonal entry")
    M = sp.diags(1.0 / diag)
    x, info = spla.cg(K_ff, rhs, rtol=tol, atol=0.0, maxiter=20 * K_ff.shape[0], M=M)
    res = np.linalg.norm(rhs - K_ff @ x)
    if info != 0 or res > tol * rhs_norm * 1.0001:
        raise ConvergenceError(f"CG did not converge (info={info}, relative residual {res / rhs_norm:.3g})")
    return x


def global_internal_force(mesh: Mesh, material: Material, variant: Stabilization, u, thickness: float = 1.0) -> np.ndarray:
    """Assemble ``k_E @ u_E`` over all elements."""
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_dofs,):
        raise ValueError(f"expected {mesh.n_dofs} displacement entries, got shape {u.shape}")
    F = np.zeros(mesh.n_dofs)
    for e, k_E, _ in element_matrices(mesh, material, variant, thickness):
        dofs = mesh.element_dofs(e)
        np.add.at(F, dofs, k_E @ u[dofs])
    return F


def reactions(system: GlobalSystem, u) -> np.ndarray:
    """Reaction forces on constrained dofs (zero elsewhere): ``(K u - F)`` restricted."""
    r = np.zeros(system.n_dofs)
    fixed = np.array(sorted(system.constraints), dtype=np.int64)
    if fixed.size:
        r[fixed] = (system.K @ u - system.F)[fixed]
    return r
