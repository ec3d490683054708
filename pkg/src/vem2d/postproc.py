"""Strain/stress recovery, scalar metrics and file export."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from vem2d.element import ElementGeometry, compute_projectors, element_strain, element_stress
from vem2d.material import Material
from vem2d.mesh import Mesh

STRESS_NAMES = ("sigma_xx", "sigma_yy", "sigma_xy")
STRAIN_NAMES = ("eps_xx", "eps_yy", "gamma_xy")


@dataclass(eq=False)
class SolutionField:
    """Nodal displacements (flat, interleaved) and per-element constant strain/stress."""

    displacements: np.ndarray
    strains: np.ndarray
    stresses: np.ndarray

    @property
    def nodal_displacements(self) -> np.ndarray:
        return self.displacements.reshape(-1, 2)


def recover_fields(mesh: Mesh, material: Material, u) -> SolutionField:
    u = np.asarray(u, dtype=float)
    strains = np.empty((mesh.n_elements, 3))
    stresses = np.empty((mesh.n_elements, 3))
    for e in range(mesh.n_elements):
        geom = ElementGeometry.from_vertices(mesh.element_vertices(e))
        proj = compute_projectors(geom, material, element_id=e + 1)
        strains[e] = element_strain(proj, geom.frame, u[mesh.element_dofs(e)])
        stresses[e] = element_stress(material, strains[e])
    return SolutionField(u, strains, stresses)


def scalar_metrics(field: SolutionField, mesh: Mesh, probe=None) -> dict[str, float]:
    """Extremes of each stress component, max displacement magnitude and,
    if ``probe`` is given, the displacement of the node nearest to it."""
    if mesh.n_elements == 0:
        raise ValueError("empty mesh")
    out: dict[str, float] = {}
    if probe is not None:
        node = mesh.nearest_node(probe)
        ux, uy = field.nodal_displacements[node]
        out.update(probe_node=node + 1, probe_x=float(mesh.nodes[node, 0]), probe_y=float(mesh.nodes[node, 1]),
                   tip_ux=float(ux), tip_uy=float(uy))
    for k, name in enumerate(STRESS_NAMES):
        out[f"max_{name}"] = float(field.stresses[:, k].max())
        out[f"min_{name}"] = float(field.stresses[:, k].min())
    out["max_abs_sigma_xx"] = float(np.abs(field.stresses[:, 0]).max())
    out["max_displacement"] = float(np.linalg.norm(field.nodal_displacements, axis=1).max())
    return out


def beam_theory_tip(P: float, L: float, E: float, I: float) -> float:
    """Euler-Bernoulli cantilever tip deflection ``P L^3 / (3 E I)``."""
    return P * L**3 / (3.0 * E * I)


def write_vtk(path, mesh: Mesh, field: SolutionField, title: str = "vem2d solution") -> None:
    """Legacy ASCII VTK unstructured grid with polygon cells (type 7)."""
    if mesh.n_elements == 0:
        raise ValueError("empty mesh")
    lines = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {mesh.n_nodes} double")
    lines += [f"{x:.17g} {y:.17g} 0" for x, y in mesh.nodes]
    size = sum(len(c) + 1 for c in mesh.elements)
    lines.append(f"CELLS {mesh.n_elements} {size}")
    lines += [f"{len(c)} " + " ".join(str(int(i)) for i in c) for c in mesh.elements]
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines += ["7"] * mesh.n_elements
    lines.append(f"POINT_DATA {mesh.n_nodes}")
    lines.append("VECTORS displacement double")
    lines += [f"{ux:.17g} {uy:.17g} 0" for ux, uy in field.nodal_displacements]
    lines.append(f"CELL_DATA {mesh.n_elements}")
    for name, tensors in (("stress", _voigt_tensors(field.stresses, 1.0)), ("strain", _voigt_tensors(field.strains, 0.5))):
        lines.append(f"TENSORS {name} double")
        for t in tensors:
            lines += [" ".join(f"{v:.17g}" for v in row) for row in t]
    for k, name in enumerate(STRESS_NAMES + STRAIN_NAMES):
        data = field.stresses[:, k] if k < 3 else field.strains[:, k - 3]
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines += [f"{v:.17g}" for v in data]
    _write_text(path, "\n".join(lines) + "\n")


def _voigt_tensors(v: np.ndarray, shear_factor: float) -> np.ndarray:
    t = np.zeros((len(v), 3, 3))
    t[:, 0, 0] = v[:, 0]
    t[:, 1, 1] = v[:, 1]
    t[:, 0, 1] = t[:, 1, 0] = shear_factor * v[:, 2]
    return t


def write_csv(directory, mesh: Mesh, field: SolutionField, prefix: str = "") -> tuple[str, str]:
    """Write ``<prefix>nodes.csv`` and ``<prefix>elements.csv``; returns both paths."""
    if mesh.n_elements == 0:
        raise ValueError("empty mesh")
    os.makedirs(directory, exist_ok=True)
    nodes_path = os.path.join(directory, f"{prefix}nodes.csv")
    elems_path = os.path.join(directory, f"{prefix}elements.csv")
    with open(nodes_path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["node", "x", "y", "ux", "uy"])
        for k, ((x, y), (ux, uy)) in enumerate(zip(mesh.nodes, field.nodal_displacements)):
            w.writerow([k + 1, repr(float(x)), repr(float(y)), repr(float(ux)), repr(float(uy))])
    areas = mesh.element_areas()
    with open(elems_path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["element", "centroid_x", "centroid_y", "area", *STRAIN_NAMES, *STRESS_NAMES])
        for e in range(mesh.n_elements):
            c = ElementGeometry.from_vertices(mesh.element_vertices(e)).frame.centroid
            row = [e + 1, c[0], c[1], areas[e], *field.strains[e], *field.stresses[e]]
            w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
    return nodes_path, elems_path


def read_elements_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]} if rows else {}


def export(field: SolutionField, mesh: Mesh, fmt: str, path) -> list[str]:
    """Dispatch to the VTK (``path`` is a file) or CSV (``path`` is a directory) writer."""
    fmt = fmt.lower()
    if fmt in ("vtk", "vtklegacy"):
        write_vtk(path, mesh, field)
        return [str(path)]
    if fmt == "csv":
        return list(write_csv(path, mesh, field))
    raise ValueError(f"unknown export format {fmt!r}")


def _write_text(path, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
