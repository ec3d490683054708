"""Two-dimensional virtual element method (k=1) for linear elasticity."""

from vem2d.assembly import GlobalSystem, LoadCase, assemble, assemble_loads, global_internal_force, solve
from vem2d.element import (
    DiagonalMax,
    ElementGeometry,
    ProjectorSet,
    TraceScaled,
    element_stiffness,
    element_strain,
    element_stress,
    internal_force,
)
from vem2d.geometry import Polygon, edge_data, polygon_area, polygon_centroid, polygon_diameter
from vem2d.material import Material, PlaneMode, moduli_matrix
from vem2d.mesh import Mesh, validate
from vem2d.problem import Problem, read_problem, write_problem

__version__ = "0.1.0"

__all__ = [
    "DiagonalMax",
    "ElementGeometry",
    "GlobalSystem",
    "LoadCase",
    "Material",
    "Mesh",
    "PlaneMode",
    "Polygon",
    "Problem",
    "ProjectorSet",
    "TraceScaled",
    "assemble",
    "assemble_loads",
    "edge_data",
    "element_strain",
    "element_stiffness",
    "element_stress",
    "global_internal_force",
    "internal_force",
    "moduli_matrix",
    "polygon_area",
    "polygon_centroid",
    "polygon_diameter",
    "read_problem",
    "solve",
    "validate",
    "write_problem",
]
