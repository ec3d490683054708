"""Element-level virtual element machinery for k = 1.

Degrees of freedom are interleaved per vertex, ``(u1x, u1y, u2x, u2y, ...)``,
with vertices in counter-clockwise order. Matrix names follow the usual
VEM notation:

``D``        (2n_v, 6)  basis fields evaluated at the dofs
``B_tilde``  (6, 2n_v)  energy products a(p_alpha, phi_i); rows 0-2 are zero
``B_breve``  (3, 2n_v)  vertex-average rows that fix the rigid-body part
``B_bar``    (6, 2n_v)  ``B_tilde`` with rows 0-2 replaced by ``B_breve``
``G``        (6, 6)     ``B_bar @ D``
``G_tilde``  (6, 6)     ``G`` with rows 0-2 zeroed
``Pi_tilde`` (6, 2n_v)  projector in the polynomial basis, ``G^-1 B_bar``
``Pi``       (2n_v, 2n_v) projector in the dof basis, ``D @ Pi_tilde``
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from vem2d.geometry import Polygon, edge_data, polygon_area, polygon_centroid, polygon_diameter
from vem2d.material import Material, moduli_matrix
from vem2d.polybasis import N_BASIS, N_RIGID, ScaledFrame, basis_strains, eval_basis_many

G_COND_LIMIT = 1e12


class ElementError(ArithmeticError):
    """Raised when an element's projector system cannot be solved reliably."""


@dataclass(frozen=True, eq=False)
class ElementGeometry:
    polygon: Polygon
    frame: ScaledFrame
    area: float
    edge_lengths: np.ndarray
    edge_normals: np.ndarray

    @classmethod
    def from_polygon(cls, polygon: Polygon) -> "ElementGeometry":
        lengths, normals = edge_data(polygon)
        frame = ScaledFrame(polygon_centroid(polygon), polygon_diameter(polygon))
        return cls(polygon, frame, polygon_area(polygon), lengths, normals)

    @classmethod
    def from_vertices(cls, vertices) -> "ElementGeometry":
        return cls.from_polygon(Polygon(vertices))

    @property
    def n_vertices(self) -> int:
        return self.polygon.n_vertices

    @property
    def vertices(self) -> np.ndarray:
        return self.polygon.vertices

    def vertex_weights(self) -> np.ndarray:
        """Trapezoid-rule boundary weights ``(|e_{j-1}| n_{j-1} + |e_j| n_j) / 2`` per vertex."""
        ln = self.edge_lengths[:, None] * self.edge_normals
        return 0.5 * (np.roll(ln, 1, axis=0) + ln)


@dataclass(frozen=True, eq=False)
class ProjectorSet:
    D: np.ndarray
    B_tilde: np.ndarray
    B_bar: np.ndarray
    G_tilde: np.ndarray
    G: np.ndarray
    Pi_tilde: np.ndarray
    Pi: np.ndarray


@dataclass(frozen=True)
class TraceScaled:
    """``k_s = tau * tr(k_c) * (I - Pi)^T (I - Pi)``."""

    tau: float = 0.05

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    def __str__(self):
        return f"trace:{self.tau:g}"


@dataclass(frozen=True)
class DiagonalMax:
    """``k_s = (I - Pi)^T S (I - Pi)`` with ``S_ii = max(alpha0 tr(C) / 3, (k_c)_ii)``."""

    alpha0: float = 1.0

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}")

    def __str__(self):
        return f"diag:{self.alpha0:g}"


Stabilization = TraceScaled | DiagonalMax
DEFAULT_STABILIZATION = TraceScaled(0.05)


def parse_stabilization(text: str) -> Stabilization:
    """Parse ``"trace:0.5"`` or ``"diag:1.0"`` (parameter optional)."""
    m = re.fullmatch(r"\s*(trace|diag)\s*(?::\s*([^\s]+))?\s*", text)
    if m is None:
        raise ValueError(f"unknown stabilization {text!r}; expected 'trace:TAU' or 'diag:ALPHA0'")
    kind, param = m.groups()
    if kind == "trace":
        return TraceScaled(float(param)) if param else TraceScaled()
    return DiagonalMax(float(param)) if param else DiagonalMax()


def _stress_tensors(geom: ElementGeometry, mat: Material) -> np.ndarray:
    """2x2 stress tensors of the six basis fields, shape ``(6, 2, 2)``."""
    sig = moduli_matrix(mat) @ basis_strains(geom.frame)
    out = np.empty((N_BASIS, 2, 2))
    out[:, 0, 0] = sig[0]
    out[:, 1, 1] = sig[1]
    out[:, 0, 1] = out[:, 1, 0] = sig[2]
    return out


def compute_D(geom: ElementGeometry) -> np.ndarray:
    P = eval_basis_many(geom.frame, geom.vertices)  # (n_v, 2, 6)
    return P.reshape(2 * geom.n_vertices, N_BASIS)


def compute_B_tilde(geom: ElementGeometry, mat: Material) -> np.ndarray:
    """Boundary-integral energy products using the vertex (trapezoid) rule."""
    traction = np.einsum("aij,vj->avi", _stress_tensors(geom, mat), geom.vertex_weights())
    B = traction.reshape(N_BASIS, 2 * geom.n_vertices)
    B[:N_RIGID] = 0.0
    return B


def compute_B_breve(n_v: int, D: np.ndarray) -> np.ndarray:
    return D[:, :N_RIGID].T / n_v


def compute_B_bar(B_tilde: np.ndarray, B_breve: np.ndarray) -> np.ndarray:
    B_bar = np.array(B_tilde, dtype=float)
    B_bar[:N_RIGID] = B_breve
    return B_bar


def compute_G(B_bar: np.ndarray, D: np.ndarray) -> np.ndarray:
    return B_bar @ D


def compute_G_tilde(G: np.ndarray) -> np.ndarray:
    G_tilde = np.array(G, dtype=float)
    G_tilde[:N_RIGID] = 0.0
    return G_tilde


def compute_G_tilde_direct(geom: ElementGeometry, mat: Material) -> np.ndarray:
    """Vertex-rule evaluation of ``a(p_alpha, p_beta)``; a cross-check for ``B_tilde @ D``."""
    P = eval_basis_many(geom.frame, geom.vertices)  # (n_v, 2, 6) basis values at vertices
    traction = np.einsum("aij,vj->avi", _stress_tensors(geom, mat), geom.vertex_weights())
    G_tilde = np.einsum("avi,vib->ab", traction, P)
    G_tilde[:N_RIGID] = 0.0
    return G_tilde


def compute_Pi_tilde(G: np.ndarray, B_bar: np.ndarray, element_id=None) -> np.ndarray:
    """Solve ``G @ Pi_tilde = B_bar``.

    The conditioning check is done on the row-equilibrated ``G`` so that the
    guard does not depend on the units of the elastic moduli.
    """
    row_scale = np.abs(G).max(axis=1)
    where = "" if element_id is None else f" in element {element_id}"
    if np.any(row_scale == 0.0):
        raise ElementError(f"singular projector matrix G{where}")
    cond = np.linalg.cond(G / row_scale[:, None])
    if not cond < G_COND_LIMIT:
        raise ElementError(f"ill-conditioned projector matrix G{where} (condition {cond:.3g})")
    return np.linalg.solve(G, B_bar)


def compute_Pi(D: np.ndarray, Pi_tilde: np.ndarray) -> np.ndarray:
    return D @ Pi_tilde


def compute_projectors(geom: ElementGeometry, mat: Material, element_id=None, verify: bool = False) -> ProjectorSet:
    D = compute_D(geom)
    B_tilde = compute_B_tilde(geom, mat)
    B_bar = compute_B_bar(B_tilde, compute_B_breve(geom.n_vertices, D))
    G = compute_G(B_bar, D)
    G_tilde = compute_G_tilde(G)
    if verify:
        direct = compute_G_tilde_direct(geom, mat)
        scale = max(np.abs(G_tilde).max(), 1.0)
        if np.abs(direct - G_tilde).max() > 1e-9 * scale:
            where = "" if element_id is None else f" for element {element_id}"
            raise ElementError(f"G_tilde cross-check failed{where}")
    Pi_tilde = compute_Pi_tilde(G, B_bar, element_id)
    return ProjectorSet(D, B_tilde, B_bar, G_tilde, G, Pi_tilde, compute_Pi(D, Pi_tilde))


def stiffness_consistency(Pi_tilde: np.ndarray, G_tilde: np.ndarray) -> np.ndarray:
    k = Pi_tilde.T @ G_tilde @ Pi_tilde
    return 0.5 * (k + k.T)


def stiffness_stability(Pi: np.ndarray, k_c: np.ndarray, mat: Material, variant: Stabilization = DEFAULT_STABILIZATION) -> np.ndarray:
    R = np.eye(Pi.shape[0]) - Pi
    if isinstance(variant, TraceScaled):
        k = variant.tau * np.trace(k_c) * (R.T @ R)
    elif isinstance(variant, DiagonalMax):
        floor = variant.alpha0 * np.trace(moduli_matrix(mat)) / 3.0
        S = np.maximum(floor, np.diag(k_c))
        k = R.T @ (S[:, None] * R)
    else:
        raise TypeError(f"unknown stabilization {variant!r}")
    return 0.5 * (k + k.T)


def element_stiffness(
    geom: ElementGeometry,
    mat: Material,
    variant: Stabilization = DEFAULT_STABILIZATION,
    thickness: float = 1.0,
    element_id=None,
    verify: bool = False,
) -> tuple[np.ndarray, ProjectorSet]:
    """Element stiffness ``t (k_c + k_s)`` and the projectors used to build it."""
    proj = compute_projectors(geom, mat, element_id=element_id, verify=verify)
    k_c = stiffness_consistency(proj.Pi_tilde, proj.G_tilde)
    k_s = stiffness_stability(proj.Pi, k_c, mat, variant)
    return thickness * (k_c + k_s), proj


def strain_operator(proj: ProjectorSet, frame: ScaledFrame) -> np.ndarray:
    """3 x 2n_v matrix mapping element dofs to the (constant) projected strain."""
    return basis_strains(frame) @ proj.Pi_tilde


def element_strain(proj: ProjectorSet, frame: ScaledFrame, u_e) -> np.ndarray:
    u_e = np.asarray(u_e, dtype=float)
    if u_e.shape != (proj.Pi_tilde.shape[1],):
        raise ValueError(f"expected {proj.Pi_tilde.shape[1]} element dofs, got shape {u_e.shape}")
    return strain_operator(proj, frame) @ u_e


def element_stress(mat: Material, strain) -> np.ndarray:
    return moduli_matrix(mat) @ np.asarray(strain, dtype=float)


def internal_force(k_E: np.ndarray, u_e) -> np.ndarray:
    return k_E @ np.asarray(u_e, dtype=float)
