"""Polygonal mesh data model and validation.

Node and element indices are 0-based in memory; the problem file format
(see :mod:`vem2d.problem`) uses 1-based ids.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from vem2d.geometry import GEOM_RTOL, GeometryError, Polygon, is_simple, polygon_area


@dataclass(eq=False)
class Mesh:
    nodes: np.ndarray
    elements: list[np.ndarray]
    node_sets: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        self.elements = [np.asarray(e, dtype=np.int64) for e in self.elements]
        self.node_sets = {k: np.asarray(v, dtype=np.int64) for k, v in self.node_sets.items()}

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    def element_vertices(self, e: int) -> np.ndarray:
        return self.nodes[self.elements[e]]

    def element_polygon(self, e: int) -> Polygon:
        return Polygon(self.element_vertices(e))

    def element_dofs(self, e: int) -> np.ndarray:
        conn = self.elements[e]
        return np.column_stack([2 * conn, 2 * conn + 1]).ravel()

    def element_areas(self) -> np.ndarray:
        return np.array([polygon_area(self.element_polygon(e)) for e in range(self.n_elements)])

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.nodes.min(axis=0), self.nodes.max(axis=0)

    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.hypot(*(hi - lo)))

    def edge_counts(self) -> Counter:
        """Number of elements sharing each undirected edge ``(min, max)``."""
        counts: Counter = Counter()
        for conn in self.elements:
            for a, b in zip(conn, np.roll(conn, -1)):
                counts[(min(a, b), max(a, b))] += 1
        return counts

    def boundary_edges(self) -> list[tuple[int, int]]:
        """Boundary edges oriented as they appear in their (CCW) element."""
        counts = self.edge_counts()
        out = []
        for conn in self.elements:
            for a, b in zip(conn, np.roll(conn, -1)):
                if counts[(min(a, b), max(a, b))] == 1:
                    out.append((int(a), int(b)))
        return out

    def nodes_where(self, predicate) -> np.ndarray:
        """Indices of nodes whose coordinates satisfy ``predicate(x, y)``."""
        x, y = self.nodes[:, 0], self.nodes[:, 1]
        return np.flatnonzero(predicate(x, y))

    def nearest_node(self, point) -> int:
        d = np.linalg.norm(self.nodes - np.asarray(point, dtype=float), axis=1)
        return int(np.argmin(d))


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    element: int | None = None
    node: int | None = None


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    n_interior_edges: int = 0
    n_boundary_edges: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return f"valid mesh ({self.n_interior_edges} interior, {self.n_boundary_edges} boundary edges)"
        return "\n".join(f"{v.kind}: {v.message}" for v in self.violations)


def validate(mesh: Mesh, check_simple: bool = True) -> ValidationReport:
    """Check references, orientation, simplicity, conformity and duplicate nodes.

    Violations are collected, not raised. Ids in messages are 1-based to match
    the problem file.
    """
    report = ValidationReport()
    add = report.violations.append
    n = mesh.n_nodes
    if mesh.n_elements == 0:
        add(Violation("empty", "mesh has no elements"))

    for e, conn in enumerate(mesh.elements):
        if len(conn) < 3:
            add(Violation("element", f"element {e + 1} has fewer than 3 nodes", element=e))
            continue
        bad = conn[(conn < 0) | (conn >= n)]
        if bad.size:
            add(Violation("reference", f"element {e + 1} references unknown node ids {list(bad + 1)}", element=e))
            continue
        if len(set(conn.tolist())) != len(conn):
            add(Violation("element", f"element {e + 1} repeats a node", element=e))
            continue
        try:
            Polygon(mesh.nodes[conn])
        except GeometryError as exc:
            kind = "orientation" if "clockwise" in str(exc) else "geometry"
            add(Violation(kind, f"element {e + 1}: {exc}", element=e))
            continue
        if check_simple and not is_simple(mesh.nodes[conn]):
            add(Violation("simplicity", f"element {e + 1} is self-intersecting", element=e))

    for name, ids in mesh.node_sets.items():
        bad = ids[(ids < 0) | (ids >= n)]
        if bad.size:
            add(Violation("reference", f"node set {name!r} references unknown node ids {list(bad + 1)}"))

    counts = Counter()
    directed = Counter()
    for conn in mesh.elements:
        if len(conn) < 3 or np.any((conn < 0) | (conn >= n)):
            continue
        for a, b in zip(conn.tolist(), np.roll(conn, -1).tolist()):
            counts[(min(a, b), max(a, b))] += 1
            directed[(a, b)] += 1
    for (a, b), c in sorted(counts.items()):
        if c > 2:
            add(Violation("conformity", f"edge ({a + 1}, {b + 1}) is shared by {c} elements"))
        elif c == 2 and (directed[(a, b)] != 1 or directed[(b, a)] != 1):
            add(Violation("conformity", f"edge ({a + 1}, {b + 1}) is traversed in the same direction by both elements"))
    report.n_interior_edges = sum(1 for c in counts.values() if c == 2)
    report.n_boundary_edges = sum(1 for c in counts.values() if c == 1)

    used = np.zeros(n, dtype=bool)
    for conn in mesh.elements:
        used[conn[(conn >= 0) & (conn < n)]] = True
    for i in np.flatnonzero(~used):
        add(Violation("orphan", f"node {i + 1} belongs to no element", node=int(i)))

    if n > 1:
        tol = GEOM_RTOL * max(mesh.diameter(), np.finfo(float).tiny)
        for i, j in sorted(cKDTree(mesh.nodes).query_pairs(tol)):
            add(Violation("duplicate", f"nodes {i + 1} and {j + 1} coincide", node=int(i)))

    _check_t_junctions(mesh, counts, add)
    return report


def _check_t_junctions(mesh: Mesh, counts: Counter, add) -> None:
    """Flag nodes that lie in the interior of a boundary edge of another element."""
    boundary = [e for e, c in counts.items() if c == 1]
    if not boundary or mesh.n_nodes < 3:
        return
    tree = cKDTree(mesh.nodes)
    tol = 1e-9 * mesh.diameter()
    for a, b in boundary:
        pa, pb = mesh.nodes[a], mesh.nodes[b]
        mid, half = 0.5 * (pa + pb), 0.5 * np.linalg.norm(pb - pa)
        d = pb - pa
        for k in tree.query_ball_point(mid, half + tol):
            if k in (a, b):
                continue
            t = np.dot(mesh.nodes[k] - pa, d) / np.dot(d, d)
            dist = abs(d[0] * (mesh.nodes[k][1] - pa[1]) - d[1] * (mesh.nodes[k][0] - pa[0])) / np.linalg.norm(d)
            if 0.0 < t < 1.0 and dist <= tol:
                add(Violation("conformity", f"node {k + 1} lies inside edge ({a + 1}, {b + 1}) (hanging node)", node=int(k)))
