"""Desk-scale mesh generators: structured quads and clipped Voronoi meshes.

Voronoi cells are clipped to an axis-aligned rectangle by mirroring every
seed across the four sides before calling Qhull, which makes the rectangle
sides exact cell boundaries and keeps vertices shared between neighbours.
A circular hole centred on the lower-left corner (plate-with-hole quadrant)
is cut afterwards with a polyline approximation of the arc.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely
from scipy.spatial import Voronoi, cKDTree
from shapely.geometry import Polygon as ShapelyPolygon
from shapely.geometry.polygon import orient

from vem2d.mesh import Mesh

ARC_SEGMENTS = 32


class MeshGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class RectDomain:
    """Rectangle ``[x0, x0 + width] x [y0, y0 + height]``, optionally minus a
    quarter disk of ``hole_radius`` centred at ``(x0, y0)``."""

    width: float
    height: float
    x0: float = 0.0
    y0: float = 0.0
    hole_radius: float = 0.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("domain width and height must be positive")
        if not 0 <= self.hole_radius < min(self.width, self.height):
            raise ValueError("hole radius must be non-negative and smaller than the domain")

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.width, self.height))

    @property
    def area(self) -> float:
        return self.width * self.height - self.hole_polygon_area()

    def hole_arc(self) -> np.ndarray:
        t = np.linspace(0.0, 0.5 * np.pi, ARC_SEGMENTS + 1)
        pts = self.hole_radius * np.column_stack([np.cos(t), np.sin(t)])
        pts[0] = (self.hole_radius, 0.0)
        pts[-1] = (0.0, self.hole_radius)
        return pts + (self.x0, self.y0)

    def hole_polygon_area(self) -> float:
        if self.hole_radius == 0:
            return 0.0
        arc = self.hole_arc()
        return ShapelyPolygon(np.vstack([[self.x0, self.y0], arc])).area

    def _cutter(self) -> ShapelyPolygon:
        # Extends outside the rectangle so no cutter edge runs along a side.
        r = self.hole_radius
        arc = self.hole_arc()
        outside = np.array([[-r, r], [-r, -r], [r, -r]]) + (self.x0, self.y0)
        return ShapelyPolygon(np.vstack([arc, outside]))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        x, y = pts[:, 0] - self.x0, pts[:, 1] - self.y0
        inside = (x > 0) & (x < self.width) & (y > 0) & (y < self.height)
        if self.hole_radius > 0:
            inside &= ~shapely.contains_xy(self._cutter(), pts[:, 0], pts[:, 1])
            inside &= np.hypot(x, y) > self.hole_radius
        return inside


def generate_structured(width: float, height: float, nx: int, ny: int, x0: float = 0.0, y0: float = 0.0) -> Mesh:
    """``nx`` by ``ny`` grid of counter-clockwise quadrilaterals."""
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be at least 1")
    if not (width > 0 and height > 0):
        raise ValueError("width and height must be positive")
    xs = x0 + np.linspace(0.0, width, nx + 1)
    ys = y0 + np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    elements = []
    for j in range(ny):
        for i in range(nx):
            n0 = j * (nx + 1) + i
            elements.append([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])
    mesh = Mesh(nodes, elements)
    mesh.node_sets.update(_boundary_sets(mesh, RectDomain(width, height, x0, y0)))
    return mesh


def _boundary_sets(mesh: Mesh, dom: RectDomain) -> dict[str, np.ndarray]:
    tol = 1e-9 * dom.diameter
    x1, y1 = dom.x0 + dom.width, dom.y0 + dom.height
    sets = {
        "left": mesh.nodes_where(lambda x, y: np.abs(x - dom.x0) <= tol),
        "right": mesh.nodes_where(lambda x, y: np.abs(x - x1) <= tol),
        "bottom": mesh.nodes_where(lambda x, y: np.abs(y - dom.y0) <= tol),
        "top": mesh.nodes_where(lambda x, y: np.abs(y - y1) <= tol),
    }
    if dom.hole_radius > 0:
        r = np.hypot(mesh.nodes[:, 0] - dom.x0, mesh.nodes[:, 1] - dom.y0)
        sets["hole"] = np.flatnonzero(r <= dom.hole_radius * (1 + 1e-9))
    return sets


def _mirror(seeds: np.ndarray, dom: RectDomain) -> np.ndarray:
    x, y = seeds[:, 0], seeds[:, 1]
    x1, y1 = dom.x0 + dom.width, dom.y0 + dom.height
    return np.vstack(
        [
            seeds,
            np.column_stack([2 * dom.x0 - x, y]),
            np.column_stack([2 * x1 - x, y]),
            np.column_stack([x, 2 * dom.y0 - y]),
            np.column_stack([x, 2 * y1 - y]),
        ]
    )


def _voronoi_cells(seeds: np.ndarray, dom: RectDomain) -> tuple[np.ndarray, list[list[int]]]:
    """Rectangle-clipped Voronoi cells as index loops into a shared vertex array."""
    vor = Voronoi(_mirror(seeds, dom))
    cells = []
    for k in range(len(seeds)):
        region = vor.regions[vor.point_region[k]]
        if not region or -1 in region:
            raise MeshGenerationError(f"Voronoi cell of seed {k} is unbounded; try a different rng_seed")
        cells.append(list(region))
    return vor.vertices, cells


def _loop_ccw(vertices: np.ndarray, loop: list[int]) -> list[int]:
    v = vertices[loop]
    area2 = np.dot(v[:, 0], np.roll(v[:, 1], -1)) - np.dot(np.roll(v[:, 0], -1), v[:, 1])
    return loop if area2 > 0 else loop[::-1]


def _cell_polygons(seeds: np.ndarray, dom: RectDomain) -> list[np.ndarray]:
    """Clipped cells as coordinate loops (CCW). Used for Lloyd smoothing."""
    verts, cells = _voronoi_cells(seeds, dom)
    polys = [verts[_loop_ccw(verts, c)] for c in cells]
    if dom.hole_radius > 0:
        cutter = dom._cutter()
        polys = [_cut_hole(p, cutter, k) for k, p in enumerate(polys)]
    return polys


def _cut_hole(poly: np.ndarray, cutter: ShapelyPolygon, k: int) -> np.ndarray | None:
    xmin, ymin, xmax, ymax = cutter.bounds
    lo = poly.min(axis=0)
    if lo[0] > xmax or lo[1] > ymax:
        return poly
    sp = ShapelyPolygon(poly)
    if not sp.intersects(cutter):
        return poly
    diff = sp.difference(cutter)
    if diff.is_empty:
        return None
    if diff.geom_type != "Polygon":
        raise MeshGenerationError(f"hole splits the cell of seed {k} into pieces; try a different rng_seed")
    diff = orient(diff, sign=1.0)
    return np.asarray(diff.exterior.coords)[:-1]


def _centroid(p: np.ndarray) -> np.ndarray:
    x, y = p[:, 0], p[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (3.0 * cross.sum())


def _sample_seeds(n: int, dom: RectDomain, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((0, 2))
    while len(out) < n:
        pts = rng.random((2 * (n - len(out)) + 8, 2)) * (dom.width, dom.height) + (dom.x0, dom.y0)
        out = np.vstack([out, pts[dom.contains(pts)]])
    return out[:n]


def _check_seed_collapse(seeds: np.ndarray, dom: RectDomain) -> None:
    if len(seeds) > 1 and cKDTree(seeds).query_pairs(1e-10 * dom.diameter):
        raise MeshGenerationError("duplicate Voronoi seeds; try a different rng_seed")


def generate_voronoi(
    domain: RectDomain,
    n_seeds: int,
    lloyd_iters: int = 0,
    rng_seed: int = 0,
    seeds=None,
) -> Mesh:
    """Clipped Voronoi mesh with optional Lloyd (centroidal) smoothing.

    Seeds are drawn uniformly in the domain from ``numpy.random.default_rng(rng_seed)``
    unless given explicitly. The result is deterministic for fixed inputs.
    """
    if seeds is None:
        if n_seeds < 1:
            raise ValueError("n_seeds must be at least 1")
        seeds = _sample_seeds(n_seeds, domain, np.random.default_rng(rng_seed))
    else:
        seeds = np.asarray(seeds, dtype=float).reshape(-1, 2)
        if not np.all(domain.contains(seeds)):
            raise ValueError("explicit seeds must lie strictly inside the domain")

    for _ in range(lloyd_iters):
        _check_seed_collapse(seeds, domain)
        polys = _cell_polygons(seeds, domain)
        if any(p is None for p in polys):
            raise MeshGenerationError("a Voronoi cell vanished inside the hole; try a different rng_seed")
        seeds = np.array([_centroid(p) for p in polys])
        if domain.hole_radius > 0:
            seeds = _push_out_of_hole(seeds, domain)

    _check_seed_collapse(seeds, domain)
    return _build_mesh(seeds, domain)


def _push_out_of_hole(seeds: np.ndarray, dom: RectDomain) -> np.ndarray:
    rel = seeds - (dom.x0, dom.y0)
    r = np.hypot(rel[:, 0], rel[:, 1])
    inner = r <= dom.hole_radius * 1.01
    if np.any(inner):
        rel[inner] *= (dom.hole_radius * 1.01 / r[inner])[:, None]
    return rel + (dom.x0, dom.y0)


def _build_mesh(seeds: np.ndarray, dom: RectDomain) -> Mesh:
    verts, cells = _voronoi_cells(seeds, dom)
    loops = [verts[_loop_ccw(verts, c)] for c in cells]
    if dom.hole_radius > 0:
        cutter = dom._cutter()
        loops = [_cut_hole(p, cutter, k) for k, p in enumerate(loops)]
        if any(p is None for p in loops):
            raise MeshGenerationError("a Voronoi cell lies entirely inside the hole; try a different rng_seed")

    # Merge coincident points across cells so neighbours share node ids.
    pts = np.vstack(loops)
    offsets = np.cumsum([0] + [len(p) for p in loops])
    tol = 1e-10 * dom.diameter
    tree = cKDTree(pts)
    parent = np.arange(len(pts))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in sorted(tree.query_pairs(tol)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(pts))])
    uniq, inverse = np.unique(roots, return_inverse=True)
    nodes = pts[uniq]
    nodes = _snap_to_boundary(nodes, dom)

    elements = []
    for k in range(len(loops)):
        ids = inverse[offsets[k] : offsets[k + 1]].tolist()
        cleaned = [i for n, i in enumerate(ids) if i != ids[n - 1]]
        if len(cleaned) < 3:
            raise MeshGenerationError(f"cell of seed {k} collapsed; try a different rng_seed")
        elements.append(cleaned)

    mesh = Mesh(nodes, elements)
    mesh.node_sets.update(_boundary_sets(mesh, dom))
    return mesh


def _snap_to_boundary(nodes: np.ndarray, dom: RectDomain) -> np.ndarray:
    nodes = nodes.copy()
    tol = 1e-9 * dom.diameter
    x1, y1 = dom.x0 + dom.width, dom.y0 + dom.height
    for col, value in ((0, dom.x0), (0, x1), (1, dom.y0), (1, y1)):
        near = np.abs(nodes[:, col] - value) <= tol
        nodes[near, col] = value
    return nodes
