"""Polygon kernel: area, centroid, diameter and edge data.

Polygons are stored as an ``(n_v, 2)`` array of vertices in counter-clockwise
order. Clockwise input is rejected rather than reversed, since the element
degree-of-freedom ordering follows the vertex order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative to the polygon diameter (squared for areas).
GEOM_RTOL = 1e-12


class GeometryError(ValueError):
    """Raised for degenerate, clockwise or self-intersecting polygons."""


def _signed_area(v: np.ndarray) -> float:
    # shoelace relative to the first vertex: same value, no cancellation far from the origin
    x, y = (v - v[0]).T
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _max_pairwise_distance(v: np.ndarray) -> float:
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=-1).max()))


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True

    def on_segment(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    return (
        (d1 == 0 and on_segment(q1, q2, p1))
        or (d2 == 0 and on_segment(q1, q2, p2))
        or (d3 == 0 and on_segment(p1, p2, q1))
        or (d4 == 0 and on_segment(p1, p2, q2))
    )


def is_simple(vertices) -> bool:
    """Return True if no two non-adjacent edges of the closed loop intersect."""
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    for i in range(n):
        a1, a2 = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_cross(a1, a2, v[j], v[(j + 1) % n]):
                return False
    return True


@dataclass(frozen=True, eq=False)
class Polygon:
    """Closed counter-clockwise vertex loop.

    Parameters
    ----------
    vertices
        Array-like of shape ``(n_v, 2)``, ``n_v >= 3``.
    check_simple
        Also run the O(n_v^2) self-intersection test.
    """

    vertices: np.ndarray
    check_simple: bool = False

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError(f"vertices must have shape (n, 2), got {v.shape}")
        if len(v) < 3:
            raise GeometryError(f"a polygon needs at least 3 vertices, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise GeometryError("vertex coordinates must be finite")
        h = _max_pairwise_distance(v)
        step = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        if h == 0.0 or step.min() <= GEOM_RTOL * h:
            j = int(np.argmin(step))
            raise GeometryError(f"vertices {j} and {(j + 1) % len(v)} coincide")
        area = _signed_area(v)
        if abs(area) <= GEOM_RTOL * h * h:
            raise GeometryError("degenerate polygon: zero area")
        if area < 0:
            raise GeometryError("polygon vertices are ordered clockwise; counter-clockwise is required")
        if self.check_simple and not is_simple(v):
            raise GeometryError("polygon is self-intersecting")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


def polygon_area(p: Polygon) -> float:
    """Shoelace area (positive for a valid polygon)."""
    return _signed_area(p.vertices)


def polygon_centroid(p: Polygon) -> np.ndarray:
    """Area-weighted centroid ``(x, y)``."""
    v = p.vertices
    x, y = (v - v[0]).T
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a6 = 3.0 * cross.sum()
    return v[0] + np.array([((x + xn) * cross).sum() / a6, ((y + yn) * cross).sum() / a6])


def polygon_diameter(p: Polygon) -> float:
    """Largest distance between two vertices."""
    return _max_pairwise_distance(p.vertices)


def edge_data(p: Polygon) -> tuple[np.ndarray, np.ndarray]:
    """Edge lengths and outward unit normals.

    Edge ``j`` runs from vertex ``j`` to vertex ``j + 1`` (the last edge closes
    the loop). For an edge direction ``(dx, dy)`` the outward normal of a
    counter-clockwise polygon is ``(dy, -dx) / |e|``.

    Returns
    -------
    lengths : (n_v,) array
    normals : (n_v, 2) array
    """
    v = p.vertices
    d = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(d[:, 0], d[:, 1])
    if lengths.min() <= GEOM_RTOL * polygon_diameter(p):
        raise GeometryError("zero-length edge")
    normals = np.column_stack([d[:, 1], -d[:, 0]]) / lengths[:, None]
    return lengths, normals
