"""Scaled linear vector monomials on an element.

The six basis fields, in fixed order, are::

    p1 = (1, 0)    p2 = (0, 1)    p3 = (-eta, xi)
    p4 = (eta, xi) p5 = (xi, 0)   p6 = (0, eta)

with ``xi = (x - xc) / h`` and ``eta = (y - yc) / h`` for element centroid
``(xc, yc)`` and diameter ``h``. The first three are rigid-body modes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_BASIS = 6
N_RIGID = 3


@dataclass(frozen=True, eq=False)
class ScaledFrame:
    centroid: np.ndarray
    diameter: float

    def __post_init__(self):
        if not self.diameter > 0:
            raise ValueError(f"diameter must be positive, got {self.diameter}")
        object.__setattr__(self, "centroid", np.asarray(self.centroid, dtype=float))

    def scaled(self, points) -> np.ndarray:
        """Map points to ``(xi, eta)``; works on a single point or an ``(n, 2)`` array."""
        return (np.asarray(points, dtype=float) - self.centroid) / self.diameter


def eval_basis(frame: ScaledFrame, point) -> np.ndarray:
    """Evaluate all six basis fields at ``point``; returns a 2x6 matrix."""
    xi, eta = frame.scaled(point)
    return np.array(
        [
            [1.0, 0.0, -eta, eta, xi, 0.0],
            [0.0, 1.0, xi, xi, 0.0, eta],
        ]
    )


def eval_basis_many(frame: ScaledFrame, points) -> np.ndarray:
    """Vectorised :func:`eval_basis` over ``(n, 2)`` points; returns ``(n, 2, 6)``."""
    s = frame.scaled(points)
    xi, eta = s[:, 0], s[:, 1]
    one, zero = np.ones_like(xi), np.zeros_like(xi)
    row_x = np.stack([one, zero, -eta, eta, xi, zero], axis=-1)
    row_y = np.stack([zero, one, xi, xi, zero, eta], axis=-1)
    return np.stack([row_x, row_y], axis=1)


def basis_strains(frame: ScaledFrame) -> np.ndarray:
    """Voigt strains of the six basis fields as the columns of a 3x6 matrix.

    The strains are constant; only p4 (shear), p5 (xx) and p6 (yy) are nonzero.
    """
    h = frame.diameter
    S = np.zeros((3, N_BASIS))
    S[2, 3] = 2.0 / h
    S[0, 4] = 1.0 / h
    S[1, 5] = 1.0 / h
    return S
