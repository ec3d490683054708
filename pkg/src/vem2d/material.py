"""Isotropic elastic material and its Voigt moduli matrix."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class PlaneMode(enum.Enum):
    PLANE_STRESS = "plane_stress"
    PLANE_STRAIN = "plane_strain"


class MaterialError(ValueError):
    pass


@dataclass(frozen=True)
class Material:
    """Young's modulus, Poisson's ratio and the plane assumption.

    Voigt order is ``(xx, yy, xy)`` with engineering shear strain
    ``gamma_xy = 2 eps_xy``.
    """

    youngs_modulus: float
    poisson_ratio: float
    plane_mode: PlaneMode = PlaneMode.PLANE_STRESS

    def __post_init__(self):
        if isinstance(self.plane_mode, str):
            object.__setattr__(self, "plane_mode", PlaneMode(self.plane_mode))
        if not self.youngs_modulus > 0:
            raise MaterialError(f"Young's modulus must be positive, got {self.youngs_modulus}")
        if not -1.0 < self.poisson_ratio < 0.5:
            raise MaterialError(f"Poisson's ratio must lie in (-1, 0.5), got {self.poisson_ratio}")

    @property
    def C(self) -> np.ndarray:
        return moduli_matrix(self)


def moduli_matrix(m: Material) -> np.ndarray:
    """3x3 moduli matrix ``C`` with ``sigma = C @ eps`` (engineering shear)."""
    E, nu = m.youngs_modulus, m.poisson_ratio
    if m.plane_mode is PlaneMode.PLANE_STRESS:
        return E / (1.0 - nu**2) * np.array(
            [[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 0.5 * (1.0 - nu)]]
        )
    return E / ((1.0 + nu) * (1.0 - 2.0 * nu)) * np.array(
        [[1.0 - nu, nu, 0.0], [nu, 1.0 - nu, 0.0], [0.0, 0.0, 0.5 * (1.0 - 2.0 * nu)]]
    )
