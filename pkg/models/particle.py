"""Particule soumise à la contrainte z' = y x' (distribution de Heisenberg)."""
from typing import Dict

import numpy as np

from models.section import SymmetrySection
from models.system import MechanicalSystem

DEFAULT_Q0 = (0.0, 0.0, 0.0)
DEFAULT_V0 = (1.0, 1.0, 0.0)
DEFAULT_H = 0.01
DEFAULT_STEPS = 1000


def _metric(q):
    return np.eye(3)


def _constraints(q):
    return np.array([[-q[1], 0.0, 1.0]])


def make_particle() -> MechanicalSystem:
    return MechanicalSystem(
        name="particle",
        n=3,
        m=1,
        metric=_metric,
        constraints=_constraints,
        metric_grad=lambda q: np.zeros((3, 3, 3)),
        constant_metric=True,
    )


def distribution_basis(q) -> np.ndarray:
    """Colonnes d_x + y d_z et d_y."""
    return np.array([[1.0, 0.0], [0.0, 1.0], [q[1], 0.0]])


def _translation(q, xi):
    return np.asarray(xi, dtype=float)


def sections() -> Dict[str, SymmetrySection]:
    # action de R^3 par translations ; xi2 est une symétrie horizontale
    return {
        "xi1": SymmetrySection(
            name="xi1",
            g_dim=3,
            xi_of_q=lambda q: np.array([1.0, 0.0, q[1]]),
            generator=_translation,
            description="(1, 0, y)",
        ),
        "xi2": SymmetrySection(
            name="xi2",
            g_dim=3,
            xi_of_q=lambda q: np.array([0.0, 1.0, 0.0]),
            generator=_translation,
            description="(0, 1, 0), horizontale",
        ),
    }
