"""Traîneau de Chaplygin : q = (x, y, theta), centre de masse à distance a du point de contact."""
from typing import Dict

import numpy as np

from app.validator import float_strict
from models.section import SymmetrySection
from models.system import MechanicalSystem

DEFAULT_PARAMS = {"m": 1.0, "I": 1.0, "a": 0.2}
DEFAULT_Q0 = (0.0, 0.0, 0.0)
DEFAULT_Q1 = (-0.2395, -0.0070, 0.0589)
DEFAULT_H = 0.1
DEFAULT_STEPS = 150


def make_sleigh(m: float = 1.0, I: float = 1.0, a: float = 0.2) -> MechanicalSystem:
    m = float_strict(m, field="params.m", positive=True)
    I = float_strict(I, field="params.I", positive=True)
    a = float_strict(a, field="params.a")
    am = a * m

    def metric(q):
        s, c = np.sin(q[2]), np.cos(q[2])
        return np.array([[m, 0.0, -am * s], [0.0, m, am * c], [-am * s, am * c, I + m * a * a]])

    def metric_grad(q):
        s, c = np.sin(q[2]), np.cos(q[2])
        out = np.zeros((3, 3, 3))
        out[2] = [[0.0, 0.0, -am * c], [0.0, 0.0, -am * s], [-am * c, -am * s, 0.0]]
        return out

    def constraints(q):
        return np.array([[np.sin(q[2]), -np.cos(q[2]), 0.0]])

    return MechanicalSystem(
        name="sleigh",
        n=3,
        m=1,
        metric=metric,
        constraints=constraints,
        metric_grad=metric_grad,
        constant_metric=(a == 0.0),
        params={"m": m, "I": I, "a": a},
    )


def normal_field(q, params) -> np.ndarray:
    """Générateur de D^perp : -sin d_x + cos d_y - am/(I + m a^2) d_theta."""
    m, I, a = params["m"], params["I"], params["a"]
    return np.array([-np.sin(q[2]), np.cos(q[2]), -a * m / (I + m * a * a)])


def _se2_generator(q, xi):
    return np.array([xi[0] - xi[2] * q[1], xi[1] + xi[2] * q[0], xi[2]])


def sections() -> Dict[str, SymmetrySection]:
    return {
        "rotation": SymmetrySection(
            name="rotation",
            g_dim=3,
            xi_of_q=lambda q: np.array([q[1], -q[0], 1.0]),
            generator=_se2_generator,
            description="(y, -x, 1), générateur d_theta",
        ),
        "heading": SymmetrySection(
            name="heading",
            g_dim=3,
            xi_of_q=lambda q: np.array([np.cos(q[2]), np.sin(q[2]), 0.0]),
            generator=_se2_generator,
            description="(cos theta, sin theta, 0)",
        ),
    }
