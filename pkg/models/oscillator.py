"""Systèmes sans contrainte (m = 0) : oscillateur harmonique 1D et particule libre 1D."""
import numpy as np

from app.validator import float_strict
from models.system import MechanicalSystem

DEFAULT_PARAMS = {"k": 1.0}
DEFAULT_Q0 = (1.0,)
DEFAULT_V0 = (0.0,)
DEFAULT_H = 0.1
DEFAULT_STEPS = 1000

FREE_Q0 = (0.0,)
FREE_V0 = (1.0,)


def _unit_metric(q):
    return np.eye(1)


def _no_constraints(q):
    return np.zeros((0, 1))


def make_oscillator(k: float = 1.0) -> MechanicalSystem:
    k = float_strict(k, field="params.k", positive=True)
    return MechanicalSystem(
        name="oscillator",
        n=1,
        m=0,
        metric=_unit_metric,
        constraints=_no_constraints,
        potential=lambda q: 0.5 * k * float(q[0]) ** 2,
        potential_grad=lambda q: np.array([k * q[0]]),
        metric_grad=lambda q: np.zeros((1, 1, 1)),
        constant_metric=True,
        params={"k": k},
    )


def make_free() -> MechanicalSystem:
    return MechanicalSystem(
        name="free",
        n=1,
        m=0,
        metric=_unit_metric,
        constraints=_no_constraints,
        metric_grad=lambda q: np.zeros((1, 1, 1)),
        constant_metric=True,
    )
