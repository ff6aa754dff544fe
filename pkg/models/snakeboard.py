"""
Snakeboard : q = (x, y, theta, psi, phi).
Roues avant et arrière tournées de +phi / -phi, rotor du cavalier psi.
"""
from typing import Dict

import numpy as np

from app.validator import float_strict
from models.section import SymmetrySection
from models.system import MechanicalSystem

DEFAULT_PARAMS = {"m": 1.0, "J": 1.0, "J0": 0.5, "J1": 1.0, "r": 0.5}
DEFAULT_Q0 = (0.0, 0.0, 0.0, 0.0, 0.3)
DEFAULT_H = 0.01
DEFAULT_STEPS = 1000


def helper_a(q, r: float) -> float:
    return r * np.cos(q[2]) * np.cos(q[4])


def helper_b(q, r: float) -> float:
    return r * np.sin(q[2]) * np.cos(q[4])


def helper_c(q) -> float:
    return -np.sin(q[4])


def make_snakeboard(m: float = 1.0, J: float = 1.0, J0: float = 0.5, J1: float = 1.0, r: float = 0.5) -> MechanicalSystem:
    m = float_strict(m, field="params.m", positive=True)
    J = float_strict(J, field="params.J", positive=True)
    J0 = float_strict(J0, field="params.J0", positive=True)
    J1 = float_strict(J1, field="params.J1", positive=True)
    r = float_strict(r, field="params.r", positive=True)
    inertia = np.diag([m, m, J + 2.0 * J1, J0, 2.0 * J1])

    def constraints(q):
        theta, phi = q[2], q[4]
        return np.array(
            [
                [np.sin(theta + phi), -np.cos(theta + phi), r * np.cos(phi), 0.0, 0.0],
                [np.sin(theta - phi), -np.cos(theta - phi), -r * np.cos(phi), 0.0, 0.0],
            ]
        )

    return MechanicalSystem(
        name="snakeboard",
        n=5,
        m=2,
        metric=lambda q: inertia,
        constraints=constraints,
        metric_grad=lambda q: np.zeros((5, 5, 5)),
        constant_metric=True,
        params={"m": m, "J": J, "J0": J0, "J1": J1, "r": r},
    )


def distribution_basis(q, r: float) -> np.ndarray:
    """Colonnes d_psi, d_phi et a d_x + b d_y + c d_theta."""
    basis = np.zeros((5, 3))
    basis[3, 0] = 1.0
    basis[4, 1] = 1.0
    basis[:3, 2] = (helper_a(q, r), helper_b(q, r), helper_c(q))
    return basis


def default_v0(q0, params, force=None) -> np.ndarray:
    """
    Vitesse admissible : avance unitaire le long de (a, b, c), rotor psi' = 0.5.
    Sous contrôle, psi' et phi' initiaux annulent la dérive séculaire : phi oscille autour de phi0
    avec l'amplitude A_phi / (2 J1 omega^2).
    """
    psi_dot, phi_dot = 0.5, 0.0
    if force is not None:
        psi_dot = -force.amp_psi / (params["J0"] * force.omega)
        phi_dot = -force.amp_phi / (2.0 * params["J1"] * force.omega)
    return distribution_basis(q0, params["r"]) @ np.array([psi_dot, phi_dot, 1.0])


def control_force(amp_psi: float, amp_phi: float, omega: float):
    """Couples sinusoïdaux de même phase sur psi et phi."""

    def fn(q, t):
        s = np.sin(omega * t)
        return np.array([0.0, 0.0, 0.0, amp_psi * s, amp_phi * s])

    return fn


def _se2_generator(q, xi):
    # action de SE(2) sur (x, y, theta), triviale sur les formes (psi, phi)
    return np.array([xi[0] - xi[2] * q[1], xi[1] + xi[2] * q[0], xi[2], 0.0, 0.0])


def sections(params) -> Dict[str, SymmetrySection]:
    r = params["r"]

    def xi(q):
        a, b, c = helper_a(q, r), helper_b(q, r), helper_c(q)
        return np.array([a + c * q[1], b - c * q[0], c])

    return {
        "se2": SymmetrySection(
            name="se2",
            g_dim=3,
            xi_of_q=xi,
            generator=_se2_generator,
            description="(a + c y, b - c x, c)",
        )
    }
