from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from models.errors import DimensionError

Vector = np.ndarray
Matrix = np.ndarray


def as_point(values, n: int, *, label: str = "q") -> Vector:
    """Convertit en vecteur float de dimension n (copie)."""
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.shape[0] != n:
        raise DimensionError(f"dimension de {label} invalide", expected=n, got=int(arr.shape[0]))
    return arr


def _zero_potential(q: Vector) -> float:
    return 0.0


@dataclass(frozen=True)
class MechanicalSystem:
    """
    Système mécanique en coordonnées de carte :
    - metric(q) -> M(q) (n x n, SPD)
    - potential(q) -> V(q), potential_grad(q) -> V_q(q)
    - constraints(q) -> mu(q) (m x n), lignes = formes mu^a
    Optionnel :
    - metric_grad(q) -> tableau (n, n, n) avec [k] = dM/dq_k (sinon différences finies)
    - projector_metric(q) : métrique utilisée pour construire P/Q si différente de M
    """

    name: str
    n: int
    m: int
    metric: Callable[[Vector], Matrix]
    constraints: Callable[[Vector], Matrix]
    potential: Callable[[Vector], float] = _zero_potential
    potential_grad: Optional[Callable[[Vector], Vector]] = None
    metric_grad: Optional[Callable[[Vector], np.ndarray]] = None
    projector_metric: Optional[Callable[[Vector], Matrix]] = None
    constant_metric: bool = False
    params: Mapping[str, float] = field(default_factory=dict)

    def mass(self, q: Vector) -> Matrix:
        return np.asarray(self.metric(q), dtype=float).reshape(self.n, self.n)

    def mu(self, q: Vector) -> Matrix:
        if self.m == 0:
            return np.zeros((0, self.n))
        return np.asarray(self.constraints(q), dtype=float).reshape(self.m, self.n)

    def grad_v(self, q: Vector) -> Vector:
        if self.potential_grad is None:
            return np.zeros(self.n)
        return np.asarray(self.potential_grad(q), dtype=float).reshape(self.n)

    def v(self, q: Vector) -> float:
        return float(self.potential(q))

    def point(self, values, *, label: str = "q") -> Vector:
        return as_point(values, self.n, label=label)
