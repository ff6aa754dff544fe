from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Vector = np.ndarray
PairFn = Callable[[Vector, Vector], Vector]


@dataclass(frozen=True)
class DiscreteLagrangian:
    """
    L_d(q0, q1) avec ses dérivées partielles.

    `scale` : les moments discrets approchent scale * M v.
    - forme mécanique symétrique (action sur un pas) : scale = 1
    - formes quadratique / point milieu sans facteur h global : scale = 1/h
    `d12(q0, q1)` : matrice d(d1)/d(q1), utilisée comme jacobienne de Newton (None => différences finies).
    """

    name: str
    h: float
    scale: float
    eval: Callable[[Vector, Vector], float]
    d1: PairFn
    d2: PairFn
    d12: Optional[Callable[[Vector, Vector], np.ndarray]] = None

    @property
    def step_h(self) -> float:
        return self.h


@dataclass(frozen=True)
class DiscreteForce:
    """
    Force généralisée continue f(q, t) ; le covecteur discret vaut scale * h * f(q_k, t_k).
    """

    name: str
    fn: Callable[[Vector, float], Vector]

    def covector(self, q: Vector, t: float, h: float, scale: float) -> Vector:
        return scale * h * np.asarray(self.fn(q, t), dtype=float)


@dataclass(frozen=True)
class DiscreteConstraint:
    """Discrétisation des contraintes pour la méthode DLA : eval(q0, q1) = 0 (m composantes)."""

    name: str
    description: str
    eval: Callable[[Vector, Vector], Vector]
