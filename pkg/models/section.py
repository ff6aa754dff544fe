from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class SymmetrySection:
    """
    Section xi(q) de l'algèbre de Lie (point de base omis) et générateur infinitésimal
    generator(q, xi) -> xi_Q(q). Pour une section de g^D, xi_Q(q) est dans D_q.
    """

    name: str
    g_dim: int
    xi_of_q: Callable[[np.ndarray], np.ndarray]
    generator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    description: str = ""

    def field_at(self, q: np.ndarray) -> np.ndarray:
        return np.asarray(self.generator(q, np.asarray(self.xi_of_q(q), dtype=float)), dtype=float)
