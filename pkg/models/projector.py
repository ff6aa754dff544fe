from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import cho_solve


@dataclass(frozen=True)
class MetricFactor:
    """
    Cholesky de la métrique en un point.
    `inverse` n'est renseigné que pour une métrique constante factorisée une fois par parcours.
    """

    cho: Tuple[np.ndarray, bool]
    inverse: Optional[np.ndarray] = None

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.inverse is not None:
            return self.inverse @ rhs
        return cho_solve(self.cho, rhs, check_finite=False)


@dataclass(frozen=True)
class ProjectorPair:
    """
    Projecteurs orthogonaux (pour la métrique) au point `base` :
    Q sur D^perp, P = Id - Q sur D, R = P - Q.
    Les duaux sont les transposées en coordonnées.
    """

    base: np.ndarray
    Q_mat: np.ndarray
    P_mat: np.ndarray
    R_mat: np.ndarray
    C_inv: np.ndarray
    Z: np.ndarray
    mu: np.ndarray
    metric: np.ndarray
    factor: Optional[MetricFactor] = None

    @property
    def n(self) -> int:
        return int(self.base.shape[0])

    @property
    def m(self) -> int:
        return int(self.mu.shape[0])
