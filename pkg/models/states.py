from dataclasses import dataclass, field

import numpy as np

from app.config import settings
from app.validator import float_strict, int_strict


@dataclass(frozen=True)
class StepConfig:
    h: float
    newton_tol: float = field(default_factory=lambda: settings.GNI_NEWTON_TOL)
    newton_max_iter: int = field(default_factory=lambda: settings.GNI_NEWTON_MAX_ITER)

    def __post_init__(self) -> None:
        # validation stricte, même messages que la configuration CLI
        object.__setattr__(self, "h", float_strict(self.h, field="h", positive=True))
        object.__setattr__(self, "newton_tol", float_strict(self.newton_tol, field="newton_tol", positive=True))
        object.__setattr__(
            self, "newton_max_iter", int_strict(self.newton_max_iter, field="newton_max_iter", min_value=1)
        )


@dataclass(frozen=True)
class GniState:
    q_prev: np.ndarray
    q_curr: np.ndarray
    k: int = 1
    t: float = 0.0


@dataclass(frozen=True)
class RattleState:
    q: np.ndarray
    p_tilde: np.ndarray
    lambda_tilde: np.ndarray
    k: int = 0
    t: float = 0.0


@dataclass(frozen=True)
class ContinuousState:
    q: np.ndarray
    v: np.ndarray
    t: float = 0.0
