import logging
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor

from app.validator import ValidationIssue, float_strict
from models.lagrangian import DiscreteLagrangian
from models.system import MechanicalSystem
from services.numerics import fd_gradient, fd_jacobian, fd_partials

logger = logging.getLogger(__name__)

MAX_MIXED_CONDITION = 1e12


class GradientCheck(NamedTuple):
    d1_error: float
    d2_error: float


def _check_spd(M: np.ndarray, field: str = "M") -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1] or np.max(np.abs(M - M.T)) > 1e-12 * max(1.0, np.max(np.abs(M))):
        raise ValidationIssue("matrice de masse non symétrique", field=field)
    try:
        cho_factor(M)
    except LinAlgError as exc:
        raise ValidationIssue("matrice de masse non définie positive", field=field) from exc
    return M


class DiscretizationService:
    """Lagrangiens discrets L_d(q0, q1), transformées de Legendre discrètes et contrôles associés."""

    # -------------------------
    # Legendre discret
    # -------------------------
    @staticmethod
    def legendre_minus(Ld: DiscreteLagrangian, q0, q1) -> np.ndarray:
        """p^-_{0,1} = -D1 L_d(q0, q1), basé en q0."""
        return -np.asarray(Ld.d1(np.asarray(q0, dtype=float), np.asarray(q1, dtype=float)), dtype=float)

    @staticmethod
    def legendre_plus(Ld: DiscreteLagrangian, q0, q1) -> np.ndarray:
        """p^+_{0,1} = D2 L_d(q0, q1), basé en q1."""
        return np.asarray(Ld.d2(np.asarray(q0, dtype=float), np.asarray(q1, dtype=float)), dtype=float)

    # -------------------------
    # Constructeurs
    # -------------------------
    @staticmethod
    def make_symmetric_mechanical(
        M,
        h: float,
        potential: Optional[Callable[[np.ndarray], float]] = None,
        potential_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> DiscreteLagrangian:
        """
        L_d = (1/2h) dq^T M dq - (h/2)(V(q0) + V(q1)), M constante.
        Les moments discrets approchent M v (scale = 1).
        """
        h = float_strict(h, field="h", positive=True)
        M = _check_spd(M)
        n = M.shape[0]
        V = potential or (lambda q: 0.0)
        Vq = potential_grad or (lambda q: np.zeros(n))

        def eval_(q0, q1):
            dq = q1 - q0
            return float(dq @ M @ dq) / (2.0 * h) - 0.5 * h * (V(q0) + V(q1))

        def d1(q0, q1):
            return -(M @ (q1 - q0)) / h - 0.5 * h * np.asarray(Vq(q0), dtype=float)

        def d2(q0, q1):
            return (M @ (q1 - q0)) / h - 0.5 * h * np.asarray(Vq(q1), dtype=float)

        d12_const = -M / h
        return DiscreteLagrangian(
            name="symmetric_mechanical",
            h=h,
            scale=1.0,
            eval=eval_,
            d1=d1,
            d2=d2,
            d12=lambda q0, q1: d12_const,
        )

    @staticmethod
    def make_quadratic(M, h: float) -> DiscreteLagrangian:
        """L_d = dq^T M dq / (2 h^2) : forme sans facteur h global (scale = 1/h)."""
        h = float_strict(h, field="h", positive=True)
        M = _check_spd(M)
        h2 = h * h

        def eval_(q0, q1):
            dq = q1 - q0
            return float(dq @ M @ dq) / (2.0 * h2)

        def d1(q0, q1):
            return -(M @ (q1 - q0)) / h2

        def d2(q0, q1):
            return (M @ (q1 - q0)) / h2

        d12_const = -M / h2
        return DiscreteLagrangian(
            name="quadratic",
            h=h,
            scale=1.0 / h,
            eval=eval_,
            d1=d1,
            d2=d2,
            d12=lambda q0, q1: d12_const,
        )

    @staticmethod
    def make_midpoint_metric(sys: MechanicalSystem, h: float) -> DiscreteLagrangian:
        """
        L_d = (1/2) v^T M(q_mid) v, v = (q1 - q0)/h, q_mid = (q0 + q1)/2 (scale = 1/h).
        Seules les coordonnées dont dépend M sont effectivement moyennées.
        """
        h = float_strict(h, field="h", positive=True)

        def metric_grad(q):
            if sys.metric_grad is not None:
                return np.asarray(sys.metric_grad(q), dtype=float)
            return fd_partials(sys.mass, q)

        def quad_grad(q_mid, v):
            dM = metric_grad(q_mid)
            return np.einsum("i,kij,j->k", v, dM, v)

        def eval_(q0, q1):
            v = (q1 - q0) / h
            return 0.5 * float(v @ sys.mass(0.5 * (q0 + q1)) @ v)

        def d1(q0, q1):
            q_mid = 0.5 * (q0 + q1)
            v = (q1 - q0) / h
            return -(sys.mass(q_mid) @ v) / h + 0.25 * quad_grad(q_mid, v)

        def d2(q0, q1):
            q_mid = 0.5 * (q0 + q1)
            v = (q1 - q0) / h
            return (sys.mass(q_mid) @ v) / h + 0.25 * quad_grad(q_mid, v)

        return DiscreteLagrangian(
            name="midpoint_metric",
            h=h,
            scale=1.0 / h,
            eval=eval_,
            d1=d1,
            d2=d2,
            d12=None,
        )

    @staticmethod
    def make_from_function(fn: Callable[[np.ndarray, np.ndarray], float], h: float, scale: float = 1.0,
                           name: str = "numeric") -> DiscreteLagrangian:
        """Lagrangien discret quelconque : D1 / D2 par différences finies centrées."""
        h = float_strict(h, field="h", positive=True)

        def d1(q0, q1):
            return fd_gradient(lambda x: fn(x, q1), q0)

        def d2(q0, q1):
            return fd_gradient(lambda x: fn(q0, x), q1)

        return DiscreteLagrangian(name=name, h=h, scale=float(scale), eval=fn, d1=d1, d2=d2)

    # -------------------------
    # Contrôles
    # -------------------------
    @staticmethod
    def gradient_check(Ld: DiscreteLagrangian, q0, q1) -> GradientCheck:
        """Erreurs relatives de d1 / d2 face aux différences finies de eval."""
        q0 = np.asarray(q0, dtype=float)
        q1 = np.asarray(q1, dtype=float)
        fd1 = fd_gradient(lambda x: Ld.eval(x, q1), q0)
        fd2 = fd_gradient(lambda x: Ld.eval(q0, x), q1)
        a1 = np.asarray(Ld.d1(q0, q1), dtype=float)
        a2 = np.asarray(Ld.d2(q0, q1), dtype=float)
        e1 = np.linalg.norm(a1 - fd1) / max(np.linalg.norm(a1), 1e-300)
        e2 = np.linalg.norm(a2 - fd2) / max(np.linalg.norm(a2), 1e-300)
        return GradientCheck(float(e1), float(e2))

    @staticmethod
    def d1_jacobian(Ld: DiscreteLagrangian, q0) -> Callable[[np.ndarray], np.ndarray]:
        """x -> d(d1)(q0, x)/dx, jacobienne de Newton des pas implicites."""
        q0 = np.asarray(q0, dtype=float)
        if Ld.d12 is not None:
            return lambda x: np.asarray(Ld.d12(q0, x), dtype=float)
        return lambda x: fd_jacobian(lambda y: Ld.d1(q0, y), x)

    @staticmethod
    def mixed_hessian(Ld: DiscreteLagrangian, q0, q1) -> np.ndarray:
        """D12 L_d : d(d1)/d(q1)."""
        return DiscretizationService.d1_jacobian(Ld, q0)(np.asarray(q1, dtype=float))

    @staticmethod
    def is_regular(Ld: DiscreteLagrangian, q0, q1) -> bool:
        D12 = DiscretizationService.mixed_hessian(Ld, q0, q1)
        try:
            cond = float(np.linalg.cond(D12))
        except LinAlgError:
            return False
        regular = bool(np.isfinite(cond) and cond < MAX_MIXED_CONDITION)
        if not regular:
            logger.warning("D12 L_d quasi singulière (cond=%.3e)", cond)
        return regular

