import logging
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from models.errors import InitialConditionError, NumericalIssue, StepFailureError, UnsupportedSystemError
from models.lagrangian import DiscreteLagrangian
from models.states import RattleState
from models.system import MechanicalSystem
from models.trajectory import MomentumRecord, TrajectoryBuilder, TrajectoryRecord
from services.diagnostics_service import DiagnosticsService
from services.discretization_service import DiscretizationService
from services.geometry_service import GeometryService
from services.gni_service import GniService
from services.numerics import inf_norm

logger = logging.getLogger(__name__)


class ShakeResidual(NamedTuple):
    second_difference: float
    centered_constraint: float


def _require_constant_metric(sys: MechanicalSystem) -> None:
    if not sys.constant_metric:
        raise UnsupportedSystemError(f"schéma position-moment réservé aux métriques constantes ({sys.name})")


class RattleService:
    """
    Forme position-moment (q_k, p~_k, lambda~_k) pour M constante :
    p_{k+1/2} = p~_k - h/2 (V_q(q_k) + mu(q_k)^T lambda~_k)
    q_{k+1}   = q_k + h M^-1 p_{k+1/2}
    0         = mu(q_{k+1}) M^-1 p~_{k+1}
    p~_{k+1}  = p_{k+1/2} - h/2 (V_q(q_{k+1}) + mu(q_{k+1})^T lambda~_{k+1})
    Moments physiques (M v), lambda~ = lambda / h.
    """

    @staticmethod
    def rattle_step(sys: MechanicalSystem, state: RattleState, h: float) -> RattleState:
        _require_constant_metric(sys)
        q = sys.point(state.q)
        M = sys.mass(q)
        M_fac = cho_factor(M)

        mu = sys.mu(q)
        p_half = np.asarray(state.p_tilde, dtype=float) - 0.5 * h * (sys.grad_v(q) + mu.T @ state.lambda_tilde)
        q_next = q + h * cho_solve(M_fac, p_half)

        a = p_half - 0.5 * h * sys.grad_v(q_next)
        if sys.m:
            mu_next = sys.mu(q_next)
            C = GeometryService.gram_matrix(sys, q_next)
            lam_next = (2.0 / h) * cho_solve(cho_factor(C), mu_next @ cho_solve(M_fac, a))
            p_next = a - 0.5 * h * (mu_next.T @ lam_next)
        else:
            lam_next = np.zeros(0)
            p_next = a
        return RattleState(q=q_next, p_tilde=p_next, lambda_tilde=lam_next, k=state.k + 1, t=state.t + h)

    @staticmethod
    def rattle_init(sys: MechanicalSystem, Ld: DiscreteLagrangian, q0, q1, t0: float = 0.0) -> RattleState:
        """p~_0 = F^- L_d(q0, q1) / scale, lambda~_0 = 0 ; (q0, q1) doit appartenir à M_0."""
        _require_constant_metric(sys)
        check = GniService.in_initial_manifold(sys, Ld, q0, q1)
        if not check.inside:
            raise InitialConditionError("paire initiale hors de M_0", residual=check.residual)
        q0 = sys.point(q0, label="q0")
        p0 = DiscretizationService.legendre_minus(Ld, q0, q1) / Ld.scale
        return RattleState(q=q0, p_tilde=p0, lambda_tilde=np.zeros(sys.m), k=0, t=t0)

    @staticmethod
    def rattle_run(
        sys: MechanicalSystem,
        init: RattleState,
        h: float,
        n_steps: int,
        *,
        scale: float = 1.0,
    ) -> TrajectoryRecord:
        """
        n_steps + 1 lignes. p^- = p~ - h/2 mu^T lambda~, p^+ = p~ + h/2 mu^T lambda~ ;
        moments et multiplicateurs multipliés par `scale` pour être comparables à gni_run.
        """
        _require_constant_metric(sys)
        builder = TrajectoryBuilder(model=sys.name, method="rattle", h=h, n=sys.n, m=sys.m, scale=scale)
        state = init
        RattleService._append(builder, sys, state, h, scale)
        logger.info("Démarrage RATTLE non holonome", extra={"model": sys.name, "h": h, "steps": n_steps})
        q_last = None
        # le pas supplémentaire fournit q_last
        for k in range(n_steps + 1):
            try:
                nxt = RattleService.rattle_step(sys, state, h)
            except NumericalIssue as exc:
                partial = builder.build(failure=str(exc))
                logger.error("Échec RATTLE au pas %s : %s", state.k, exc)
                raise StepFailureError(str(exc), step=state.k, partial=partial) from exc
            if k == n_steps:
                q_last = nxt.q
            else:
                state = nxt
                RattleService._append(builder, sys, state, h, scale)
        record = builder.build(q_last=q_last)
        logger.info("RATTLE terminé", extra={"model": sys.name, "rows": len(record)})
        return record

    @staticmethod
    def _append(builder: TrajectoryBuilder, sys: MechanicalSystem, state: RattleState, h: float, scale: float):
        q = np.asarray(state.q, dtype=float)
        reaction = 0.5 * h * (sys.mu(q).T @ state.lambda_tilde)
        pre = np.asarray(state.p_tilde, dtype=float) - reaction
        post = np.asarray(state.p_tilde, dtype=float) + reaction
        momenta = MomentumRecord.from_pair(scale * pre, scale * post)
        diag = DiagnosticsService.row_diagnostics(sys, q, momenta, scale)
        builder.append(
            t=state.t,
            q=q,
            momenta=momenta,
            lam=scale * h * np.asarray(state.lambda_tilde, dtype=float),
            energy=diag.energy,
            energy_post=diag.energy_post,
            residual=diag.residual,
        )

    @staticmethod
    def state_residual(sys: MechanicalSystem, state: RattleState) -> float:
        """||mu(q) M^-1 p~||_inf, nul sur tout état valide."""
        return GeometryService.constraint_residual(sys, state.q, state.p_tilde)

    @staticmethod
    def shake_residuals(sys: MechanicalSystem, q_prev, q_curr, q_next, lambda_tilde, h: float) -> ShakeResidual:
        """
        Forme à deux pas :
        q_{k+1} - 2 q_k + q_{k-1} = -h^2 M^-1 (V_q(q_k) + mu(q_k)^T lambda~_k)
        mu(q_k) (q_{k+1} - q_{k-1}) / 2h = 0
        """
        q_prev = np.asarray(q_prev, dtype=float)
        q_curr = np.asarray(q_curr, dtype=float)
        q_next = np.asarray(q_next, dtype=float)
        M = sys.mass(q_curr)
        mu = sys.mu(q_curr)
        force = sys.grad_v(q_curr) + mu.T @ np.asarray(lambda_tilde, dtype=float)
        second = (q_next - 2.0 * q_curr + q_prev) + h * h * GeometryService.metric_solve(M, force, q_curr)
        centered = mu @ (q_next - q_prev) / (2.0 * h)
        return ShakeResidual(inf_norm(second), inf_norm(centered))
