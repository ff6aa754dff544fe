import logging
from typing import NamedTuple, Optional

import numpy as np

from app.logging_config import fmt_vec
from app.validator import ValidationIssue
from models.errors import InitialConditionError, NumericalIssue, StepFailureError
from models.lagrangian import DiscreteForce, DiscreteLagrangian
from models.projector import MetricFactor, ProjectorPair
from models.states import GniState, StepConfig
from models.system import MechanicalSystem
from models.trajectory import MomentumRecord, TrajectoryBuilder, TrajectoryRecord
from services.diagnostics_service import DiagnosticsService
from services.discretization_service import DiscretizationService
from services.geometry_service import GeometryService
from services.numerics import FactorCache, NewtonResult, inf_norm, newton_solve

logger = logging.getLogger(__name__)

ADMISSIBLE_TOL = 1e-10
MANIFOLD_TOL = 1e-10


class ManifoldCheck(NamedTuple):
    inside: bool
    residual: float


class _StepSolution(NamedTuple):
    newton: NewtonResult
    projectors: ProjectorPair
    post: np.ndarray


def _check_step(Ld: DiscreteLagrangian, cfg: StepConfig) -> None:
    if abs(cfg.h - Ld.h) > 1e-12 * Ld.h:
        raise ValidationIssue("pas incohérent avec le lagrangien discret", field="h", value=cfg.h)


class GniService:
    """
    Intégrateur non holonome géométrique :
    D1 L_d(q_k, q_{k+1}) + (P - Q)^*_{q_k} D2 L_d(q_{k-1}, q_k) + P^* F_d(q_k, t_k) = 0.
    GniState.t est l'instant de q_curr.
    """

    @staticmethod
    def _solve(
        sys: MechanicalSystem,
        Ld: DiscreteLagrangian,
        state: GniState,
        cfg: StepConfig,
        force: Optional[DiscreteForce],
        metric: Optional[MetricFactor] = None,
        cache: Optional[FactorCache] = None,
    ) -> _StepSolution:
        q_prev = sys.point(state.q_prev, label="q_prev")
        q_curr = sys.point(state.q_curr, label="q_curr")
        pp = GeometryService.projectors_at(sys, q_curr, metric)
        post = DiscretizationService.legendre_plus(Ld, q_prev, q_curr)
        rhs = GeometryService.dual_reflection(pp, post)
        if force is not None:
            rhs = rhs + GeometryService.dual_projection(pp, force.covector(q_curr, state.t, Ld.h, Ld.scale))

        result = newton_solve(
            lambda x: np.asarray(Ld.d1(q_curr, x), dtype=float) + rhs,
            DiscretizationService.d1_jacobian(Ld, q_curr),
            2.0 * q_curr - q_prev,
            tol=cfg.newton_tol,
            max_iter=cfg.newton_max_iter,
            magnitude=inf_norm(rhs),
            step=state.k,
            label="gni",
            cache=cache,
        )
        return _StepSolution(result, pp, post)

    @staticmethod
    def gni_step(
        sys: MechanicalSystem,
        Ld: DiscreteLagrangian,
        state: GniState,
        cfg: StepConfig,
        force: Optional[DiscreteForce] = None,
    ) -> GniState:
        _check_step(Ld, cfg)
        sol = GniService._solve(sys, Ld, state, cfg, force)
        return GniState(q_prev=np.array(state.q_curr, dtype=float), q_curr=sol.newton.x, k=state.k + 1, t=state.t + Ld.h)

    @staticmethod
    def gni_run(
        sys: MechanicalSystem,
        Ld: DiscreteLagrangian,
        init: GniState,
        cfg: StepConfig,
        n_steps: int,
        force: Optional[DiscreteForce] = None,
        *,
        method: str = "gni",
    ) -> TrajectoryRecord:
        """
        n_steps pas depuis (q0, q1) : n_steps + 1 lignes (k = 0..n_steps), q_{n_steps+1} dans q_last.
        Ligne 0 : p^+ défini comme (P - Q)^*_{q0} p^-_{0,1}.
        """
        _check_step(Ld, cfg)
        h = Ld.h
        builder = TrajectoryBuilder(model=sys.name, method=method, h=h, n=sys.n, m=sys.m, scale=Ld.scale)

        q0 = sys.point(init.q_prev, label="q0")
        q1 = sys.point(init.q_curr, label="q1")
        metric = GeometryService.run_metric(sys, q0)
        cache = FactorCache()
        pp0 = GeometryService.projectors_at(sys, q0, metric)
        pre0 = DiscretizationService.legendre_minus(Ld, q0, q1)
        post0 = GeometryService.dual_reflection(pp0, pre0)
        GniService._append(builder, sys, Ld, init.t - h, q0, pre0, post0, pp0, float("nan"))

        logger.info(
            "Démarrage GNI",
            extra={"model": sys.name, "h": h, "steps": n_steps, "q0": fmt_vec(q0), "q1": fmt_vec(q1)},
        )

        state = GniState(q_prev=q0, q_curr=q1, k=init.k, t=init.t)
        floor_hits = 0
        for _ in range(n_steps):
            try:
                sol = GniService._solve(sys, Ld, state, cfg, force, metric, cache)
            except StepFailureError as exc:
                exc.step = state.k
                exc.partial = builder.build(q_last=state.q_curr, failure=str(exc))
                logger.error("Échec GNI au pas %s : %s", state.k, exc)
                raise
            except NumericalIssue as exc:
                partial = builder.build(q_last=state.q_curr, failure=str(exc))
                logger.error("Échec GNI au pas %s : %s", state.k, exc)
                raise StepFailureError(str(exc), step=state.k, partial=partial) from exc

            q_next = sol.newton.x
            floor_hits += int(sol.newton.at_floor)
            pre = DiscretizationService.legendre_minus(Ld, state.q_curr, q_next)
            GniService._append(builder, sys, Ld, state.t, state.q_curr, pre, sol.post, sol.projectors, sol.newton.threshold)
            state = GniState(q_prev=state.q_curr, q_curr=q_next, k=state.k + 1, t=state.t + h)

        if floor_hits:
            logger.warning(
                "Newton accepté au plancher d'arrondi sur %d pas (tol=%.1e)", floor_hits, cfg.newton_tol,
                extra={"model": sys.name},
            )
        record = builder.build(q_last=state.q_curr)
        logger.info("GNI terminé", extra={"model": sys.name, "rows": len(record)})
        return record

    @staticmethod
    def _append(builder, sys, Ld, t, q, pre, post, pp, threshold) -> None:
        momenta = MomentumRecord.from_pair(pre, post)
        diag = DiagnosticsService.row_diagnostics(sys, q, momenta, Ld.scale, pp)
        builder.append(
            t=t,
            q=q,
            momenta=momenta,
            lam=GeometryService.multipliers(pp, momenta.post - momenta.pre),
            energy=diag.energy,
            energy_post=diag.energy_post,
            residual=diag.residual,
            tolerance=threshold,
        )

    # -------------------------
    # Conditions initiales
    # -------------------------
    @staticmethod
    def initialize_from_velocity(
        sys: MechanicalSystem,
        Ld: DiscreteLagrangian,
        q0,
        v0,
        cfg: StepConfig,
        t0: float = 0.0,
    ) -> GniState:
        """(q0, q1) tel que F^- L_d(q0, q1) = scale * M(q0) v0."""
        _check_step(Ld, cfg)
        q0 = sys.point(q0, label="q0")
        v0 = sys.point(v0, label="v0")
        if sys.m:
            drift = inf_norm(sys.mu(q0) @ v0)
            if drift > ADMISSIBLE_TOL * inf_norm(v0):
                raise InitialConditionError("vitesse initiale hors de la distribution D", residual=drift)

        target = Ld.scale * (sys.mass(q0) @ v0)
        jac = DiscretizationService.d1_jacobian(Ld, q0)
        result = newton_solve(
            lambda x: -np.asarray(Ld.d1(q0, x), dtype=float) - target,
            lambda x: -jac(x),
            q0 + Ld.h * v0,
            tol=cfg.newton_tol,
            max_iter=cfg.newton_max_iter,
            magnitude=inf_norm(target),
            step=0,
            label="init",
        )
        logger.debug("Paire initiale construite", extra={"q1": fmt_vec(result.x)})
        return GniState(q_prev=q0, q_curr=result.x, k=1, t=t0 + Ld.h)

    @staticmethod
    def in_initial_manifold(sys: MechanicalSystem, Ld: DiscreteLagrangian, q0, q1) -> ManifoldCheck:
        """(q0, q1) dans M_0 : mu(q0) M(q0)^-1 p^-_{0,1} = 0."""
        q0 = sys.point(q0, label="q0")
        q1 = sys.point(q1, label="q1")
        if sys.m == 0:
            return ManifoldCheck(True, 0.0)
        pre = DiscretizationService.legendre_minus(Ld, q0, q1)
        residual = GeometryService.constraint_residual(sys, q0, pre)
        return ManifoldCheck(bool(residual <= MANIFOLD_TOL * (1.0 + inf_norm(pre))), residual)
