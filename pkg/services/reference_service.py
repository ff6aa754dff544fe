import logging
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, null_space
from scipy.optimize import least_squares

from app.logging_config import fmt_vec
from models.errors import NumericalIssue, StepFailureError
from models.lagrangian import DiscreteConstraint, DiscreteForce, DiscreteLagrangian
from models.states import ContinuousState, GniState, StepConfig
from models.system import MechanicalSystem
from models.trajectory import MomentumRecord, TrajectoryBuilder, TrajectoryRecord
from services.diagnostics_service import DiagnosticsService
from services.discretization_service import DiscretizationService
from services.geometry_service import GeometryService
from services.numerics import fd_jacobian, fd_partials, inf_norm, newton_solve

logger = logging.getLogger(__name__)


class LdaSolution(NamedTuple):
    acceleration: np.ndarray
    multipliers: np.ndarray


class DlaSolution(NamedTuple):
    q_next: np.ndarray
    multipliers: np.ndarray
    threshold: float


def _force_value(force: Optional[DiscreteForce], q: np.ndarray, t: float, n: int) -> np.ndarray:
    if force is None:
        return np.zeros(n)
    return np.asarray(force.fn(q, t), dtype=float)


class ReferenceService:
    """Solution continue de Lagrange-d'Alembert (RK4) et intégrateur DLA de comparaison."""

    # -------------------------
    # Équations continues
    # -------------------------
    @staticmethod
    def metric_derivatives(sys: MechanicalSystem, q) -> np.ndarray:
        """Tableau (n, n, n) : [k] = dM/dq_k."""
        if sys.constant_metric:
            return np.zeros((sys.n, sys.n, sys.n))
        if sys.metric_grad is not None:
            return np.asarray(sys.metric_grad(q), dtype=float)
        return fd_partials(sys.mass, q)

    @staticmethod
    def constraint_derivative(sys: MechanicalSystem, q, v) -> np.ndarray:
        """D mu(q)[v] = sum_k v_k d mu / d q_k (m x n), différences centrées."""
        if sys.m == 0:
            return np.zeros((0, sys.n))
        dmu = fd_partials(sys.mu, np.asarray(q, dtype=float))
        return np.einsum("k,kan->an", np.asarray(v, dtype=float), dmu)

    @staticmethod
    def lda_solution(sys: MechanicalSystem, state: ContinuousState, force: Optional[DiscreteForce] = None) -> LdaSolution:
        """
        M a = -V_q - (dM[v]) v + 1/2 (v^T dM v) + f + mu^T lambda,
        lambda éliminé par dérivation de mu(q) v = 0 le long du flot.
        """
        q = sys.point(state.q)
        v = sys.point(state.v, label="v")
        M = sys.mass(q)
        dM = ReferenceService.metric_derivatives(sys, q)
        mdot_v = np.einsum("kij,k,j->i", dM, v, v)
        quad = np.einsum("i,kij,j->k", v, dM, v)
        rhs = -sys.grad_v(q) - mdot_v + 0.5 * quad + _force_value(force, q, state.t, sys.n)
        factor = GeometryService.metric_factor(M, q)
        a_free = factor.solve(rhs)
        if sys.m == 0:
            return LdaSolution(a_free, np.zeros(0))

        mu = sys.mu(q)
        C = GeometryService.gram_matrix(sys, q, metric=M)
        dmu_v = ReferenceService.constraint_derivative(sys, q, v)
        lam = -cho_solve(cho_factor(C), mu @ a_free + dmu_v @ v, check_finite=False)
        return LdaSolution(a_free + factor.solve(mu.T @ lam), lam)

    @staticmethod
    def lda_rhs(sys: MechanicalSystem, state: ContinuousState, force: Optional[DiscreteForce] = None) -> np.ndarray:
        return ReferenceService.lda_solution(sys, state, force).acceleration

    @staticmethod
    def rk4_step(sys: MechanicalSystem, state: ContinuousState, dt: float,
                 force: Optional[DiscreteForce] = None) -> ContinuousState:
        def f(t, q, v):
            return v, ReferenceService.lda_rhs(sys, ContinuousState(q, v, t), force)

        q, v, t = np.asarray(state.q, dtype=float), np.asarray(state.v, dtype=float), state.t
        k1q, k1v = f(t, q, v)
        k2q, k2v = f(t + dt / 2, q + dt / 2 * k1q, v + dt / 2 * k1v)
        k3q, k3v = f(t + dt / 2, q + dt / 2 * k2q, v + dt / 2 * k2v)
        k4q, k4v = f(t + dt, q + dt * k3q, v + dt * k3v)
        return ContinuousState(
            q=q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q),
            v=v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v),
            t=t + dt,
        )

    @staticmethod
    def rk4_run(
        sys: MechanicalSystem,
        init: ContinuousState,
        h_ref: float,
        n: int,
        *,
        stride: int = 1,
        force: Optional[DiscreteForce] = None,
        scale: float = 1.0,
    ) -> TrajectoryRecord:
        """
        n pas de RK4 classique ; une ligne tous les `stride` pas.
        p = scale * M v ; lambda rapporté dans la normalisation discrète (scale * h_out * lambda continu).
        """
        h_out = h_ref * stride
        builder = TrajectoryBuilder(model=sys.name, method="reference", h=h_out, n=sys.n, m=sys.m, scale=scale)
        state = ContinuousState(sys.point(init.q), sys.point(init.v, label="v0"), init.t)
        logger.info("Démarrage RK4 de référence", extra={"model": sys.name, "h_ref": h_ref, "steps": n})

        ReferenceService._append(builder, sys, state, force, scale, h_out)
        for i in range(1, n + 1):
            try:
                state = ReferenceService.rk4_step(sys, state, h_ref, force)
            except NumericalIssue as exc:
                partial = builder.build(failure=str(exc))
                logger.error("Échec RK4 au pas %s : %s", i, exc)
                raise StepFailureError(str(exc), step=i, partial=partial) from exc
            if i % stride == 0:
                ReferenceService._append(builder, sys, state, force, scale, h_out)
        drift = inf_norm(sys.mu(state.q) @ state.v) if sys.m else 0.0
        logger.info("RK4 terminé", extra={"model": sys.name, "drift": drift})
        return builder.build()

    @staticmethod
    def _append(builder, sys, state: ContinuousState, force, scale: float, h_out: float) -> None:
        sol = ReferenceService.lda_solution(sys, state, force)
        p = scale * (sys.mass(state.q) @ state.v)
        momenta = MomentumRecord.from_pair(p, p)
        diag = DiagnosticsService.row_diagnostics(sys, state.q, momenta, scale)
        builder.append(
            t=state.t,
            q=state.q,
            momenta=momenta,
            lam=scale * h_out * sol.multipliers,
            energy=diag.energy,
            energy_post=diag.energy_post,
            residual=diag.residual,
        )

    # -------------------------
    # Intégrateur DLA
    # -------------------------
    @staticmethod
    def make_midpoint_constraint(sys: MechanicalSystem, h: float) -> DiscreteConstraint:
        """mu((q0 + q1)/2) (q1 - q0) / h."""
        return DiscreteConstraint(
            name="midpoint",
            description="mu au point milieu",
            eval=lambda q0, q1: sys.mu(0.5 * (q0 + q1)) @ (q1 - q0) / h,
        )

    @staticmethod
    def make_left_constraint(sys: MechanicalSystem, h: float) -> DiscreteConstraint:
        """mu(q0) (q1 - q0) / h, discrétisation grossière."""
        return DiscreteConstraint(
            name="coarse",
            description="mu au point gauche",
            eval=lambda q0, q1: sys.mu(q0) @ (q1 - q0) / h,
        )

    @staticmethod
    def _dla_solve(
        sys: MechanicalSystem,
        Ld: DiscreteLagrangian,
        dc: Optional[DiscreteConstraint],
        q_prev,
        q_curr,
        cfg: StepConfig,
        step: Optional[int] = None,
    ) -> DlaSolution:
        """D1 L_d(q_k, x) + D2 L_d(q_{k-1}, q_k) = mu(q_k)^T lambda, dc(q_k, x) = 0 ; Newton en (x, lambda)."""
        n, m = sys.n, sys.m
        q_prev = sys.point(q_prev, label="q_prev")
        q_curr = sys.point(q_curr, label="q_curr")
        post = DiscretizationService.legendre_plus(Ld, q_prev, q_curr)
        mu = sys.mu(q_curr)
        d1_jac = DiscretizationService.d1_jacobian(Ld, q_curr)

        def constraint(x):
            if m == 0:
                return np.zeros(0)
            return np.asarray(dc.eval(q_curr, x), dtype=float).reshape(m)

        def residual(z):
            x, lam = z[:n], z[n:]
            return np.concatenate([np.asarray(Ld.d1(q_curr, x), dtype=float) + post - mu.T @ lam, constraint(x)])

        def jacobian(z):
            x = z[:n]
            top = np.hstack([d1_jac(x), -mu.T])
            if m == 0:
                return top
            bottom = np.hstack([fd_jacobian(constraint, x), np.zeros((m, m))])
            return np.vstack([top, bottom])

        z0 = np.concatenate([2.0 * q_curr - q_prev, np.zeros(m)])
        result = newton_solve(
            residual, jacobian, z0,
            tol=cfg.newton_tol,
            max_iter=cfg.newton_max_iter,
            magnitude=inf_norm(post),
            step=step,
            label="dla",
        )
        return DlaSolution(result.x[:n], result.x[n:], result.threshold)

    @staticmethod
    def dla_step(sys, Ld, dc, q_prev, q_curr, cfg: StepConfig) -> np.ndarray:
        return ReferenceService._dla_solve(sys, Ld, dc, q_prev, q_curr, cfg).q_next

    @staticmethod
    def dla_run(
        sys: MechanicalSystem,
        Ld: DiscreteLagrangian,
        dc: Optional[DiscreteConstraint],
        init: GniState,
        cfg: StepConfig,
        n_steps: int,
    ) -> TrajectoryRecord:
        """Même convention de lignes que gni_run ; ligne 0 : p^+ := p^-, lambda = 0."""
        h = Ld.h
        builder = TrajectoryBuilder(model=sys.name, method="dla", h=h, n=sys.n, m=sys.m, scale=Ld.scale)
        q_prev = sys.point(init.q_prev, label="q0")
        q_curr = sys.point(init.q_curr, label="q1")
        pre0 = DiscretizationService.legendre_minus(Ld, q_prev, q_curr)
        ReferenceService._append_discrete(builder, sys, Ld, init.t - h, q_prev, pre0, pre0, np.zeros(sys.m), float("nan"))

        logger.info(
            "Démarrage DLA",
            extra={"model": sys.name, "constraint": getattr(dc, "name", None), "steps": n_steps},
        )
        k, t = init.k, init.t
        for _ in range(n_steps):
            try:
                sol = ReferenceService._dla_solve(sys, Ld, dc, q_prev, q_curr, cfg, step=k)
            except NumericalIssue as exc:
                partial = builder.build(q_last=q_curr, failure=str(exc))
                logger.error("Échec DLA au pas %s : %s", k, exc)
                if isinstance(exc, StepFailureError):
                    exc.step, exc.partial = k, partial
                    raise
                raise StepFailureError(str(exc), step=k, partial=partial) from exc
            pre = DiscretizationService.legendre_minus(Ld, q_curr, sol.q_next)
            post = DiscretizationService.legendre_plus(Ld, q_prev, q_curr)
            ReferenceService._append_discrete(builder, sys, Ld, t, q_curr, pre, post, sol.multipliers, sol.threshold)
            q_prev, q_curr = q_curr, sol.q_next
            k, t = k + 1, t + h
        return builder.build(q_last=q_curr)

    @staticmethod
    def _append_discrete(builder, sys, Ld, t, q, pre, post, lam, threshold) -> None:
        momenta = MomentumRecord.from_pair(pre, post)
        diag = DiagnosticsService.row_diagnostics(sys, q, momenta, Ld.scale)
        builder.append(
            t=t,
            q=q,
            momenta=momenta,
            lam=lam,
            energy=diag.energy,
            energy_post=diag.energy_post,
            residual=diag.residual,
            tolerance=threshold,
        )

    # -------------------------
    # Vitesse initiale continue
    # -------------------------
    @staticmethod
    def shoot_initial_velocity(
        sys: MechanicalSystem,
        q0,
        q1,
        h: float,
        refine: int,
        *,
        t0: float = 0.0,
        force: Optional[DiscreteForce] = None,
    ) -> np.ndarray:
        """v0 dans D(q0) minimisant || flot_h(q0, v0) - q1 || (RK4, `refine` sous-pas)."""
        q0 = sys.point(q0, label="q0")
        q1 = sys.point(q1, label="q1")
        basis = null_space(sys.mu(q0)) if sys.m else np.eye(sys.n)
        dt = h / refine

        def flow(c):
            state = ContinuousState(q0, basis @ c, t0)
            for _ in range(refine):
                state = ReferenceService.rk4_step(sys, state, dt, force)
            return state.q - q1

        c0 = basis.T @ (q1 - q0) / h
        sol = least_squares(flow, c0, xtol=1e-14, ftol=1e-14, gtol=1e-14)
        v0 = basis @ sol.x
        logger.info(
            "Vitesse initiale obtenue par tir",
            extra={"model": sys.name, "v0": fmt_vec(v0), "cost": float(sol.cost), "status": int(sol.status)},
        )
        return v0
