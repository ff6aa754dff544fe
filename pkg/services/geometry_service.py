import logging
from typing import Dict, Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, null_space

from models.errors import RankDeficiencyError
from models.projector import MetricFactor, ProjectorPair
from models.system import MechanicalSystem

logger = logging.getLogger(__name__)

MAX_GRAM_CONDITION = 1e12


class GeometryService:
    """Matrice de Gram, champs gradients Z^a et projecteurs P / Q / R en un point de carte."""

    @staticmethod
    def metric_factor(M: np.ndarray, q: np.ndarray, *, invert: bool = False) -> MetricFactor:
        try:
            cho = cho_factor(M)
        except (LinAlgError, ValueError) as exc:
            raise RankDeficiencyError("métrique non définie positive", point=tuple(q)) from exc
        inverse = cho_solve(cho, np.eye(M.shape[0]), check_finite=False) if invert else None
        return MetricFactor(cho=cho, inverse=inverse)

    @staticmethod
    def run_metric(sys: MechanicalSystem, q: np.ndarray) -> Optional[MetricFactor]:
        """Factorisation commune à tout un parcours quand M est constante, None sinon."""
        if not sys.constant_metric or sys.projector_metric is not None:
            return None
        q = sys.point(q)
        return GeometryService.metric_factor(sys.mass(q), q, invert=True)

    @staticmethod
    def mass_factor(sys: MechanicalSystem, q: np.ndarray, pp: Optional[ProjectorPair] = None) -> MetricFactor:
        """Factorisation de M(q), reprise du couple de projecteurs quand il a été construit avec M."""
        if pp is not None and pp.factor is not None and sys.projector_metric is None:
            return pp.factor
        q = np.asarray(q, dtype=float)
        return GeometryService.metric_factor(sys.mass(q), q)

    @staticmethod
    def metric_solve(M: np.ndarray, rhs: np.ndarray, q: np.ndarray, factor: Optional[MetricFactor] = None) -> np.ndarray:
        if factor is None:
            factor = GeometryService.metric_factor(M, q)
        return factor.solve(rhs)

    @staticmethod
    def _projector_metric(sys: MechanicalSystem, q: np.ndarray) -> np.ndarray:
        if sys.projector_metric is not None:
            return np.asarray(sys.projector_metric(q), dtype=float).reshape(sys.n, sys.n)
        return sys.mass(q)

    @staticmethod
    def _gram(factor: MetricFactor, mu: np.ndarray, q: np.ndarray):
        Z = factor.solve(mu.T)  # Z = M^-1 mu^T
        C = mu @ Z
        C = 0.5 * (C + C.T)
        try:
            w, V = np.linalg.eigh(C)
        except LinAlgError:
            w, V = np.full(C.shape[0], np.nan), None
        cond = float(w[-1] / w[0]) if w[0] > 0.0 else float("inf")
        if not np.isfinite(cond) or cond > MAX_GRAM_CONDITION:
            logger.error("Matrice de Gram mal conditionnée (cond=%.3e)", cond)
            raise RankDeficiencyError("matrice de Gram singulière ou mal conditionnée", point=tuple(q), condition=cond)
        return C, (V / w) @ V.T, Z

    @staticmethod
    def gram_matrix(sys: MechanicalSystem, q: np.ndarray, metric: Optional[np.ndarray] = None) -> np.ndarray:
        """C = mu M^-1 mu^T (m x m)."""
        q = sys.point(q)
        mu = sys.mu(q)
        if sys.m == 0:
            return np.zeros((0, 0))
        M = sys.mass(q) if metric is None else metric
        C, _, _ = GeometryService._gram(GeometryService.metric_factor(M, q), mu, q)
        return C

    @staticmethod
    def projectors_at(sys: MechanicalSystem, q: np.ndarray, metric: Optional[MetricFactor] = None) -> ProjectorPair:
        """`metric` : factorisation déjà disponible de la métrique des projecteurs en q."""
        q = sys.point(q)
        n = sys.n
        M = GeometryService._projector_metric(sys, q)
        factor = metric if metric is not None else GeometryService.metric_factor(M, q)
        mu = sys.mu(q)
        identity = np.eye(n)

        if sys.m == 0:
            Q = np.zeros((n, n))
            return ProjectorPair(
                base=q, Q_mat=Q, P_mat=identity, R_mat=identity.copy(),
                C_inv=np.zeros((0, 0)), Z=np.zeros((n, 0)), mu=mu, metric=M, factor=factor,
            )

        _, C_inv, Z = GeometryService._gram(factor, mu, q)
        Q = Z @ C_inv @ mu
        P = identity - Q
        return ProjectorPair(base=q, Q_mat=Q, P_mat=P, R_mat=P - Q, C_inv=C_inv, Z=Z, mu=mu, metric=M, factor=factor)

    @staticmethod
    def dual_reflection(pp: ProjectorPair, p: np.ndarray) -> np.ndarray:
        """(P - Q)^* p = R^T p."""
        return pp.R_mat.T @ np.asarray(p, dtype=float)

    @staticmethod
    def dual_projection(pp: ProjectorPair, p: np.ndarray) -> np.ndarray:
        """P^* p = P^T p."""
        return pp.P_mat.T @ np.asarray(p, dtype=float)

    @staticmethod
    def multipliers(pp: ProjectorPair, covector: np.ndarray) -> np.ndarray:
        """lambda tel que mu^T lambda est la composante D^perp de `covector` : C^-1 mu M^-1 covector."""
        return pp.C_inv @ (pp.Z.T @ np.asarray(covector, dtype=float))

    @staticmethod
    def constraint_residual(sys: MechanicalSystem, q: np.ndarray, p: np.ndarray,
                            factor: Optional[MetricFactor] = None) -> float:
        """||mu(q) M(q)^-1 p||_inf."""
        if sys.m == 0:
            return 0.0
        q = sys.point(q)
        v = GeometryService.metric_solve(sys.mass(q), np.asarray(p, dtype=float), q, factor)
        return float(np.max(np.abs(sys.mu(q) @ v)))

    @staticmethod
    def invariant_residuals(sys: MechanicalSystem, q: np.ndarray) -> Dict[str, float]:
        """Résidus des propriétés algébriques du couple de projecteurs (tests / diagnostic)."""
        pp = GeometryService.projectors_at(sys, q)
        n = pp.n
        Q, P, R, M = pp.Q_mat, pp.P_mat, pp.R_mat, pp.metric
        out = {
            "idempotent": float(np.max(np.abs(Q @ Q - Q))),
            "complement": float(np.max(np.abs(P + Q - np.eye(n)))),
            "self_adjoint": float(np.max(np.abs(M @ Q - Q.T @ M))),
            "involution": float(np.max(np.abs(R @ R - np.eye(n)))),
            "annihilates_d": 0.0,
            "fixes_d_perp": 0.0,
        }
        if pp.m:
            basis = null_space(pp.mu)
            if basis.size:
                out["annihilates_d"] = float(np.max(np.linalg.norm(Q @ basis, axis=0) / np.linalg.norm(basis, axis=0)))
            zn = np.linalg.norm(pp.Z, axis=0)
            out["fixes_d_perp"] = float(np.max(np.linalg.norm(Q @ pp.Z - pp.Z, axis=0) / zn))
        return out
