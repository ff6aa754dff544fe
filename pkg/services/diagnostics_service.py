import logging
from typing import Dict, List, Mapping, NamedTuple, Optional

import numpy as np

from models.lagrangian import DiscreteLagrangian
from models.projector import MetricFactor, ProjectorPair
from models.section import SymmetrySection
from models.system import MechanicalSystem
from models.trajectory import EnergyReport, MomentumRecord, TrajectoryRecord
from services.discretization_service import DiscretizationService
from services.geometry_service import GeometryService

logger = logging.getLogger(__name__)


class Crossing(NamedTuple):
    i: int
    j: int
    point: np.ndarray


class ErrorReport(NamedTuple):
    distances: np.ndarray
    rms: float
    max: float


class RowDiagnostics(NamedTuple):
    energy: float
    energy_post: float
    residual: float


class DiagnosticsService:

    @staticmethod
    def energy(sys: MechanicalSystem, q, p, factor: Optional[MetricFactor] = None) -> float:
        """H = 1/2 p^T M(q)^-1 p + V(q)."""
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        v = GeometryService.metric_solve(sys.mass(q), p, q, factor)
        return 0.5 * float(p @ v) + sys.v(q)

    @staticmethod
    def row_diagnostics(
        sys: MechanicalSystem, q, momenta: MomentumRecord, scale: float, pp: Optional[ProjectorPair] = None
    ) -> RowDiagnostics:
        """
        Énergies (p^- puis p^+) et résidu ||mu M^-1 p~||_inf d'une ligne, en unités physiques
        (moments divisés par `scale`), avec une seule résolution en M.
        """
        q = np.asarray(q, dtype=float)
        factor = GeometryService.mass_factor(sys, q, pp)
        p = np.column_stack([momenta.pre, momenta.post]) / scale
        v = factor.solve(p)
        kinetic = 0.5 * np.sum(p * v, axis=0)
        potential = sys.v(q)
        residual = 0.0
        if sys.m:
            mu = pp.mu if pp is not None else sys.mu(q)
            residual = float(np.abs(mu @ (v[:, 0] + v[:, 1])).max()) * 0.5
        return RowDiagnostics(float(kinetic[0]) + potential, float(kinetic[1]) + potential, residual)

    @staticmethod
    def average_momentum(rec: MomentumRecord) -> np.ndarray:
        return 0.5 * (np.asarray(rec.pre, dtype=float) + np.asarray(rec.post, dtype=float))

    @staticmethod
    def energy_report(record: TrajectoryRecord, *, post: bool = False) -> EnergyReport:
        return EnergyReport.from_energies(record.energy_post if post else record.energy)

    # -------------------------
    # Application moment non holonome discrète
    # -------------------------
    @staticmethod
    def jnh(sys: MechanicalSystem, Ld: DiscreteLagrangian, sec: SymmetrySection, q_prev, q_curr) -> float:
        """< D2 L_d(q_{k-1}, q_k), xi_Q(q_k) > avec xi = section(q_k)."""
        q_curr = np.asarray(q_curr, dtype=float)
        post = DiscretizationService.legendre_plus(Ld, q_prev, q_curr)
        return float(post @ sec.field_at(q_curr))

    @staticmethod
    def momentum_equation_residual(
        sys: MechanicalSystem, Ld: DiscreteLagrangian, sec: SymmetrySection, q_prev, q_curr, q_next
    ) -> float:
        """J(q_k, q_{k+1}) - J(q_{k-1}, q_k) - < D2 L_d(q_k, q_{k+1}), (xi_{k+1} - xi_k)_Q(q_{k+1}) >."""
        q_curr = np.asarray(q_curr, dtype=float)
        q_next = np.asarray(q_next, dtype=float)
        j_next = DiagnosticsService.jnh(sys, Ld, sec, q_curr, q_next)
        j_curr = DiagnosticsService.jnh(sys, Ld, sec, q_prev, q_curr)
        d_xi = np.asarray(sec.xi_of_q(q_next), dtype=float) - np.asarray(sec.xi_of_q(q_curr), dtype=float)
        post = DiscretizationService.legendre_plus(Ld, q_curr, q_next)
        rhs = float(post @ np.asarray(sec.generator(q_next, d_xi), dtype=float))
        return j_next - j_curr - rhs

    @staticmethod
    def section_series(record: TrajectoryRecord, sys, Ld, sec: SymmetrySection) -> Dict[str, np.ndarray]:
        """Valeurs de J^nh sur q_0..q_{N+1} et résidus de l'équation des moments (trajectoire discrète)."""
        qs = record.positions(include_last=True)
        values = np.array([DiagnosticsService.jnh(sys, Ld, sec, qs[k - 1], qs[k]) for k in range(1, len(qs))])
        residuals = np.array(
            [DiagnosticsService.momentum_equation_residual(sys, Ld, sec, qs[k - 1], qs[k], qs[k + 1])
             for k in range(1, len(qs) - 1)]
        )
        return {"jnh": values, "momentum_residual": residuals}

    # -------------------------
    # Résumé d'une trajectoire
    # -------------------------
    @staticmethod
    def summarize(
        record: TrajectoryRecord,
        sys: MechanicalSystem,
        Ld: Optional[DiscreteLagrangian] = None,
        sections: Optional[Mapping[str, SymmetrySection]] = None,
    ) -> dict:
        pre_report = DiagnosticsService.energy_report(record)
        post_report = DiagnosticsService.energy_report(record, post=True)
        finite_tol = record.tolerance[np.isfinite(record.tolerance)]
        summary = {
            "model": record.model,
            "method": record.method,
            "h": record.h,
            "rows": len(record),
            "energy": {
                "initial": float(record.energy[0]) if len(record) else None,
                "max_drift": pre_report.max_drift,
                "max_drift_post": post_report.max_drift,
            },
            "constraint": {
                "max_residual": float(np.max(record.constraint_residual)) if len(record) else 0.0,
                "max_newton_threshold": float(np.max(finite_tol)) if finite_tol.size else None,
            },
            "sections": {},
            "failed": record.failure,
        }

        # J^nh n'a de sens que pour les trajectoires discrètes
        if Ld is not None and sections and record.method != "reference" and len(record) >= 2:
            for name, sec in sections.items():
                series = DiagnosticsService.section_series(record, sys, Ld, sec)
                values = series["jnh"]
                residuals = series["momentum_residual"]
                summary["sections"][name] = {
                    "initial": float(values[0]),
                    "final": float(values[-1]),
                    "max_change": float(np.max(np.abs(values - values[0]))),
                    "max_momentum_residual": float(np.max(np.abs(residuals))) if residuals.size else 0.0,
                }
        logger.info(
            "Résumé trajectoire",
            extra={
                "model": record.model,
                "method": record.method,
                "energy_drift": summary["energy"]["max_drift"],
                "constraint": summary["constraint"]["max_residual"],
            },
        )
        return summary

    # -------------------------
    # Boucle plane et écarts
    # -------------------------
    @staticmethod
    def planar_self_intersections(xy) -> List[Crossing]:
        """Croisements entre segments non adjacents de la ligne brisée xy (N x 2)."""
        pts = np.asarray(xy, dtype=float)[:, :2]
        crossings: List[Crossing] = []
        if pts.shape[0] < 4:
            return crossings
        a = pts[:-1]
        d = pts[1:] - pts[:-1]
        for i in range(a.shape[0] - 2):
            js = np.arange(i + 2, a.shape[0])
            b = a[js]
            e = d[js]
            denom = d[i, 0] * e[:, 1] - d[i, 1] * e[:, 0]
            diff = b - a[i]
            with np.errstate(divide="ignore", invalid="ignore"):
                s = (diff[:, 0] * e[:, 1] - diff[:, 1] * e[:, 0]) / denom
                u = (diff[:, 0] * d[i, 1] - diff[:, 1] * d[i, 0]) / denom
            hit = (denom != 0.0) & (s >= 0.0) & (s <= 1.0) & (u >= 0.0) & (u <= 1.0)
            for idx in np.nonzero(hit)[0]:
                crossings.append(Crossing(i, int(js[idx]), a[i] + s[idx] * d[i]))
        return crossings

    @staticmethod
    def loop_area(xy, i: int, j: int, point) -> float:
        """Aire (formule du lacet) de la boucle fermée point -> xy[i+1..j] -> point."""
        pts = np.asarray(xy, dtype=float)[:, :2]
        loop = np.vstack([np.asarray(point, dtype=float)[None, :2], pts[i + 1: j + 1]])
        x, y = loop[:, 0], loop[:, 1]
        return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))

    @staticmethod
    def trajectory_errors(a, b) -> ErrorReport:
        """Distance euclidienne point à point entre deux suites de positions (longueur commune)."""
        qa = np.asarray(a, dtype=float)
        qb = np.asarray(b, dtype=float)
        count = min(qa.shape[0], qb.shape[0])
        dist = np.linalg.norm(qa[:count] - qb[:count], axis=1)
        if count == 0:
            return ErrorReport(dist, 0.0, 0.0)
        return ErrorReport(dist, float(np.sqrt(np.mean(dist ** 2))), float(np.max(dist)))
