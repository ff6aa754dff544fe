import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.config import settings
from app.logging_config import fmt_vec
from app.validator import ValidationIssue
from models.errors import InitialConditionError
from models.registry import ModelBundle, build_bundle
from models.run_config import RunConfig
from models.states import ContinuousState, GniState, StepConfig
from models.trajectory import TrajectoryRecord
from services.diagnostics_service import DiagnosticsService, ErrorReport
from services.gni_service import GniService
from services.numerics import EPS, inf_norm
from services.rattle_service import RattleService
from services.reference_service import ReferenceService

logger = logging.getLogger(__name__)

# en dessous, l'erreur est au niveau de l'arrondi : ordre non significatif
ORDER_NOISE_FACTOR = 100.0


@dataclass(frozen=True)
class InitialData:
    q0: np.ndarray
    v0: Optional[np.ndarray] = None
    q1: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    steps: int
    error: float
    order: Optional[float] = None


@dataclass(frozen=True)
class ConvergenceTable:
    model: str
    method: str
    t_final: float
    rows: List[ConvergenceRow]


@dataclass
class CompareReport:
    model: str
    h: float
    reference: TrajectoryRecord
    records: Dict[str, TrajectoryRecord] = field(default_factory=dict)
    errors: Dict[str, ErrorReport] = field(default_factory=dict)
    # dérive maximale de l'énergie par méthode, référence comprise
    drifts: Dict[str, float] = field(default_factory=dict)


class ExperimentsService:
    """Assemble modèle, conditions initiales et méthode ; études de convergence et comparaisons."""

    @staticmethod
    def steps_of(cfg: RunConfig, bundle: ModelBundle) -> int:
        return cfg.steps if cfg.steps is not None else bundle.entry.default_steps

    @staticmethod
    def bundle_for(cfg: RunConfig, h: Optional[float] = None) -> ModelBundle:
        if h is None:
            h = cfg.h
        if h is None:
            h = build_bundle(cfg.model, 1.0, cfg.params).entry.default_h
        return build_bundle(cfg.model, h, cfg.params, cfg.force)

    @staticmethod
    def initial_data(cfg: RunConfig, bundle: ModelBundle) -> InitialData:
        """q0 puis (v0 | q1) depuis la config, sinon les valeurs par défaut du modèle."""
        sys = bundle.system
        entry = bundle.entry

        def checked(values, key):
            arr = np.asarray(values, dtype=float)
            if arr.shape != (sys.n,):
                raise ValidationIssue(f"dimension {sys.n} attendue", field=key, value=fmt_vec(arr))
            return arr

        q0 = checked(cfg.q0 if cfg.q0 is not None else entry.default_q0, "q0")
        if cfg.v0 is not None and cfg.q1 is not None:
            raise ValidationIssue("v0 et q1 sont exclusifs", field="v0")
        if cfg.v0 is not None:
            return InitialData(q0, v0=checked(cfg.v0, "v0"))
        if cfg.q1 is not None:
            return InitialData(q0, q1=checked(cfg.q1, "q1"))
        if entry.default_q1 is not None and cfg.q0 is None:
            return InitialData(q0, q1=checked(entry.default_q1, "q1"))
        if entry.default_v0 is not None:
            return InitialData(q0, v0=checked(entry.default_v0(q0, sys.params, cfg.force), "v0"))
        raise ValidationIssue("conditions initiales manquantes (v0 ou q1)", field="v0")

    @staticmethod
    def step_config(cfg: RunConfig, h: float) -> StepConfig:
        return StepConfig(h=h, newton_tol=cfg.newton_tol, newton_max_iter=cfg.newton_max_iter)

    @staticmethod
    def discrete_pair(bundle: ModelBundle, init: InitialData, step_cfg: StepConfig, t0: float) -> GniState:
        if init.q1 is not None:
            return GniState(q_prev=init.q0, q_curr=init.q1, k=1, t=t0 + bundle.lagrangian.h)
        try:
            return GniService.initialize_from_velocity(bundle.system, bundle.lagrangian, init.q0, init.v0, step_cfg, t0)
        except InitialConditionError as exc:
            raise ValidationIssue(exc.message, field="v0", value=fmt_vec(init.v0)) from exc

    @staticmethod
    def continuous_velocity(bundle: ModelBundle, init: InitialData, h: float, refine: int, t0: float) -> np.ndarray:
        if init.v0 is not None:
            return init.v0
        return ReferenceService.shoot_initial_velocity(
            bundle.system, init.q0, init.q1, h, refine, t0=t0, force=bundle.force
        )

    # -------------------------
    # Une exécution
    # -------------------------
    @staticmethod
    def run_method(
        cfg: RunConfig,
        method: Optional[str] = None,
        *,
        h: Optional[float] = None,
        steps: Optional[int] = None,
        init: Optional[InitialData] = None,
    ) -> TrajectoryRecord:
        method = method or cfg.method
        bundle = ExperimentsService.bundle_for(cfg, h)
        sys, Ld = bundle.system, bundle.lagrangian
        h = Ld.h
        steps = steps if steps is not None else ExperimentsService.steps_of(cfg, bundle)
        init = init or ExperimentsService.initial_data(cfg, bundle)
        step_cfg = ExperimentsService.step_config(cfg, h)

        logger.info(
            "Exécution",
            extra={"model": sys.name, "method": method, "h": h, "steps": steps, "q0": fmt_vec(init.q0)},
        )

        if method == "reference":
            v0 = ExperimentsService.continuous_velocity(bundle, init, h, cfg.ref_refine, cfg.t0)
            return ReferenceService.rk4_run(
                sys,
                ContinuousState(init.q0, v0, cfg.t0),
                h / cfg.ref_refine,
                steps * cfg.ref_refine,
                stride=cfg.ref_refine,
                force=bundle.force,
                scale=Ld.scale,
            )

        pair = ExperimentsService.discrete_pair(bundle, init, step_cfg, cfg.t0)
        if method == "gni":
            return GniService.gni_run(sys, Ld, pair, step_cfg, steps, bundle.force)
        if method == "rattle":
            if bundle.force is not None:
                raise ValidationIssue("rattle ne prend pas de force de contrôle", field="method", value=method)
            try:
                state = RattleService.rattle_init(sys, Ld, pair.q_prev, pair.q_curr, t0=cfg.t0)
            except InitialConditionError as exc:
                raise ValidationIssue(exc.message, field="q1", value=fmt_vec(pair.q_curr)) from exc
            return RattleService.rattle_run(sys, state, h, steps, scale=Ld.scale)
        if method == "dla":
            if bundle.force is not None:
                raise ValidationIssue("dla ne prend pas de force de contrôle", field="method", value=method)
            dc = None
            if sys.m:
                if cfg.dla_constraint is None:
                    raise ValidationIssue("dla_constraint requis pour method=dla", field="dla_constraint")
                if cfg.dla_constraint not in bundle.dla_constraints:
                    raise ValidationIssue(
                        f"discrétisation inconnue (attendu: {'/'.join(bundle.dla_constraints)})",
                        field="dla_constraint",
                        value=cfg.dla_constraint,
                    )
                dc = bundle.dla_constraints[cfg.dla_constraint]
            return ReferenceService.dla_run(sys, Ld, dc, pair, step_cfg, steps)
        raise ValidationIssue("méthode inconnue", field="method", value=method)

    # -------------------------
    # Étude de convergence
    # -------------------------
    @staticmethod
    def _horizon(cfg: RunConfig, h_list: Tuple[float, ...]) -> Tuple[float, List[int]]:
        if not h_list:
            raise ValidationIssue("liste de pas vide", field="h_list")
        bundle = ExperimentsService.bundle_for(cfg, h_list[0])
        t_final = ExperimentsService.steps_of(cfg, bundle) * h_list[0]
        counts = []
        for h in h_list:
            n = int(round(t_final / h))
            if n < 1 or abs(n * h - t_final) > 1e-9 * t_final:
                raise ValidationIssue("le pas ne divise pas l'horizon", field="h_list", value=h)
            counts.append(n)
        return t_final, counts

    @staticmethod
    def _observed_order(e_coarse: float, e_fine: float, h_coarse: float, h_fine: float, noise: float) -> Optional[float]:
        if e_coarse <= noise or e_fine <= noise:
            return None
        return math.log(e_coarse / e_fine) / math.log(h_coarse / h_fine)

    @staticmethod
    def convergence(cfg: RunConfig, h_list: Optional[Tuple[float, ...]] = None) -> ConvergenceTable:
        """Erreur en temps final de cfg.method pour chaque h, contre une référence RK4 au pas min(h)/ref_refine."""
        h_list = tuple(h_list if h_list is not None else cfg.h_list)
        t_final, counts = ExperimentsService._horizon(cfg, h_list)

        # conditions initiales continues communes à tous les pas
        base_h = cfg.h if cfg.h is not None else h_list[0]
        base = ExperimentsService.bundle_for(cfg, base_h)
        init = ExperimentsService.initial_data(cfg, base)
        v0 = ExperimentsService.continuous_velocity(base, init, base_h, cfg.ref_refine, cfg.t0)
        init = InitialData(init.q0, v0=v0)

        h_min = min(h_list)
        n_ref = int(round(t_final / h_min)) * cfg.ref_refine
        reference = ReferenceService.rk4_run(
            base.system,
            ContinuousState(init.q0, v0, cfg.t0),
            h_min / cfg.ref_refine,
            n_ref,
            stride=n_ref,
            force=base.force,
            scale=base.lagrangian.scale,
        )
        q_ref = reference.q[-1]

        def final_error(item):
            h, n = item
            record = ExperimentsService.run_method(cfg, h=h, steps=n, init=init)
            return float(np.linalg.norm(record.q[-1] - q_ref))

        jobs = list(zip(h_list, counts))
        if settings.GNI_WORKERS > 1:
            with ThreadPoolExecutor(max_workers=settings.GNI_WORKERS) as pool:
                errors = list(pool.map(final_error, jobs))
        else:
            errors = [final_error(job) for job in jobs]

        noise = ORDER_NOISE_FACTOR * EPS * (1.0 + inf_norm(q_ref))
        rows = []
        for i, ((h, n), err) in enumerate(zip(jobs, errors)):
            order = None
            if i > 0:
                order = ExperimentsService._observed_order(errors[i - 1], err, h_list[i - 1], h, noise)
            rows.append(ConvergenceRow(h=h, steps=n, error=err, order=order))
            logger.info("Convergence", extra={"h": h, "error": err, "order": order})
        return ConvergenceTable(model=cfg.model, method=cfg.method, t_final=t_final, rows=rows)

    # -------------------------
    # Comparaison de méthodes
    # -------------------------
    @staticmethod
    def compare(cfg: RunConfig, methods: Optional[Tuple[str, ...]] = None) -> CompareReport:
        """Chaque méthode et la référence RK4 sur la même grille ; écarts point à point dans R^n."""
        methods = tuple(methods if methods is not None else cfg.methods)
        bundle = ExperimentsService.bundle_for(cfg)
        h = bundle.lagrangian.h
        steps = ExperimentsService.steps_of(cfg, bundle)
        init = ExperimentsService.initial_data(cfg, bundle)

        reference = ExperimentsService.run_method(cfg, "reference", h=h, steps=steps, init=init)
        report = CompareReport(model=cfg.model, h=h, reference=reference)
        report.drifts["reference"] = DiagnosticsService.energy_report(reference).max_drift
        for method in methods:
            method_cfg = cfg
            if method == "dla" and cfg.dla_constraint is None and bundle.system.m:
                method_cfg = replace(cfg, dla_constraint="midpoint")
            record = ExperimentsService.run_method(method_cfg, method, h=h, steps=steps, init=init)
            report.records[method] = record
            report.errors[method] = DiagnosticsService.trajectory_errors(record.q, reference.q)
            report.drifts[method] = DiagnosticsService.energy_report(record).max_drift
            logger.info(
                "Écart à la référence",
                extra={
                    "method": method,
                    "rms": report.errors[method].rms,
                    "max": report.errors[method].max,
                    "energy_drift": report.drifts[method],
                },
            )
        return report
