"""Catalogue des systèmes livrés, sélectionnables par nom depuis la CLI."""
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from app.validator import ValidationIssue, choice_strict, float_strict
from models import oscillator, particle, sleigh, snakeboard
from models.lagrangian import DiscreteConstraint, DiscreteForce, DiscreteLagrangian
from models.run_config import ForceConfig
from models.section import SymmetrySection
from models.system import MechanicalSystem
from services.discretization_service import DiscretizationService
from services.reference_service import ReferenceService


@dataclass(frozen=True)
class ModelEntry:
    name: str
    description: str
    builder: Callable[..., MechanicalSystem]
    lagrangian: Callable[[MechanicalSystem, float], DiscreteLagrangian]
    default_h: float
    default_steps: int
    default_q0: Tuple[float, ...]
    default_params: Mapping[str, float] = field(default_factory=dict)
    default_v0: Optional[Callable[..., np.ndarray]] = None
    default_q1: Optional[Tuple[float, ...]] = None
    sections: Callable[[MechanicalSystem], Dict[str, SymmetrySection]] = lambda sys: {}
    supports_force: bool = False


@dataclass(frozen=True)
class ModelBundle:
    entry: ModelEntry
    system: MechanicalSystem
    lagrangian: DiscreteLagrangian
    sections: Dict[str, SymmetrySection]
    dla_constraints: Dict[str, DiscreteConstraint]
    force: Optional[DiscreteForce] = None


def _quadratic(sys: MechanicalSystem, h: float) -> DiscreteLagrangian:
    return DiscretizationService.make_quadratic(sys.mass(np.zeros(sys.n)), h)


def _mechanical(sys: MechanicalSystem, h: float) -> DiscreteLagrangian:
    return DiscretizationService.make_symmetric_mechanical(sys.mass(np.zeros(sys.n)), h, sys.v, sys.grad_v)


MODELS: Dict[str, ModelEntry] = {
    "particle": ModelEntry(
        name="particle",
        description="particule 3D, contrainte z' = y x'",
        builder=particle.make_particle,
        lagrangian=_quadratic,
        default_h=particle.DEFAULT_H,
        default_steps=particle.DEFAULT_STEPS,
        default_q0=particle.DEFAULT_Q0,
        default_v0=lambda q0, params, force=None: np.array(particle.DEFAULT_V0),
        sections=lambda sys: particle.sections(),
    ),
    "snakeboard": ModelEntry(
        name="snakeboard",
        description="snakeboard (x, y, theta, psi, phi), deux contraintes de roulement",
        builder=snakeboard.make_snakeboard,
        lagrangian=_quadratic,
        default_h=snakeboard.DEFAULT_H,
        default_steps=snakeboard.DEFAULT_STEPS,
        default_q0=snakeboard.DEFAULT_Q0,
        default_params=snakeboard.DEFAULT_PARAMS,
        default_v0=snakeboard.default_v0,
        sections=lambda sys: snakeboard.sections(sys.params),
        supports_force=True,
    ),
    "sleigh": ModelEntry(
        name="sleigh",
        description="traîneau de Chaplygin, métrique dépendant de theta",
        builder=sleigh.make_sleigh,
        lagrangian=lambda sys, h: DiscretizationService.make_midpoint_metric(sys, h),
        default_h=sleigh.DEFAULT_H,
        default_steps=sleigh.DEFAULT_STEPS,
        default_q0=sleigh.DEFAULT_Q0,
        default_params=sleigh.DEFAULT_PARAMS,
        default_q1=sleigh.DEFAULT_Q1,
        sections=lambda sys: sleigh.sections(),
    ),
    "oscillator": ModelEntry(
        name="oscillator",
        description="oscillateur harmonique 1D, sans contrainte",
        builder=oscillator.make_oscillator,
        lagrangian=_mechanical,
        default_h=oscillator.DEFAULT_H,
        default_steps=oscillator.DEFAULT_STEPS,
        default_q0=oscillator.DEFAULT_Q0,
        default_params=oscillator.DEFAULT_PARAMS,
        default_v0=lambda q0, params, force=None: np.array(oscillator.DEFAULT_V0),
    ),
    "free": ModelEntry(
        name="free",
        description="particule libre 1D",
        builder=oscillator.make_free,
        lagrangian=_mechanical,
        default_h=oscillator.DEFAULT_H,
        default_steps=oscillator.DEFAULT_STEPS,
        default_q0=oscillator.FREE_Q0,
        default_v0=lambda q0, params, force=None: np.array(oscillator.FREE_V0),
    ),
}


def get_entry(name: str) -> ModelEntry:
    return MODELS[choice_strict(name, field="model", choices=MODELS.keys())]


def resolve_params(entry: ModelEntry, overrides: Optional[Mapping[str, object]] = None) -> Dict[str, float]:
    params = dict(entry.default_params)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise ValidationIssue(f"paramètre inconnu pour {entry.name}", field=f"params.{key}", value=value)
        params[key] = float_strict(value, field=f"params.{key}")
    return params


def build_bundle(
    name: str,
    h: float,
    params: Optional[Mapping[str, object]] = None,
    force: Optional[ForceConfig] = None,
) -> ModelBundle:
    entry = get_entry(name)
    system = entry.builder(**resolve_params(entry, params))
    Ld = entry.lagrangian(system, h)

    constraints: Dict[str, DiscreteConstraint] = {}
    if system.m:
        constraints = {
            "midpoint": ReferenceService.make_midpoint_constraint(system, Ld.h),
            "coarse": ReferenceService.make_left_constraint(system, Ld.h),
        }

    discrete_force = None
    if force is not None:
        if not entry.supports_force:
            raise ValidationIssue("ce modèle n'accepte pas de force de contrôle", field="force", value=name)
        discrete_force = DiscreteForce(
            name="control",
            fn=snakeboard.control_force(force.amp_psi, force.amp_phi, force.omega),
        )

    return ModelBundle(
        entry=entry,
        system=system,
        lagrangian=Ld,
        sections=entry.sections(system),
        dla_constraints=constraints,
        force=discrete_force,
    )
