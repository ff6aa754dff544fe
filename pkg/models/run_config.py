from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

METHODS = ("gni", "rattle", "dla", "reference")


@dataclass(frozen=True)
class ForceConfig:
    # valeurs illustratives : le contrôle est seulement dit sinusoïdal, même phase et fréquence
    amp_psi: float = 1.0
    amp_phi: float = -1.0
    omega: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    model: str
    method: str = "gni"
    h: Optional[float] = None
    steps: Optional[int] = None
    q0: Optional[Tuple[float, ...]] = None
    v0: Optional[Tuple[float, ...]] = None
    q1: Optional[Tuple[float, ...]] = None
    t0: float = 0.0
    dla_constraint: Optional[str] = None
    force: Optional[ForceConfig] = None
    output_path: str = "trajectory.csv"
    ref_refine: int = 100
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    params: Dict[str, float] = field(default_factory=dict)
    h_list: Tuple[float, ...] = ()
    methods: Tuple[str, ...] = ("gni", "dla")
