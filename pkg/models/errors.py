from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass
class NumericalIssue(Exception):
    """Échec numérique d'un calcul (code de sortie 3 côté CLI)."""

    message: str

    def __str__(self) -> str:
        return self.message


@dataclass
class RankDeficiencyError(NumericalIssue):
    # matrice de Gram (ou métrique) non SPD / trop mal conditionnée au point `point`
    point: tuple = ()
    condition: float = float("inf")

    def __str__(self) -> str:
        pt = ", ".join(f"{x:.6g}" for x in self.point)
        return f"{self.message} (q=[{pt}], cond={self.condition:.3g})"


@dataclass
class RegularityError(NumericalIssue):
    # jacobienne de Newton singulière
    step: Optional[int] = None

    def __str__(self) -> str:
        return f"{self.message} (step={self.step})"


@dataclass
class StepFailureError(NumericalIssue):
    step: Optional[int] = None
    residual: float = float("nan")
    # trajectoire calculée jusqu'à l'échec (TrajectoryRecord), vidée sur disque par la CLI
    partial: Any = field(default=None, repr=False)

    def __str__(self) -> str:
        return f"{self.message} (step={self.step}, residual={self.residual:.3e})"


@dataclass
class InitialConditionError(NumericalIssue):
    residual: float = float("nan")

    def __str__(self) -> str:
        return f"{self.message} (residual={self.residual:.3e})"


@dataclass
class UnsupportedSystemError(NumericalIssue):
    pass


@dataclass
class DimensionError(NumericalIssue):
    expected: int = 0
    got: int = 0

    def __str__(self) -> str:
        return f"{self.message} (attendu={self.expected}, reçu={self.got})"
