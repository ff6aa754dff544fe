"""Outils numériques partagés : différences finies centrées et Newton avec factorisation LU."""
import logging
import math
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from models.errors import RegularityError, StepFailureError

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)
FD_BASE = EPS ** (1.0 / 3.0)

# plancher d'arrondi : ROUNDOFF_FACTOR * eps * ||J||_inf * max(1, ||x||_inf)
ROUNDOFF_FACTOR = 8.0
PIVOT_RATIO_MIN = 1e-14


def fd_step(x: np.ndarray) -> np.ndarray:
    """Pas optimal pour une dérivée première centrée, composante par composante."""
    return FD_BASE * np.maximum(1.0, np.abs(x))


def fd_gradient(fn: Callable[[np.ndarray], float], x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    steps = fd_step(x)
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = steps[i]
        grad[i] = (fn(x + e) - fn(x - e)) / (2.0 * steps[i])
    return grad


def fd_jacobian(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    """J[i, j] = d fn_i / d x_j (différences centrées)."""
    x = np.asarray(x, dtype=float)
    steps = fd_step(x)
    columns = []
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = steps[j]
        columns.append((np.asarray(fn(x + e), dtype=float) - np.asarray(fn(x - e), dtype=float)) / (2.0 * steps[j]))
    if not columns:
        return np.zeros((0, 0))
    return np.column_stack(columns)


def fd_partials(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    """Dérivées partielles d'une fonction matricielle : tableau [k] = d fn / d x_k."""
    x = np.asarray(x, dtype=float)
    steps = fd_step(x)
    out = []
    for k in range(x.shape[0]):
        e = np.zeros_like(x)
        e[k] = steps[k]
        out.append((np.asarray(fn(x + e), dtype=float) - np.asarray(fn(x - e), dtype=float)) / (2.0 * steps[k]))
    return np.array(out)


def inf_norm(v) -> float:
    arr = np.asarray(v, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.abs(arr).max())


def jacobian_norm(jac: np.ndarray) -> float:
    return float(np.abs(jac).sum(axis=1).max()) if jac.size else 0.0


def roundoff_floor(jac: np.ndarray, x: np.ndarray, magnitude: float = 0.0, jac_norm: Optional[float] = None) -> float:
    if jac_norm is None:
        jac_norm = jacobian_norm(jac)
    return ROUNDOFF_FACTOR * EPS * max(magnitude, jac_norm * max(1.0, inf_norm(x)))


class NewtonResult(NamedTuple):
    x: np.ndarray
    residual: float
    iterations: int
    threshold: float
    at_floor: bool


def factorize(jac: np.ndarray, *, step: Optional[int] = None, label: str = "newton"):
    """lu_factor avec contrôle du rapport des pivots (RegularityError si singulière)."""
    lu, piv = lu_factor(jac, check_finite=False)
    pivots = np.abs(np.diag(lu))
    biggest = float(pivots.max()) if pivots.size else 0.0
    if biggest == 0.0 or not np.all(np.isfinite(pivots)) or float(pivots.min()) <= PIVOT_RATIO_MIN * biggest:
        raise RegularityError(f"jacobienne singulière ({label})", step=step)
    return lu, piv


class FactorCache:
    """Dernière jacobienne factorisée ; réutilisée tant que la jacobienne renvoyée est le même tableau."""

    def __init__(self) -> None:
        self.jac: Optional[np.ndarray] = None
        self.lu_piv = None
        self.norm = 0.0

    def holds(self, jac: np.ndarray) -> bool:
        return self.jac is jac

    def factor(self, jac: np.ndarray, *, step: Optional[int] = None, label: str = "newton"):
        if self.jac is not jac:
            lu_piv = factorize(jac, step=step, label=label)
            self.jac, self.lu_piv, self.norm = jac, lu_piv, jacobian_norm(jac)
        return self.lu_piv


def newton_solve(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    *,
    tol: float,
    max_iter: int,
    magnitude: float = 0.0,
    step: Optional[int] = None,
    label: str = "newton",
    cache: Optional[FactorCache] = None,
) -> NewtonResult:
    """
    Newton plein sur residual(x) = 0.
    Convergence : ||r||_inf <= tol, ou ||r||_inf <= plancher d'arrondi après au moins une correction.
    `cache` : factorisation LU partagée entre appels successifs (jacobienne constante).
    """
    x = np.array(x0, dtype=float)
    res_norm = float("nan")
    for it in range(max_iter + 1):
        r = np.asarray(residual(x), dtype=float)
        res_norm = inf_norm(r)
        if not math.isfinite(res_norm):
            break
        jac = np.asarray(jacobian(x), dtype=float)
        jac_norm = cache.norm if cache is not None and cache.holds(jac) else None
        floor = roundoff_floor(jac, x, magnitude, jac_norm)
        threshold = max(tol, floor)
        logger.debug("%s it=%d |r|=%.3e seuil=%.3e", label, it, res_norm, threshold, extra={"step": step})
        if res_norm <= tol:
            return NewtonResult(x, res_norm, it, threshold, False)
        if it > 0 and res_norm <= floor:
            return NewtonResult(x, res_norm, it, threshold, True)
        if it == max_iter:
            break
        if cache is not None:
            lu_piv = cache.factor(jac, step=step, label=label)
        else:
            lu_piv = factorize(jac, step=step, label=label)
        x = x - lu_solve(lu_piv, r, check_finite=False)

    raise StepFailureError(
        f"Newton sans convergence ({label}, {max_iter} itérations)",
        step=step,
        residual=res_norm,
    )
