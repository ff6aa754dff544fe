# app/validator.py
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence

from app.logging_config import fmt_vec


# =========================
# Errors
# =========================
@dataclass
class ValidationIssue(Exception):
    message: str
    field: str
    value: Any = None

    def __str__(self) -> str:
        if self.value is None:
            return f"{self.field}: {self.message}"
        return f"{self.field}: {self.message} (value={self.value!r})"


# =========================
# Regex (strict)
# =========================
_RE_INT_STRICT = re.compile(r"^[0-9]+$")
_RE_FLOAT_STRICT = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_RE_NAME_STRICT = re.compile(r"^[a-z][a-z0-9_\-]*$")


# =========================
# Helpers
# =========================
logger = logging.getLogger(__name__)


def _s(v: Any) -> str:
    return str(v if v is not None else "").strip()


# =========================
# Validators
# =========================
def int_strict(value: Any, *, field: str, min_value: int = 1, max_value: Optional[int] = None) -> int:
    """
    Strict int:
    - accepts int or digit-only string
    - rejects floats ("5.0"), scientific notation, hex, etc.
    """
    if isinstance(value, bool):
        raise ValidationIssue("entier strict requis (bool interdit)", field=field, value=value)

    if isinstance(value, int):
        n = value
    else:
        raw = _s(value)
        if not raw:
            raise ValidationIssue("valeur manquante", field=field)
        if not _RE_INT_STRICT.match(raw):
            raise ValidationIssue("entier strict requis (pas de float/texte)", field=field, value=raw)
        n = int(raw)

    if n < min_value:
        raise ValidationIssue(f"doit être >= {min_value}", field=field, value=n)
    if max_value is not None and n > max_value:
        raise ValidationIssue(f"doit être <= {max_value}", field=field, value=n)
    return n


def float_strict(
    value: Any,
    *,
    field: str,
    positive: bool = False,
    min_value: Optional[float] = None,
    max_value: Optional[float] = None,
) -> float:
    """
    Réel strict :
    - accepte int/float ou une chaîne décimale (notation scientifique autorisée)
    - rejette nan/inf, bool, hex, texte
    """
    if isinstance(value, bool):
        raise ValidationIssue("réel strict requis (bool interdit)", field=field, value=value)

    if isinstance(value, (int, float)):
        x = float(value)
    else:
        raw = _s(value)
        if not raw:
            raise ValidationIssue("valeur manquante", field=field)
        if not _RE_FLOAT_STRICT.match(raw):
            raise ValidationIssue("réel strict requis", field=field, value=raw)
        x = float(raw)

    if not math.isfinite(x):
        raise ValidationIssue("valeur non finie", field=field, value=x)
    if positive and x <= 0.0:
        raise ValidationIssue("doit être > 0", field=field, value=x)
    if min_value is not None and x < min_value:
        raise ValidationIssue(f"doit être >= {min_value}", field=field, value=x)
    if max_value is not None and x > max_value:
        raise ValidationIssue(f"doit être <= {max_value}", field=field, value=x)
    return x


def vector_strict(value: Any, *, field: str, length: Optional[int] = None) -> tuple[float, ...]:
    """
    Vecteur de réels :
    - chaîne "1,0,-2.5" (espaces tolérés autour des virgules) ou séquence de nombres
    - chaque composante passe par float_strict
    """
    if isinstance(value, str):
        raw = value.strip()
        if not raw:
            raise ValidationIssue("valeur manquante", field=field)
        parts: Sequence[Any] = [p.strip() for p in raw.split(",")]
    elif isinstance(value, Iterable):
        parts = list(value)
    else:
        raise ValidationIssue("vecteur requis (ex: 0,0,0)", field=field, value=value)

    coords = tuple(float_strict(p, field=f"{field}[{i}]") for i, p in enumerate(parts))
    if length is not None and len(coords) != length:
        raise ValidationIssue(f"dimension {length} attendue", field=field, value=fmt_vec(coords))
    return coords


def name_strict(value: Any, *, field: str = "name", max_len: int = 64) -> str:
    raw = _s(value).lower()
    if not raw:
        raise ValidationIssue("valeur manquante", field=field)
    if len(raw) > max_len:
        raise ValidationIssue(f"trop long (max {max_len})", field=field, value=raw)
    if not _RE_NAME_STRICT.match(raw):
        raise ValidationIssue("identifiant invalide (minuscules, chiffres, '_' ou '-')", field=field, value=raw)
    return raw


def choice_strict(value: Any, *, field: str, choices: Iterable[str], aliases: Optional[dict[str, str]] = None) -> str:
    """
    Normalise et valide un choix parmi une liste fermée.
    - les alias sont résolus avant la vérification (ex: "ref" => "reference")
    """
    raw = name_strict(value, field=field)
    if aliases and raw in aliases:
        raw = aliases[raw]

    allowed = tuple(choices)
    if raw not in allowed:
        raise ValidationIssue(f"valeur invalide (attendu: {'/'.join(allowed)})", field=field, value=raw)
    return raw
