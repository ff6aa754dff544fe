import logging
from typing import Dict, Mapping, Optional

from dotenv import dotenv_values

from app.config import settings
from app.validator import (
    ValidationIssue,
    choice_strict,
    float_strict,
    int_strict,
    name_strict,
    vector_strict,
)
from models.registry import MODELS
from models.run_config import METHODS, ForceConfig, RunConfig

logger = logging.getLogger(__name__)

KEYS = (
    "model",
    "method",
    "h",
    "steps",
    "q0",
    "v0",
    "q1",
    "t0",
    "dla_constraint",
    "force.amp_psi",
    "force.amp_phi",
    "force.omega",
    "output_path",
    "ref_refine",
    "newton_tol",
    "newton_max_iter",
    "h_list",
    "methods",
)
PARAMS_PREFIX = "params."
METHOD_ALIASES = {"ref": "reference", "rk4": "reference"}


def _present(raw: Mapping[str, Optional[str]], key: str) -> bool:
    value = raw.get(key)
    return value is not None and str(value).strip() != ""


class RunConfigService:
    """Fichier key=value (clés pointées) + surcharges en ligne de commande -> RunConfig validée."""

    @staticmethod
    def read_file(path: str) -> Dict[str, Optional[str]]:
        try:
            with open(path, encoding="utf-8") as stream:
                values = dotenv_values(stream=stream)
        except OSError as exc:
            raise ValidationIssue("fichier de configuration illisible", field="config", value=path) from exc
        logger.debug("Configuration lue", extra={"path": path, "keys": len(values)})
        return dict(values)

    @staticmethod
    def merge(file_values: Mapping[str, Optional[str]], overrides: Mapping[str, Optional[str]]) -> Dict[str, Optional[str]]:
        merged = dict(file_values)
        for key, value in overrides.items():
            if value is not None:
                merged[key] = value
        return merged

    @staticmethod
    def load(path: Optional[str] = None, overrides: Optional[Mapping[str, Optional[str]]] = None) -> RunConfig:
        file_values = RunConfigService.read_file(path) if path else {}
        return RunConfigService.from_mapping(RunConfigService.merge(file_values, overrides or {}))

    @staticmethod
    def from_mapping(raw: Mapping[str, Optional[str]]) -> RunConfig:
        for key in raw:
            if key not in KEYS and not key.startswith(PARAMS_PREFIX):
                raise ValidationIssue("clé inconnue", field=key, value=raw[key])

        if not _present(raw, "model"):
            raise ValidationIssue("valeur manquante", field="model")
        model = choice_strict(raw["model"], field="model", choices=MODELS.keys())

        values = {"model": model}
        if _present(raw, "method"):
            values["method"] = choice_strict(raw["method"], field="method", choices=METHODS, aliases=METHOD_ALIASES)
        if _present(raw, "h"):
            values["h"] = float_strict(raw["h"], field="h", positive=True)
        if _present(raw, "steps"):
            values["steps"] = int_strict(raw["steps"], field="steps", min_value=1)
        for key in ("q0", "v0", "q1"):
            if _present(raw, key):
                values[key] = vector_strict(raw[key], field=key)
        if _present(raw, "v0") and _present(raw, "q1"):
            raise ValidationIssue("v0 et q1 sont exclusifs", field="v0")
        if _present(raw, "t0"):
            values["t0"] = float_strict(raw["t0"], field="t0")
        if _present(raw, "dla_constraint"):
            values["dla_constraint"] = name_strict(raw["dla_constraint"], field="dla_constraint")
        if _present(raw, "output_path"):
            values["output_path"] = str(raw["output_path"]).strip()

        values["ref_refine"] = int_strict(
            raw["ref_refine"] if _present(raw, "ref_refine") else settings.GNI_REF_REFINE,
            field="ref_refine",
            min_value=1,
        )
        values["newton_tol"] = float_strict(
            raw["newton_tol"] if _present(raw, "newton_tol") else settings.GNI_NEWTON_TOL,
            field="newton_tol",
            positive=True,
        )
        values["newton_max_iter"] = int_strict(
            raw["newton_max_iter"] if _present(raw, "newton_max_iter") else settings.GNI_NEWTON_MAX_ITER,
            field="newton_max_iter",
            min_value=1,
        )

        force_keys = [k for k in ("force.amp_psi", "force.amp_phi", "force.omega") if _present(raw, k)]
        if force_keys:
            defaults = ForceConfig()
            values["force"] = ForceConfig(
                amp_psi=float_strict(raw.get("force.amp_psi") or defaults.amp_psi, field="force.amp_psi"),
                amp_phi=float_strict(raw.get("force.amp_phi") or defaults.amp_phi, field="force.amp_phi"),
                omega=float_strict(raw.get("force.omega") or defaults.omega, field="force.omega", positive=True),
            )

        if _present(raw, "h_list"):
            h_list = vector_strict(raw["h_list"], field="h_list")
            values["h_list"] = tuple(float_strict(h, field="h_list", positive=True) for h in h_list)
        if _present(raw, "methods"):
            parts = [p for p in str(raw["methods"]).split(",") if p.strip()]
            methods = tuple(
                choice_strict(p, field="methods", choices=METHODS, aliases=METHOD_ALIASES) for p in parts
            )
            if len(methods) != 2:
                raise ValidationIssue("deux méthodes attendues", field="methods", value=raw["methods"])
            values["methods"] = methods

        values["params"] = {
            key[len(PARAMS_PREFIX):]: float_strict(value, field=key)
            for key, value in raw.items()
            if key.startswith(PARAMS_PREFIX) and value is not None
        }

        config = RunConfig(**values)
        logger.info(
            "Configuration validée",
            extra={"model": config.model, "method": config.method, "h": config.h, "steps": config.steps},
        )
        return config
