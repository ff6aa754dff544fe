import json
import logging
import math
import os
from typing import Any

import numpy as np

from repositories.trajectory_repository import resolve_path

logger = logging.getLogger(__name__)


def _plain(value: Any) -> Any:
    """Types JSON natifs ; les valeurs non finies deviennent null."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating, float)):
        x = float(value)
        return x if math.isfinite(x) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


class SummaryRepository:

    @staticmethod
    def summary_path(trajectory_path: str) -> str:
        root, _ = os.path.splitext(trajectory_path)
        return f"{root}.summary.json"

    @staticmethod
    def save(summary: dict, path: str) -> str:
        target = resolve_path(path)
        folder = os.path.dirname(target)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(target, "w", encoding="utf-8") as stream:
            json.dump(_plain(summary), stream, indent=2, sort_keys=True, ensure_ascii=False)
            stream.write("\n")
        logger.info("Résumé enregistré", extra={"path": target})
        return target

    @staticmethod
    def load(path: str) -> dict:
        with open(resolve_path(path), encoding="utf-8") as stream:
            return json.load(stream)
