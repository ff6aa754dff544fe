import logging
from typing import Iterable

from app.config import settings

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s - %(message)s"


def configure_logging(level_name: str | None = None) -> None:
    name = (level_name or settings.LOG_LEVEL or "INFO").upper()
    level = getattr(logging, name, logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger(__name__).debug("Journalisation configurée (niveau=%s)", name)


def fmt_vec(values: Iterable[float] | None, digits: int = 4) -> str:
    """Rendu compact d'un vecteur pour les messages de log."""
    if values is None:
        return "[]"
    items = [f"{float(v):.{digits}g}" for v in values]
    if len(items) > 8:
        # début et fin seulement
        items = items[:4] + ["…"] + items[-3:]
    return "[" + ", ".join(items) + "]"
