"""Point d'entrée : python -m app.run <sous-commande> [options]."""
import logging
import sys

from app.logging_config import configure_logging
from app.main import main

LOGGER = logging.getLogger(__name__)


def lancer_cli(argv=None) -> None:
    configure_logging()
    code = main(argv)
    LOGGER.debug("Fin de la commande (code=%s)", code)
    sys.exit(code)


if __name__ == "__main__":
    lancer_cli()
