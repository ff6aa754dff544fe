import argparse
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from app.validator import ValidationIssue
from cli import compare_command, convergence_command, models_command, run_command
from models.errors import NumericalIssue
from services.run_config_service import KEYS, PARAMS_PREFIX

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="fichier key=value (clés pointées)")
    for key in KEYS:
        common.add_argument(f"--{key}", dest=key, default=None, metavar=key.split(".")[-1].upper())
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gni",
        description="Intégrateurs non holonomes : GNI, RATTLE, DLA et référence RK4.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()
    run_command.register(subparsers, common)
    convergence_command.register(subparsers, common)
    compare_command.register(subparsers, common)
    models_command.register(subparsers, common)
    return parser


def _params_overrides(extra: Sequence[str]) -> Dict[str, str]:
    """--params.<nom> valeur ou --params.<nom>=valeur ; tout autre argument est refusé."""
    out: Dict[str, str] = {}
    items = list(extra)
    i = 0
    while i < len(items):
        token = items[i]
        if not token.startswith("--" + PARAMS_PREFIX):
            raise ValidationIssue("argument inconnu", field="argv", value=token)
        key, sep, value = token[2:].partition("=")
        if not sep:
            if i + 1 >= len(items):
                raise ValidationIssue("valeur manquante", field=key)
            value = items[i + 1]
            i += 1
        out[key] = value
        i += 1
    return out


def parse(argv: Optional[Sequence[str]] = None) -> Tuple[argparse.Namespace, Dict[str, Optional[str]]]:
    args, extra = build_parser().parse_known_args(argv)
    overrides: Dict[str, Optional[str]] = {key: getattr(args, key, None) for key in KEYS}
    overrides.update(_params_overrides(extra))
    return args, overrides


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args, overrides = parse(argv)
        return args.handler(args, overrides)
    except ValidationIssue as exc:
        logger.error("Configuration invalide : %s", exc)
        return EXIT_CONFIG
    except NumericalIssue as exc:
        logger.error("Échec numérique : %s", exc)
        return EXIT_NUMERICAL
