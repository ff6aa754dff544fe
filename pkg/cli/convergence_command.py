import logging

from app.validator import ValidationIssue
from services.experiments_service import ConvergenceTable, ExperimentsService
from services.run_config_service import RunConfigService

logger = logging.getLogger(__name__)


def register(subparsers, common) -> None:
    parser = subparsers.add_parser(
        "convergence", parents=[common], help="erreur en temps final pour une liste de pas (h_list)"
    )
    parser.set_defaults(handler=handle)


def format_table(table: ConvergenceTable) -> str:
    lines = [
        f"modèle={table.model} méthode={table.method} T={table.t_final:.6g}",
        f"{'h':>12} {'pas':>8} {'erreur':>14} {'ordre':>8}",
    ]
    for row in table.rows:
        order = "n/a" if row.order is None else f"{row.order:.3f}"
        lines.append(f"{row.h:>12.6g} {row.steps:>8d} {row.error:>14.6e} {order:>8}")
    return "\n".join(lines)


def handle(args, overrides) -> int:
    cfg = RunConfigService.load(args.config, overrides)
    if not cfg.h_list:
        raise ValidationIssue("h_list requis pour convergence", field="h_list")
    print(format_table(ExperimentsService.convergence(cfg)))
    return 0
