import logging

from models.errors import StepFailureError
from repositories.summary_repository import SummaryRepository
from repositories.trajectory_repository import TrajectoryRepository
from services.diagnostics_service import DiagnosticsService
from services.experiments_service import ExperimentsService
from services.run_config_service import RunConfigService

logger = logging.getLogger(__name__)


def register(subparsers, common) -> None:
    parser = subparsers.add_parser("run", parents=[common], help="intègre une trajectoire et écrit CSV + résumé")
    parser.set_defaults(handler=handle)


def handle(args, overrides) -> int:
    cfg = RunConfigService.load(args.config, overrides)
    bundle = ExperimentsService.bundle_for(cfg)

    try:
        record = ExperimentsService.run_method(cfg)
    except StepFailureError as exc:
        # trajectoire partielle vidée avant de remonter l'échec (code 3)
        if exc.partial is not None:
            TrajectoryRepository.save(exc.partial, cfg.output_path)
        raise

    csv_path = TrajectoryRepository.save(record, cfg.output_path)
    summary = DiagnosticsService.summarize(record, bundle.system, bundle.lagrangian, bundle.sections)
    summary_path = SummaryRepository.save(summary, SummaryRepository.summary_path(cfg.output_path))

    print(f"trajectoire : {csv_path}")
    print(f"résumé      : {summary_path}")
    print(f"dérive max de l'énergie     : {summary['energy']['max_drift']:.3e}")
    print(f"résidu max de la contrainte : {summary['constraint']['max_residual']:.3e}")
    for name, values in summary["sections"].items():
        print(f"J^nh[{name}] : {values['initial']:.10g} -> {values['final']:.10g} (variation max {values['max_change']:.3e})")
    return 0
