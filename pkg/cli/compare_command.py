import logging
import os

from repositories.summary_repository import SummaryRepository
from repositories.trajectory_repository import TrajectoryRepository
from services.experiments_service import ExperimentsService
from services.run_config_service import RunConfigService

logger = logging.getLogger(__name__)


def register(subparsers, common) -> None:
    parser = subparsers.add_parser(
        "compare", parents=[common], help="deux méthodes face à la référence RK4 (écarts dans R^n)"
    )
    parser.set_defaults(handler=handle)


def handle(args, overrides) -> int:
    cfg = RunConfigService.load(args.config, overrides)
    report = ExperimentsService.compare(cfg)

    root, ext = os.path.splitext(cfg.output_path)
    ext = ext or ".csv"
    TrajectoryRepository.save(report.reference, f"{root}.reference{ext}")
    for method, record in report.records.items():
        TrajectoryRepository.save(record, f"{root}.{method}{ext}")

    summary = {
        "model": report.model,
        "h": report.h,
        "errors": {
            method: {"rms": err.rms, "max": err.max, "distances": err.distances}
            for method, err in report.errors.items()
        },
        "energy_drift": dict(report.drifts),
    }
    SummaryRepository.save(summary, SummaryRepository.summary_path(cfg.output_path))

    print(f"{'méthode':>10} {'rms':>14} {'max':>14} {'dérive E':>14}")
    for method, err in report.errors.items():
        print(f"{method:>10} {err.rms:>14.6e} {err.max:>14.6e} {report.drifts[method]:>14.6e}")
    print(f"{'reference':>10} {'':>14} {'':>14} {report.drifts['reference']:>14.6e}")
    return 0
