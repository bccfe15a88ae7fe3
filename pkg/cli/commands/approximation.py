import argparse

from cli.deps import get_pipeline_service, get_report_repository, get_settings, load_config
from services.pipeline_service import APPROXIMATION_STAGES


def register(sub: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    parser = sub.add_parser(
        "approximate",
        parents=[common],
        help="Run OGA on the configured target; writes run.json and curve.csv",
    )
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = load_config(args)
    pipeline = get_pipeline_service(get_settings(args))
    _, exit_code = pipeline.run_pipeline(config, get_report_repository(config), APPROXIMATION_STAGES)
    return exit_code
