import argparse

from cli.deps import get_pipeline_service, get_settings, load_config
from cli.output import emit


def register(sub: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    parser = sub.add_parser(
        "check-kernel",
        parents=[common],
        help="Certify the averaging-kernel conditions for the configured activation",
    )
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = load_config(args)
    pipeline = get_pipeline_service(get_settings(args))
    spec, grid = pipeline.prepare_activation(config)
    report = pipeline.check_kernel(config, spec, grid)
    emit(args, report, "kernel.json")
    return 0 if report.passed else 2
