import argparse

from cli.deps import get_pipeline_service, get_report_repository, get_settings, load_config


def register(sub: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    parser = sub.add_parser(
        "run",
        parents=[common],
        help="Full pipeline: certify, build, approximate, export and compare",
    )
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = load_config(args)
    pipeline = get_pipeline_service(get_settings(args))
    _, exit_code = pipeline.run_pipeline(config, get_report_repository(config))
    return exit_code
