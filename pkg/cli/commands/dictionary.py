import argparse

from cli.deps import get_pipeline_service, get_settings, load_config
from cli.output import emit


def register(sub: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    parser = sub.add_parser(
        "build-dict",
        parents=[common],
        help="Build the wavelet dictionary and report its manifest",
    )
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = load_config(args)
    pipeline = get_pipeline_service(get_settings(args))
    spec, grid = pipeline.prepare_activation(config)
    dictionary = pipeline.build_dictionary(config, spec, grid)
    emit(args, pipeline.frame_service.manifest(dictionary), "dictionary.json")
    return 0
