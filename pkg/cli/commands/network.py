import argparse
from pathlib import Path

from cli.deps import get_pipeline_service, get_settings, get_target_repository, load_config
from cli.output import emit
from repositories.networks import NetworkRepository
from repositories.reports import ReportRepository

COMPARISON_STAGES = ("activation", "dictionary", "target", "greedy", "comparison")


def register(sub: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    export = sub.add_parser("export-net", help="Convert the expansion of a run report into a network document")
    export.add_argument("--run", type=Path, required=True, help="run.json written by approximate or run")
    export.add_argument("--out", type=Path, required=True, help="Network document to write")
    export.add_argument("--threads", type=int, default=None)
    export.set_defaults(handler=handle_export)

    evaluate = sub.add_parser("eval-net", help="Evaluate a network document at CSV points")
    evaluate.add_argument("--net", type=Path, required=True, help="Network document")
    evaluate.add_argument("--points", type=Path, required=True, help="CSV with columns x_1..x_d")
    evaluate.add_argument("--out", type=Path, required=True, help="CSV with columns x_1..x_d, value")
    evaluate.add_argument("--threads", type=int, default=None)
    evaluate.set_defaults(handler=handle_eval)

    compare = sub.add_parser(
        "compare-activations",
        parents=[common],
        help="Fit non-smooth substitutes for each M and check the combined error bound",
    )
    compare.set_defaults(handler=handle_compare)


def handle_export(args: argparse.Namespace) -> int:
    pipeline = get_pipeline_service(get_settings(args))
    reports = ReportRepository(Path.cwd())
    document = pipeline.export_from_run(args.run, reports)
    NetworkRepository(reports).save(document, args.out)
    return 0


def handle_eval(args: argparse.Namespace) -> int:
    pipeline = get_pipeline_service(get_settings(args))
    reports = ReportRepository(Path.cwd())
    targets = get_target_repository()
    document = NetworkRepository(reports).load(args.net)
    points = targets.read_points(args.points, document.metadata.d)
    values = pipeline.evaluate_document(document, points)
    reports.write_frame(args.out, targets.values_frame(points, values))
    return 0


def handle_compare(args: argparse.Namespace) -> int:
    config = load_config(args, with_dagger=True)
    pipeline = get_pipeline_service(get_settings(args))
    state = pipeline.execute(config, COMPARISON_STAGES)
    emit(args, state.comparison, "comparison.json")
    return 0 if state.comparison.passed else 2
