import argparse
import json
import logging
import sys

from pydantic import ValidationError

from cli.router import register_commands
from core.config import settings
from core.exceptions import FrameforgeError
from core.schemas.config import ExperimentConfig

logger = logging.getLogger(__name__)

description = """
Wavelet frames from neural activations: certify the averaging kernel,
build the dictionary, approximate with the orthogonal greedy algorithm,
export a one-hidden-layer network and swap in a non-smooth activation.

Exit codes: 0 success, 1 input or runtime error, 2 a verdict failed.
"""

COMMANDS = [
    {
        "name": "check-kernel",
        "description": "Decay certificates and the four averaging-kernel conditions for one activation",
    },
    {
        "name": "build-dict",
        "description": "Wavelet dictionary over a scale range and a lattice domain",
    },
    {
        "name": "approximate",
        "description": "Orthogonal greedy approximation of a target with the residual curve",
    },
    {
        "name": "export-net",
        "description": "Network document from the expansion of a finished run",
    },
    {
        "name": "eval-net",
        "description": "Network evaluation at points read from CSV",
    },
    {
        "name": "compare-activations",
        "description": "Non-smooth substitutes for the activation and the combined error bound",
    },
    {
        "name": "run",
        "description": "Every stage in order with one run report",
    },
]


def configure_logging() -> None:
    logging.basicConfig(level=settings.log_level, format=settings.log_format, stream=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    epilog = "\n".join(f"  {command['name']:<20} {command['description']}" for command in COMMANDS)
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description=description,
        epilog=f"commands:\n{epilog}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--print-schema",
        action="store_true",
        help="Print the JSON schema of the experiment config and exit",
    )

    # Общие флаги для команд, работающих с конфигом
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Experiment config (JSON); defaults apply when omitted")
    common.add_argument("--out", help="Output directory; reports are printed to stdout when omitted")
    common.add_argument("--seed", type=int, default=None, help="Overrides the seed of the config")
    common.add_argument("--threads", type=int, default=None, help="Worker threads for the dictionary build")

    sub = parser.add_subparsers(dest="command", metavar="command")
    register_commands(sub, common)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.print_schema:
        print(json.dumps(ExperimentConfig.model_json_schema(), indent=2, sort_keys=True))
        return 0
    if args.command is None:
        parser.print_help(sys.stderr)
        return 1

    configure_logging()
    try:
        return args.handler(args)
    except ValidationError as error:
        for issue in error.errors():
            location = ".".join(str(part) for part in issue["loc"]) or "config"
            print(f"error: {location}: {issue['msg']}", file=sys.stderr)
        return 1
    except FrameforgeError as error:
        print(f"error: {error.detail}", file=sys.stderr)
        return error.exit_code
    except (OSError, ValueError) as error:
        print(f"error: {error}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
