import argparse
from pathlib import Path

from pydantic import BaseModel

from repositories.reports import ReportRepository, dump_json


def emit(args: argparse.Namespace, document: BaseModel, file_name: str) -> None:
    """Print the document, or write it into the --out directory when one is given."""
    if getattr(args, "out", None) is None:
        print(dump_json(document), end="")
        return
    ReportRepository(Path(args.out)).write_json(file_name, document)
