import json
import logging
from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import BaseModel, ValidationError

from core.exceptions import SchemaMismatch
from core.schemas.reports import CurvePoint

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def dump_json(document: BaseModel | dict[str, Any]) -> str:
    """UTF-8 JSON with sorted keys; byte-identical for equal documents."""
    payload = document.model_dump(mode="json", by_alias=True) if isinstance(document, BaseModel) else document
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


class ReportRepository:
    def __init__(self, root: str | Path = "."):
        self.root = Path(root)

    def path(self, name: str | Path) -> Path:
        name = Path(name)
        return name if name.is_absolute() else self.root / name

    def write_json(self, name: str | Path, document: BaseModel | dict[str, Any]) -> Path:
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as handle:
            handle.write(dump_json(document))
        logger.info(f"Wrote {path}")
        return path

    def read_json(self, name: str | Path, schema: type[BaseModel]) -> BaseModel:
        path = self.path(name)
        logger.info(f"Reading {path}")
        with path.open("r", encoding="utf-8") as handle:
            payload = json.load(handle)
        try:
            return schema.model_validate(payload)
        except ValidationError as error:
            raise SchemaMismatch(f"{path} is not a valid {schema.__name__}: {error}") from error

    def write_curve(self, name: str | Path, curve: list[CurvePoint]) -> Path:
        frame = pd.DataFrame(
            [point.model_dump() for point in curve], columns=["N", "residual", "bound"]
        )
        return self.write_frame(name, frame)

    def write_frame(self, name: str | Path, frame: pd.DataFrame) -> Path:
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"Wrote {path} ({len(frame)} rows)")
        return path
