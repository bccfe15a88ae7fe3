import logging
from pathlib import Path

from core.schemas.reports import NetworkDocument
from .reports import ReportRepository

logger = logging.getLogger(__name__)


class NetworkRepository:
    def __init__(self, reports: ReportRepository):
        self.reports = reports

    def save(self, document: NetworkDocument, name: str | Path) -> Path:
        logger.info(f"Saving network with {document.metadata.node_count} nodes")
        return self.reports.write_json(name, document)

    def load(self, name: str | Path) -> NetworkDocument:
        document = self.reports.read_json(name, NetworkDocument)
        logger.info(f"Loaded network with {document.metadata.node_count} nodes")
        return document
