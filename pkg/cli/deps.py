import argparse
import json
from pathlib import Path
from typing import Any

from core.config import Settings, settings as default_settings
from core.schemas.config import ExperimentConfig
from repositories.reports import ReportRepository
from repositories.targets import TargetRepository

from services.activation_service import ActivationService
from services.quadrature_service import QuadratureService
from services.frame_service import FrameService
from services.kernel_service import KernelService
from services.greedy_service import GreedyService
from services.network_service import NetworkService
from services.pipeline_service import PipelineService


def get_settings(args: argparse.Namespace) -> Settings:
    threads = getattr(args, "threads", None)
    if threads is None:
        return default_settings
    return default_settings.model_copy(update={"threads": threads})


def load_config(args: argparse.Namespace, with_dagger: bool = False) -> ExperimentConfig:
    """Read the config file (defaults when absent) and apply --seed / --out overrides."""
    data: dict[str, Any] = {}
    if getattr(args, "config", None):
        with Path(args.config).open("r", encoding="utf-8") as handle:
            data = json.load(handle)
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        data.setdefault("output", {})["dir"] = str(args.out)
    if with_dagger and data.get("dagger") is None:
        data["dagger"] = {}
    return ExperimentConfig.model_validate(data)


# Repositories
def get_report_repository(config: ExperimentConfig) -> ReportRepository:
    return ReportRepository(config.output.dir)


def get_target_repository() -> TargetRepository:
    return TargetRepository()


# Services
def get_activation_service(settings: Settings) -> ActivationService:
    return ActivationService(settings)


def get_quadrature_service(settings: Settings) -> QuadratureService:
    return QuadratureService(get_activation_service(settings), settings)


def get_pipeline_service(settings: Settings) -> PipelineService:
    activation_service = get_activation_service(settings)
    quadrature_service = QuadratureService(activation_service, settings)
    frame_service = FrameService(activation_service, quadrature_service, settings)
    return PipelineService(
        activation_service=activation_service,
        quadrature_service=quadrature_service,
        kernel_service=KernelService(activation_service, quadrature_service, frame_service, settings),
        frame_service=frame_service,
        greedy_service=GreedyService(quadrature_service, settings),
        network_service=NetworkService(activation_service, quadrature_service, settings),
        target_repository=get_target_repository(),
    )
