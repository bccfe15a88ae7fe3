from .base import BaseSchema
from .config import (
    ActivationConfig,
    DaggerConfig,
    DictionaryConfig,
    ExperimentConfig,
    GreedyConfig,
    GridConfig,
    KernelConfig,
    OutputConfig,
    TargetConfig,
)
from .reports import (
    ComparisonEntry,
    ComparisonReport,
    CurvePoint,
    DictionaryManifest,
    ExpansionTermDocument,
    NetworkDocument,
    NetworkMetadata,
    NetworkSummary,
    RateVerdictDocument,
    RunReport,
)

__all__ = [
    "BaseSchema",
    "ActivationConfig",
    "DaggerConfig",
    "DictionaryConfig",
    "ExperimentConfig",
    "GreedyConfig",
    "GridConfig",
    "KernelConfig",
    "OutputConfig",
    "TargetConfig",
    "ComparisonEntry",
    "ComparisonReport",
    "CurvePoint",
    "DictionaryManifest",
    "ExpansionTermDocument",
    "NetworkDocument",
    "NetworkMetadata",
    "NetworkSummary",
    "RateVerdictDocument",
    "RunReport",
]
