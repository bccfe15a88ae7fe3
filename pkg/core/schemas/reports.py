from typing import Any, Literal

import numpy as np
from pydantic import Field

from core.models import (
    ActivationSpec,
    AtomIndex,
    Box,
    KernelReport,
    WBNetParams,
    WaveletExpansion,
)
from .base import BaseSchema


class DictionaryManifest(BaseSchema):
    """Sidecar of a built dictionary; samples are regenerated, never stored."""

    spec: ActivationSpec = Field(..., description="Activation the atoms are built from")
    k_range: tuple[int, int] = Field(..., description="Inclusive scale range [k_min, k_max]")
    domain: Box = Field(..., description="Box holding the atom centers")
    atom_count: int = Field(..., description="Atoms kept in the dictionary")
    dropped_atoms: list[AtomIndex] = Field(default_factory=list, description="Atoms dropped for a vanishing grid norm")


class ExpansionTermDocument(BaseSchema):
    k: int = Field(..., description="Scale")
    m: list[int] = Field(..., description="Lattice vector")
    b: list[float] = Field(..., description="Center 2^{-k/d} m")
    coefficient: float = Field(..., description="Coefficient of the un-normalized atom")

    @classmethod
    def from_expansion(cls, expansion: WaveletExpansion) -> list["ExpansionTermDocument"]:
        return [
            cls(
                k=term.index.k,
                m=list(term.index.m),
                b=[float(v) for v in term.index.center],
                coefficient=term.coefficient,
            )
            for term in expansion.terms
        ]


class CurvePoint(BaseSchema):
    N: int
    residual: float
    bound: float | None = Field(None, description="l1 bound times (N+1)^{-1/2}, when the bound is known")


class RateVerdictDocument(BaseSchema):
    status: Literal["pass", "fail", "skipped"]
    margin: float | None = Field(None, description="max residual(t) (t+1)^{1/2} / l1 bound; null when infinite or skipped")
    l1_bound: float | None = None


class NetworkMetadata(BaseSchema):
    d: int
    activation_family: str
    activation: ActivationSpec
    source_expansion_hash: str
    node_count: int


class NetworkDocument(BaseSchema):
    """Exported network x -> sum_n alpha_n sigma(gamma_n x + theta_n)."""

    gamma: list[float]
    alpha: list[float]
    theta: list[list[float]]
    metadata: NetworkMetadata

    @classmethod
    def from_params(
        cls, params: WBNetParams, activation: ActivationSpec, source_hash: str
    ) -> "NetworkDocument":
        return cls(
            gamma=params.gamma.tolist(),
            alpha=params.alpha.tolist(),
            theta=params.theta.tolist(),
            metadata=NetworkMetadata(
                d=params.dim,
                activation_family=activation.family.value,
                activation=activation,
                source_expansion_hash=source_hash,
                node_count=params.node_count,
            ),
        )

    def to_params(self) -> WBNetParams:
        theta = np.asarray(self.theta, dtype=float).reshape(len(self.gamma), self.metadata.d)
        return WBNetParams(
            gamma=np.asarray(self.gamma, dtype=float),
            alpha=np.asarray(self.alpha, dtype=float),
            theta=theta,
        )


class ComparisonEntry(BaseSchema):
    M: int
    achieved_dist: float
    network_error: float = Field(..., description="||f - Psi[p; sigma_dagger]|| on the grid")
    bound: float = Field(..., description="residual(N) + achieved_dist * sum |c| + slack")
    node_count: int
    passed: bool


class ComparisonReport(BaseSchema):
    sigma0: ActivationSpec
    residual: float
    coefficient_l1: float
    entries: list[ComparisonEntry]
    monotone: bool = Field(..., description="achieved_dist non-increasing along M")
    passed: bool


class NetworkSummary(BaseSchema):
    file: str
    node_count: int
    source_expansion_hash: str


class RunReport(BaseSchema):
    version: str = "1"
    resolved_config: dict[str, Any]
    activation: ActivationSpec | None = None
    kernel: KernelReport | None = None
    dictionary: DictionaryManifest | None = None
    target: dict[str, Any] | None = None
    expansion: list[ExpansionTermDocument] = Field(default_factory=list)
    residual_curve: list[CurvePoint] = Field(default_factory=list)
    rate: RateVerdictDocument | None = None
    network: NetworkSummary | None = None
    comparison: ComparisonReport | None = None
    verdicts: dict[str, bool] = Field(default_factory=dict)
    passed: bool = False
    failed_stage: str | None = None
    error: str | None = None
    timings: dict[str, float] | None = None
