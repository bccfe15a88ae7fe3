from typing import Any, Literal

from pydantic import ConfigDict, Field, field_validator, model_validator

from core.models import (
    ActivationFamily,
    ActivationSpec,
    Box,
    CoefficientLaw,
    HomogeneousConstants,
    QuadratureRule,
)
from core.models.activations import SMOOTH_FAMILIES
from .base import BaseSchema

DEFAULT_HALF_WIDTH = {1: 8.0, 2: 5.0, 3: 4.0}
DEFAULT_POINTS = {1: 2048, 2: 128, 3: 32}


class ConfigBlock(BaseSchema):
    """Config block: unknown keys are errors so typos never pass silently."""

    model_config = ConfigDict(from_attributes=True, extra="forbid")


class ActivationConfig(ConfigBlock):
    family: ActivationFamily = Field(ActivationFamily.GAUSSIAN, description="Activation family")
    dim: int = Field(1, ge=1, le=3, description="Input dimension d")
    params: dict[str, Any] = Field(default_factory=dict, description="Family constants (alpha, m, r, tau, ridge, ...)")
    normalize: bool = Field(True, description="Rescale so the grid integral of sigma is 1")
    csv: str | None = Field(None, description="Sampled activation: CSV with columns x_1..x_d, value")

    @model_validator(mode="after")
    def _check_params(self) -> "ActivationConfig":
        if self.family == ActivationFamily.SAMPLED:
            if not self.csv:
                raise ValueError("activation.csv is required for a sampled activation")
            return self
        try:
            self.to_spec()
        except ValueError as error:
            raise ValueError(f"activation.params: {error}") from error
        return self

    @property
    def smooth(self) -> bool:
        if self.family == ActivationFamily.STEP_COMBO:
            return self.to_spec().smooth
        return self.family in SMOOTH_FAMILIES

    def to_spec(self) -> ActivationSpec:
        return ActivationSpec(family=self.family, dim=self.dim, **self.params)


class GridConfig(ConfigBlock):
    half_width: float | None = Field(None, gt=0, description="Box half-width R; default 8 / 5 / 4 for d = 1 / 2 / 3")
    points_per_axis: int | None = Field(None, ge=8, description="Nodes per axis n; default 2048 / 128 / 32")
    rule: QuadratureRule | None = Field(None, description="gauss_legendre for smooth activations, midpoint otherwise")


class DictionaryConfig(ConfigBlock):
    k_min: int = Field(-2, description="Coarsest scale")
    k_max: int = Field(4, description="Finest scale")
    domain: Box | None = Field(None, description="Box holding atom centers; default half the grid box")
    atom_cap: int = Field(1_000_000, ge=1, description="Largest lattice point count per scale")

    @model_validator(mode="after")
    def _check_scales(self) -> "DictionaryConfig":
        if self.k_min > self.k_max:
            raise ValueError(f"dictionary.k_min={self.k_min} exceeds dictionary.k_max={self.k_max}")
        return self


class GreedyConfig(ConfigBlock):
    N: int = Field(25, ge=1, description="Number of OGA steps")
    tie_rule: Literal["lowest_index"] = Field("lowest_index", description="Ties go to smallest k, then smallest m")
    residual_threshold: float | None = Field(None, ge=0, description="Stop once the residual norm falls to this value")


class KernelConfig(ConfigBlock):
    enabled: bool = Field(True, description="Run the kernel certification stage; false waives it")
    c: float = Field(1.0, gt=0, description="Quasi-metric constant c")
    epsilon: float | None = Field(None, gt=0, description="Decay exponent; default min(1/d, 0.5)")
    decay_radius: float | None = Field(None, gt=0, description="Decay sample radius; default 2R")
    decay_samples: int = Field(4001, ge=3, description="Decay sample count per radius")
    samples: int = Field(10_000, ge=1, description="Sampled configurations for C2-C4 and symmetry")
    min_valid: int = Field(1000, ge=1, description="Fewest valid samples accepted for C3 and C4")

    def constants(self, dim: int) -> HomogeneousConstants:
        return HomogeneousConstants(dim=dim, c=self.c, epsilon=self.epsilon)


class DaggerConfig(ConfigBlock):
    sigma0: Literal["relu", "hat", "box"] = Field("hat", description="Non-smooth building block sigma0")
    M: list[int] = Field(default_factory=lambda: [9, 17, 33], description="Shift counts to compare")
    shift_box: Box | None = Field(None, description="Box holding the shifts; default the dictionary domain")

    @field_validator("M")
    @classmethod
    def _check_counts(cls, value: list[int]) -> list[int]:
        if not value or any(m < 1 for m in value):
            raise ValueError("dagger.M must be a non-empty list of positive counts")
        return value


class TargetConfig(ConfigBlock):
    kind: Literal["builtin", "synthetic", "csv"] = Field("synthetic", description="Where the target comes from")
    name: Literal["gaussian", "bump", "wavepacket"] | None = Field(None, description="Builtin target name")
    n_atoms: int = Field(10, ge=1, description="Synthetic target: number of atoms")
    coeff_law: CoefficientLaw = Field(CoefficientLaw.GEOMETRIC, description="Synthetic target: coefficient law")
    path: str | None = Field(None, description="CSV target: columns x_1..x_d, value")

    @model_validator(mode="after")
    def _check_kind(self) -> "TargetConfig":
        if self.kind == "builtin" and self.name is None:
            raise ValueError("target.name is required for a builtin target")
        if self.kind == "csv" and not self.path:
            raise ValueError("target.path is required for a csv target")
        return self


class OutputConfig(ConfigBlock):
    dir: str = Field("out", description="Directory receiving all outputs")
    run_file: str = Field("run.json", description="Pipeline report")
    curve_file: str = Field("curve.csv", description="Residual curve")
    net_file: str = Field("net.json", description="Exported network")
    record_timings: bool = Field(False, description="Write per-stage wall times into the report")


class ExperimentConfig(ConfigBlock):
    """
    Complete experiment description. After validation every dependent default
    is filled in, so ``model_dump()`` is the resolved configuration.
    """

    activation: ActivationConfig = Field(default_factory=ActivationConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    dictionary: DictionaryConfig = Field(default_factory=DictionaryConfig)
    greedy: GreedyConfig = Field(default_factory=GreedyConfig)
    kernel: KernelConfig = Field(default_factory=KernelConfig)
    dagger: DaggerConfig | None = Field(None, description="Activation substitution comparison; omitted to skip")
    target: TargetConfig = Field(default_factory=TargetConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    seed: int = Field(0, ge=0, lt=2**64, description="Run seed; every stage derives its own stream")

    @model_validator(mode="after")
    def _resolve_defaults(self) -> "ExperimentConfig":
        d = self.activation.dim
        grid = self.grid
        if grid.half_width is None:
            grid.half_width = DEFAULT_HALF_WIDTH[d]
        if grid.points_per_axis is None:
            grid.points_per_axis = DEFAULT_POINTS[d]
        if grid.rule is None:
            grid.rule = QuadratureRule.GAUSS_LEGENDRE if self.activation.smooth else QuadratureRule.MIDPOINT

        if self.dictionary.domain is None:
            self.dictionary.domain = Box.symmetric(grid.half_width / 2.0, d)
        if self.dictionary.domain.dim != d:
            raise ValueError(f"dictionary.domain has dimension {self.dictionary.domain.dim}, activation.dim is {d}")

        kernel = self.kernel
        if kernel.epsilon is None:
            kernel.epsilon = min(1.0 / d, 0.5)
        if kernel.epsilon > 1.0 / d:
            raise ValueError(f"kernel.epsilon={kernel.epsilon} exceeds 1/d={1.0 / d}")
        if kernel.decay_radius is None:
            kernel.decay_radius = 2.0 * grid.half_width

        if self.dagger is not None:
            if self.dagger.shift_box is None:
                self.dagger.shift_box = self.dictionary.domain
            if self.dagger.shift_box.dim != d:
                raise ValueError(f"dagger.shift_box has dimension {self.dagger.shift_box.dim}, activation.dim is {d}")
            for m in self.dagger.M:
                per_axis = round(m ** (1.0 / d))
                if per_axis**d != m:
                    raise ValueError(f"dagger.M entry {m} is not a perfect power of d={d}")
        return self
