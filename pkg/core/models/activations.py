from __future__ import annotations

from enum import Enum

from pydantic import Field, model_validator

from .base import Base


class ActivationFamily(str, Enum):
    GAUSSIAN = "gaussian"
    OSC_SINC = "osc_sinc"
    RADIAL_COS = "radial_cos"
    RADIAL_SINC = "radial_sinc"
    RQNN = "rqnn"
    SHAHAM_RELU = "shaham_relu"
    RELU = "relu"
    BOX = "box"
    STEP_COMBO = "step_combo"
    SAMPLED = "sampled"


SMOOTH_FAMILIES = frozenset(
    {
        ActivationFamily.GAUSSIAN,
        ActivationFamily.OSC_SINC,
        ActivationFamily.RADIAL_COS,
        ActivationFamily.RADIAL_SINC,
        ActivationFamily.RQNN,
    }
)

# even by construction, usable as averaging-kernel activations
KERNEL_FAMILIES = SMOOTH_FAMILIES | {ActivationFamily.SHAHAM_RELU, ActivationFamily.BOX}

# defined on the real line; in d > 1 only through the ridge variable 1·x
SCALAR_FAMILIES = frozenset(
    {
        ActivationFamily.OSC_SINC,
        ActivationFamily.RELU,
        ActivationFamily.BOX,
    }
)

# may be evaluated at the ridge variable
RIDGE_FAMILIES = SCALAR_FAMILIES | {ActivationFamily.GAUSSIAN}

RADIAL_FAMILIES = frozenset(
    {ActivationFamily.RADIAL_COS, ActivationFamily.RADIAL_SINC, ActivationFamily.RQNN}
)


class ActivationSpec(Base):
    """
    Parameterized activation sigma: R^d -> R.

    The value is ``scale`` times the family formula. Family constants that a
    family does not use are ignored.
    """

    family: ActivationFamily = Field(..., description="Activation family")
    dim: int = Field(1, ge=1, description="Input dimension d")
    scale: float = Field(1.0, description="Normalization constant multiplying the formula")
    alpha: float = Field(3.5, gt=0, description="Tail exponent of osc_sinc")
    m: float = Field(1.0, description="Oscillation frequency of osc_sinc and radial_sinc")
    r: float = Field(1.0, gt=0, description="Support radius of the radial families")
    tau: tuple[float, ...] | None = Field(None, description="Frequency vector of radial_cos")
    inner: str = Field("bump", description="Inner function of the radial families")
    ridge: bool = Field(False, description="Evaluate a scalar family at the ridge variable 1·x")
    coeffs: tuple[float, ...] = Field((), description="step_combo coefficients c_m")
    shifts: tuple[tuple[float, ...], ...] = Field((), description="step_combo shifts b_m")
    base: ActivationSpec | None = Field(None, description="step_combo base activation sigma0")
    axes: tuple[tuple[float, ...], ...] = Field((), description="sampled: per-axis grid coordinates")
    values: tuple[float, ...] = Field((), description="sampled: values in lexicographic node order")

    @model_validator(mode="after")
    def _check_family_params(self) -> ActivationSpec:
        family = self.family
        if family in SCALAR_FAMILIES and self.dim > 1 and not self.ridge:
            raise ValueError(f"{family.value} is scalar; set ridge=true to use it with dim={self.dim}")
        if self.ridge and family not in RIDGE_FAMILIES:
            raise ValueError(f"ridge evaluation is not available for {family.value}")
        if family in RADIAL_FAMILIES and self.inner != "bump":
            raise ValueError(f"Unknown inner function '{self.inner}', only 'bump' is shipped")
        if self.tau is not None and len(self.tau) != self.dim:
            raise ValueError(f"tau must have {self.dim} components, got {len(self.tau)}")
        if family == ActivationFamily.STEP_COMBO:
            if self.base is None:
                raise ValueError("step_combo needs a base activation")
            if self.base.dim != self.dim:
                raise ValueError("step_combo base must share dim")
            if len(self.coeffs) != len(self.shifts):
                raise ValueError("step_combo coeffs and shifts must have equal length")
            if any(len(shift) != self.dim for shift in self.shifts):
                raise ValueError(f"every step_combo shift must have {self.dim} components")
        if family == ActivationFamily.SAMPLED:
            if len(self.axes) != self.dim:
                raise ValueError(f"sampled activation needs {self.dim} axes")
            expected = 1
            for axis in self.axes:
                if len(axis) < 2:
                    raise ValueError("every sampled axis needs at least two coordinates")
                expected *= len(axis)
            if len(self.values) != expected:
                raise ValueError(f"sampled activation needs {expected} values, got {len(self.values)}")
        return self

    @property
    def smooth(self) -> bool:
        if self.family == ActivationFamily.STEP_COMBO:
            return self.base.smooth
        return self.family in SMOOTH_FAMILIES

    @property
    def even(self) -> bool:
        return self.family in KERNEL_FAMILIES

    def with_scale(self, scale: float) -> ActivationSpec:
        return self.model_copy(update={"scale": float(scale)})

    def scalar(self) -> ActivationSpec:
        """The one-dimensional activation sigma_{1->1} behind a ridge spec."""
        return self.model_copy(update={"dim": 1, "ridge": False})


ActivationSpec.model_rebuild()
