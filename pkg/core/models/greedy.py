from dataclasses import dataclass, field
from enum import Enum

from .frame import AtomIndex


class CoefficientLaw(str, Enum):
    UNIT = "unit"
    GEOMETRIC = "geometric"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class OgaStep:
    chosen: AtomIndex
    score: float
    coefficients: tuple[float, ...]
    residual_norm: float


@dataclass(frozen=True)
class OgaTrace:
    """Per-step record of an orthogonal greedy run; step t refits t coefficients."""

    steps: tuple[OgaStep, ...] = field(default_factory=tuple)
    target_norm: float = 0.0
    l1_bound: float | None = None

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class RateVerdict:
    passed: bool
    margin: float
