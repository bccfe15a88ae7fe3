from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import AliasChoices, Field, computed_field, model_validator

from .base import Base


class KernelCondition(str, Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    DECAY_J0 = "Decay_j0"
    DECAY_J1 = "Decay_j1"
    DECAY_J2 = "Decay_j2"
    SYMMETRY = "Symmetry"


DERIVED_CONSTANTS = ("eta", "theta", "A")


class HomogeneousConstants(Base):
    """Constants of R^d as a space of homogeneous type with rho(x, b) = c ||x - b||^d."""

    dim: int = Field(..., ge=1, le=3)
    c: float = Field(1.0, gt=0)
    epsilon: float = Field(..., gt=0)

    @model_validator(mode="before")
    @classmethod
    def _drop_derived(cls, data):
        # eta, theta and A are written out but always recomputed from dim
        if isinstance(data, dict):
            return {key: value for key, value in data.items() if key not in DERIVED_CONSTANTS}
        return data

    @model_validator(mode="after")
    def _check_epsilon(self) -> HomogeneousConstants:
        if self.epsilon > self.theta + 1e-15:
            raise ValueError(f"epsilon must lie in (0, 1/d] = (0, {self.theta}]")
        return self

    @classmethod
    def default(cls, dim: int, c: float = 1.0) -> HomogeneousConstants:
        return cls(dim=dim, c=c, epsilon=min(1.0 / dim, 0.5))

    @computed_field
    @property
    def eta(self) -> float:
        return 1.0 / self.dim

    @computed_field
    @property
    def theta(self) -> float:
        return 1.0 / self.dim

    @computed_field
    @property
    def A(self) -> float:
        return 3.0**self.dim / 2.0

    def rho(self, x, y) -> np.ndarray:
        diff = np.atleast_2d(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        return self.c * np.linalg.norm(diff, axis=1) ** self.dim


class KernelEntry(Base):
    condition: KernelCondition
    sup_ratio: float | None = None
    implied_constant: float | None = None
    samples: int
    passed: bool = Field(..., validation_alias=AliasChoices("passed", "pass"), serialization_alias="pass")
    status: str = "ok"


class DecayCertificate(Base):
    cprime: float
    sup_ratios: tuple[float, ...]
    radius: float
    stability_change: float
    samples: int
    stable: bool


class KernelReport(Base):
    """Finished certification run; entries are in evaluation order."""

    constants: HomogeneousConstants
    cprime: float | None
    entries: tuple[KernelEntry, ...]

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    def entry(self, condition: KernelCondition) -> KernelEntry:
        for entry in self.entries:
            if entry.condition == condition:
                return entry
        raise KeyError(condition)


@dataclass(frozen=True, eq=False)
class KernelSamples:
    """
    Sampled configurations (k, x, x', y, y') for the kernel inequalities.
    Every row satisfies both perturbation preconditions.
    """

    k: np.ndarray
    x: np.ndarray
    x_prime: np.ndarray
    y: np.ndarray
    y_prime: np.ndarray

    def __len__(self) -> int:
        return int(len(self.k))
