from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from pydantic import Field, model_validator

from core.exceptions import InvalidExpansion
from .activations import ActivationSpec
from .base import Base
from .grid import Grid


class Box(Base):
    """Closed axis-aligned box [lower_1, upper_1] x ... x [lower_d, upper_d]."""

    lower: tuple[float, ...] = Field(..., description="Lower corner")
    upper: tuple[float, ...] = Field(..., description="Upper corner")

    @model_validator(mode="after")
    def _check_corners(self) -> Box:
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("box corners must be non-empty and share one dimension")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("box lower corner exceeds upper corner")
        return self

    @classmethod
    def symmetric(cls, half_width: float, dim: int) -> Box:
        return cls(lower=(-half_width,) * dim, upper=(half_width,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        points = np.atleast_2d(points)
        lower = np.asarray(self.lower) - tol
        upper = np.asarray(self.upper) + tol
        return np.all((points >= lower) & (points <= upper), axis=1)


class AtomIndex(Base):
    """
    Lattice index (k, m) of the atom psi_{k,b} with b = 2^{-k/d} m.

    The center is kept as integers so that lattice membership is exact.
    """

    k: int
    m: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.m)

    @property
    def spacing(self) -> float:
        return float(np.exp2(-self.k / self.dim))

    @property
    def center(self) -> np.ndarray:
        return self.spacing * np.asarray(self.m, dtype=float)

    @property
    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return self.k, self.m


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Finite sub-family of the wavelet system, sampled on a grid."""

    spec: ActivationSpec
    k_min: int
    k_max: int
    domain: Box
    grid: Grid
    atoms: tuple[AtomIndex, ...]
    samples: np.ndarray
    norms: np.ndarray
    dropped: tuple[AtomIndex, ...] = ()

    @property
    def size(self) -> int:
        return len(self.atoms)

    def position(self, atom: AtomIndex) -> int:
        return self.atoms.index(atom)


@dataclass(frozen=True)
class ExpansionTerm:
    index: AtomIndex
    coefficient: float


@dataclass(frozen=True)
class WaveletExpansion:
    """Sparse expansion sum_{(k,b)} c_{k,b} psi_{k,b}; term order is evaluation order."""

    terms: tuple[ExpansionTerm, ...] = field(default_factory=tuple)

    def __post_init__(self):
        indices = [term.index for term in self.terms]
        if len(set(indices)) != len(indices):
            raise InvalidExpansion("Expansion indices must be distinct")
        if not np.all(np.isfinite([term.coefficient for term in self.terms])):
            raise InvalidExpansion("Expansion coefficients must be finite")

    @classmethod
    def from_pairs(cls, pairs) -> WaveletExpansion:
        return cls(tuple(ExpansionTerm(index, float(c)) for index, c in pairs))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def coefficient_l1(self) -> float:
        return float(sum(abs(term.coefficient) for term in self.terms))

    def scaled(self, factor: float) -> WaveletExpansion:
        return WaveletExpansion(
            tuple(ExpansionTerm(term.index, factor * term.coefficient) for term in self.terms)
        )
