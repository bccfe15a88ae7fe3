from dataclasses import dataclass
from enum import Enum

import numpy as np


class QuadratureRule(str, Enum):
    MIDPOINT = "midpoint"
    GAUSS_LEGENDRE = "gauss_legendre"


@dataclass(frozen=True, eq=False)
class Grid:
    """
    Truncated tensor quadrature grid on [-R, R]^d.

    ``nodes`` has shape (n^d, d) in lexicographic order (first axis slowest),
    ``weights`` has shape (n^d,).
    """

    dim: int
    half_width: float
    points_per_axis: int
    rule: QuadratureRule
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    @property
    def volume(self) -> float:
        return (2.0 * self.half_width) ** self.dim
