from functools import lru_cache
import logging
from typing import Callable, Union

import numpy as np
from scipy.special import roots_legendre

from core.config import Settings, settings as default_settings
from core.exceptions import DimMismatch, DimTooLarge
from core.models import ActivationSpec, Grid, QuadratureRule
from core.reduction import fixed_order_dot, fixed_order_matvec
from services.activation_service import ActivationService

logger = logging.getLogger(__name__)

MAX_DIM = 3
DIST_FACTOR = 1.0 + 2.0**-0.5

Integrand = Union[np.ndarray, Callable[[np.ndarray], np.ndarray], float]


@lru_cache(maxsize=16)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(n)
    return nodes, weights


def axis_rule(half_width: float, n: int, rule: QuadratureRule) -> tuple[np.ndarray, np.ndarray]:
    """One-dimensional nodes and weights on [-R, R]."""
    if rule == QuadratureRule.GAUSS_LEGENDRE:
        nodes, weights = _legendre(n)
        return half_width * nodes, half_width * weights
    h = 2.0 * half_width / n
    nodes = -half_width + h * (np.arange(n) + 0.5)
    return nodes, np.full(n, h)


def tensor_grid(
    dim: int,
    half_width: float,
    n: int,
    rule: QuadratureRule,
    center: np.ndarray | None = None,
) -> Grid:
    nodes_1d, weights_1d = axis_rule(half_width, n, rule)
    mesh = np.meshgrid(*([nodes_1d] * dim), indexing="ij")
    nodes = np.stack([axis.ravel() for axis in mesh], axis=1)
    wmesh = np.meshgrid(*([weights_1d] * dim), indexing="ij")
    weights = np.prod(np.stack([axis.ravel() for axis in wmesh], axis=1), axis=1)
    if center is not None:
        nodes = nodes + np.asarray(center, dtype=float)
    return Grid(
        dim=dim,
        half_width=float(half_width),
        points_per_axis=n,
        rule=rule,
        nodes=nodes,
        weights=weights,
    )


class QuadratureService:
    def __init__(
        self,
        activation_service: ActivationService,
        settings: Settings = default_settings,
    ):
        self.activation_service = activation_service
        self.settings = settings

    def make_grid(
        self,
        dim: int,
        half_width: float,
        n: int,
        rule: QuadratureRule = QuadratureRule.GAUSS_LEGENDRE,
    ) -> Grid:
        if dim > MAX_DIM:
            raise DimTooLarge(f"Tensor grids are limited to d <= {MAX_DIM}, got d={dim}")
        if dim < 1:
            raise DimMismatch(f"Grid dimension must be positive, got {dim}")
        if half_width <= 0:
            raise ValueError(f"Grid half-width must be positive, got {half_width}")
        if n < 2:
            raise ValueError(f"Grid needs at least 2 points per axis, got {n}")
        grid = tensor_grid(dim, half_width, n, QuadratureRule(rule))
        logger.debug(f"Grid d={dim} R={half_width} n={n} rule={grid.rule.value}: {grid.size} nodes")
        return grid

    def rescaled_grid(self, grid: Grid, factor: float, center) -> Grid:
        """Copy of ``grid`` shrunk by ``factor`` and translated to ``center``."""
        return tensor_grid(
            grid.dim,
            grid.half_width * factor,
            grid.points_per_axis,
            grid.rule,
            center=center,
        )

    def samples(self, f: Integrand, grid: Grid) -> np.ndarray:
        if callable(f):
            values = f(grid.nodes)
        else:
            values = f
        values = np.asarray(values, dtype=float)
        if values.ndim == 0:
            return np.full(grid.size, float(values))
        if values.shape != (grid.size,):
            raise DimMismatch(f"Expected {grid.size} node values, got shape {values.shape}")
        return values

    def integrate(self, f: Integrand, grid: Grid) -> float:
        return fixed_order_dot(grid.weights, self.samples(f, grid), self.settings.reduction_chunk)

    def integrate_with_error(
        self, f: Callable[[np.ndarray], np.ndarray], grid: Grid
    ) -> tuple[float, float]:
        """
        Integral of an evaluable f together with a tolerance estimate: the
        change against the half-resolution grid plus a rounding floor.
        """
        value = self.integrate(f, grid)
        coarse_grid = tensor_grid(grid.dim, grid.half_width, max(grid.points_per_axis // 2, 2), grid.rule)
        coarse = self.integrate(f, coarse_grid)
        rounding = 64.0 * np.finfo(float).eps * float(np.sum(np.abs(grid.weights * f(grid.nodes))))
        return value, abs(value - coarse) + rounding

    def inner_product(self, f: Integrand, g: Integrand, grid: Grid) -> float:
        return self.integrate(self.samples(f, grid) * self.samples(g, grid), grid)

    def inner_products(self, samples: np.ndarray, g: Integrand, grid: Grid) -> np.ndarray:
        """<row_i, g> for every row of a (rows, nodes) sample matrix."""
        weighted = grid.weights * self.samples(g, grid)
        return np.asarray(
            fixed_order_matvec(samples, weighted, self.settings.reduction_chunk), dtype=float
        )

    def l2_norm(self, f: Integrand, grid: Grid) -> float:
        return float(np.sqrt(max(self.inner_product(f, f, grid), 0.0)))

    def dist_sigma(self, s1: ActivationSpec, s2: ActivationSpec, grid: Grid) -> float:
        if s1.dim != s2.dim or s1.dim != grid.dim:
            raise DimMismatch(
                f"Activations of dim {s1.dim} and {s2.dim} on a {grid.dim}-dimensional grid"
            )
        diff = self.activation_service.eval_sigma(s1, grid.nodes) - self.activation_service.eval_sigma(
            s2, grid.nodes
        )
        return DIST_FACTOR * self.l2_norm(diff, grid)
