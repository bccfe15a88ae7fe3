from functools import lru_cache
import logging

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from core.config import Settings, settings as default_settings
from core.exceptions import (
    DimMismatch,
    NonSmoothAtPoint,
    NonSmoothFamily,
    NotNormalizable,
)
from core.models import ActivationFamily, ActivationSpec, Grid
from core.reduction import fixed_order_dot

logger = logging.getLogger(__name__)

GRAD_STEP = 1e-5
HESSIAN_STEP = 1e-4
KINK_TOL = 1e-12
# below this argument exp(-1/t) is zero in double precision
BUMP_FLOOR = 1.0 / 700.0


def as_points(x, dim: int) -> tuple[np.ndarray, bool]:
    """
    Coerce x to a (n, d) batch. A 0-d value (d = 1) or a length-d vector
    (d > 1) is a single point; for d = 1 a 1-d array is a batch of scalars.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        if dim != 1:
            raise DimMismatch(f"Scalar input for a {dim}-dimensional activation")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if dim == 1:
            return arr.reshape(-1, 1), False
        if arr.shape[0] != dim:
            raise DimMismatch(f"Point has {arr.shape[0]} components, activation expects {dim}")
        return arr.reshape(1, dim), True
    if arr.ndim == 2 and arr.shape[1] == dim:
        return arr, False
    raise DimMismatch(f"Points of shape {arr.shape} do not match dim={dim}")


def hermite_coefficients(alpha: float) -> tuple[float, float, float]:
    """
    Odd quintic a t + b t^3 + c t^5 matching 1/t^alpha in value, first and
    second derivative at t = 1.
    """
    a = 1.0 + (alpha + 1.0) * (alpha + 7.0) / 8.0
    b = -(alpha + 1.0) * (alpha + 5.0) / 4.0
    c = (alpha + 1.0) * (alpha + 3.0) / 8.0
    return a, b, c


def _odd_tail(t: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """sigma_tilde of the oscillatory family and its first two derivatives."""
    a, b, c = hermite_coefficients(alpha)
    inside = np.abs(t) <= 1.0
    at = np.where(inside, 1.0, np.abs(t))
    sign = np.sign(t)
    outer = sign * at ** (-alpha)
    outer_d1 = -alpha * at ** (-alpha - 1.0)
    outer_d2 = sign * alpha * (alpha + 1.0) * at ** (-alpha - 2.0)
    t2 = t * t
    inner = t * (a + t2 * (b + c * t2))
    inner_d1 = a + t2 * (3.0 * b + 5.0 * c * t2)
    inner_d2 = t * (6.0 * b + 20.0 * c * t2)
    return (
        np.where(inside, inner, outer),
        np.where(inside, inner_d1, outer_d1),
        np.where(inside, inner_d2, outer_d2),
    )


def _bump(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """t -> exp(-1/t) for t > 0, else 0, with its derivative."""
    live = t > BUMP_FLOOR
    safe = np.where(live, t, 1.0)
    g = np.where(live, np.exp(-1.0 / safe), 0.0)
    return g, g / (safe * safe)


def _sinc_square(s: np.ndarray, m: float) -> tuple[np.ndarray, np.ndarray]:
    """h(s) = sin(m s)/s with h(0) = m, and h'(s)."""
    small = np.abs(m * s) < 1e-2
    safe = np.where(small, 1.0, s)
    h = np.sin(m * safe) / safe
    dh = (m * safe * np.cos(m * safe) - np.sin(m * safe)) / (safe * safe)
    m3, m5 = m**3, m**5
    h_series = m - m3 * s**2 / 6.0 + m5 * s**4 / 120.0
    dh_series = -m3 * s / 3.0 + m5 * s**3 / 30.0
    return np.where(small, h_series, h), np.where(small, dh_series, dh)


def _trapezoid(t: np.ndarray) -> np.ndarray:
    """L(t) = ReLU(t+3) - ReLU(t+1) - ReLU(t-1) + ReLU(t-3), written in even form."""
    return np.clip(3.0 - np.abs(t), 0.0, 2.0)


@lru_cache(maxsize=32)
def _interpolator(spec: ActivationSpec) -> RegularGridInterpolator:
    shape = tuple(len(axis) for axis in spec.axes)
    return RegularGridInterpolator(
        tuple(np.asarray(axis) for axis in spec.axes),
        np.asarray(spec.values, dtype=float).reshape(shape),
        method="linear",
        bounds_error=False,
        fill_value=0.0,
    )


class ActivationService:
    def __init__(self, settings: Settings = default_settings):
        self.settings = settings

    # --- values -----------------------------------------------------------------

    def eval_sigma(self, spec: ActivationSpec, x):
        points, single = as_points(x, spec.dim)
        values = self._values(spec, points)
        return float(values[0]) if single else values

    def _values(self, spec: ActivationSpec, points: np.ndarray) -> np.ndarray:
        family = spec.family
        if spec.ridge:
            points = points.sum(axis=1, keepdims=True)

        if family == ActivationFamily.GAUSSIAN:
            unit = np.exp(-np.sum(points * points, axis=1))
        elif family == ActivationFamily.OSC_SINC:
            t = points[:, 0]
            tail, _, _ = _odd_tail(t, spec.alpha)
            unit = tail * np.sin(spec.m * t)
        elif family in (
            ActivationFamily.RQNN,
            ActivationFamily.RADIAL_COS,
            ActivationFamily.RADIAL_SINC,
        ):
            s = np.sum(points * points, axis=1)
            g, _ = _bump(spec.r**2 - s)
            if family == ActivationFamily.RQNN:
                unit = g
            elif family == ActivationFamily.RADIAL_COS:
                unit = g * np.cos(points @ self._tau(spec))
            else:
                h, _ = _sinc_square(s, spec.m)
                unit = g * h
        elif family == ActivationFamily.SHAHAM_RELU:
            inner = _trapezoid(points).sum(axis=1) - 2.0 * (points.shape[1] - 1)
            unit = np.maximum(inner, 0.0)
        elif family == ActivationFamily.RELU:
            unit = np.maximum(points[:, 0], 0.0)
        elif family == ActivationFamily.BOX:
            at = np.abs(points[:, 0])
            unit = np.where(at < 0.5, 1.0, np.where(at == 0.5, 0.5, 0.0))
        elif family == ActivationFamily.STEP_COMBO:
            unit = np.zeros(points.shape[0])
            for coeff, shift in zip(spec.coeffs, spec.shifts):
                unit = unit + coeff * self._values(spec.base, points - np.asarray(shift))
        elif family == ActivationFamily.SAMPLED:
            unit = _interpolator(spec)(points)
        else:
            raise NonSmoothFamily(f"Unknown activation family {family}")
        return spec.scale * unit

    # --- gradients ----------------------------------------------------------------

    def eval_grad(self, spec: ActivationSpec, x, fallback: bool = False):
        """
        Gradient of sigma. Analytic for smooth families and for piecewise
        linear families away from their kinks; central differences when
        ``fallback`` is set and no analytic value exists.
        """
        points, single = as_points(x, spec.dim)
        kinks = self._kinks(spec, points)
        if spec.family == ActivationFamily.SAMPLED:
            if not fallback:
                raise NonSmoothFamily("Sampled activations have no analytic gradient")
            grads = self._fd_grad(spec, points)
        elif np.any(kinks):
            if not fallback:
                where = points[np.argmax(kinks)]
                raise NonSmoothAtPoint(
                    f"{spec.family.value} is not differentiable at {where.tolist()}"
                )
            grads = self._grad(spec, points)
            grads[kinks] = self._fd_grad(spec, points[kinks])
        else:
            grads = self._grad(spec, points)
        return grads[0] if single else grads

    def _grad(self, spec: ActivationSpec, points: np.ndarray) -> np.ndarray:
        family = spec.family
        if spec.ridge:
            u = points.sum(axis=1, keepdims=True)
            scalar = self._grad(spec.scalar(), u)
            return np.repeat(scalar, points.shape[1], axis=1)

        if family == ActivationFamily.GAUSSIAN:
            value = np.exp(-np.sum(points * points, axis=1))
            unit = -2.0 * points * value[:, None]
        elif family == ActivationFamily.OSC_SINC:
            t = points[:, 0]
            tail, tail_d1, _ = _odd_tail(t, spec.alpha)
            m = spec.m
            unit = (tail_d1 * np.sin(m * t) + m * tail * np.cos(m * t))[:, None]
        elif family in (
            ActivationFamily.RQNN,
            ActivationFamily.RADIAL_COS,
            ActivationFamily.RADIAL_SINC,
        ):
            s = np.sum(points * points, axis=1)
            g, dg = _bump(spec.r**2 - s)
            radial = -2.0 * points * dg[:, None]
            if family == ActivationFamily.RQNN:
                unit = radial
            elif family == ActivationFamily.RADIAL_COS:
                tau = self._tau(spec)
                phase = points @ tau
                unit = radial * np.cos(phase)[:, None] - np.outer(g * np.sin(phase), tau)
            else:
                h, dh = _sinc_square(s, spec.m)
                unit = radial * h[:, None] + 2.0 * points * (g * dh)[:, None]
        elif family == ActivationFamily.SHAHAM_RELU:
            inner = _trapezoid(points).sum(axis=1) - 2.0 * (points.shape[1] - 1)
            at = np.abs(points)
            slope = np.where((at > 1.0) & (at < 3.0), -np.sign(points), 0.0)
            unit = slope * (inner > 0.0)[:, None]
        elif family == ActivationFamily.RELU:
            unit = (points[:, 0] > 0.0).astype(float)[:, None]
        elif family == ActivationFamily.BOX:
            unit = np.zeros_like(points)
        elif family == ActivationFamily.STEP_COMBO:
            unit = np.zeros_like(points)
            for coeff, shift in zip(spec.coeffs, spec.shifts):
                unit = unit + coeff * self._grad(spec.base, points - np.asarray(shift))
        else:
            raise NonSmoothFamily(f"{family.value} has no analytic gradient")
        return spec.scale * unit

    def _kinks(self, spec: ActivationSpec, points: np.ndarray) -> np.ndarray:
        family = spec.family
        if spec.ridge:
            points = points.sum(axis=1, keepdims=True)
        if family == ActivationFamily.SHAHAM_RELU:
            at = np.abs(points)
            corner = np.any(
                (np.abs(at - 1.0) <= KINK_TOL) | (np.abs(at - 3.0) <= KINK_TOL), axis=1
            )
            inner = _trapezoid(points).sum(axis=1) - 2.0 * (points.shape[1] - 1)
            sloped = np.any((at > 1.0) & (at < 3.0), axis=1)
            return corner | ((np.abs(inner) <= KINK_TOL) & sloped)
        if family == ActivationFamily.RELU:
            return np.abs(points[:, 0]) <= KINK_TOL
        if family == ActivationFamily.BOX:
            return np.abs(np.abs(points[:, 0]) - 0.5) <= KINK_TOL
        if family == ActivationFamily.STEP_COMBO:
            kinks = np.zeros(points.shape[0], dtype=bool)
            for shift in spec.shifts:
                kinks |= self._kinks(spec.base, points - np.asarray(shift))
            return kinks
        return np.zeros(points.shape[0], dtype=bool)

    def _fd_grad(self, spec: ActivationSpec, points: np.ndarray) -> np.ndarray:
        h = GRAD_STEP * (1.0 + np.linalg.norm(points, axis=1))
        grads = np.empty_like(points)
        for j in range(points.shape[1]):
            offset = np.zeros_like(points)
            offset[:, j] = h
            grads[:, j] = (
                self._values(spec, points + offset) - self._values(spec, points - offset)
            ) / (2.0 * h)
        return grads

    def fd_grad(self, spec: ActivationSpec, x):
        points, single = as_points(x, spec.dim)
        grads = self._fd_grad(spec, points)
        return grads[0] if single else grads

    # --- second derivatives ---------------------------------------------------------

    def eval_hessian_norm(self, spec: ActivationSpec, x):
        """Spectral norm of the Hessian; analytic where the family allows it."""
        if not spec.smooth:
            raise NonSmoothFamily(f"{spec.family.value} is not twice differentiable")
        points, single = as_points(x, spec.dim)
        norms = self._hessian_norm(spec, points)
        return float(norms[0]) if single else norms

    def _hessian_norm(self, spec: ActivationSpec, points: np.ndarray) -> np.ndarray:
        family = spec.family
        d = points.shape[1]
        if spec.ridge:
            u = points.sum(axis=1, keepdims=True)
            return d * self._hessian_norm(spec.scalar(), u)
        if family == ActivationFamily.GAUSSIAN:
            r2 = np.sum(points * points, axis=1)
            radial = np.abs(4.0 * r2 - 2.0)
            if d > 1:
                radial = np.maximum(radial, 2.0)
            return np.abs(spec.scale) * np.exp(-r2) * radial
        if family == ActivationFamily.OSC_SINC:
            t = points[:, 0]
            m = spec.m
            tail, tail_d1, tail_d2 = _odd_tail(t, spec.alpha)
            second = (
                tail_d2 * np.sin(m * t)
                + 2.0 * m * tail_d1 * np.cos(m * t)
                - m * m * tail * np.sin(m * t)
            )
            return np.abs(spec.scale * second)
        return self._fd_hessian_norm(spec, points)

    def _fd_hessian_norm(self, spec: ActivationSpec, points: np.ndarray) -> np.ndarray:
        h = HESSIAN_STEP * (1.0 + np.linalg.norm(points, axis=1))
        n, d = points.shape
        hessian = np.empty((n, d, d))
        for j in range(d):
            offset = np.zeros_like(points)
            offset[:, j] = h
            hessian[:, :, j] = (
                self._grad(spec, points + offset) - self._grad(spec, points - offset)
            ) / (2.0 * h)[:, None]
        if d == 1:
            return np.abs(hessian[:, 0, 0])
        hessian = 0.5 * (hessian + np.transpose(hessian, (0, 2, 1)))
        return np.max(np.abs(np.linalg.eigvalsh(hessian)), axis=1)

    def eval_derivative_norm(self, spec: ActivationSpec, x, order: int) -> np.ndarray:
        """||grad^j sigma|| for j = 0, 1, 2 on a batch of points."""
        points, _ = as_points(x, spec.dim)
        if order == 0:
            return np.abs(self._values(spec, points))
        if not spec.smooth:
            raise NonSmoothFamily(f"{spec.family.value} has no derivative of order {order}")
        if order == 1:
            return np.linalg.norm(self._grad(spec, points), axis=1)
        if order == 2:
            return self._hessian_norm(spec, points)
        raise ValueError(f"Derivative order {order} is not supported")

    # --- normalization ----------------------------------------------------------------

    def integral(self, spec: ActivationSpec, grid: Grid) -> float:
        if spec.dim != grid.dim:
            raise DimMismatch(f"Activation dim {spec.dim} differs from grid dim {grid.dim}")
        values = self._values(spec, grid.nodes)
        return fixed_order_dot(grid.weights, values, self.settings.reduction_chunk)

    def normalize_sigma(self, spec: ActivationSpec, grid: Grid) -> ActivationSpec:
        total = self.integral(spec, grid)
        if abs(total) <= 1e-8:
            raise NotNormalizable(
                f"Integral of {spec.family.value} is {total:.3e}; cannot rescale to 1"
            )
        if abs(total - 1.0) <= 1e-12:
            return spec
        logger.info(f"Normalizing {spec.family.value}: grid integral {total:.12g}")
        return spec.with_scale(spec.scale / total)

    @staticmethod
    def _tau(spec: ActivationSpec) -> np.ndarray:
        if spec.tau is None:
            return np.zeros(spec.dim)
        return np.asarray(spec.tau, dtype=float)
