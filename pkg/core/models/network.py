from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from core.exceptions import InvalidExpansion
from .activations import ActivationFamily, ActivationSpec


@dataclass(frozen=True, eq=False)
class WBNetParams:
    """
    Parameter set p = [gamma; alpha; Theta] of the scalar-weight vector-bias
    network x -> sum_n alpha_n sigma(gamma_n x + theta_n).
    """

    gamma: np.ndarray
    alpha: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        if self.theta.ndim != 2:
            raise InvalidExpansion("theta must be a (nodes, d) array")
        if not (len(self.gamma) == len(self.alpha) == self.theta.shape[0]):
            raise InvalidExpansion("gamma, alpha and theta must share one length")

    @property
    def node_count(self) -> int:
        return int(len(self.gamma))

    @property
    def dim(self) -> int:
        return int(self.theta.shape[1])


@dataclass(frozen=True, eq=False)
class VecWeightParams:
    """Parameters p' = [W; alpha; beta] of x -> sum_n alpha_n sigma(w_n . x + beta_n)."""

    weights: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def node_count(self) -> int:
        return int(len(self.alpha))


@dataclass(frozen=True, eq=False)
class WBNetwork:
    """A parameter set bound to the activation it is evaluated with."""

    params: WBNetParams
    activation: ActivationSpec


@dataclass(frozen=True, eq=False)
class DaggerCombo:
    """sigma_dagger = sum_m c_m sigma0(. - b_m) together with its measured distance to sigma."""

    base: ActivationSpec
    shifts: np.ndarray
    coeffs: np.ndarray
    achieved_dist: float

    @property
    def M(self) -> int:
        return int(len(self.coeffs))

    def as_activation(self) -> ActivationSpec:
        return ActivationSpec(
            family=ActivationFamily.STEP_COMBO,
            dim=self.base.dim,
            coeffs=tuple(float(c) for c in self.coeffs),
            shifts=tuple(tuple(float(v) for v in shift) for shift in self.shifts),
            base=self.base,
        )
