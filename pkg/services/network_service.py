import hashlib
import json
import logging

import numpy as np
from scipy import linalg

from core.config import Settings, settings as default_settings
from core.exceptions import DimMismatch, EmptyExpansion, FitSingular, NotSeparable
from core.linalg import solve_gram
from core.models import (
    ActivationFamily,
    ActivationSpec,
    Box,
    DaggerCombo,
    Grid,
    VecWeightParams,
    WaveletExpansion,
    WBNetParams,
    WBNetwork,
)
from core.schemas.reports import ComparisonEntry, ComparisonReport
from services.activation_service import ActivationService, as_points
from services.quadrature_service import Integrand, QuadratureService

logger = logging.getLogger(__name__)

COMBINED_SLACK = 1e-3
MONOTONE_TOL = 1e-12


def sigma0_spec(name: str, dim: int) -> ActivationSpec:
    """Non-smooth building blocks: relu, the trapezoid hat L/2, and the unit step difference."""
    ridge = dim > 1
    if name == "relu":
        return ActivationSpec(family=ActivationFamily.RELU, dim=dim, ridge=ridge)
    if name == "hat":
        return ActivationSpec(family=ActivationFamily.SHAHAM_RELU, dim=dim, scale=0.5)
    if name == "box":
        return ActivationSpec(family=ActivationFamily.BOX, dim=dim, ridge=ridge)
    raise ValueError(f"Unknown sigma0 '{name}'")


def expansion_hash(expansion: WaveletExpansion) -> str:
    payload = [[term.index.k, list(term.index.m), repr(term.coefficient)] for term in expansion.terms]
    return hashlib.sha256(json.dumps(payload).encode("utf-8")).hexdigest()


def shift_grid(shift_box: Box, M: int) -> np.ndarray:
    """M shifts on a uniform tensor grid over the box; M must be a d-th power."""
    d = shift_box.dim
    per_axis = round(M ** (1.0 / d))
    if per_axis**d != M:
        raise ValueError(f"M={M} is not a perfect power of d={d}")
    axes = [
        np.linspace(lo, hi, per_axis) if per_axis > 1 else np.array([(lo + hi) / 2.0])
        for lo, hi in zip(shift_box.lower, shift_box.upper)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([axis.ravel() for axis in mesh], axis=1)


class NetworkService:
    def __init__(
        self,
        activation_service: ActivationService,
        quadrature_service: QuadratureService,
        settings: Settings = default_settings,
    ):
        self.activation_service = activation_service
        self.quadrature_service = quadrature_service
        self.settings = settings

    # --- expansion <-> network ---------------------------------------------------

    def expansion_to_wbnet(self, expansion: WaveletExpansion, d: int) -> WBNetParams:
        """
        Each term c psi_{k,b} becomes two nodes:
        (2^{k/d}, c 2^{k/2}, -2^{k/d} b) and (2^{(k-1)/d}, -c 2^{k/2-1}, -2^{(k-1)/d} b).
        """
        if not expansion.terms:
            raise EmptyExpansion("Cannot convert an empty expansion to a network")
        gamma, alpha, theta = [], [], []
        for term in expansion.terms:
            index = term.index
            if index.dim != d:
                raise DimMismatch(f"Atom {index} is {index.dim}-dimensional, network is {d}-dimensional")
            k, b, c = index.k, index.center, term.coefficient
            fine = float(np.exp2(k / d))
            coarse = float(np.exp2((k - 1) / d))
            gamma += [fine, coarse]
            alpha += [c * float(np.exp2(k / 2)), -c * float(np.exp2(k / 2 - 1))]
            # +0.0 turns -0.0 into 0.0 in the exported document
            theta += [-fine * b + 0.0, -coarse * b + 0.0]
        params = WBNetParams(gamma=np.asarray(gamma), alpha=np.asarray(alpha), theta=np.stack(theta))
        logger.info(f"Converted {len(expansion)} terms into {params.node_count} nodes")
        return params

    def eval_wbnet(self, params: WBNetParams, spec: ActivationSpec, x):
        if spec.dim != params.dim:
            raise DimMismatch(f"Activation dim {spec.dim} differs from bias dim {params.dim}")
        points, single = as_points(x, spec.dim)
        total = np.zeros(points.shape[0])
        for gamma, alpha, theta in zip(params.gamma, params.alpha, params.theta):
            total = total + alpha * self.activation_service.eval_sigma(spec, gamma * points + theta)
        return float(total[0]) if single else total

    def substitute_activation(self, params: WBNetParams, activation: ActivationSpec | DaggerCombo) -> WBNetwork:
        if isinstance(activation, DaggerCombo):
            activation = activation.as_activation()
        if activation.dim != params.dim:
            raise DimMismatch(f"Activation dim {activation.dim} differs from bias dim {params.dim}")
        return WBNetwork(params=params, activation=activation)

    def eval_network(self, network: WBNetwork, x):
        return self.eval_wbnet(network.params, network.activation, x)

    # --- activation substitution ------------------------------------------------------

    def fit_sigma_dagger(
        self,
        sigma: ActivationSpec,
        sigma0: ActivationSpec,
        M: int,
        shift_box: Box,
        grid: Grid,
    ) -> DaggerCombo:
        """
        Least-squares fit of sum_m c_m sigma0(. - b_m) to sigma on the grid,
        with the shifts b_m on a uniform grid over ``shift_box``.
        """
        if M < 1:
            raise ValueError(f"M must be positive, got {M}")
        if not (sigma.dim == sigma0.dim == shift_box.dim == grid.dim):
            raise DimMismatch("sigma, sigma0, shift box and grid must share one dimension")

        shifts = shift_grid(shift_box, M)
        design = np.stack(
            [self.activation_service.eval_sigma(sigma0, grid.nodes - shift) for shift in shifts]
        )
        target = self.activation_service.eval_sigma(sigma, grid.nodes)

        root = np.sqrt(grid.weights)
        coeffs, _, rank, _ = linalg.lstsq((design * root).T, target * root)
        if rank < M:
            logger.warning(f"Shifted copies of {sigma0.family.value} are dependent (rank {rank} < {M})")
            gram = np.stack([self.quadrature_service.inner_products(design, row, grid) for row in design])
            rhs = self.quadrature_service.inner_products(design, target, grid)
            coeffs = solve_gram(gram, rhs, FitSingular)
        if not np.all(np.isfinite(coeffs)):
            raise FitSingular(f"Least-squares fit with M={M} produced non-finite coefficients")

        fitted = coeffs @ design
        achieved = (1.0 + 2.0**-0.5) * self.quadrature_service.l2_norm(target - fitted, grid)
        logger.info(f"Fitted sigma_dagger from {sigma0.family.value}: M={M}, dist={achieved:.6g}")
        return DaggerCombo(base=sigma0, shifts=shifts, coeffs=np.asarray(coeffs, dtype=float), achieved_dist=achieved)

    def expand_sigma0_net(self, params: WBNetParams, combo: DaggerCombo) -> WBNetParams:
        """Node (gamma, alpha, theta) and term (c_m, b_m) give node (gamma, alpha c_m, theta - b_m), node-major."""
        n, m = params.node_count, combo.M
        gamma = np.repeat(params.gamma, m)
        alpha = (params.alpha[:, None] * combo.coeffs[None, :]).ravel()
        theta = (params.theta[:, None, :] - combo.shifts[None, :, :]).reshape(n * m, params.dim)
        return WBNetParams(gamma=gamma, alpha=alpha, theta=theta)

    # --- vector-weight form -----------------------------------------------------------

    def wb_to_vecweight(
        self, params: WBNetParams, activation: ActivationSpec
    ) -> tuple[VecWeightParams, ActivationSpec]:
        """w_n = gamma_n 1 and beta_n = 1 . theta_n, valid when sigma = sigma_1 o 1."""
        if activation.dim == 1:
            scalar = activation
        elif activation.ridge:
            scalar = activation.scalar()
        else:
            raise NotSeparable(
                f"{activation.family.value} in d={activation.dim} does not factor through the all-ones functional"
            )
        weights = params.gamma[:, None] * np.ones((1, params.dim))
        beta = params.theta.sum(axis=1)
        return VecWeightParams(weights=weights, alpha=params.alpha.copy(), beta=beta), scalar

    def eval_vecweight(self, params: VecWeightParams, scalar: ActivationSpec, x):
        d = params.weights.shape[1]
        points, single = as_points(x, d)
        total = np.zeros(points.shape[0])
        for w, alpha, beta in zip(params.weights, params.alpha, params.beta):
            total = total + alpha * self.activation_service.eval_sigma(scalar, points @ w + beta)
        return float(total[0]) if single else total

    # --- combined bound -------------------------------------------------------------

    def compare_activations(
        self,
        sigma: ActivationSpec,
        sigma0: ActivationSpec,
        Ms: list[int],
        shift_box: Box,
        grid: Grid,
        expansion: WaveletExpansion,
        target: Integrand,
        residual: float,
    ) -> ComparisonReport:
        """
        For every M: fit sigma_dagger, expand the network over sigma0 and check
        ||f - Psi[p; sigma_dagger]|| <= residual + achieved_dist * sum |c| + slack.
        """
        params = self.expansion_to_wbnet(expansion, sigma.dim)
        target = self.quadrature_service.samples(target, grid)
        l1 = expansion.coefficient_l1
        entries = []
        for M in Ms:
            combo = self.fit_sigma_dagger(sigma, sigma0, M, shift_box, grid)
            expanded = self.expand_sigma0_net(params, combo)
            values = self.eval_wbnet(expanded, sigma0, grid.nodes)
            error = self.quadrature_service.l2_norm(target - values, grid)
            bound = residual + combo.achieved_dist * l1 + COMBINED_SLACK
            passed = error <= bound and expanded.node_count == params.node_count * M
            entries.append(
                ComparisonEntry(
                    M=M,
                    achieved_dist=combo.achieved_dist,
                    network_error=error,
                    bound=bound,
                    node_count=expanded.node_count,
                    passed=passed,
                )
            )
            logger.info(f"M={M}: error {error:.6g} against bound {bound:.6g}, {expanded.node_count} nodes")

        dists = [entry.achieved_dist for entry in entries]
        monotone = all(later <= earlier + MONOTONE_TOL for earlier, later in zip(dists, dists[1:]))
        return ComparisonReport(
            sigma0=sigma0,
            residual=residual,
            coefficient_l1=l1,
            entries=entries,
            monotone=monotone,
            passed=monotone and all(entry.passed for entry in entries),
        )
