import logging
import math

import numpy as np

from core.config import Settings, settings as default_settings
from core.exceptions import DictionaryExhausted, GramSingular, MissingBound
from core.linalg import solve_gram
from core.models import (
    CoefficientLaw,
    Dictionary,
    OgaStep,
    OgaTrace,
    RateVerdict,
    WaveletExpansion,
)
from core.random import stage_rng
from services.quadrature_service import Integrand, QuadratureService

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12
RATE_SLACK = 1e-3


def first_maximum(scores: np.ndarray) -> int:
    """Lowest index whose score is within TIE_TOL (absolute) of the maximum."""
    best = float(np.max(scores))
    return int(np.flatnonzero(scores >= best - TIE_TOL)[0])


class GreedyService:
    def __init__(
        self,
        quadrature_service: QuadratureService,
        settings: Settings = default_settings,
    ):
        self.quadrature_service = quadrature_service
        self.settings = settings

    def oga(
        self,
        target: Integrand,
        dictionary: Dictionary,
        N: int,
        residual_threshold: float | None = None,
        l1_bound: float | None = None,
    ) -> tuple[WaveletExpansion, OgaTrace]:
        """
        Orthogonal greedy algorithm: pick the atom with the largest normalized
        correlation with the residual, then project the target onto the span
        of all picked atoms.
        """
        if N < 1:
            raise ValueError(f"OGA needs N >= 1, got {N}")
        if N > dictionary.size:
            raise DictionaryExhausted(
                f"Requested {N} terms from a dictionary of {dictionary.size} atoms"
            )

        quadrature = self.quadrature_service
        grid = dictionary.grid
        target = quadrature.samples(target, grid)
        target_norm = quadrature.l2_norm(target, grid)
        atoms = dictionary.samples

        selected: list[int] = []
        gram = np.zeros((0, 0))
        rhs = np.zeros(0)
        residual = target
        steps = []
        logger.info(f"OGA: N={N} over {dictionary.size} atoms, |f|={target_norm:.6g}")

        for t in range(1, N + 1):
            scores = np.abs(quadrature.inner_products(atoms, residual, grid)) / dictionary.norms
            scores[selected] = -np.inf
            # атомы упорядочены по (k, m), первый кандидат и есть наименьший
            chosen = first_maximum(scores)
            best = float(scores[chosen])
            selected.append(chosen)

            column = quadrature.inner_products(atoms[selected], atoms[chosen], grid)
            grown = np.empty((t, t))
            grown[: t - 1, : t - 1] = gram
            grown[t - 1, :] = column
            grown[:, t - 1] = column
            gram = grown
            rhs = np.append(rhs, quadrature.inner_product(atoms[chosen], target, grid))

            coefficients = solve_gram(gram, rhs, GramSingular)
            residual = target - coefficients @ atoms[selected]
            residual_norm = quadrature.l2_norm(residual, grid)
            steps.append(
                OgaStep(
                    chosen=dictionary.atoms[chosen],
                    score=best,
                    coefficients=tuple(float(c) for c in coefficients),
                    residual_norm=residual_norm,
                )
            )
            logger.debug(f"OGA step {t}: atom {dictionary.atoms[chosen]} score {best:.6g} residual {residual_norm:.6g}")

            if residual_threshold is not None and residual_norm <= residual_threshold:
                logger.info(f"OGA stopped at step {t}: residual {residual_norm:.3e} <= {residual_threshold}")
                break

        expansion = WaveletExpansion.from_pairs(
            (dictionary.atoms[i], c) for i, c in zip(selected, steps[-1].coefficients)
        )
        logger.info(f"OGA finished: {len(steps)} steps, residual {steps[-1].residual_norm:.6g}")
        return expansion, OgaTrace(steps=tuple(steps), target_norm=target_norm, l1_bound=l1_bound)

    @staticmethod
    def residual_curve(trace: OgaTrace) -> list[tuple[int, float]]:
        if not trace.steps:
            raise ValueError("Residual curve of an empty trace")
        return [(t, step.residual_norm) for t, step in enumerate(trace.steps, start=1)]

    def verify_rate(self, trace: OgaTrace, l1_bound: float | None = None) -> RateVerdict:
        """Check residual(t) <= l1_bound (t+1)^{-1/2} (1 + slack) for every step t."""
        if l1_bound is None:
            l1_bound = trace.l1_bound
        if l1_bound is None:
            raise MissingBound("Rate verification needs an L1 bound on the target")

        margin = 0.0
        for t, residual in self.residual_curve(trace):
            scaled = residual * math.sqrt(t + 1)
            if l1_bound > 0:
                margin = max(margin, scaled / l1_bound)
            elif scaled > 0:
                margin = math.inf
        passed = margin <= 1.0 + RATE_SLACK
        logger.info(f"Rate verdict: passed={passed}, margin={margin:.6g}")
        return RateVerdict(passed=passed, margin=margin)

    def make_synthetic_target(
        self,
        dictionary: Dictionary,
        n_atoms: int,
        coeff_law: CoefficientLaw = CoefficientLaw.GEOMETRIC,
        seed: int | np.random.Generator = 0,
    ) -> tuple[np.ndarray, float, WaveletExpansion]:
        """
        Random sparse combination of dictionary atoms. The returned bound is
        the coefficient sum over un-normalized atoms.
        """
        if n_atoms > dictionary.size:
            raise DictionaryExhausted(
                f"Cannot draw {n_atoms} distinct atoms from {dictionary.size}"
            )
        rng = seed if isinstance(seed, np.random.Generator) else stage_rng(seed, "target")
        positions = rng.choice(dictionary.size, size=n_atoms, replace=False)

        law = CoefficientLaw(coeff_law)
        if law == CoefficientLaw.UNIT:
            coefficients = np.ones(n_atoms)
        elif law == CoefficientLaw.GEOMETRIC:
            signs = rng.choice(np.array([-1.0, 1.0]), size=n_atoms)
            coefficients = signs * np.exp2(-np.arange(n_atoms, dtype=float))
        else:
            coefficients = rng.uniform(-1.0, 1.0, size=n_atoms)

        samples = np.zeros(dictionary.grid.size)
        for position, coefficient in zip(positions, coefficients):
            samples = samples + coefficient * dictionary.samples[position]
        expansion = WaveletExpansion.from_pairs(
            (dictionary.atoms[position], c) for position, c in zip(positions, coefficients)
        )
        l1_bound = float(np.sum(np.abs(coefficients)))
        logger.info(f"Synthetic target: {n_atoms} atoms, law={law.value}, l1 bound {l1_bound:.6g}")
        return samples, l1_bound, expansion
