import logging
import math

import numpy as np
from scipy.stats import qmc

from core.config import Settings, settings as default_settings
from core.exceptions import (
    NaNEncountered,
    NonSmoothFamily,
    TooFewValidSamples,
    UnstableCertificate,
)
from core.models import (
    ActivationSpec,
    DecayCertificate,
    Grid,
    HomogeneousConstants,
    KernelCondition,
    KernelEntry,
    KernelReport,
    KernelSamples,
)
from services.activation_service import ActivationService
from services.frame_service import FrameService
from services.quadrature_service import QuadratureService

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_FAILED = "failed"
STATUS_NON_SMOOTH = "non-smooth, route via activation substitution"
STATUS_NOT_CLAIMED = "not claimed"
STATUS_UNSTABLE = "unstable"
STATUS_TOO_FEW = "too few valid samples"

C1_TOL = 1e-3
C2_TOL = 1e-9
LIPSCHITZ_TOL = 1e-6
SYMMETRY_TOL = 1e-12
STABILITY_TOL = 0.05
REFINE_ROUNDS = 3
MIN_VALID = 1000
K_SAMPLE_RANGE = (-3, 5)


def _sobol(dim: int, n: int, rng: np.random.Generator) -> np.ndarray:
    sampler = qmc.Sobol(d=dim, scramble=True, seed=rng)
    return sampler.random_base2(max(math.ceil(math.log2(max(n, 2))), 1))[:n]


def _safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    """Elementwise ratio with 0/0 read as 0."""
    out = np.zeros_like(numerator)
    live = denominator > 0
    out[live] = numerator[live] / denominator[live]
    out[~live & (numerator > 0)] = np.inf
    return out


class KernelService:
    def __init__(
        self,
        activation_service: ActivationService,
        quadrature_service: QuadratureService,
        frame_service: FrameService,
        settings: Settings = default_settings,
    ):
        self.activation_service = activation_service
        self.quadrature_service = quadrature_service
        self.frame_service = frame_service
        self.settings = settings

    # --- decay certificate -------------------------------------------------------

    def certify_decay(
        self,
        spec: ActivationSpec,
        constants: HomogeneousConstants,
        sample_radius: float,
        n_samples: int = 4001,
        orders: tuple[int, ...] = (0, 1, 2),
        rng: np.random.Generator | None = None,
    ) -> DecayCertificate:
        """
        C' = sup over sampled x and j in ``orders`` of
        ||grad^j sigma(x)|| (1/c + ||x||^d)^{1 + eps + j/d}.

        The supremum is taken at ``sample_radius`` and at twice that radius;
        a relative change of 5% or more raises UnstableCertificate.
        """
        if not spec.smooth and any(j >= 1 for j in orders):
            raise NonSmoothFamily(
                f"{spec.family.value} has no derivative bounds of order >= 1"
            )
        rng = rng if rng is not None else np.random.default_rng(0)

        inner, count = self._sup_ratios(spec, constants, sample_radius, n_samples, orders, rng)
        outer, outer_count = self._sup_ratios(spec, constants, 2.0 * sample_radius, n_samples, orders, rng)
        sups = tuple(max(a, b) for a, b in zip(inner, outer))
        near, far = max(inner), max(outer)
        if near == far:
            change = 0.0
        elif near > 0:
            change = abs(far - near) / near
        else:
            change = math.inf
        cprime = max(sups)
        stable = math.isfinite(cprime) and change < STABILITY_TOL

        certificate = DecayCertificate(
            cprime=cprime,
            sup_ratios=sups,
            radius=float(sample_radius),
            stability_change=change,
            samples=count + outer_count,
            stable=stable,
        )
        logger.info(
            f"Decay certificate for {spec.family.value}: C'={cprime:.6g}, "
            f"change {change:.3e} between radius {sample_radius} and {2 * sample_radius}"
        )
        if not stable:
            raise UnstableCertificate(
                f"Decay supremum changed by {change:.3%} when the sample radius doubled",
                certificate=certificate,
            )
        return certificate

    def _decay_ratio(
        self, spec: ActivationSpec, constants: HomogeneousConstants, points: np.ndarray, j: int
    ) -> np.ndarray:
        d = constants.dim
        norms = self.activation_service.eval_derivative_norm(spec, points, j)
        weight = (1.0 / constants.c + np.linalg.norm(points, axis=1) ** d) ** (
            1.0 + constants.epsilon + j / d
        )
        ratio = norms * weight
        if not np.all(np.isfinite(ratio)):
            raise NaNEncountered(f"Non-finite decay ratio of order {j}")
        return ratio

    def _sup_ratios(
        self,
        spec: ActivationSpec,
        constants: HomogeneousConstants,
        radius: float,
        n_samples: int,
        orders: tuple[int, ...],
        rng: np.random.Generator,
    ) -> tuple[list[float], int]:
        d = constants.dim
        if d == 1:
            n = n_samples | 1
            points = np.linspace(-radius, radius, n).reshape(-1, 1)
            points[n // 2] = 0.0
            width = 2.0 * radius / (n - 1)
        else:
            cloud = radius * (2.0 * _sobol(d, n_samples, rng) - 1.0)
            points = np.vstack([np.zeros((1, d)), cloud])
            width = 2.0 * radius / n_samples ** (1.0 / d)

        sups = []
        evaluated = points.shape[0]
        for j in orders:
            ratio = self._decay_ratio(spec, constants, points, j)
            best = int(np.argmax(ratio))
            sup, center = float(ratio[best]), points[best]
            h = width
            # локальное уточнение вокруг максимума
            for _ in range(REFINE_ROUNDS):
                if d == 1:
                    local = np.linspace(center[0] - h, center[0] + h, 101).reshape(-1, 1)
                else:
                    local = center + h * (2.0 * _sobol(d, 256, rng) - 1.0)
                local = np.clip(local, -radius, radius)
                local_ratio = self._decay_ratio(spec, constants, local, j)
                evaluated += local.shape[0]
                i = int(np.argmax(local_ratio))
                if local_ratio[i] > sup:
                    sup, center = float(local_ratio[i]), local[i]
                h /= 10.0
            sups.append(sup)
        return sups, evaluated

    # --- kernel conditions ---------------------------------------------------------

    def check_C1(
        self,
        spec: ActivationSpec,
        k: int,
        x,
        grid: Grid,
        rescale: bool = True,
    ) -> float:
        """
        |int S_k(x, b) db - 1|. With ``rescale`` the integral runs over a copy
        of the grid shrunk by 2^{-k/d} and centered at x; otherwise over the
        grid itself.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if rescale:
            grid = self.quadrature_service.rescaled_grid(grid, float(np.exp2(-k / spec.dim)), x)
        values = self.frame_service.eval_S_k(spec, k, x, grid.nodes)
        return abs(self.quadrature_service.integrate(values, grid) - 1.0)

    def sample_configurations(
        self,
        constants: HomogeneousConstants,
        half_width: float,
        n_samples: int,
        rng: np.random.Generator,
        k_range: tuple[int, int] = K_SAMPLE_RANGE,
    ) -> KernelSamples:
        """
        Quasi-random (k, x, x', y, y') with x in [-2R, 2R]^d, y - x = 2^{-k/d} v
        for v in [-R, R]^d, and x' - x, y' - y of length a fraction in
        [0.01, 1] of the largest length the perturbation preconditions allow.
        """
        d = constants.dim
        u = _sobol(4 * d + 3, n_samples, rng)
        k_lo, k_hi = k_range
        k = np.minimum(np.floor(u[:, 0] * (k_hi - k_lo + 1)), k_hi - k_lo) + k_lo
        x = half_width * (4.0 * u[:, 1 : 1 + d] - 2.0)
        v = half_width * (2.0 * u[:, 1 + d : 1 + 2 * d] - 1.0)
        y = x + np.exp2(-k / d)[:, None] * v

        base = np.exp2(-k) + constants.rho(x, y)
        limit = base / (2.0 * constants.A)
        reach = (limit / constants.c) ** (1.0 / d)

        def perturb(origin, direction, fraction):
            direction = 2.0 * direction - 1.0
            length = np.linalg.norm(direction, axis=1)
            direction[length == 0] = np.eye(d)[0]
            direction = direction / np.linalg.norm(direction, axis=1)[:, None]
            return origin + ((0.01 + 0.99 * fraction) * reach)[:, None] * direction

        offset = 1 + 2 * d
        x_prime = perturb(x, u[:, offset : offset + d], u[:, offset + d])
        offset += d + 1
        y_prime = perturb(y, u[:, offset : offset + d], u[:, offset + d])

        valid = (constants.rho(x, x_prime) <= limit) & (constants.rho(y, y_prime) <= limit)
        if not np.all(valid):
            logger.debug(f"Discarded {int(np.sum(~valid))} samples violating the preconditions")
        return KernelSamples(
            k=k[valid].astype(int),
            x=x[valid],
            x_prime=x_prime[valid],
            y=y[valid],
            y_prime=y_prime[valid],
        )

    def _kernel(self, spec: ActivationSpec, samples: KernelSamples, x, y) -> np.ndarray:
        return np.asarray(self.frame_service.eval_S_k(spec, samples.k, x, y), dtype=float)

    @staticmethod
    def _decay_shape(constants: HomogeneousConstants, samples: KernelSamples) -> tuple[np.ndarray, np.ndarray]:
        eps = constants.epsilon
        base = np.exp2(-samples.k.astype(float)) + constants.rho(samples.x, samples.y)
        return base, np.exp2(-samples.k * eps) / base ** (1.0 + eps)

    @staticmethod
    def proof_constant(condition: KernelCondition, constants: HomogeneousConstants, cprime: float) -> float:
        d, eps, c = constants.dim, constants.epsilon, constants.c
        base = c ** (1.0 + eps) * cprime
        if condition == KernelCondition.C2:
            return base
        if condition == KernelCondition.C3:
            return 2.0 ** (1.0 + d * (1.0 + eps)) * base
        if condition == KernelCondition.C4:
            return 3.0 ** (2.0 + d * (1.0 + eps)) * base
        raise ValueError(f"No proof constant for {condition.value}")

    def _entry(
        self,
        condition: KernelCondition,
        constants: HomogeneousConstants,
        cprime: float,
        lhs: np.ndarray,
        shape: np.ndarray,
        tol: float,
    ) -> KernelEntry:
        implied = float(np.max(_safe_ratio(lhs, shape))) if lhs.size else 0.0
        bound = self.proof_constant(condition, constants, cprime)
        if bound > 0:
            ratio = implied / bound
        else:
            ratio = 0.0 if implied == 0 else math.inf
        passed = ratio <= 1.0 + tol
        logger.info(f"{condition.value}: sup ratio {ratio:.6g} over {lhs.size} samples")
        return KernelEntry(
            condition=condition,
            sup_ratio=ratio,
            implied_constant=implied,
            samples=int(lhs.size),
            passed=passed,
            status=STATUS_OK if passed else STATUS_FAILED,
        )

    def check_C2(
        self,
        spec: ActivationSpec,
        constants: HomogeneousConstants,
        cprime: float,
        samples: KernelSamples,
    ) -> KernelEntry:
        """|S_k(x, y)| against c^{1+eps} C' 2^{-k eps} / (2^{-k} + rho(x, y))^{1+eps}."""
        _, shape = self._decay_shape(constants, samples)
        lhs = np.abs(self._kernel(spec, samples, samples.x, samples.y))
        return self._entry(KernelCondition.C2, constants, cprime, lhs, shape, C2_TOL)

    def check_C3(
        self,
        spec: ActivationSpec,
        constants: HomogeneousConstants,
        cprime: float,
        samples: KernelSamples,
        min_valid: int = MIN_VALID,
    ) -> KernelEntry:
        if len(samples) < min_valid:
            raise TooFewValidSamples(f"C3 needs {min_valid} valid samples, got {len(samples)}")
        base, shape = self._decay_shape(constants, samples)
        eta = constants.eta
        shape = (constants.rho(samples.x, samples.x_prime) / base) ** eta * shape
        lhs = np.abs(
            self._kernel(spec, samples, samples.x, samples.y)
            - self._kernel(spec, samples, samples.x_prime, samples.y)
        )
        return self._entry(KernelCondition.C3, constants, cprime, lhs, shape, LIPSCHITZ_TOL)

    def check_C4(
        self,
        spec: ActivationSpec,
        constants: HomogeneousConstants,
        cprime: float,
        samples: KernelSamples,
        min_valid: int = MIN_VALID,
    ) -> KernelEntry:
        if not spec.smooth:
            raise NonSmoothFamily(
                f"{spec.family.value} violates the double Lipschitz condition; "
                "use activation substitution instead"
            )
        if len(samples) < min_valid:
            raise TooFewValidSamples(f"C4 needs {min_valid} valid samples, got {len(samples)}")
        base, shape = self._decay_shape(constants, samples)
        eta = constants.eta
        shape = (
            (constants.rho(samples.x, samples.x_prime) / base) ** eta
            * (constants.rho(samples.y, samples.y_prime) / base) ** eta
            * shape
        )
        lhs = np.abs(
            self._kernel(spec, samples, samples.x, samples.y)
            - self._kernel(spec, samples, samples.x_prime, samples.y)
            - self._kernel(spec, samples, samples.x, samples.y_prime)
            + self._kernel(spec, samples, samples.x_prime, samples.y_prime)
        )
        return self._entry(KernelCondition.C4, constants, cprime, lhs, shape, LIPSCHITZ_TOL)

    def check_symmetry(self, spec: ActivationSpec, samples: KernelSamples) -> KernelEntry:
        forward = self._kernel(spec, samples, samples.x, samples.y)
        backward = self._kernel(spec, samples, samples.y, samples.x)
        deviation = float(np.max(np.abs(forward - backward) / (1.0 + np.abs(forward)))) if len(samples) else 0.0
        passed = deviation <= SYMMETRY_TOL
        return KernelEntry(
            condition=KernelCondition.SYMMETRY,
            sup_ratio=deviation,
            samples=len(samples),
            passed=passed,
            status=STATUS_OK if passed else STATUS_FAILED,
        )

    # --- full report -----------------------------------------------------------------

    def check_kernel(
        self,
        spec: ActivationSpec,
        constants: HomogeneousConstants,
        grid: Grid,
        k_min: int = -2,
        k_max: int = 4,
        decay_radius: float | None = None,
        decay_samples: int = 4001,
        n_samples: int = 10_000,
        min_valid: int = MIN_VALID,
        rng: np.random.Generator | None = None,
    ) -> KernelReport:
        """Certify every condition in turn; conditions that cannot be claimed are recorded, not raised."""
        rng = rng if rng is not None else np.random.default_rng(0)
        decay_radius = decay_radius if decay_radius is not None else 2.0 * grid.half_width
        samples = self.sample_configurations(constants, grid.half_width, n_samples, rng)
        entries = [self.check_symmetry(spec, samples)]

        decay_conditions = (
            KernelCondition.DECAY_J0,
            KernelCondition.DECAY_J1,
            KernelCondition.DECAY_J2,
        )
        orders = (0, 1, 2) if spec.smooth else (0,)
        cprime = None
        try:
            certificate = self.certify_decay(spec, constants, decay_radius, decay_samples, orders, rng)
            status = STATUS_OK
        except UnstableCertificate as error:
            certificate = error.certificate
            status = STATUS_UNSTABLE
        for j, condition in enumerate(decay_conditions):
            if j not in orders:
                entries.append(
                    KernelEntry(condition=condition, samples=0, passed=False, status=STATUS_NON_SMOOTH)
                )
                continue
            entries.append(
                KernelEntry(
                    condition=condition,
                    sup_ratio=certificate.sup_ratios[j],
                    implied_constant=certificate.cprime,
                    samples=certificate.samples,
                    passed=certificate.stable,
                    status=status,
                )
            )
        if spec.smooth and certificate.stable:
            cprime = certificate.cprime

        entries.append(self._c1_entry(spec, grid, k_min, k_max, rng))

        for condition, check in (
            (KernelCondition.C2, self.check_C2),
            (KernelCondition.C3, self.check_C3),
            (KernelCondition.C4, self.check_C4),
        ):
            if condition == KernelCondition.C4 and not spec.smooth:
                entries.append(KernelEntry(condition=condition, samples=0, passed=False, status=STATUS_NON_SMOOTH))
                continue
            if cprime is None:
                entries.append(KernelEntry(condition=condition, samples=0, passed=False, status=STATUS_NOT_CLAIMED))
                continue
            try:
                if condition == KernelCondition.C2:
                    entries.append(check(spec, constants, cprime, samples))
                else:
                    entries.append(check(spec, constants, cprime, samples, min_valid))
            except TooFewValidSamples as error:
                logger.warning(error.detail)
                entries.append(
                    KernelEntry(condition=condition, samples=len(samples), passed=False, status=STATUS_TOO_FEW)
                )

        report = KernelReport(constants=constants, cprime=cprime, entries=tuple(entries))
        logger.info(f"Kernel report for {spec.family.value}: passed={report.passed}")
        return report

    def _c1_entry(
        self, spec: ActivationSpec, grid: Grid, k_min: int, k_max: int, rng: np.random.Generator
    ) -> KernelEntry:
        d = spec.dim
        centers = np.vstack(
            [np.zeros((1, d)), grid.half_width * (rng.uniform(-0.5, 0.5, size=(2, d)))]
        )
        deviations = [
            self.check_C1(spec, k, center, grid) for k in range(k_min, k_max + 1) for center in centers
        ]
        worst = float(max(deviations))
        passed = worst <= C1_TOL
        return KernelEntry(
            condition=KernelCondition.C1,
            sup_ratio=worst,
            samples=len(deviations),
            passed=passed,
            status=STATUS_OK if passed else STATUS_FAILED,
        )
