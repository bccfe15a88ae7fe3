import json
import math

import numpy as np
import pytest

from core.exceptions import NonSmoothFamily, TooFewValidSamples
from core.models import (
    ActivationFamily,
    ActivationSpec,
    HomogeneousConstants,
    KernelCondition,
    KernelReport,
    KernelSamples,
)
from repositories.reports import dump_json
from services.kernel_service import STATUS_NON_SMOOTH, STATUS_NOT_CLAIMED

GAUSSIAN_CONSTANTS = HomogeneousConstants(dim=1, c=1.0, epsilon=0.5)


@pytest.fixture(scope="module")
def gaussian_certificate(kernel_service, gaussian):
    return kernel_service.certify_decay(gaussian, GAUSSIAN_CONSTANTS, 16.0, rng=np.random.default_rng(0))


@pytest.fixture(scope="module")
def gaussian_samples(kernel_service):
    return kernel_service.sample_configurations(GAUSSIAN_CONSTANTS, 8.0, 10_000, np.random.default_rng(7))


def _single(k, x, x_prime, y, y_prime):
    return KernelSamples(
        k=np.array([k]),
        x=np.array([[x]]),
        x_prime=np.array([[x_prime]]),
        y=np.array([[y]]),
        y_prime=np.array([[y_prime]]),
    )


# Оценка убывания


def test_gaussian_decay_certificate(gaussian_certificate, gaussian, activation_service):
    assert math.isfinite(gaussian_certificate.cprime)
    assert gaussian_certificate.stable
    assert gaussian_certificate.stability_change < 0.05
    assert gaussian_certificate.sup_ratios[0] >= activation_service.eval_sigma(gaussian, 0.0)
    assert gaussian_certificate.cprime == max(gaussian_certificate.sup_ratios)


def test_decay_ratio_at_origin_is_sigma_at_origin(kernel_service, gaussian):
    ratio = kernel_service._decay_ratio(gaussian, GAUSSIAN_CONSTANTS, np.zeros((1, 1)), 0)
    assert ratio[0] == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-9)


def test_osc_sinc_decay_certificate(kernel_service, osc_sinc):
    constants = HomogeneousConstants(dim=1, c=1.0, epsilon=0.4)
    certificate = kernel_service.certify_decay(osc_sinc, constants, 16.0, rng=np.random.default_rng(0))
    assert math.isfinite(certificate.cprime)
    assert certificate.stable


def test_zero_activation_has_zero_constant(kernel_service, gaussian):
    zero = ActivationSpec(family=ActivationFamily.STEP_COMBO, base=gaussian)
    certificate = kernel_service.certify_decay(zero, GAUSSIAN_CONSTANTS, 8.0, n_samples=201)
    assert certificate.cprime == 0.0


def test_non_smooth_activation_is_never_certified(kernel_service):
    spec = ActivationSpec(family=ActivationFamily.SHAHAM_RELU)
    with pytest.raises(NonSmoothFamily):
        kernel_service.certify_decay(spec, GAUSSIAN_CONSTANTS, 16.0)


# (C1)


def test_C1_at_scale_zero(kernel_service, gaussian, grid):
    assert kernel_service.check_C1(gaussian, 0, 0.0, grid) <= 1e-10


def test_C1_at_fine_scale(kernel_service, gaussian, grid):
    assert kernel_service.check_C1(gaussian, 3, 0.0, grid) <= 1e-6


@pytest.mark.parametrize("name", ["gaussian", "osc_sinc"])
def test_C1_over_the_default_scales(kernel_service, grid, request, name):
    spec = request.getfixturevalue(name)
    for k in range(-2, 5):
        for x in (0.0, 1.7, -3.2):
            assert kernel_service.check_C1(spec, k, x, grid) <= 1e-3


# Выборка конфигураций


def test_sampled_configurations_meet_the_preconditions(gaussian_samples):
    constants = GAUSSIAN_CONSTANTS
    base = np.exp2(-gaussian_samples.k.astype(float)) + constants.rho(gaussian_samples.x, gaussian_samples.y)
    limit = base / (2.0 * constants.A)
    assert len(gaussian_samples) >= 9_000
    assert np.all(constants.rho(gaussian_samples.x, gaussian_samples.x_prime) <= limit)
    assert np.all(constants.rho(gaussian_samples.y, gaussian_samples.y_prime) <= limit)
    assert set(np.unique(gaussian_samples.k)) <= set(range(-3, 6))


def test_sampling_is_reproducible(kernel_service):
    first = kernel_service.sample_configurations(GAUSSIAN_CONSTANTS, 8.0, 500, np.random.default_rng(3))
    second = kernel_service.sample_configurations(GAUSSIAN_CONSTANTS, 8.0, 500, np.random.default_rng(3))
    np.testing.assert_array_equal(first.x_prime, second.x_prime)
    np.testing.assert_array_equal(first.k, second.k)


# (C2)-(C4)


def test_proof_constants(kernel_service):
    constants = HomogeneousConstants(dim=2, c=2.0, epsilon=0.25)
    base = 2.0**1.25 * 3.0
    assert kernel_service.proof_constant(KernelCondition.C2, constants, 3.0) == pytest.approx(base)
    assert kernel_service.proof_constant(KernelCondition.C3, constants, 3.0) == pytest.approx(2.0**3.5 * base)
    assert kernel_service.proof_constant(KernelCondition.C4, constants, 3.0) == pytest.approx(3.0**4.5 * base)


def test_gaussian_passes_C2(kernel_service, gaussian, gaussian_certificate, gaussian_samples):
    entry = kernel_service.check_C2(gaussian, GAUSSIAN_CONSTANTS, gaussian_certificate.cprime, gaussian_samples)
    assert entry.passed
    assert entry.sup_ratio <= 1.0 + 1e-9


def test_C2_on_the_diagonal(kernel_service, gaussian, gaussian_certificate):
    entry = kernel_service.check_C2(
        gaussian, GAUSSIAN_CONSTANTS, gaussian_certificate.cprime, _single(0, 0.0, 0.0, 0.0, 0.0)
    )
    assert entry.sup_ratio <= 1.0


def test_zero_activation_has_zero_C2_ratio(kernel_service, gaussian, gaussian_samples):
    zero = ActivationSpec(family=ActivationFamily.STEP_COMBO, base=gaussian)
    entry = kernel_service.check_C2(zero, GAUSSIAN_CONSTANTS, 1.0, gaussian_samples)
    assert entry.sup_ratio == 0.0


def test_gaussian_passes_C3(kernel_service, gaussian, gaussian_certificate, gaussian_samples):
    entry = kernel_service.check_C3(gaussian, GAUSSIAN_CONSTANTS, gaussian_certificate.cprime, gaussian_samples)
    assert entry.passed
    assert entry.samples >= 1000


def test_C3_single_configuration(kernel_service, gaussian, gaussian_certificate):
    entry = kernel_service.check_C3(
        gaussian,
        GAUSSIAN_CONSTANTS,
        gaussian_certificate.cprime,
        _single(0, 0.1, 0.12, 2.0, 2.0),
        min_valid=1,
    )
    assert entry.sup_ratio <= 1.0


def test_C3_vanishes_without_perturbation(kernel_service, gaussian, gaussian_certificate):
    entry = kernel_service.check_C3(
        gaussian, GAUSSIAN_CONSTANTS, gaussian_certificate.cprime, _single(1, 0.4, 0.4, -1.0, -1.0), min_valid=1
    )
    assert entry.implied_constant == 0.0


def test_C3_scaling_consistency(kernel_service, gaussian, gaussian_certificate):
    cprime = gaussian_certificate.cprime
    coarse = kernel_service.check_C3(
        gaussian, GAUSSIAN_CONSTANTS, cprime, _single(0, 0.3, 0.32, 1.1, 1.1), min_valid=1
    )
    fine = kernel_service.check_C3(
        gaussian, GAUSSIAN_CONSTANTS, cprime, _single(1, 0.15, 0.16, 0.55, 0.55), min_valid=1
    )
    assert fine.sup_ratio == pytest.approx(coarse.sup_ratio, rel=1e-9)


def test_gaussian_passes_C4(kernel_service, gaussian, gaussian_certificate, gaussian_samples):
    entry = kernel_service.check_C4(gaussian, GAUSSIAN_CONSTANTS, gaussian_certificate.cprime, gaussian_samples)
    assert entry.passed


def test_C4_vanishes_when_one_point_is_fixed(kernel_service, gaussian, gaussian_certificate):
    entry = kernel_service.check_C4(
        gaussian, GAUSSIAN_CONSTANTS, gaussian_certificate.cprime, _single(0, 0.2, 0.2, 1.0, 1.05), min_valid=1
    )
    assert entry.implied_constant == 0.0


def test_C4_rejects_non_smooth_activation(kernel_service, gaussian_samples):
    spec = ActivationSpec(family=ActivationFamily.SHAHAM_RELU)
    with pytest.raises(NonSmoothFamily):
        kernel_service.check_C4(spec, GAUSSIAN_CONSTANTS, 1.0, gaussian_samples)


def test_too_few_valid_samples(kernel_service, gaussian, gaussian_certificate):
    with pytest.raises(TooFewValidSamples):
        kernel_service.check_C3(
            gaussian, GAUSSIAN_CONSTANTS, gaussian_certificate.cprime, _single(0, 0.1, 0.12, 2.0, 2.0)
        )


def test_symmetry_of_even_kernel(kernel_service, gaussian, gaussian_samples):
    entry = kernel_service.check_symmetry(gaussian, gaussian_samples)
    assert entry.passed
    assert entry.sup_ratio <= 1e-12


# Полный отчёт


def test_full_report_for_gaussian(kernel_service, gaussian, grid):
    report = kernel_service.check_kernel(
        gaussian, GAUSSIAN_CONSTANTS, grid, n_samples=2000, min_valid=1000, rng=np.random.default_rng(1)
    )
    assert report.passed
    assert report.cprime is not None
    assert [entry.condition for entry in report.entries] == [
        KernelCondition.SYMMETRY,
        KernelCondition.DECAY_J0,
        KernelCondition.DECAY_J1,
        KernelCondition.DECAY_J2,
        KernelCondition.C1,
        KernelCondition.C2,
        KernelCondition.C3,
        KernelCondition.C4,
    ]


def test_full_report_routes_non_smooth_activation(kernel_service, activation_service, quadrature_service):
    grid = quadrature_service.make_grid(1, 8.0, 512)
    spec = activation_service.normalize_sigma(ActivationSpec(family=ActivationFamily.SHAHAM_RELU), grid)
    report = kernel_service.check_kernel(
        spec, GAUSSIAN_CONSTANTS, grid, n_samples=1000, min_valid=100, rng=np.random.default_rng(1)
    )
    assert not report.passed
    assert report.cprime is None
    assert report.entry(KernelCondition.DECAY_J1).status == STATUS_NON_SMOOTH
    assert report.entry(KernelCondition.C4).status == STATUS_NON_SMOOTH
    assert report.entry(KernelCondition.C2).status == STATUS_NOT_CLAIMED
    assert report.entry(KernelCondition.SYMMETRY).passed


def test_report_json_uses_pass_and_derived_constants(kernel_service, gaussian, grid):
    report = kernel_service.check_kernel(
        gaussian, GAUSSIAN_CONSTANTS, grid, n_samples=2000, min_valid=1000, rng=np.random.default_rng(1)
    )
    document = json.loads(dump_json(report))
    assert document["constants"] == {"dim": 1, "c": 1.0, "epsilon": 0.5, "eta": 1.0, "theta": 1.0, "A": 1.5}
    assert all("pass" in entry and "passed" not in entry for entry in document["entries"])
    assert KernelReport.model_validate(document) == report
