import numpy as np
import pytest

from core.config import Settings
from core.models import ActivationFamily, ActivationSpec, Box
from repositories.targets import TargetRepository
from services.activation_service import ActivationService
from services.frame_service import FrameService
from services.greedy_service import GreedyService
from services.kernel_service import KernelService
from services.network_service import NetworkService
from services.pipeline_service import PipelineService
from services.quadrature_service import QuadratureService


@pytest.fixture(scope="session")
def settings():
    return Settings()


@pytest.fixture(scope="session")
def activation_service(settings):
    return ActivationService(settings)


@pytest.fixture(scope="session")
def quadrature_service(activation_service, settings):
    return QuadratureService(activation_service, settings)


@pytest.fixture(scope="session")
def frame_service(activation_service, quadrature_service, settings):
    return FrameService(activation_service, quadrature_service, settings)


@pytest.fixture(scope="session")
def kernel_service(activation_service, quadrature_service, frame_service, settings):
    return KernelService(activation_service, quadrature_service, frame_service, settings)


@pytest.fixture(scope="session")
def greedy_service(quadrature_service, settings):
    return GreedyService(quadrature_service, settings)


@pytest.fixture(scope="session")
def network_service(activation_service, quadrature_service, settings):
    return NetworkService(activation_service, quadrature_service, settings)


@pytest.fixture(scope="session")
def pipeline_service(
    activation_service,
    quadrature_service,
    kernel_service,
    frame_service,
    greedy_service,
    network_service,
):
    return PipelineService(
        activation_service=activation_service,
        quadrature_service=quadrature_service,
        kernel_service=kernel_service,
        frame_service=frame_service,
        greedy_service=greedy_service,
        network_service=network_service,
        target_repository=TargetRepository(),
    )


@pytest.fixture(scope="session")
def grid(quadrature_service):
    """Default one-dimensional grid: R = 8, n = 2048, Gauss-Legendre."""
    return quadrature_service.make_grid(1, 8.0, 2048)


@pytest.fixture(scope="session")
def gaussian(activation_service, grid):
    return activation_service.normalize_sigma(ActivationSpec(family=ActivationFamily.GAUSSIAN), grid)


@pytest.fixture(scope="session")
def osc_sinc(activation_service, grid):
    spec = ActivationSpec(family=ActivationFamily.OSC_SINC, alpha=3.5, m=1.0)
    return activation_service.normalize_sigma(spec, grid)


@pytest.fixture(scope="session")
def dictionary(frame_service, gaussian, grid):
    """Gaussian dictionary over k in [-2, 4] with centers in [-4, 4]: 261 atoms."""
    return frame_service.build_dictionary(gaussian, -2, 4, Box.symmetric(4.0, 1), grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
