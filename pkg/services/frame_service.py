from concurrent.futures import ThreadPoolExecutor
from itertools import product
import logging
import math

import numpy as np

from core.config import Settings, settings as default_settings
from core.exceptions import DimMismatch, EmptyDictionary, TooManyPoints
from core.models import ActivationSpec, AtomIndex, Box, Dictionary, Grid, WaveletExpansion
from core.schemas.reports import DictionaryManifest
from services.activation_service import ActivationService, as_points
from services.quadrature_service import QuadratureService

logger = logging.getLogger(__name__)

LATTICE_TOL = 1e-9
COVERAGE_WIDTHS = 4


class FrameService:
    def __init__(
        self,
        activation_service: ActivationService,
        quadrature_service: QuadratureService,
        settings: Settings = default_settings,
    ):
        self.activation_service = activation_service
        self.quadrature_service = quadrature_service
        self.settings = settings

    def eval_S_k(self, spec: ActivationSpec, k, x, b):
        """S_k(x, b) = 2^k sigma(2^{k/d}(x - b)); k may be an array matching a batch of points."""
        diff = np.asarray(x, dtype=float) - np.asarray(b, dtype=float)
        k = np.asarray(k, dtype=float)
        factor = np.exp2(k / spec.dim)
        if factor.ndim and diff.ndim == factor.ndim + 1:
            factor = factor[..., None]
        return np.exp2(k) * self.activation_service.eval_sigma(spec, factor * diff)

    def eval_psi(self, spec: ActivationSpec, k: int, b, x):
        """psi_{k,b}(x) = 2^{k/2} sigma(2^{k/d}(x-b)) - 2^{k/2-1} sigma(2^{(k-1)/d}(x-b))."""
        d = spec.dim
        diff = np.asarray(x, dtype=float) - np.asarray(b, dtype=float)
        fine = self.activation_service.eval_sigma(spec, np.exp2(k / d) * diff)
        coarse = self.activation_service.eval_sigma(spec, np.exp2((k - 1) / d) * diff)
        return np.exp2(k / 2) * fine - np.exp2(k / 2 - 1) * coarse

    def eval_atom(self, spec: ActivationSpec, index: AtomIndex, x):
        return self.eval_psi(spec, index.k, index.center, x)

    def lattice_indices(self, k: int, domain: Box, cap: int | None = None) -> list[AtomIndex]:
        """Lattice vectors m with 2^{-k/d} m inside the closed box, lexicographic in m."""
        cap = cap if cap is not None else self.settings.lattice_point_cap
        d = domain.dim
        spacing = float(np.exp2(-k / d))
        ranges = []
        count = 1
        for lo, hi in zip(domain.lower, domain.upper):
            first = math.ceil(lo / spacing - LATTICE_TOL)
            last = math.floor(hi / spacing + LATTICE_TOL)
            ranges.append(range(first, last + 1))
            count *= max(last - first + 1, 0)
        if count > cap:
            raise TooManyPoints(
                f"Scale k={k} has {count} lattice points in the domain, cap is {cap}"
            )
        return [AtomIndex(k=k, m=m) for m in product(*ranges)]

    def lattice_points(self, k: int, domain: Box, cap: int | None = None) -> np.ndarray:
        indices = self.lattice_indices(k, domain, cap)
        if not indices:
            return np.zeros((0, domain.dim))
        return np.stack([index.center for index in indices])

    def build_dictionary(
        self,
        spec: ActivationSpec,
        k_min: int,
        k_max: int,
        domain: Box,
        grid: Grid,
        cap: int | None = None,
    ) -> Dictionary:
        if k_min > k_max:
            raise ValueError(f"k_min={k_min} exceeds k_max={k_max}")
        if not (spec.dim == domain.dim == grid.dim):
            raise DimMismatch(
                f"Activation dim {spec.dim}, domain dim {domain.dim} and grid dim {grid.dim} differ"
            )

        # Проверка покрытия сеткой самых широких атомов
        margin = COVERAGE_WIDTHS * float(np.exp2(-k_min / spec.dim))
        if max(map(abs, domain.lower + domain.upper)) + margin > grid.half_width:
            logger.warning(
                f"Grid half-width {grid.half_width} is below domain + {COVERAGE_WIDTHS} atom widths "
                f"at k={k_min}; coarse atoms are truncated"
            )

        scales = range(k_min, k_max + 1)
        with ThreadPoolExecutor(max_workers=max(self.settings.threads, 1)) as pool:
            per_scale = list(pool.map(lambda k: self._build_scale(spec, k, domain, grid, cap), scales))

        atoms, rows, norms, dropped = [], [], [], []
        floor = self.settings.atom_norm_floor
        for indices, samples, scale_norms in per_scale:
            for index, row, norm in zip(indices, samples, scale_norms):
                if norm < floor:
                    dropped.append(index)
                    continue
                atoms.append(index)
                rows.append(row)
                norms.append(norm)

        if dropped:
            logger.warning(f"Dropped {len(dropped)} atoms with grid norm below {floor}")
        if not atoms:
            raise EmptyDictionary(f"No atoms with k in [{k_min}, {k_max}] survive in {domain}")

        logger.info(f"Built dictionary: {len(atoms)} atoms over k in [{k_min}, {k_max}]")
        return Dictionary(
            spec=spec,
            k_min=k_min,
            k_max=k_max,
            domain=domain,
            grid=grid,
            atoms=tuple(atoms),
            samples=np.stack(rows),
            norms=np.asarray(norms),
            dropped=tuple(dropped),
        )

    def _build_scale(self, spec: ActivationSpec, k: int, domain: Box, grid: Grid, cap: int | None):
        indices = self.lattice_indices(k, domain, cap)
        samples = np.empty((len(indices), grid.size))
        norms = np.empty(len(indices))
        for i, index in enumerate(indices):
            samples[i] = self.eval_atom(spec, index, grid.nodes)
            norms[i] = self.quadrature_service.l2_norm(samples[i], grid)
        return indices, samples, norms

    def eval_expansion(self, expansion: WaveletExpansion, spec: ActivationSpec, x):
        points, single = as_points(x, spec.dim)
        total = np.zeros(points.shape[0])
        for term in expansion.terms:
            total = total + term.coefficient * self.eval_atom(spec, term.index, points)
        return float(total[0]) if single else total

    def expansion_samples(self, expansion: WaveletExpansion, dictionary: Dictionary) -> np.ndarray:
        """Node values of an expansion over dictionary atoms, reusing stored samples."""
        total = np.zeros(dictionary.grid.size)
        for term in expansion.terms:
            total = total + term.coefficient * dictionary.samples[dictionary.position(term.index)]
        return total

    def manifest(self, dictionary: Dictionary) -> DictionaryManifest:
        return DictionaryManifest(
            spec=dictionary.spec,
            k_range=(dictionary.k_min, dictionary.k_max),
            domain=dictionary.domain,
            atom_count=dictionary.size,
            dropped_atoms=list(dictionary.dropped),
        )
