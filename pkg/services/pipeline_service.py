from contextlib import contextmanager
from dataclasses import dataclass, field
import logging
import math
from pathlib import Path
import time

import numpy as np

from core.exceptions import FrameforgeError, PipelineStageError
from core.models import (
    ActivationFamily,
    ActivationSpec,
    AtomIndex,
    Dictionary,
    Grid,
    KernelReport,
    OgaTrace,
    WaveletExpansion,
)
from core.random import stage_rng
from core.schemas.config import DaggerConfig, ExperimentConfig, OutputConfig
from core.schemas.reports import (
    ComparisonReport,
    CurvePoint,
    ExpansionTermDocument,
    NetworkDocument,
    NetworkSummary,
    RateVerdictDocument,
    RunReport,
)
from repositories.networks import NetworkRepository
from repositories.reports import ReportRepository
from repositories.targets import TargetRepository
from services.activation_service import ActivationService
from services.frame_service import FrameService
from services.greedy_service import GreedyService
from services.kernel_service import KernelService
from services.network_service import NetworkService, expansion_hash, sigma0_spec
from services.quadrature_service import QuadratureService

logger = logging.getLogger(__name__)

ALL_STAGES = ("activation", "kernel", "dictionary", "target", "greedy", "export", "comparison")
APPROXIMATION_STAGES = ("activation", "dictionary", "target", "greedy")


def builtin_target(name: str, points: np.ndarray) -> np.ndarray:
    r2 = np.sum(points * points, axis=1)
    if name == "gaussian":
        return np.exp(-r2)
    if name == "bump":
        inside = r2 < 1.0
        safe = np.where(inside, r2, 0.0)
        return np.where(inside, np.exp(-1.0 / (1.0 - safe)), 0.0)
    if name == "wavepacket":
        return np.cos(3.0 * points.sum(axis=1)) * np.exp(-r2)
    raise ValueError(f"Unknown builtin target '{name}'")


@dataclass
class RunState:
    """Intermediate products of one pipeline run."""

    spec: ActivationSpec | None = None
    grid: Grid | None = None
    kernel: KernelReport | None = None
    dictionary: Dictionary | None = None
    target: np.ndarray | None = None
    l1_bound: float | None = None
    expansion: WaveletExpansion | None = None
    trace: OgaTrace | None = None
    comparison: ComparisonReport | None = None
    timings: dict[str, float] = field(default_factory=dict)


class PipelineService:
    def __init__(
        self,
        activation_service: ActivationService,
        quadrature_service: QuadratureService,
        kernel_service: KernelService,
        frame_service: FrameService,
        greedy_service: GreedyService,
        network_service: NetworkService,
        target_repository: TargetRepository,
    ):
        self.activation_service = activation_service
        self.quadrature_service = quadrature_service
        self.kernel_service = kernel_service
        self.frame_service = frame_service
        self.greedy_service = greedy_service
        self.network_service = network_service
        self.target_repository = target_repository

    @contextmanager
    def stage(self, name: str, state: RunState):
        logger.info(f"Stage '{name}' started")
        start = time.perf_counter()
        try:
            yield
        except FrameforgeError as error:
            logger.error(f"Stage '{name}' failed: {error.detail}")
            raise PipelineStageError(name, error) from error
        finally:
            state.timings[name] = round(time.perf_counter() - start, 6)

    # --- single stages ----------------------------------------------------------

    def prepare_activation(self, config: ExperimentConfig) -> tuple[ActivationSpec, Grid]:
        block = config.activation
        grid = self.quadrature_service.make_grid(
            block.dim, config.grid.half_width, config.grid.points_per_axis, config.grid.rule
        )
        if block.family == ActivationFamily.SAMPLED:
            spec = self.target_repository.load_sampled_activation(block.csv, block.dim)
        else:
            spec = block.to_spec()
        if block.normalize:
            spec = self.activation_service.normalize_sigma(spec, grid)
        return spec, grid

    def check_kernel(self, config: ExperimentConfig, spec: ActivationSpec, grid: Grid) -> KernelReport:
        kernel = config.kernel
        return self.kernel_service.check_kernel(
            spec,
            kernel.constants(spec.dim),
            grid,
            k_min=config.dictionary.k_min,
            k_max=config.dictionary.k_max,
            decay_radius=kernel.decay_radius,
            decay_samples=kernel.decay_samples,
            n_samples=kernel.samples,
            min_valid=kernel.min_valid,
            rng=stage_rng(config.seed, "kernel"),
        )

    def build_dictionary(self, config: ExperimentConfig, spec: ActivationSpec, grid: Grid) -> Dictionary:
        block = config.dictionary
        return self.frame_service.build_dictionary(
            spec, block.k_min, block.k_max, block.domain, grid, cap=block.atom_cap
        )

    def prepare_target(self, config: ExperimentConfig, dictionary: Dictionary) -> tuple[np.ndarray, float | None]:
        block = config.target
        grid = dictionary.grid
        if block.kind == "synthetic":
            samples, l1_bound, _ = self.greedy_service.make_synthetic_target(
                dictionary, block.n_atoms, block.coeff_law, stage_rng(config.seed, "target")
            )
            return samples, l1_bound
        if block.kind == "builtin":
            return builtin_target(block.name, grid.nodes), None
        return self.target_repository.ingest_target_csv(block.path, grid), None

    # --- pipeline ---------------------------------------------------------------

    def execute(
        self,
        config: ExperimentConfig,
        stages: tuple[str, ...] = ALL_STAGES,
        state: RunState | None = None,
    ) -> RunState:
        """Run the requested stages in order; the state holds whatever finished."""
        state = state if state is not None else RunState()
        with self.stage("activation", state):
            state.spec, state.grid = self.prepare_activation(config)

        if "kernel" in stages and config.kernel.enabled:
            with self.stage("kernel", state):
                state.kernel = self.check_kernel(config, state.spec, state.grid)
            if not state.kernel.passed:
                logger.warning("Kernel conditions not certified; stopping before the dictionary")
                return state

        if "dictionary" in stages:
            with self.stage("dictionary", state):
                state.dictionary = self.build_dictionary(config, state.spec, state.grid)

        if "target" in stages:
            with self.stage("target", state):
                state.target, state.l1_bound = self.prepare_target(config, state.dictionary)

        if "greedy" in stages:
            with self.stage("greedy", state):
                state.expansion, state.trace = self.greedy_service.oga(
                    state.target,
                    state.dictionary,
                    config.greedy.N,
                    residual_threshold=config.greedy.residual_threshold,
                    l1_bound=state.l1_bound,
                )

        if "comparison" in stages and config.dagger is not None:
            with self.stage("comparison", state):
                state.comparison = self.compare(config.dagger, state)
        return state

    def compare(self, dagger: DaggerConfig, state: RunState) -> ComparisonReport:
        return self.network_service.compare_activations(
            state.spec,
            sigma0_spec(dagger.sigma0, state.spec.dim),
            dagger.M,
            dagger.shift_box,
            state.grid,
            state.expansion,
            state.target,
            state.trace.steps[-1].residual_norm,
        )

    def run_pipeline(
        self,
        config: ExperimentConfig,
        reports: ReportRepository,
        stages: tuple[str, ...] = ALL_STAGES,
    ) -> tuple[RunReport, int]:
        """
        Run the stages, write run.json (always), curve.csv and net.json.
        Exit code 0 when every verdict passes, 2 otherwise; stage errors are
        re-raised after the partial report is written.
        """
        report = RunReport(resolved_config=config.model_dump(mode="json"))
        output = config.output
        state = RunState()
        try:
            self.execute(config, stages, state)
            self._fill_report(report, state)
            if state.expansion is not None and "export" in stages:
                with self.stage("export", state):
                    report.network = self.export(config, state, reports)
        except PipelineStageError as error:
            self._fill_report(report, state)
            report.failed_stage = error.stage
            report.error = error.detail
            self._finish(report, output, state, reports)
            raise

        self._finish(report, output, state, reports)
        exit_code = 0 if report.passed else 2
        logger.info(f"Pipeline finished: verdicts {report.verdicts}, exit code {exit_code}")
        return report, exit_code

    def export(self, config: ExperimentConfig, state: RunState, reports: ReportRepository) -> NetworkSummary:
        params = self.network_service.expansion_to_wbnet(state.expansion, state.spec.dim)
        source = expansion_hash(state.expansion)
        document = NetworkDocument.from_params(params, state.spec, source)
        NetworkRepository(reports).save(document, config.output.net_file)
        return NetworkSummary(
            file=config.output.net_file,
            node_count=params.node_count,
            source_expansion_hash=source,
        )

    def _fill_report(self, report: RunReport, state: RunState) -> None:
        report.activation = state.spec
        report.kernel = state.kernel
        if state.kernel is not None:
            report.verdicts["kernel"] = state.kernel.passed
        if state.dictionary is not None:
            report.dictionary = self.frame_service.manifest(state.dictionary)
        if state.target is not None:
            report.target = {
                "l1_bound": state.l1_bound,
                "norm": self.quadrature_service.l2_norm(state.target, state.dictionary.grid),
            }
        if state.trace is not None:
            report.expansion = ExpansionTermDocument.from_expansion(state.expansion)
            l1 = state.l1_bound
            report.residual_curve = [
                CurvePoint(N=t, residual=residual, bound=l1 / math.sqrt(t + 1) if l1 is not None else None)
                for t, residual in self.greedy_service.residual_curve(state.trace)
            ]
            if l1 is None:
                report.rate = RateVerdictDocument(status="skipped")
            else:
                verdict = self.greedy_service.verify_rate(state.trace, l1)
                report.rate = RateVerdictDocument(
                    status="pass" if verdict.passed else "fail",
                    margin=verdict.margin if math.isfinite(verdict.margin) else None,
                    l1_bound=l1,
                )
                report.verdicts["rate"] = verdict.passed
        if state.comparison is not None:
            report.comparison = state.comparison
            report.verdicts["comparison"] = state.comparison.passed

    def _finish(self, report: RunReport, output: OutputConfig, state: RunState, reports: ReportRepository) -> None:
        report.passed = report.failed_stage is None and all(report.verdicts.values())
        if output.record_timings:
            report.timings = dict(sorted(state.timings.items()))
        if report.residual_curve:
            reports.write_curve(output.curve_file, report.residual_curve)
        reports.write_json(output.run_file, report)

    # --- standalone network commands -----------------------------------------------

    def export_from_run(self, run_path: str | Path, reports: ReportRepository) -> NetworkDocument:
        run = reports.read_json(run_path, RunReport)
        if run.activation is None or not run.expansion:
            raise PipelineStageError(
                "export", FrameforgeError(f"{run_path} holds no activation or expansion")
            )
        expansion = WaveletExpansion.from_pairs(
            (AtomIndex(k=term.k, m=tuple(term.m)), term.coefficient) for term in run.expansion
        )
        params = self.network_service.expansion_to_wbnet(expansion, run.activation.dim)
        return NetworkDocument.from_params(params, run.activation, expansion_hash(expansion))

    def evaluate_document(self, document: NetworkDocument, points: np.ndarray) -> np.ndarray:
        return self.network_service.eval_wbnet(document.to_params(), document.metadata.activation, points)
