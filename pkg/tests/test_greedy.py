import math

import numpy as np
import pytest

from core.exceptions import DictionaryExhausted, MissingBound
from core.models import AtomIndex, Box, CoefficientLaw, OgaTrace
from core.random import stage_rng
from services.greedy_service import first_maximum
from services.pipeline_service import builtin_target


def _brute_force_selection(target, dictionary, steps):
    """Plain re-implementation: every correlation recomputed from scratch at each step."""
    w = dictionary.grid.weights
    atoms = dictionary.samples
    chosen = []
    residual = target.copy()
    for _ in range(steps):
        best, best_index = -1.0, None
        for i, atom in enumerate(atoms):
            if i in chosen:
                continue
            score = abs(np.sum(w * residual * atom)) / math.sqrt(np.sum(w * atom * atom))
            if score > best:
                best, best_index = score, i
        chosen.append(best_index)
        basis = atoms[chosen] * np.sqrt(w)
        coefficients, *_ = np.linalg.lstsq(basis.T, target * np.sqrt(w), rcond=None)
        residual = target - coefficients @ atoms[chosen]
    return [dictionary.atoms[i] for i in chosen]


def test_single_atom_is_recovered_exactly(greedy_service, dictionary):
    position = 140
    target = dictionary.samples[position]
    expansion, trace = greedy_service.oga(target, dictionary, 1)
    assert trace.steps[0].chosen == dictionary.atoms[position]
    assert expansion.terms[0].coefficient == pytest.approx(1.0, abs=1e-8)
    assert trace.steps[0].residual_norm <= 1e-8 * trace.target_norm


def test_two_separated_atoms(greedy_service, dictionary):
    left = dictionary.position(AtomIndex(k=4, m=(-64,)))
    right = dictionary.position(AtomIndex(k=4, m=(64,)))
    target = 2.0 * dictionary.samples[left] + dictionary.samples[right]
    expansion, trace = greedy_service.oga(target, dictionary, 2)
    assert [step.chosen for step in trace.steps] == [dictionary.atoms[left], dictionary.atoms[right]]
    np.testing.assert_allclose([term.coefficient for term in expansion.terms], [2.0, 1.0], rtol=1e-6)
    assert trace.steps[-1].residual_norm <= 1e-6 * trace.target_norm


def test_zero_target_has_zero_scores(greedy_service, dictionary):
    _, trace = greedy_service.oga(np.zeros(dictionary.grid.size), dictionary, 3)
    assert trace.steps[0].score == 0.0
    assert trace.steps[0].chosen == dictionary.atoms[0]
    assert [step.residual_norm for step in trace.steps] == [0.0, 0.0, 0.0]


def test_residual_is_orthogonal_to_selected_atoms(greedy_service, quadrature_service, dictionary):
    grid = dictionary.grid
    target = builtin_target("wavepacket", grid.nodes)
    expansion, trace = greedy_service.oga(target, dictionary, 12)
    selected = np.stack([dictionary.samples[dictionary.position(term.index)] for term in expansion.terms])
    residual = target - np.array([term.coefficient for term in expansion.terms]) @ selected
    for row, norm in zip(selected, (quadrature_service.l2_norm(row, grid) for row in selected)):
        assert abs(quadrature_service.inner_product(residual, row, grid)) <= 1e-8 * trace.target_norm * norm


def test_residual_curve_is_monotone(greedy_service, dictionary):
    target = builtin_target("bump", dictionary.grid.nodes)
    _, trace = greedy_service.oga(target, dictionary, 20)
    curve = greedy_service.residual_curve(trace)
    assert [t for t, _ in curve] == list(range(1, 21))
    residuals = [r for _, r in curve]
    assert all(later <= earlier + 1e-12 for earlier, later in zip(residuals, residuals[1:]))


def test_selection_matches_brute_force(greedy_service, frame_service, dictionary):
    small = frame_service.build_dictionary(
        dictionary.spec, 0, 0, Box(lower=(-2.0,), upper=(3.0,)), dictionary.grid
    )
    assert small.size == 6
    target = builtin_target("wavepacket", small.grid.nodes - 0.3)
    _, trace = greedy_service.oga(target, small, 3)
    assert [step.chosen for step in trace.steps] == _brute_force_selection(target, small, 3)


def test_step_budget_is_checked(greedy_service, dictionary):
    target = dictionary.samples[0]
    with pytest.raises(DictionaryExhausted):
        greedy_service.oga(target, dictionary, dictionary.size + 1)
    with pytest.raises(ValueError):
        greedy_service.oga(target, dictionary, 0)


def test_residual_threshold_stops_early(greedy_service, dictionary):
    _, trace = greedy_service.oga(dictionary.samples[10], dictionary, 5, residual_threshold=1e-6)
    assert len(trace) == 1


def test_ties_are_judged_on_an_absolute_window():
    assert first_maximum(np.array([1e-3, 1e-3 + 5e-13, 2e-4])) == 0
    assert first_maximum(np.array([1e-3, 1e-3 + 5e-12, 2e-4])) == 1
    assert first_maximum(np.array([0.0, 0.0, 0.0])) == 0
    assert first_maximum(np.array([-np.inf, 0.25, 0.25])) == 1


def test_empty_trace_has_no_curve(greedy_service):
    with pytest.raises(ValueError):
        greedy_service.residual_curve(OgaTrace())


# Скорость сходимости


def test_single_atom_meets_the_rate(greedy_service, dictionary):
    _, trace = greedy_service.oga(dictionary.samples[50], dictionary, 1)
    verdict = greedy_service.verify_rate(trace, 1.0)
    assert verdict.passed
    assert verdict.margin <= 1.0 / math.sqrt(2.0)


def test_zero_bound_with_nonzero_target_fails(greedy_service, dictionary):
    _, trace = greedy_service.oga(builtin_target("gaussian", dictionary.grid.nodes), dictionary, 2)
    verdict = greedy_service.verify_rate(trace, 0.0)
    assert not verdict.passed
    assert verdict.margin == math.inf


def test_rate_needs_a_bound(greedy_service, dictionary):
    _, trace = greedy_service.oga(dictionary.samples[3], dictionary, 1)
    with pytest.raises(MissingBound):
        greedy_service.verify_rate(trace)


@pytest.mark.parametrize("seed", range(20))
def test_rate_bound_on_synthetic_targets(greedy_service, dictionary, seed):
    samples, l1_bound, _ = greedy_service.make_synthetic_target(dictionary, 10, CoefficientLaw.GEOMETRIC, seed)
    _, trace = greedy_service.oga(samples, dictionary, 25, l1_bound=l1_bound)
    verdict = greedy_service.verify_rate(trace)
    assert verdict.passed
    assert verdict.margin <= 1.0 + 1e-3


# Синтетические цели


def test_unit_single_atom_target(greedy_service, dictionary):
    samples, l1_bound, expansion = greedy_service.make_synthetic_target(dictionary, 1, CoefficientLaw.UNIT, 5)
    assert l1_bound == 1.0
    position = dictionary.position(expansion.terms[0].index)
    np.testing.assert_array_equal(samples, dictionary.samples[position])


def test_geometric_bound(greedy_service, dictionary):
    _, l1_bound, expansion = greedy_service.make_synthetic_target(dictionary, 10, CoefficientLaw.GEOMETRIC, 9)
    assert l1_bound == 1.998046875
    assert expansion.coefficient_l1 == l1_bound


def test_synthetic_target_is_reproducible(greedy_service, dictionary):
    first = greedy_service.make_synthetic_target(dictionary, 10, CoefficientLaw.UNIFORM, 42)
    second = greedy_service.make_synthetic_target(dictionary, 10, CoefficientLaw.UNIFORM, stage_rng(42, "target"))
    np.testing.assert_array_equal(first[0], second[0])
    assert first[1] == second[1]


def test_synthetic_target_samples_match_its_expansion(greedy_service, frame_service, dictionary):
    samples, _, expansion = greedy_service.make_synthetic_target(dictionary, 6, CoefficientLaw.UNIFORM, 3)
    np.testing.assert_allclose(samples, frame_service.expansion_samples(expansion, dictionary), rtol=1e-13, atol=1e-15)
