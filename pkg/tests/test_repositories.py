import json

import numpy as np
import pandas as pd
import pytest

from core.exceptions import MissingNodes, SchemaMismatch
from core.models import ActivationFamily, ActivationSpec
from core.schemas import CurvePoint, NetworkDocument
from repositories.networks import NetworkRepository
from repositories.reports import ReportRepository, dump_json
from repositories.targets import TargetRepository


@pytest.fixture
def small_grid(quadrature_service):
    return quadrature_service.make_grid(1, 8.0, 64)


@pytest.fixture
def reports(tmp_path):
    return ReportRepository(tmp_path)


def _write_samples(reports, name, points, values):
    return reports.write_frame(name, TargetRepository().values_frame(points, values))


def test_exact_grid_csv_is_read_bitwise(reports, activation_service, gaussian, small_grid):
    values = activation_service.eval_sigma(gaussian, small_grid.nodes)
    path = _write_samples(reports, "target.csv", small_grid.nodes, values)
    np.testing.assert_array_equal(TargetRepository().ingest_target_csv(path, small_grid), values)


def test_scattered_rows_are_binned_to_nodes(reports, small_grid, caplog):
    jitter = np.where(np.arange(small_grid.size) % 2 == 0, 1e-4, -1e-4)[:, None]
    points = np.vstack([small_grid.nodes + jitter, small_grid.nodes - jitter])
    values = np.concatenate([np.ones(small_grid.size), 3.0 * np.ones(small_grid.size)])
    path = _write_samples(reports, "scattered.csv", points, values)
    with caplog.at_level("WARNING"):
        binned = TargetRepository().ingest_target_csv(path, small_grid)
    np.testing.assert_allclose(binned, 2.0)
    assert "off the grid" in caplog.text


def test_missing_node_is_reported(reports, small_grid):
    values = np.ones(small_grid.size)
    path = _write_samples(reports, "short.csv", small_grid.nodes[:-1], values[:-1])
    with pytest.raises(MissingNodes):
        TargetRepository().ingest_target_csv(path, small_grid)


def test_wrong_columns_are_rejected(tmp_path, small_grid):
    path = tmp_path / "bad.csv"
    pd.DataFrame({"x_1": [0.0], "y": [1.0], "value": [2.0]}).to_csv(path, index=False)
    with pytest.raises(SchemaMismatch):
        TargetRepository().ingest_target_csv(path, small_grid)


def test_sampled_activation_round_trip(reports, activation_service, quadrature_service):
    grid = quadrature_service.make_grid(2, 2.0, 8)
    spec = ActivationSpec(family=ActivationFamily.GAUSSIAN, dim=2)
    values = activation_service.eval_sigma(spec, grid.nodes)
    path = _write_samples(reports, "sigma.csv", grid.nodes, values)
    sampled = TargetRepository().load_sampled_activation(path, 2)
    assert sampled.family == ActivationFamily.SAMPLED
    np.testing.assert_allclose(activation_service.eval_sigma(sampled, grid.nodes), values, rtol=1e-14)
    assert activation_service.eval_sigma(sampled, [5.0, 0.0]) == 0.0


def test_incomplete_sampled_activation_is_rejected(reports, quadrature_service):
    grid = quadrature_service.make_grid(2, 2.0, 4)
    path = _write_samples(reports, "partial.csv", grid.nodes[:-1], np.ones(grid.size - 1))
    with pytest.raises(SchemaMismatch):
        TargetRepository().load_sampled_activation(path, 2)


def test_json_documents_have_sorted_keys(reports):
    path = reports.write_json("doc.json", {"b": 1, "a": [1.5, 2]})
    text = path.read_text(encoding="utf-8")
    assert text == dump_json({"a": [1.5, 2], "b": 1})
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("}\n")


def test_curve_csv_layout(reports):
    path = reports.write_curve("curve.csv", [CurvePoint(N=1, residual=0.5, bound=0.7), CurvePoint(N=2, residual=0.25)])
    lines = path.read_bytes().decode("utf-8").split("\n")
    assert lines[0] == "N,residual,bound"
    assert lines[1] == "1,0.5,0.69999999999999996"
    assert lines[2] == "2,0.25,"


def test_network_document_round_trip(reports, network_service, gaussian):
    from core.models import AtomIndex, WaveletExpansion
    from services.network_service import expansion_hash

    expansion = WaveletExpansion.from_pairs([(AtomIndex(k=1, m=(3,)), 0.75), (AtomIndex(k=-1, m=(-1,)), -2.0)])
    params = network_service.expansion_to_wbnet(expansion, 1)
    document = NetworkDocument.from_params(params, gaussian, expansion_hash(expansion))
    networks = NetworkRepository(reports)
    networks.save(document, "net.json")
    loaded = networks.load("net.json")
    assert loaded == document
    restored = loaded.to_params()
    np.testing.assert_array_equal(restored.gamma, params.gamma)
    np.testing.assert_array_equal(restored.theta, params.theta)


def test_invalid_network_document(reports):
    reports.write_json("broken.json", {"gamma": [1.0]})
    with pytest.raises(SchemaMismatch):
        NetworkRepository(reports).load("broken.json")
    assert json.loads((reports.root / "broken.json").read_text()) == {"gamma": [1.0]}
