import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from core.models import ActivationSpec, AtomIndex, WaveletExpansion
from main import main

SMALL = {
    "activation": {"family": "gaussian", "dim": 1},
    "grid": {"half_width": 8.0, "points_per_axis": 256},
    "dictionary": {"k_min": 0, "k_max": 2, "domain": {"lower": [-1.0], "upper": [1.0]}},
    "greedy": {"N": 1},
    "kernel": {"enabled": False},
    "target": {"kind": "synthetic", "n_atoms": 1, "coeff_law": "unit"},
    "seed": 7,
}


def _config(tmp_path, name="config.json", **blocks):
    data = json.loads(json.dumps(SMALL))
    for key, value in blocks.items():
        data[key] = value
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def _read(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_print_schema(capsys):
    assert main(["--print-schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert "activation" in schema["properties"]
    assert "seed" in schema["properties"]


def test_no_command(capsys):
    assert main([]) == 1
    assert "commands:" in capsys.readouterr().err


def test_build_dict_prints_the_manifest(tmp_path, capsys):
    assert main(["build-dict", "--config", _config(tmp_path)]) == 0
    manifest = json.loads(capsys.readouterr().out)
    assert manifest["atom_count"] == 17
    assert manifest["k_range"] == [0, 2]


def test_check_kernel_writes_report(tmp_path):
    config = _config(
        tmp_path,
        grid={"half_width": 8.0, "points_per_axis": 2048},
        dictionary={"k_min": -2, "k_max": 4, "domain": {"lower": [-4.0], "upper": [4.0]}},
        kernel={"enabled": True, "samples": 2000, "min_valid": 1000},
    )
    out = tmp_path / "kernel"
    assert main(["check-kernel", "--config", config, "--out", str(out)]) == 0
    report = _read(out / "kernel.json")
    assert set(report) == {"constants", "cprime", "entries"}
    assert set(report["constants"]) == {"dim", "c", "epsilon", "eta", "theta", "A"}
    assert report["constants"]["A"] == 1.5
    assert report["constants"]["eta"] == report["constants"]["theta"] == 1.0
    for entry in report["entries"]:
        assert set(entry) == {"condition", "sup_ratio", "implied_constant", "samples", "pass", "status"}
        assert entry["pass"] is True
    assert report["cprime"] > 0


def test_approximate_single_atom(tmp_path):
    out = tmp_path / "run"
    assert main(["approximate", "--config", _config(tmp_path), "--out", str(out)]) == 0
    run = _read(out / "run.json")
    assert run["rate"]["status"] == "pass"
    assert run["verdicts"] == {"rate": True}
    assert run["failed_stage"] is None
    assert run["timings"] is None
    assert len(run["expansion"]) == 1
    assert run["expansion"][0]["coefficient"] == pytest.approx(1.0, abs=1e-8)
    header = (out / "curve.csv").read_text(encoding="utf-8").split("\n")[0]
    assert header == "N,residual,bound"


def test_approximate_records_timings_on_request(tmp_path):
    out = tmp_path / "run"
    config = _config(tmp_path, output={"record_timings": True})
    assert main(["approximate", "--config", config, "--out", str(out)]) == 0
    assert set(_read(out / "run.json")["timings"]) == {"activation", "dictionary", "target", "greedy"}


def test_failed_stage_is_reported(tmp_path, capsys):
    out = tmp_path / "run"
    config = _config(tmp_path, greedy={"N": 18})
    assert main(["approximate", "--config", config, "--out", str(out)]) == 1
    run = _read(out / "run.json")
    assert run["failed_stage"] == "greedy"
    assert run["passed"] is False
    assert run["dictionary"]["atom_count"] == 17
    assert "DictionaryExhausted" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    config = _config(tmp_path, greedy={"steps": 3})
    assert main(["approximate", "--config", config, "--out", str(tmp_path / "run")]) == 1
    assert "greedy.steps" in capsys.readouterr().err
    assert not (tmp_path / "run").exists()


def test_seed_override_changes_the_target(tmp_path):
    config = _config(tmp_path, target={"kind": "synthetic", "n_atoms": 3, "coeff_law": "uniform"}, greedy={"N": 3})
    assert main(["approximate", "--config", config, "--out", str(tmp_path / "a"), "--seed", "1"]) == 0
    assert main(["approximate", "--config", config, "--out", str(tmp_path / "b"), "--seed", "2"]) == 0
    first, second = _read(tmp_path / "a" / "run.json"), _read(tmp_path / "b" / "run.json")
    assert first["resolved_config"]["seed"] == 1
    assert first["target"] != second["target"]


def test_thread_count_does_not_change_the_report(tmp_path):
    config = _config(tmp_path, target={"kind": "builtin", "name": "wavepacket"}, greedy={"N": 6})
    out = tmp_path / "run"
    assert main(["approximate", "--config", config, "--out", str(out), "--threads", "1"]) == 0
    single = (out / "run.json").read_bytes()
    assert main(["approximate", "--config", config, "--out", str(out), "--threads", "4"]) == 0
    assert (out / "run.json").read_bytes() == single


def test_builtin_target_skips_the_rate(tmp_path):
    out = tmp_path / "run"
    config = _config(tmp_path, target={"kind": "builtin", "name": "bump"}, greedy={"N": 4})
    assert main(["approximate", "--config", config, "--out", str(out)]) == 0
    run = _read(out / "run.json")
    assert run["rate"] == {"l1_bound": None, "margin": None, "status": "skipped"}
    assert all(point["bound"] is None for point in run["residual_curve"])


def test_export_and_evaluate_network(tmp_path):
    out = tmp_path / "run"
    config = _config(tmp_path, target={"kind": "synthetic", "n_atoms": 3, "coeff_law": "uniform"}, greedy={"N": 3})
    assert main(["approximate", "--config", config, "--out", str(out)]) == 0
    net = tmp_path / "net.json"
    assert main(["export-net", "--run", str(out / "run.json"), "--out", str(net)]) == 0
    document = _read(net)
    assert document["metadata"]["node_count"] == 6
    assert len(document["theta"]) == 6

    points = tmp_path / "points.csv"
    pd.DataFrame({"x_1": np.linspace(-2.0, 2.0, 9)}).to_csv(points, index=False)
    values_path = tmp_path / "values.csv"
    assert main(["eval-net", "--net", str(net), "--points", str(points), "--out", str(values_path)]) == 0
    values = pd.read_csv(values_path)
    assert list(values.columns) == ["x_1", "value"]

    from services.frame_service import FrameService
    from services.activation_service import ActivationService
    from services.quadrature_service import QuadratureService

    run = _read(out / "run.json")
    spec = ActivationSpec.model_validate(run["activation"])
    expansion = WaveletExpansion.from_pairs(
        (AtomIndex(k=term["k"], m=tuple(term["m"])), term["coefficient"]) for term in run["expansion"]
    )
    activation_service = ActivationService()
    frame = FrameService(activation_service, QuadratureService(activation_service))
    expected = frame.eval_expansion(expansion, spec, values["x_1"].to_numpy())
    np.testing.assert_allclose(values["value"].to_numpy(), expected, rtol=1e-12, atol=1e-14)


def test_export_without_expansion(tmp_path, capsys):
    run = tmp_path / "run.json"
    run.write_text(json.dumps({"resolved_config": {}}), encoding="utf-8")
    assert main(["export-net", "--run", str(run), "--out", str(tmp_path / "net.json")]) == 1
    assert "no activation or expansion" in capsys.readouterr().err


WIDE_DOMAIN = {"k_min": 0, "k_max": 1, "domain": {"lower": [-4.0], "upper": [4.0]}}


def test_compare_activations_defaults_the_dagger_block(tmp_path):
    config = _config(
        tmp_path,
        dictionary=WIDE_DOMAIN,
        target={"kind": "synthetic", "n_atoms": 3, "coeff_law": "geometric"},
        greedy={"N": 5},
    )
    out = tmp_path / "compare"
    assert main(["compare-activations", "--config", config, "--out", str(out)]) == 0
    report = _read(out / "comparison.json")
    assert [entry["M"] for entry in report["entries"]] == [9, 17, 33]
    assert [entry["node_count"] for entry in report["entries"]] == [90, 170, 330]
    assert report["monotone"] is True
    assert report["passed"] is True


def test_run_writes_every_output(tmp_path):
    config = _config(
        tmp_path,
        dictionary=WIDE_DOMAIN,
        target={"kind": "synthetic", "n_atoms": 2, "coeff_law": "geometric"},
        greedy={"N": 4},
        dagger={"sigma0": "hat", "M": [9, 17]},
    )
    out = tmp_path / "run"
    assert main(["run", "--config", config, "--out", str(out)]) == 0
    run = _read(out / "run.json")
    assert run["verdicts"] == {"rate": True, "comparison": True}
    assert run["passed"] is True
    assert run["network"]["node_count"] == 8
    assert _read(out / "net.json")["metadata"]["source_expansion_hash"] == run["network"]["source_expansion_hash"]
    assert (out / "curve.csv").exists()


def test_golden_run_is_reproducible_across_thread_counts(tmp_path):
    golden = str(Path(__file__).resolve().parent.parent / "configs" / "golden.json")
    out = tmp_path / "golden"
    assert main(["run", "--config", golden, "--out", str(out), "--threads", "1"]) == 0
    single = (out / "run.json").read_bytes()
    assert main(["run", "--config", golden, "--out", str(out), "--threads", "8"]) == 0
    assert (out / "run.json").read_bytes() == single
    run = json.loads(single)
    assert run["verdicts"] == {"kernel": True, "rate": True, "comparison": True}
    assert run["kernel"]["entries"][0]["pass"] is True
