import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from eurlab.cli import OUTPUT_NAMES, main
from eurlab.operators import MatrixPovm
from eurlab.povm_io import write_povm

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "docs" / "schemas"
SCHEMA_FOR = {
    "bound.json": "bound",
    "overlap.json": "overlap",
    "fig2_contour.json": "fig2_contour",
    "tf_keyrate.json": "tf_keyrate",
    "cv_saturation.json": "cv_saturation",
    "nunn_attack.json": "nunn_attack",
    "falsifier.json": "falsifier",
    "povm_check.json": "povm_check",
}


def _validate(path: Path):
    doc = json.loads(path.read_text())
    schema = json.loads((SCHEMA_DIR / f"{SCHEMA_FOR[path.name]}.schema.json").read_text())
    jsonschema.validate(doc, schema)
    return doc


def _run(tmp_path, *args):
    return main([*args, "--output-dir", str(tmp_path)])


def test_bound(tmp_path):
    assert _run(tmp_path, "bound", "--c_less", "1e-3", "--h_max", "1") == 0
    doc = _validate(tmp_path / "bound.json")
    assert doc["results"]["raw_bound_bits"] == pytest.approx(8.9658, abs=1e-4)
    assert doc["command"] == "bound"


def test_bound_equals_form_and_set(tmp_path):
    assert _run(tmp_path, "bound", "--p_z_null=0.5", "--set", "p_x_null=0.5") == 0
    doc = _validate(tmp_path / "bound.json")
    assert doc["results"]["clamped"] is True


def test_overlap(tmp_path):
    assert _run(tmp_path, "overlap", "--delta_omega", "1e9", "--delta_t", "1e-9", "--oracle", "true") == 0
    doc = _validate(tmp_path / "overlap.json")
    assert doc["parameters"]["oracle"] is True


def test_contour_outputs(tmp_path):
    assert _run(tmp_path, "contour", "--grid-n", "5") == 0
    doc = _validate(tmp_path / "fig2_contour.json")
    assert doc["results"]["equal_null_crossing"] == pytest.approx(0.23077, abs=1e-5)
    lines = (tmp_path / "fig2_contour.csv").read_text().splitlines()
    assert len(lines) == 26


def test_cv_sat(tmp_path):
    assert _run(tmp_path, "cv-sat", "--target_p_sat", "0.3") == 0
    doc = _validate(tmp_path / "cv_saturation.json")
    assert doc["results"]["abort"] is True


def test_small_falsify(tmp_path):
    assert _run(tmp_path, "falsify", "--n_states", "20", "--lemma_trials", "5", "--dims", "2x2x2,3x2x2") == 0
    doc = _validate(tmp_path / "falsifier.json")
    assert doc["results"]["n_violations"] == 0
    assert (tmp_path / "falsifier_groups.csv").exists()


def test_attack_sim(tmp_path):
    assert _run(tmp_path, "attack-sim", "--n_trials", "2000") == 0
    doc = _validate(tmp_path / "nunn_attack.json")
    assert doc["results"]["modified_bound"]["clamped"] is True


def test_tf_scan_coarse(tmp_path):
    args = ("tf-scan", "--c_target", "0.05", "--time_bin", "4e-11", "--d_step", "2.5")
    assert _run(tmp_path, *args) == 0
    doc = _validate(tmp_path / "tf_keyrate.json")
    assert doc["results"]["rate_at_first_distance"] > 0
    assert len((tmp_path / "tf_keyrate.csv").read_text().splitlines()) == 4


def test_check_povm(tmp_path):
    good = tmp_path / "good.povm"
    bad = tmp_path / "bad.povm"
    write_povm(good, MatrixPovm((np.eye(2) / 2, np.eye(2) / 2), null_index=1))
    write_povm(bad, MatrixPovm((np.eye(2) / 2, np.eye(2) / 3)))
    assert main(["check-povm", str(good), "--output-dir", str(tmp_path)]) == 0
    assert _validate(tmp_path / "povm_check.json")["results"]["passed"] is True
    assert main(["check-povm", str(bad), "--output-dir", str(tmp_path)]) == 2
    assert _validate(tmp_path / "povm_check.json")["results"]["passed"] is False
    assert main(["check-povm", str(tmp_path / "missing.povm"), "--output-dir", str(tmp_path)]) == 1


def test_exit_codes(tmp_path, capsys):
    assert _run(tmp_path, "bound", "--c_les", "0.1") == 1
    assert "c_less" in capsys.readouterr().err
    assert _run(tmp_path, "bound", "--c_less", "2") == 2
    assert _run(tmp_path, "bound", "--c_less", "abc") == 1
    assert _run(tmp_path, "nope") == 1
    assert _run(tmp_path, "bound", "--c_less") == 1
    assert _run(tmp_path, "overlap", "--delta_t", "1") == 1


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("c_less = 0.01\n[bound]\nh_max = 2\n")
    assert _run(tmp_path, "bound", "--config", str(cfg), "--h_max", "0") == 0
    doc = json.loads((tmp_path / "bound.json").read_text())
    assert doc["parameters"]["c_less"] == 0.01
    assert doc["parameters"]["h_max"] == 0.0
    assert _run(tmp_path, "bound", "--config", str(tmp_path / "missing.ini")) == 1


def test_seed_env(tmp_path, monkeypatch):
    monkeypatch.setenv("EURLAB_SEED", "7")
    assert _run(tmp_path, "falsify", "--n_states", "4", "--lemma_trials", "2", "--seed", "3") == 0
    assert json.loads((tmp_path / "falsifier.json").read_text())["seed"] == 7


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["attack-sim", "--n_trials", "1000", "--output-dir", str(out)]) == 0
        assert main(["falsify", "--n_states", "8", "--lemma_trials", "3", "--output-dir", str(out)]) == 0
    for name in ("nunn_attack.json", "falsifier.json", "falsifier_groups.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_format_flag(tmp_path):
    assert _run(tmp_path, "contour", "--grid", "3", "--format", "csv") == 0
    assert (tmp_path / "fig2_contour.csv").exists()
    assert not (tmp_path / "fig2_contour.json").exists()


def test_output_names_cover_schemas():
    names = {j for j, _ in OUTPUT_NAMES.values()}
    assert names == set(SCHEMA_FOR)
