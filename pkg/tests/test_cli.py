import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from motifgcn.cli import main
from motifgcn.modelfile import load_model

REPO = Path(__file__).resolve().parent.parent
FIXTURE_CONF = str(REPO / "configs" / "fixture.conf")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


MOTIF_STATS_SCHEMA = {
    "type": "object",
    "required": ["dataset", "nodes", "edges", "max_degree", "triangles",
                 "wedges", "clustering_coefficient", "nnz", "bound_2ED",
                 "wedge_nnz_within_bound"],
    "properties": {
        "nnz": {
            "type": "object",
            "required": ["edge", "triangle", "wedge"],
        },
        "clustering_coefficient": {"type": "number"},
        "wedge_nnz_within_bound": {"type": "boolean"},
    },
}

TRAIN_SCHEMA = {
    "type": "object",
    "required": ["command", "dataset", "config", "report"],
    "properties": {
        "report": {
            "type": "object",
            "required": ["train_losses", "val_losses", "val_accuracies",
                         "best_epoch", "epochs_run", "test_accuracy"],
        }
    },
}


def test_motif_stats_fixture(capsys):
    code, payload = run(capsys, "motif-stats", "--config", FIXTURE_CONF)
    assert code == 0
    jsonschema.validate(payload, MOTIF_STATS_SCHEMA)
    assert payload["dataset"] == "two_community"
    assert payload["wedge_nnz_within_bound"] is True
    assert payload["nnz"]["wedge"] <= payload["bound_2ED"]


def test_train_schema_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["train", "--config", FIXTURE_CONF, "--seed", "7", "--out", str(a)]) == 0
    assert main(["train", "--config", FIXTURE_CONF, "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    payload = json.loads(a.read_text())
    jsonschema.validate(payload, TRAIN_SCHEMA)
    assert 0.0 <= payload["report"]["test_accuracy"] <= 1.0


def test_train_saves_model_container(tmp_path):
    model_path = tmp_path / "model.bin"
    out = tmp_path / "report.json"
    assert main(["train", "--config", FIXTURE_CONF,
                 "--model-out", str(model_path), "--out", str(out)]) == 0
    header, weights = load_model(model_path)
    assert [s["shape"] for s in header["layers"]] == [[5, 16], [16, 16], [16, 2]]
    assert header["config"]["recipe"] == "edge:8,triangle:1,wedge:2"
    assert all(w.dtype == "float64" for w in weights)


def test_bad_config_key_exits_2(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("no_such_option = 1\n")
    code = main(["train", "--config", str(conf)])
    err = capsys.readouterr().err
    assert code == 2
    assert "no_such_option" in err


def test_bad_dataset_spec_exits_2(capsys):
    code = main(["motif-stats", "--dataset", "imagenet:cat"])
    assert code == 2


def test_missing_data_root_exits_2(capsys, monkeypatch):
    monkeypatch.delenv("MOTIFGCN_DATA", raising=False)
    code = main(["motif-stats", "--dataset", "planetoid:cora"])
    err = capsys.readouterr().err
    assert code == 2
    assert "MOTIFGCN_DATA" in err


def test_missing_dataset_files_exit_1(tmp_path, capsys):
    code = main(["motif-stats", "--dataset", "planetoid:cora",
                 "--data-root", str(tmp_path)])
    assert code == 1


def test_protocol_output(tmp_path, capsys):
    code, payload = run(capsys, "protocol", "--config", FIXTURE_CONF,
                        "--runs", "3", "--seed", "1")
    assert code == 0
    assert len(payload["runs"]) == 3
    assert payload["mean"] == pytest.approx(sum(payload["runs"]) / 3)
    assert payload["max"] == max(payload["runs"])


def test_gradcheck_passes(capsys):
    code, payload = run(capsys, "gradcheck")
    assert code == 0
    assert payload["passed"] is True
    assert payload["max_relative_error"] < 1e-6
    assert len(payload["per_shape"]) == 4


def test_gradcheck_negative_control(capsys):
    code, payload = run(capsys, "gradcheck", "--inject-gradient-error")
    assert code == 1
    assert payload["passed"] is False


def test_gradcheck_refuses_dropout(capsys):
    code = main(["gradcheck", "--dropout", "0.5"])
    err = capsys.readouterr().err
    assert code == 2
    assert "dropout" in err


def test_oracle_check(capsys):
    code, payload = run(capsys, "oracle-check", "--graphs", "5", "--max-n", "12")
    assert code == 0
    assert payload["passed"] is True
    assert payload["mismatches"] == []


def test_oracle_check_literal_semantics(capsys):
    code, payload = run(capsys, "oracle-check", "--graphs", "3", "--max-n", "10",
                        "--semantics", "edge_in_instance")
    assert code == 0
    assert "intentionally divergent" in payload["wedge_note"]


def test_grid_search(tmp_path, capsys):
    grid = tmp_path / "grid.txt"
    grid.write_text("edge:1\nedge:8,triangle:1,wedge:2  # three-source mix\n")
    code, payload = run(capsys, "grid-search", "--config", FIXTURE_CONF,
                        "--grid", str(grid), "--grid-seeds", "2")
    assert code == 0
    assert len(payload["table"]) == 2
    assert payload["best_recipe"] in {r["recipe"] for r in payload["table"]}
    for row in payload["table"]:
        assert 0.0 <= row["val_accuracy_mean"] <= 1.0


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "motifgcn.cli", "motif-stats",
         "--config", FIXTURE_CONF],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["dataset"] == "two_community"
