import json
import subprocess
import sys

import jsonschema
import pytest

from croppat.cli import main
from croppat.dataset import load_csv

NUM_OR_NULL = {"type": ["number", "null"]}
RATE = {
    "type": "object",
    "required": ["class", "sensitivity", "specificity"],
    "additionalProperties": False,
    "properties": {"class": {"type": "string"}, "sensitivity": NUM_OR_NULL, "specificity": NUM_OR_NULL},
}
METRICSET = {
    "type": "object",
    "required": ["accuracy", "kappa", "kappa_band", "per_class"],
    "additionalProperties": False,
    "properties": {
        "accuracy": {"type": "number", "minimum": 0, "maximum": 1},
        "kappa": {"type": ["number", "null"], "minimum": -1, "maximum": 1},
        "kappa_band": {"type": ["string", "null"]},
        "per_class": {"type": "array", "items": RATE},
    },
}
COMPARISON = {
    "type": "object",
    "required": ["config", "models", "tables", "per_class_series"],
    "additionalProperties": False,
    "properties": {
        "config": {"type": "object"},
        "models": {"type": "array", "items": {
            "type": "object",
            "required": ["name", "runs", "aggregate", "seconds_per_run"],
            "properties": {
                "name": {"type": "string"},
                "runs": {"type": "array", "items": METRICSET},
                "aggregate": {"type": "object"},
                "seconds_per_run": {"type": ["array", "null"], "items": {"type": "number"}},
            },
        }},
        "tables": {
            "type": "object",
            "required": ["accuracy", "kappa"],
            "properties": {
                "accuracy": {"type": "array", "items": {
                    "type": "object", "required": ["model", "accuracy"], "additionalProperties": False,
                    "properties": {"model": {"type": "string"}, "accuracy": NUM_OR_NULL}}},
                "kappa": {"type": "array", "items": {
                    "type": "object", "required": ["model", "kappa", "band"], "additionalProperties": False,
                    "properties": {"model": {"type": "string"}, "kappa": NUM_OR_NULL,
                                   "band": {"type": ["string", "null"]}}}},
            },
        },
        "per_class_series": {"type": "object", "additionalProperties": {"type": "array", "items": RATE}},
    },
}

FAST = ["--repeats", "2", "--ntree", "10", "--epochs", "30", "--hidden", "16"]


@pytest.fixture
def data(tmp_path):
    path = tmp_path / "d.csv"
    assert main(["generate", "--classes", "4", "--per-class", "12", "--features", "20",
                 "--noise", "0.03", "--seed", "5", "--out", str(path)]) == 0
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_reference_set(tmp_path, capsys):
    path = tmp_path / "d.csv"
    code, _, _ = run(capsys, "generate", "--classes", 8, "--per-class", 50, "--features", 136,
                     "--noise", 0.02, "--seed", 7, "--out", path)
    assert code == 0
    lines = path.read_text().splitlines()
    assert len(lines) == 401
    assert lines[0].split(",")[-1] == "label" and len(lines[0].split(",")) == 137
    assert load_csv(path).class_counts().tolist() == [50] * 8


def test_compare_json_is_reproducible(data, capsys):
    args = ["compare", "--data", data, "--seed", 7, "--format", "json", *FAST]
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    code3, out3, _ = run(capsys, *args, "--jobs", 3)
    assert code1 == code2 == code3 == 0
    assert out1 == out2 == out3
    doc = json.loads(out1)
    jsonschema.validate(doc, COMPARISON)
    assert doc["config"]["seed"] == 7


def test_compare_out_dir(data, tmp_path, capsys):
    out = tmp_path / "out"
    code, stdout, _ = run(capsys, "compare", "--data", data, "--seed", 1, "--out-dir", out,
                          "--format", "csv", *FAST)
    assert code == 0
    assert stdout.splitlines()[0] == "model,accuracy,kappa,kappa_band"
    assert sorted(p.name for p in out.iterdir()) == [
        "accuracy.csv", "dnn_loss_run01.csv", "dnn_loss_run02.csv", "kappa.csv",
        "per_class_dnn.csv", "per_class_nb.csv", "per_class_rf.csv", "report.json"]
    assert (out / "per_class_rf.csv").read_text().startswith("model,class,sensitivity,specificity\n")
    trace = (out / "dnn_loss_run01.csv").read_text().splitlines()
    assert trace[0] == "epoch,loss" and len(trace) == 31
    jsonschema.validate(json.loads((out / "report.json").read_text()), COMPARISON)


def test_compare_model_subset_and_timing(data, capsys):
    code, out, _ = run(capsys, "compare", "--data", data, "--models", "rf", "--timing",
                       "--format", "json", *FAST)
    assert code == 0
    doc = json.loads(out)
    assert [m["name"] for m in doc["models"]] == ["Random Forest (RF)"]
    assert len(doc["models"][0]["seconds_per_run"]) == 2


@pytest.mark.parametrize("kind", ["nb", "rf", "dnn"])
def test_train_then_evaluate(kind, data, tmp_path, capsys):
    model = tmp_path / f"{kind}.json"
    code, out, _ = run(capsys, "train", "--model", kind, "--data", data, "--out", model,
                       "--format", "json", "--ntree", 10, "--epochs", 50)
    assert code == 0
    jsonschema.validate(json.loads(out), METRICSET)
    for fmt in ("json", "csv", "table"):
        code, out, _ = run(capsys, "evaluate", "--model-file", model, "--data", data, "--format", fmt)
        assert code == 0
    code, out, _ = run(capsys, "evaluate", "--model-file", model, "--data", data, "--format", "json")
    doc = json.loads(out)
    jsonschema.validate(doc, METRICSET)
    assert doc["accuracy"] >= 0.9


def test_evaluate_maps_classes_by_name(tmp_path, capsys):
    train = tmp_path / "train.csv"
    train.write_text("f0,label\n0.0,a\n0.1,a\n1.0,b\n1.1,b\n")
    flipped = tmp_path / "test.csv"
    flipped.write_text("f0,label\n1.05,b\n0.05,a\n")
    model = tmp_path / "m.json"
    assert run(capsys, "train", "--model", "nb", "--data", train, "--out", model)[0] == 0
    code, out, _ = run(capsys, "evaluate", "--model-file", model, "--data", flipped, "--format", "json")
    assert code == 0 and json.loads(out)["accuracy"] == 1.0
    unknown = tmp_path / "u.csv"
    unknown.write_text("f0,label\n1.0,zzz\n")
    code, _, err = run(capsys, "evaluate", "--model-file", model, "--data", unknown)
    assert code == 2 and "zzz" in err


def test_missing_data_is_data_error(tmp_path, capsys):
    missing = tmp_path / "missing.csv"
    code, _, err = run(capsys, "train", "--model", "rf", "--data", missing, "--out", tmp_path / "m.json")
    assert code == 2 and "missing.csv" in err


def test_bad_rows_are_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("f0,f1,label\n1,2,a\n1,b\n")
    code, _, err = run(capsys, "compare", "--data", bad)
    assert code == 2 and "row 3" in err


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    [],
    ["compare", "--data", "x.csv", "--bogus"],
    ["compare", "--data", "x.csv", "--format", "xml"],
    ["generate", "--out", "x.csv", "--noise", "-1"],
    ["train", "--model", "svm", "--data", "x.csv", "--out", "m.json"],
    ["compare", "--data", "x.csv", "--models", "nb,svm"],
    ["generate", "--out", "x.csv", "--classes", "1"],
])
def test_usage_errors_exit_1(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1
    assert capsys.readouterr().err
    assert not any(tmp_path.iterdir())


def test_numeric_failure_exit_3(data, tmp_path, capsys):
    code, _, err = run(capsys, "train", "--model", "dnn", "--data", data, "--out", tmp_path / "m.json",
                       "--learning-rate", "1e12", "--epochs", "20")
    assert code == 3 and "epoch" in err
    assert not (tmp_path / "m.json").exists()


@pytest.mark.parametrize("cmd", [[], ["generate"], ["train"], ["evaluate"], ["compare"]])
def test_help_documents_defaults(cmd, capsys):
    with pytest.raises(SystemExit) as info:
        main(cmd + ["--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    for needle in ("1e-09", "lr 0.01", "batch size 32", "lower band", "ntree 300", "mtry 8",
                   "CROPPAT_SEED"):
        assert needle in text


def test_config_file_and_flag_precedence(data, tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"seed": 3, "repeats": 2, "models": ["rf"],
                                "forest": {"ntree": 7, "mtry": 3}}))
    code, out, _ = run(capsys, "compare", "--data", data, "--config", conf, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["config"]["seed"] == 3 and doc["config"]["repeats"] == 2
    assert doc["config"]["models"][0]["ntree"] == 7 and doc["config"]["models"][0]["mtry"] == 3
    code, out, _ = run(capsys, "compare", "--data", data, "--config", conf, "--format", "json",
                       "--ntree", 5, "--seed", 4)
    doc = json.loads(out)
    assert doc["config"]["seed"] == 4 and doc["config"]["models"][0]["ntree"] == 5


def test_bad_config_is_usage_error(data, tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text("[1, 2]")
    assert run(capsys, "compare", "--data", data, "--config", conf)[0] == 1
    conf.write_text(json.dumps({"repeats": 0}))
    assert run(capsys, "compare", "--data", data, "--config", conf)[0] == 1


def test_seed_env_default(data, capsys, monkeypatch):
    args = ["compare", "--data", data, "--format", "json", "--models", "nb", "--repeats", 2]
    monkeypatch.setenv("CROPPAT_SEED", "42")
    assert json.loads(run(capsys, *args)[1])["config"]["seed"] == 42
    assert json.loads(run(capsys, *args, "--seed", 9)[1])["config"]["seed"] == 9
    monkeypatch.setenv("CROPPAT_SEED", "nope")
    assert run(capsys, *args)[0] == 1


def test_console_entry_point(tmp_path):
    out = tmp_path / "g.csv"
    proc = subprocess.run([sys.executable, "-m", "croppat", "generate", "--classes", "3",
                           "--per-class", "4", "--features", "5", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(out.read_text().splitlines()) == 13
