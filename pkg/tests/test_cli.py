"""CLI pipeline: extract → analyze → split → prompts → train-baseline →
predict → evaluate, plus exit codes, determinism, and config merging."""

import json

import pytest

from conftest import adapter_cmd, make_annotation
from privstmt.cli import main
from privstmt.corpus import (
    MethodSample,
    PrivacyLabel,
    save_annotations,
    save_samples,
)

CODE_A = "void fa() {\n    int a = 0;\n    b = tracker.send(a);\n    return b;\n}\n"
# statements: 0 sig, 1 decl, 2 func_call, 3 return
CODE_B = "void fb() {\n    int x = 1;\n    if (x > 0) {\n        y = x + 1;\n    }\n    log(y);\n}\n"
# statements: 0 sig, 1 decl, 2 if, 3 expr, 4 func_call


@pytest.fixture
def corpus_dir(tmp_path):
    samples = []
    annotations = []
    for i in range(8):
        code = CODE_A if i % 2 == 0 else CODE_B
        label = list(PrivacyLabel)[i % 4]
        samples.append(MethodSample(id=f"s{i}", code=code, label=label))
        annotations.append(make_annotation(f"s{i}", "annot-a", [2, 1], rationales=["r"]))
    # two doubly-annotated samples -> test set
    annotations.append(make_annotation("s0", "annot-b", [1, 2, 3], rationales=["r"]))
    annotations.append(make_annotation("s1", "annot-b", [4], rationales=["r"]))
    save_samples(samples, tmp_path / "samples.jsonl")
    save_annotations(annotations, tmp_path / "annotations.jsonl")
    return tmp_path


def test_full_pipeline(corpus_dir, capsys):
    d = corpus_dir
    assert main(["extract", "--samples", str(d / "samples.jsonl"), "--out", str(d / "statements.jsonl")]) == 0
    lines = [json.loads(l) for l in (d / "statements.jsonl").read_text().splitlines()]
    assert len(lines) == 4 * 4 + 4 * 5
    assert set(lines[0]) == {
        "sample_id", "index", "text", "normalized_text",
        "line_start", "line_end", "category", "category_no_call", "depth",
    }

    assert main([
        "analyze", "--samples", str(d / "samples.jsonl"), "--source", "ratings",
        "--annotations", str(d / "annotations.jsonl"), "--group", "by_order",
        "--out", str(d / "distribution.json"),
    ]) == 0
    dist = json.loads((d / "distribution.json").read_text())
    assert set(dist["groups"]) == {"first", "second", "third"}
    for cells in dist["groups"].values():
        assert abs(sum(cells.values()) - 1.0) < 1e-9

    assert main([
        "split", "--samples", str(d / "samples.jsonl"),
        "--annotations", str(d / "annotations.jsonl"),
        "--val-count", "1", "--seed", "13", "--out", str(d / "split.json"),
    ]) == 0
    split = json.loads((d / "split.json").read_text())
    assert sorted(split["test_ids"]) == ["s0", "s1"]
    assert len(split["train_ids"]) == 5 and len(split["val_ids"]) == 1

    assert main([
        "prompts", "--samples", str(d / "samples.jsonl"),
        "--annotations", str(d / "annotations.jsonl"),
        "--split", str(d / "split.json"),
        "--out", str(d / "prompts.jsonl"), "--text-out", str(d / "prompts.txt"),
    ]) == 0
    prompts = [json.loads(l) for l in (d / "prompts.jsonl").read_text().splitlines()]
    assert len(prompts) == 6  # train+val only
    assert all(p["training_text"].endswith("</s>") for p in prompts)

    assert main([
        "train-baseline", "--samples", str(d / "samples.jsonl"),
        "--annotations", str(d / "annotations.jsonl"),
        "--split", str(d / "split.json"), "--alpha", "0.5",
        "--out", str(d / "prior.json"),
    ]) == 0
    prior = json.loads((d / "prior.json").read_text())
    assert prior["funccall_mode"] == "on"

    assert main([
        "predict", "--samples", str(d / "samples.jsonl"),
        "--split", str(d / "split.json"), "--prior", str(d / "prior.json"),
        "--out", str(d / "predictions.jsonl"),
    ]) == 0
    preds = [json.loads(l) for l in (d / "predictions.jsonl").read_text().splitlines()]
    assert {p["sample_id"] for p in preds} == {"s0", "s1"}
    assert all(len(p["indices"]) <= 3 for p in preds)

    assert main([
        "evaluate", "--samples", str(d / "samples.jsonl"),
        "--annotations", str(d / "annotations.jsonl"),
        "--predictions", str(d / "predictions.jsonl"),
        "--split", str(d / "split.json"),
        "--out", str(d / "report.json"),
    ]) == 0
    report = json.loads((d / "report.json").read_text())
    assert set(report["histograms"]) == {"any_order", "in_order"}
    assert report["per_sample"]
    out = capsys.readouterr().out
    assert "any order" in out


def test_worked_example_through_evaluate(tmp_path, capsys):
    # a 14-statement method so the worked-example indices exist
    body = "\n".join(f"    v{i} = {i};" for i in range(13))
    code = "void f() {\n" + body + "\n}\n"
    save_samples([MethodSample(id="m", code=code, label=PrivacyLabel.OTHER)], tmp_path / "samples.jsonl")
    save_annotations([make_annotation("m", "A", [2, 3, 4], rationales=["r"])], tmp_path / "annotations.jsonl")
    (tmp_path / "predictions.jsonl").write_text(
        json.dumps({"sample_id": "m", "texts": [], "indices": [3, 4, 5]}) + "\n"
    )
    assert main([
        "evaluate", "--samples", str(tmp_path / "samples.jsonl"),
        "--annotations", str(tmp_path / "annotations.jsonl"),
        "--predictions", str(tmp_path / "predictions.jsonl"),
        "--out", str(tmp_path / "report.json"),
    ]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    row = report["per_sample"][0]
    assert (row["any_order"], row["in_order"]) == (2, 0)


def test_adapter_predict_path(corpus_dir):
    d = corpus_dir
    assert main([
        "predict", "--samples", str(d / "samples.jsonl"),
        "--adapter", adapter_cmd("const_adapter.py"),
        "--out", str(d / "predictions.jsonl"),
    ]) == 0
    preds = [json.loads(l) for l in (d / "predictions.jsonl").read_text().splitlines()]
    assert all(p["texts"] == ["x;"] for p in preds)
    assert all(p["indices"] == [None] for p in preds)  # "x;" matches nothing


def test_adapter_error_exit_code(corpus_dir):
    d = corpus_dir
    rc = main([
        "predict", "--samples", str(d / "samples.jsonl"),
        "--adapter", adapter_cmd("hanging_adapter.py"), "--timeout", "1",
        "--out", str(d / "predictions.jsonl"),
    ])
    assert rc == 3


def test_validation_error_exit_code(tmp_path):
    bad = tmp_path / "samples.jsonl"
    bad.write_text('{"id":"m1","code":"void f(){}","label":"Ads"}\n')
    assert main(["extract", "--samples", str(bad), "--out", str(tmp_path / "o.jsonl")]) == 1


def test_io_error_exit_code(tmp_path):
    assert main(["extract", "--samples", str(tmp_path / "missing.jsonl"), "--out", str(tmp_path / "o")]) == 2


def test_deterministic_outputs_except_meta(corpus_dir):
    d = corpus_dir
    for run in ("x", "y"):
        assert main([
            "analyze", "--samples", str(d / "samples.jsonl"),
            "--out", str(d / f"dist_{run}.json"),
        ]) == 0
    a = json.loads((d / "dist_x.json").read_text())
    b = json.loads((d / "dist_y.json").read_text())
    a_created = a["meta"].pop("created_at")
    b_created = b["meta"].pop("created_at")
    a["meta"]["config"].pop("out")
    b["meta"]["config"].pop("out")
    assert a == b
    assert a_created and b_created
    # JSONL outputs carry no timestamp at all: byte-identical
    for run in ("x", "y"):
        assert main([
            "extract", "--samples", str(d / "samples.jsonl"),
            "--out", str(d / f"st_{run}.jsonl"),
        ]) == 0
    assert (d / "st_x.jsonl").read_bytes() == (d / "st_y.jsonl").read_bytes()


def test_config_file_merged_under_flags(corpus_dir):
    d = corpus_dir
    config = d / "config.json"
    config.write_text(json.dumps({"val-count": 1, "seed": 99, "out": str(d / "from_config.json")}))
    assert main([
        "--config", str(config),
        "split", "--samples", str(d / "samples.jsonl"),
        "--annotations", str(d / "annotations.jsonl"),
        "--seed", "13",  # explicit flag beats the config value
    ]) == 0
    split = json.loads((d / "from_config.json").read_text())
    assert split["seed"] == 13
    assert len(split["val_ids"]) == 1
