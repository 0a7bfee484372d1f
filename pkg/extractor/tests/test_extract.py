import csv
import json
import subprocess

import numpy as np
import pytest

from hf_extractor.cli import main as cli_main
from hf_extractor.extraction import ExtractionJob, extract
from hf_extractor.tokenization import ByteTokenizer


def _tree_bytes(root):
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_extraction_round_trip(tiny_model_dir, dataset_csv, tmp_path):
    out_a = extract(ExtractionJob(str(tiny_model_dir), str(dataset_csv),
                                  str(tmp_path / "a")))
    out_b = extract(ExtractionJob(str(tiny_model_dir), str(dataset_csv),
                                  str(tmp_path / "b")))
    assert _tree_bytes(out_a) == _tree_bytes(out_b)

    manifest = json.loads((out_a / "manifest.json").read_text())
    assert manifest["layer_indices"] == list(range(1, 13))
    assert manifest["two_thirds_layer"] == 8
    assert manifest["embedding_dim"] == 32
    assert manifest["tokenizer"] == "byte-v1"
    assert "incomplete" not in manifest

    # Blob row count equals the tokenizer's token count.
    tok = ByteTokenizer()
    with open(dataset_csv, newline="") as fh:
        texts = {r["id"]: r["text"] for r in csv.DictReader(fh)}
    for meta in manifest["items"]:
        n = len(tok.encode(texts[meta["id"]]))
        assert meta["n_tokens"] == n
        blob = (out_a / meta["blobs"]["1"]).read_bytes()
        assert len(blob) == n * 32 * 4
        assert np.isfinite(np.frombuffer(blob, dtype="<f4")).all()


def test_bundle_passes_analysis_side_validate(tiny_model_dir, dataset_csv,
                                              tmp_path):
    out = extract(ExtractionJob(str(tiny_model_dir), str(dataset_csv),
                                str(tmp_path / "bundle")))
    proc = subprocess.run(["rephi", "validate", "--bundle", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr


def test_explicit_layer_selection(tiny_model_dir, dataset_csv, tmp_path):
    out = extract(ExtractionJob(str(tiny_model_dir), str(dataset_csv),
                                str(tmp_path / "c"), layers=[3, 7]))
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["layer_indices"] == [3, 7]
    assert "two_thirds_layer" not in manifest  # 8 was not extracted
    with pytest.raises(ValueError):
        extract(ExtractionJob(str(tiny_model_dir), str(dataset_csv),
                              str(tmp_path / "d"), layers=[0, 5]))


def test_bad_dataset_rejected(tiny_model_dir, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,kind,task\nx,stimulus,Hinting\n")
    with pytest.raises(ValueError, match="missing columns"):
        extract(ExtractionJob(str(tiny_model_dir), str(path),
                              str(tmp_path / "out")))
    empty = tmp_path / "empty.csv"
    empty.write_text("id,kind,task,sheet,stimulus_id,score,augmented,text\n")
    with pytest.raises(ValueError, match="empty dataset"):
        extract(ExtractionJob(str(tiny_model_dir), str(empty),
                              str(tmp_path / "out2")))


def test_per_item_failures_mark_incomplete(tiny_model_dir, tmp_path):
    path = tmp_path / "mixed.csv"
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["id", "kind", "task", "sheet",
                                           "stimulus_id", "score",
                                           "augmented", "text"])
        w.writeheader()
        w.writerow({"id": "ok", "kind": "stimulus", "task": "Hinting",
                    "sheet": "A", "stimulus_id": "ok", "score": "",
                    "augmented": "0", "text": "fine"})
        w.writerow({"id": "broken", "kind": "response", "task": "Hinting",
                    "sheet": "A", "stimulus_id": "ok", "score": "not-an-int",
                    "augmented": "0", "text": "fails at score parsing"})
    out = extract(ExtractionJob(str(tiny_model_dir), str(path),
                                str(tmp_path / "out")))
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["incomplete"] is True
    assert [e["id"] for e in manifest["errors"]] == ["broken"]
    assert [m["id"] for m in manifest["items"]] == ["ok"]


def test_cli(tiny_model_dir, dataset_csv, tmp_path, capsys):
    rc = cli_main(["--model", str(tiny_model_dir), "--data", str(dataset_csv),
                   "--out", str(tmp_path / "cli_out"), "--layers", "auto"])
    assert rc == 0
    assert "ok:" in capsys.readouterr().out
    assert (tmp_path / "cli_out" / "manifest.json").is_file()
    rc = cli_main(["--model", str(tiny_model_dir),
                   "--data", str(tmp_path / "nope.csv"),
                   "--out", str(tmp_path / "x")])
    assert rc == 2


def test_acceptance_extractor(tiny_model_dir, dataset_csv, tmp_path):
    """One summary line for the extractor's top-level guarantees."""
    from hf_extractor.layers import sample_layers
    ok = sample_layers(32)[-5:] == [21, 24, 26, 29, 32]
    ok &= set(sample_layers(80)) >= {53, 80}
    out_a = extract(ExtractionJob(str(tiny_model_dir), str(dataset_csv),
                                  str(tmp_path / "a")))
    out_b = extract(ExtractionJob(str(tiny_model_dir), str(dataset_csv),
                                  str(tmp_path / "b")))
    ok &= _tree_bytes(out_a) == _tree_bytes(out_b)
    proc = subprocess.run(["rephi", "validate", "--bundle", str(out_a)],
                          capture_output=True)
    ok &= proc.returncode == 0
    print(f"[acceptance] extractor (layers, validate round-trip): "
          f"{'PASS' if ok else 'FAIL'}")
    assert ok
