"""Bundle and span-annotation loading: round-trips and validation."""

import json

import numpy as np
import pytest

from rephi.bundle import (
    ItemRecord,
    RepresentationBundle,
    load_bundle,
    load_span_annotations,
    valid_scores,
    write_bundle,
)
from rephi.errors import BundleLoadError, BundleValidationError, SpanError


def test_valid_scores():
    assert valid_scores("Hinting") == (0, 1)
    assert valid_scores("StrangeStories3") == (0, 1, 2)


def _tiny_bundle(rng):
    def item(id, kind, stim, score=None, aug=False, n=6):
        return ItemRecord(
            id=id, kind=kind, task="Hinting", sheet="sheet1",
            stimulus_id=stim, score=score, augmented=aug, n_tokens=n,
            matrices={3: rng.normal(size=(n, 4)).astype(np.float32)
                      .astype(np.float64),
                      7: rng.normal(size=(n, 4)).astype(np.float32)
                      .astype(np.float64)},
        )

    return RepresentationBundle(
        model_name="tiny", embedding_dim=4, layer_indices=[3, 7],
        items=[item("st", "stimulus", "st"),
               item("r0", "response", "st", score=0),
               item("r1", "response", "st", score=1, aug=True)],
        two_thirds_layer=7,
    )


def test_write_load_roundtrip(tmp_path):
    rng = np.random.default_rng(80)
    bundle = _tiny_bundle(rng)
    write_bundle(bundle, tmp_path / "b")
    loaded = load_bundle(tmp_path / "b")
    assert loaded.model_name == "tiny"
    assert loaded.layer_indices == [3, 7]
    assert loaded.two_thirds_layer == 7
    assert [it.id for it in loaded.items] == ["st", "r0", "r1"]
    for orig, back in zip(bundle.items, loaded.items):
        for layer in (3, 7):
            assert np.array_equal(orig.matrices[layer], back.matrices[layer])
    # Writing the loaded bundle again is byte-identical.
    write_bundle(loaded, tmp_path / "b2")
    assert (tmp_path / "b/manifest.json").read_bytes() \
        == (tmp_path / "b2/manifest.json").read_bytes()
    for blob in sorted((tmp_path / "b/blobs").iterdir()):
        assert blob.read_bytes() \
            == (tmp_path / "b2/blobs" / blob.name).read_bytes()


def test_accessors(tmp_path):
    bundle = _tiny_bundle(np.random.default_rng(81))
    assert bundle.stimulus("st").id == "st"
    assert [r.id for r in bundle.responses("st")] == ["r0", "r1"]
    assert [r.id for r in bundle.responses("st", score=1)] == ["r1"]
    with pytest.raises(KeyError):
        bundle.stimulus("missing")


def _write_and_patch(tmp_path, patch):
    rng = np.random.default_rng(82)
    write_bundle(_tiny_bundle(rng), tmp_path / "b")
    manifest = json.loads((tmp_path / "b/manifest.json").read_text())
    patch(manifest, tmp_path / "b")
    (tmp_path / "b/manifest.json").write_text(json.dumps(manifest))
    return tmp_path / "b"


def test_missing_manifest(tmp_path):
    with pytest.raises(BundleLoadError):
        load_bundle(tmp_path)


def test_validation_failures(tmp_path):
    cases = {
        "layers": lambda m, root: m.update(layer_indices=[7, 3]),
        "dup": lambda m, root: m["items"].append(dict(m["items"][0])),
        "score_on_stim": lambda m, root: m["items"][0].update(score=1),
        "bad_score": lambda m, root: m["items"][1].update(score=5),
        "no_score": lambda m, root: m["items"][1].pop("score"),
        "bad_task": lambda m, root: m["items"][0].update(task="Quiz"),
        "two_thirds": lambda m, root: m.update(two_thirds_layer=5),
        "aug_stim": lambda m, root: m["items"][0].update(augmented=True),
    }
    for name, patch in cases.items():
        with pytest.raises(BundleValidationError):
            load_bundle(_write_and_patch(tmp_path / name, patch))


def test_blob_size_mismatch(tmp_path):
    root = _write_and_patch(tmp_path, lambda m, root: None)
    blob = next((root / "blobs").iterdir())
    blob.write_bytes(blob.read_bytes()[:-4])
    with pytest.raises(BundleValidationError):
        load_bundle(root)


def test_missing_blob(tmp_path):
    root = _write_and_patch(tmp_path, lambda m, root: None)
    next((root / "blobs").iterdir()).unlink()
    with pytest.raises(BundleLoadError):
        load_bundle(root)


def test_non_finite_blob(tmp_path):
    root = _write_and_patch(tmp_path, lambda m, root: None)
    blob = next((root / "blobs").iterdir())
    data = np.frombuffer(blob.read_bytes(), dtype="<f4").copy()
    data[0] = np.nan
    blob.write_bytes(data.tobytes())
    with pytest.raises(BundleValidationError):
        load_bundle(root)


def test_span_annotations(tmp_path):
    rng = np.random.default_rng(83)
    write_bundle(_tiny_bundle(rng), tmp_path / "b")
    bundle = load_bundle(tmp_path / "b")
    doc = {"st": {"complement": [[1, 3]], "complement_context": [[0, 0]],
                  "msv": [[2, 2]]}}
    path = tmp_path / "spans.json"
    path.write_text(json.dumps(doc))
    spans = load_span_annotations(path, bundle)
    assert spans.interested("st", "Complement") == [(1, 3)]
    assert spans.context("st", "Complement") == [(0, 0)]
    assert spans.interested("st", "MSV") == [(2, 2)]
    assert spans.context("st", "MSV") == []
    assert spans.interested("other", "MSV") == []


def test_span_annotation_errors(tmp_path):
    rng = np.random.default_rng(84)
    write_bundle(_tiny_bundle(rng), tmp_path / "b")
    bundle = load_bundle(tmp_path / "b")
    path = tmp_path / "spans.json"
    path.write_text(json.dumps({"st": {"complement": [[3, 1]]}}))
    with pytest.raises(SpanError):
        load_span_annotations(path, bundle)
    path.write_text(json.dumps({"st": {"msv": [[0, 99]]}}))
    with pytest.raises(SpanError):
        load_span_annotations(path, bundle)
    path.write_text("{not json")
    with pytest.raises(BundleLoadError):
        load_span_annotations(path, bundle)


def test_fixture_bundle_loads(fixture_bundle_path, fixture_spans_path):
    bundle = load_bundle(fixture_bundle_path)
    assert bundle.embedding_dim == 8
    assert len([i for i in bundle.items if i.kind == "stimulus"]) == 2
    spans = load_span_annotations(fixture_spans_path, bundle)
    for stim in ("stim0", "stim1"):
        assert spans.interested(stim, "Complement")
        assert spans.interested(stim, "MSV")
