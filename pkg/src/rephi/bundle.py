"""Representation-bundle and span-annotation loading.

Bundle layout: a ``manifest.json`` plus one binary blob per
(item, layer). Blobs are raw little-endian IEEE-754 float32, row-major
(token-major), shape (n_tokens x embedding_dim). Everything is validated
on ingestion; matrices are promoted to float64 for downstream numerics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BundleLoadError, BundleValidationError, SpanError

TASKS = ("Hinting", "FalseBelief", "Irony", "StrangeStories2", "StrangeStories3")
SPAN_KINDS = ("Complement", "MSV")

__all__ = ["ItemRecord", "RepresentationBundle", "SpanAnnotationSet",
           "load_bundle", "write_bundle", "load_span_annotations",
           "valid_scores", "TASKS", "SPAN_KINDS"]


def valid_scores(task: str) -> tuple[int, ...]:
    return (0, 1, 2) if task == "StrangeStories3" else (0, 1)


@dataclass
class ItemRecord:
    id: str
    kind: str  # stimulus | response
    task: str
    sheet: str
    stimulus_id: str
    score: int | None
    augmented: bool
    n_tokens: int
    matrices: dict[int, np.ndarray]  # layer index -> (n_tokens x D) float64


@dataclass
class RepresentationBundle:
    model_name: str
    embedding_dim: int
    layer_indices: list[int]
    items: list[ItemRecord]
    # Actual layer number of the extra intermediate-to-deep sample
    # (floor(2L/3)); lets result rows label it "2/3" instead of 0..11.
    two_thirds_layer: int | None = None
    items_by_id: dict[str, ItemRecord] = field(init=False)

    def __post_init__(self):
        self.items_by_id = {it.id: it for it in self.items}

    def stimulus(self, stimulus_id: str) -> ItemRecord:
        for it in self.items:
            if it.kind == "stimulus" and it.stimulus_id == stimulus_id:
                return it
        raise KeyError(stimulus_id)

    def responses(self, stimulus_id: str, score: int | None = None) -> list[ItemRecord]:
        return [it for it in self.items
                if it.kind == "response" and it.stimulus_id == stimulus_id
                and (score is None or it.score == score)]


def _validate_item_meta(meta: dict) -> None:
    if meta["kind"] not in ("stimulus", "response"):
        raise BundleValidationError(f"item {meta['id']}: unknown kind {meta['kind']!r}")
    if meta["task"] not in TASKS:
        raise BundleValidationError(f"item {meta['id']}: unknown task {meta['task']!r}")
    score = meta.get("score")
    if meta["kind"] == "response":
        if score is None:
            raise BundleValidationError(f"response {meta['id']} lacks a score")
        if score not in valid_scores(meta["task"]):
            raise BundleValidationError(
                f"response {meta['id']}: score {score} invalid for task {meta['task']}")
    else:
        if score is not None:
            raise BundleValidationError(f"stimulus {meta['id']} carries a score")
        if meta.get("augmented"):
            raise BundleValidationError(f"stimulus {meta['id']} marked augmented")
    if meta["n_tokens"] < 1:
        raise BundleValidationError(f"item {meta['id']}: n_tokens must be positive")


def load_bundle(path: str | Path) -> RepresentationBundle:
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise BundleLoadError(f"missing manifest: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise BundleLoadError(f"unparseable manifest: {e}") from e

    for key in ("model_name", "embedding_dim", "layer_indices", "items"):
        if key not in manifest:
            raise BundleValidationError(f"manifest missing field {key!r}")
    dim = int(manifest["embedding_dim"])
    if dim < 1:
        raise BundleValidationError("embedding_dim must be positive")
    layers = [int(x) for x in manifest["layer_indices"]]
    if any(b <= a for a, b in zip(layers, layers[1:])):
        raise BundleValidationError("layer_indices must be strictly increasing")

    items = []
    for meta in manifest["items"]:
        _validate_item_meta(meta)
        n_tokens = int(meta["n_tokens"])
        blobs = meta.get("blobs", {})
        matrices = {}
        for layer in layers:
            rel = blobs.get(str(layer), blobs.get(layer))
            if rel is None:
                raise BundleLoadError(
                    f"item {meta['id']}: no blob for layer {layer}")
            blob_path = root / rel
            if not blob_path.is_file():
                raise BundleLoadError(
                    f"item {meta['id']}, layer {layer}: missing blob {rel}")
            raw = blob_path.read_bytes()
            expected = n_tokens * dim * 4
            if len(raw) != expected:
                raise BundleValidationError(
                    f"item {meta['id']}, layer {layer}: blob is {len(raw)} "
                    f"bytes, expected {expected}")
            mat = np.frombuffer(raw, dtype="<f4").reshape(n_tokens, dim)
            if not np.all(np.isfinite(mat)):
                raise BundleValidationError(
                    f"item {meta['id']}, layer {layer}: non-finite values")
            matrices[layer] = mat.astype(np.float64)
        items.append(ItemRecord(
            id=str(meta["id"]), kind=meta["kind"], task=meta["task"],
            sheet=str(meta["sheet"]), stimulus_id=str(meta["stimulus_id"]),
            score=meta.get("score"), augmented=bool(meta.get("augmented", False)),
            n_tokens=n_tokens, matrices=matrices,
        ))
    ids = [it.id for it in items]
    if len(set(ids)) != len(ids):
        raise BundleValidationError("duplicate item ids")
    two_thirds = manifest.get("two_thirds_layer")
    if two_thirds is not None:
        two_thirds = int(two_thirds)
        if two_thirds not in layers:
            raise BundleValidationError(
                f"two_thirds_layer {two_thirds} not among layer_indices")
    return RepresentationBundle(
        model_name=str(manifest["model_name"]),
        embedding_dim=dim, layer_indices=layers, items=items,
        two_thirds_layer=two_thirds,
    )


def write_bundle(bundle: RepresentationBundle, path: str | Path) -> None:
    """Materialize a bundle directory (manifest + float32 blobs)."""
    root = Path(path)
    (root / "blobs").mkdir(parents=True, exist_ok=True)
    items_meta = []
    for it in bundle.items:
        blobs = {}
        for layer, mat in sorted(it.matrices.items()):
            rel = f"blobs/{it.id}_L{layer}.f32"
            data = np.ascontiguousarray(mat, dtype="<f4").tobytes()
            (root / rel).write_bytes(data)
            blobs[str(layer)] = rel
        meta = {
            "id": it.id, "kind": it.kind, "task": it.task, "sheet": it.sheet,
            "stimulus_id": it.stimulus_id, "augmented": it.augmented,
            "n_tokens": it.n_tokens, "blobs": blobs,
        }
        if it.score is not None:
            meta["score"] = it.score
        items_meta.append(meta)
    manifest = {
        "model_name": bundle.model_name,
        "embedding_dim": bundle.embedding_dim,
        "layer_indices": bundle.layer_indices,
        "items": items_meta,
    }
    if bundle.two_thirds_layer is not None:
        manifest["two_thirds_layer"] = bundle.two_thirds_layer
    (root / "manifest.json").write_text(json.dumps(manifest, indent=1))


@dataclass
class SpanAnnotationSet:
    """Per-stimulus interested and context spans, inclusive token ranges."""
    spans: dict[str, dict[str, list[tuple[int, int]]]]
    # spans[stimulus_id][key] with key in
    # {complement, msv, complement_context, msv_context}

    def interested(self, stimulus_id: str, kind: str) -> list[tuple[int, int]]:
        return self.spans.get(stimulus_id, {}).get(kind.lower(), [])

    def context(self, stimulus_id: str, kind: str) -> list[tuple[int, int]]:
        return self.spans.get(stimulus_id, {}).get(f"{kind.lower()}_context", [])


_SPAN_KEYS = ("complement", "msv", "complement_context", "msv_context")


def load_span_annotations(path: str | Path,
                          bundle: RepresentationBundle | None = None
                          ) -> SpanAnnotationSet:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise BundleLoadError(f"unreadable span annotations: {e}") from e
    out: dict[str, dict[str, list[tuple[int, int]]]] = {}
    for stim_id, entry in doc.items():
        n_tokens = None
        if bundle is not None:
            n_tokens = bundle.stimulus(stim_id).n_tokens
        parsed = {}
        for key in _SPAN_KEYS:
            spans = []
            for pair in entry.get(key, []):
                p, q = int(pair[0]), int(pair[1])
                if q < p:
                    raise SpanError(f"{stim_id}/{key}: inverted span [{p}, {q}]")
                if p < 0 or (n_tokens is not None and q >= n_tokens):
                    raise SpanError(
                        f"{stim_id}/{key}: span [{p}, {q}] out of range "
                        f"(n_tokens={n_tokens})")
                spans.append((p, q))
            parsed[key] = spans
        out[stim_id] = parsed
    return SpanAnnotationSet(out)
