"""Extraction of per-layer hidden states into a bundle directory.

The output layout matches the analysis side's bundle contract:
``manifest.json`` plus one raw little-endian float32 blob of shape
(n_tokens x embedding_dim) per (item, layer). File writes are atomic
(write to a temp name in the same directory, then rename).
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModel

from .layers import sample_layers, two_thirds_layer
from .tokenization import ByteTokenizer

_CSV_COLUMNS = ("id", "kind", "task", "sheet", "stimulus_id", "score",
                "augmented", "text")
_TRUE = ("1", "true", "yes")


@dataclass
class ExtractionJob:
    model_id: str               # hub id or local model directory
    data_path: str              # CSV with columns _CSV_COLUMNS
    out_path: str               # bundle directory to create
    layers: str | list[int] = "auto"   # "auto" -> sample_layers(L)
    tokenizer: object = field(default_factory=ByteTokenizer)


def _read_dataset(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"dataset missing columns: {sorted(missing)}")
        rows = list(reader)
    if not rows:
        raise ValueError("empty dataset")
    for row in rows:
        if not row["text"]:
            raise ValueError(f"item {row['id']}: empty text")
    return rows


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def extract(job: ExtractionJob) -> Path:
    """Run the job; returns the output bundle directory.

    Items whose extraction fails are reported in the manifest's
    ``errors`` list and the manifest is marked ``"incomplete": true``.
    """
    rows = _read_dataset(job.data_path)
    model = AutoModel.from_pretrained(job.model_id).eval()
    n_layers = int(model.config.num_hidden_layers)
    if n_layers < 12:
        raise ValueError(f"model has {n_layers} layers; need at least 12")
    layers = sample_layers(n_layers) if job.layers == "auto" \
        else sorted(set(int(x) for x in job.layers))
    if any(l < 1 or l > n_layers for l in layers):
        raise ValueError(f"layer out of range 1..{n_layers}: {layers}")

    root = Path(job.out_path)
    (root / "blobs").mkdir(parents=True, exist_ok=True)
    items_meta, errors = [], []
    for row in rows:
        try:
            items_meta.append(_extract_item(row, model, layers,
                                            job.tokenizer, root))
        except Exception as exc:  # per-item failures keep the batch going
            errors.append({"id": row["id"], "error": str(exc)})

    manifest = {
        "model_name": str(model.config.name_or_path) or job.model_id,
        "tokenizer": getattr(job.tokenizer, "name", type(job.tokenizer).__name__),
        "embedding_dim": int(model.config.hidden_size),
        "layer_indices": layers,
        "precision": str(model.dtype).removeprefix("torch."),
        "items": items_meta,
    }
    ttl = two_thirds_layer(n_layers)
    if ttl in layers:
        manifest["two_thirds_layer"] = ttl
    if errors:
        manifest["incomplete"] = True
        manifest["errors"] = errors
    _atomic_write(root / "manifest.json",
                  json.dumps(manifest, indent=1).encode())
    return root


def _extract_item(row: dict, model, layers: list[int], tokenizer,
                  root: Path) -> dict:
    ids = tokenizer.encode(row["text"])
    with torch.no_grad():
        out = model(torch.tensor([ids]), output_hidden_states=True)
    # hidden_states[0] is the embedding output; hidden_states[l] is the
    # output of block l, so layer number l maps directly to index l.
    blobs = {}
    for layer in layers:
        mat = out.hidden_states[layer][0].to(torch.float32).numpy()
        rel = f"blobs/{row['id']}_L{layer}.f32"
        _atomic_write(root / rel,
                      np.ascontiguousarray(mat, dtype="<f4").tobytes())
        blobs[str(layer)] = rel
    meta = {
        "id": row["id"], "kind": row["kind"], "task": row["task"],
        "sheet": row["sheet"], "stimulus_id": row["stimulus_id"],
        "augmented": row["augmented"].strip().lower() in _TRUE,
        "n_tokens": len(ids), "blobs": blobs,
    }
    if row["score"].strip():
        meta["score"] = int(row["score"])
    return meta
