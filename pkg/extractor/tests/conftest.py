import csv

import pytest
import torch
from transformers import GPT2Config, GPT2Model


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A seeded, randomly initialized 12-layer model saved locally so
    tests never touch the network."""
    torch.manual_seed(20260826)
    cfg = GPT2Config(vocab_size=256, n_positions=512, n_embd=32,
                     n_layer=12, n_head=4,
                     bos_token_id=None, eos_token_id=None)
    model = GPT2Model(cfg).eval()
    path = tmp_path_factory.mktemp("model") / "tiny"
    model.save_pretrained(path)
    return path


@pytest.fixture(scope="session")
def dataset_csv(tmp_path_factory):
    rows = [
        {"id": "stim1", "kind": "stimulus", "task": "Hinting", "sheet": "A",
         "stimulus_id": "stim1", "score": "", "augmented": "0",
         "text": "The keys are right there on the table."},
        {"id": "resp1", "kind": "response", "task": "Hinting", "sheet": "A",
         "stimulus_id": "stim1", "score": "1", "augmented": "0",
         "text": "She wants him to fetch the keys."},
        {"id": "resp2", "kind": "response", "task": "Hinting", "sheet": "A",
         "stimulus_id": "stim1", "score": "0", "augmented": "1",
         "text": "The table is made of wood."},
    ]
    path = tmp_path_factory.mktemp("data") / "items.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    return path
