"""Deterministic byte-level tokenizer for locally built test models.

Each UTF-8 byte of the input text is one token id (0..255). Model
vocabularies only need 256 entries plus any special ids the config
reserves. Real hub tokenizers can be substituted via the ``tokenizer``
hook on ExtractionJob; this default keeps extraction fully offline and
reproducible.
"""

from __future__ import annotations


class ByteTokenizer:
    name = "byte-v1"
    vocab_size = 256

    def encode(self, text: str) -> list[int]:
        if not text:
            raise ValueError("empty text")
        return list(text.encode("utf-8"))
