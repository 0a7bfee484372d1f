"""Extracts per-layer transformer hidden states for stimulus/response
texts and writes representation-bundle directories (manifest.json plus
one raw little-endian float32 blob per item and sampled layer)."""

from .extraction import ExtractionJob, extract
from .layers import sample_layers, two_thirds_layer
from .tokenization import ByteTokenizer

__all__ = ["ExtractionJob", "extract", "sample_layers", "two_thirds_layer",
           "ByteTokenizer"]
