"""Attended response representations.

A response token matrix is re-expressed as attention-weighted
combinations of stimulus token representations: scaled dot-product
scores, optional span masking over stimulus columns, row-wise softmax,
then the weighted sum. Masks multiply raw scores before the softmax,
even negative ones (the literal masking semantics; note that scaling a
negative score by a small factor increases its post-softmax weight).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MaskConfig", "attention_scores", "apply_span_masks",
           "attention_weights", "attended_response"]


@dataclass(frozen=True)
class MaskConfig:
    m_interested: float = 1.0
    m_context: float = 0.6
    m_nonrelevant: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.m_nonrelevant < self.m_context <= self.m_interested:
            raise ValueError(
                "mask values must satisfy 0 < nonrelevant < context <= interested")


def attention_scores(response: np.ndarray, stimulus: np.ndarray) -> np.ndarray:
    """S[i, j] = <response_i, stimulus_j> / sqrt(D)."""
    response = np.asarray(response, dtype=np.float64)
    stimulus = np.asarray(stimulus, dtype=np.float64)
    if response.ndim != 2 or stimulus.ndim != 2:
        raise ValueError("token matrices must be 2-D")
    if response.shape[1] != stimulus.shape[1]:
        raise ValueError(
            f"dimension mismatch: D={response.shape[1]} vs {stimulus.shape[1]}")
    if not (np.all(np.isfinite(response)) and np.all(np.isfinite(stimulus))):
        raise ValueError("non-finite input")
    d = response.shape[1]
    if d < 1:
        raise ValueError("D must be at least 1")
    return response @ stimulus.T / np.sqrt(d)


def apply_span_masks(scores: np.ndarray,
                     spans: list[tuple[int, int]],
                     contexts: list[tuple[int, int]],
                     cfg: MaskConfig = MaskConfig()) -> np.ndarray:
    """Column-wise mask: interested spans keep full weight and win over
    contexts; context columns get m_context; everything else
    m_nonrelevant. Spans are inclusive [p, q] stimulus-token ranges."""
    scores = np.asarray(scores, dtype=np.float64)
    n_cols = scores.shape[1]
    mask = np.full(n_cols, cfg.m_nonrelevant)
    for p, q in contexts:
        if p < 0 or q >= n_cols or q < p:
            raise ValueError(f"context span [{p}, {q}] out of range")
        mask[p:q + 1] = cfg.m_context
    for p, q in spans:
        if p < 0 or q >= n_cols or q < p:
            raise ValueError(f"span [{p}, {q}] out of range")
        mask[p:q + 1] = cfg.m_interested
    return scores * mask


def attention_weights(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape[1] == 0:
        raise ValueError("empty stimulus: no columns to attend over")
    if not np.all(np.isfinite(scores)):
        raise ValueError("non-finite scores")
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def attended_response(weights: np.ndarray, stimulus: np.ndarray) -> np.ndarray:
    """Each output row is the convex combination of stimulus rows."""
    weights = np.asarray(weights, dtype=np.float64)
    stimulus = np.asarray(stimulus, dtype=np.float64)
    if weights.shape[1] != stimulus.shape[0]:
        raise ValueError(
            f"weights have {weights.shape[1]} columns but stimulus has "
            f"{stimulus.shape[0]} rows")
    return weights @ stimulus
