"""
Span-masked attention over a stimulus
======================================

Response tokens attend to stimulus tokens with scaled dot-product
attention.  Before the softmax, each stimulus column is scaled by a
mask value that depends on which span it falls in: interested spans
keep full weight (1.0), context spans are damped to 0.6, and everything
else to 0.2.  Interested spans take precedence where spans overlap.
"""

import numpy as np

from rephi.attention import (MaskConfig, apply_span_masks, attended_response,
                             attention_scores, attention_weights)

rng = np.random.default_rng(1)
response = rng.normal(size=(4, 8))    # 4 response tokens, dim 8
stimulus = rng.normal(size=(10, 8))   # 10 stimulus tokens

# Raw scores are (response . stimulus^T) / sqrt(dim).
scores = attention_scores(response, stimulus)
print("score matrix shape:", scores.shape)

# Mark stimulus tokens 2..4 as the interested span and 2..7 as context.
# The mask column pattern is: nonrelevant, nonrelevant, interested x3,
# context x3, nonrelevant x2 - interested wins inside the overlap.
cfg = MaskConfig()
print("mask constants:", cfg.m_interested, cfg.m_context, cfg.m_nonrelevant)
masked = apply_span_masks(scores, spans=[(2, 4)], contexts=[(2, 7)])
print("effective column mask:", (masked / scores)[0].round(2))

# Softmax rows always sum to one, masked or not.
weights = attention_weights(masked)
print("row sums:", weights.sum(axis=1))

# A full-coverage interested span multiplies every column by exactly
# 1.0, so the result is bit-for-bit identical to the unmasked scores.
identity = apply_span_masks(scores, spans=[(0, 9)], contexts=[])
print("all-ones mask is exact:", np.array_equal(identity, scores))

# Attended responses are convex combinations of stimulus rows, so every
# coordinate stays inside the stimulus's per-coordinate range.
out = attended_response(weights, stimulus)
inside = np.all(out >= stimulus.min(0)) and np.all(out <= stimulus.max(0))
print("attended rows inside the stimulus hull:", inside)
