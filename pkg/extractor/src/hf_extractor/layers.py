"""Layer sampling: 12 evenly spaced layers from first to last block
(inclusive) plus the intermediate-to-deep floor(2L/3) layer. Layers are
numbered 1..L (block outputs), matching hidden-state index l."""

from __future__ import annotations


def two_thirds_layer(n_layers: int) -> int:
    """The extra intermediate-to-deep sample: floor(2L/3)."""
    return (2 * n_layers) // 3


def sample_layers(n_layers: int) -> list[int]:
    """Evenly spaced layer numbers layer(i) = round(1 + i*(L-1)/11) for
    i = 0..11, plus floor(2L/3); deduplicated and sorted.

    i*(L-1)/11 never lands exactly on .5 (the denominator is 11), so
    rounding is unambiguous.
    """
    if n_layers < 12:
        raise ValueError(f"need at least 12 layers, got {n_layers}")
    evenly = [round(1 + i * (n_layers - 1) / 11) for i in range(12)]
    return sorted(set(evenly) | {two_thirds_layer(n_layers)})
