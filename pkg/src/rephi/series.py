"""Series preparation: concatenation, PCA to 4 nodes, standardization
and binarization, permutation controls, and span-representation
extraction.

PCA is an eigendecomposition of the sample covariance with a
deterministic sign convention (each component's largest-magnitude
loading is positive; ties break to the lowest index). It is always fit
on the series it reduces, never on pooled data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNodeError

__all__ = ["ReducedSeries", "BinarySeries", "PermutationSpec",
           "concatenate_series", "pca_reduce", "standardize_binarize",
           "spatio_permute", "temporal_permute", "span_representation"]


@dataclass(frozen=True)
class ReducedSeries:
    scores: np.ndarray  # (T, k), column means zero
    pca_components: np.ndarray  # (k, D), orthonormal rows
    explained_variance: np.ndarray  # (k,), non-increasing
    column_means: np.ndarray  # (D,)


@dataclass(frozen=True)
class BinarySeries:
    bits: np.ndarray  # (T, k) over {0, 1}


@dataclass(frozen=True)
class PermutationSpec:
    kind: str  # Temporal | Spatio
    seed: int
    spatio_mode: str = "shared"  # shared | per_timepoint

    def __post_init__(self):
        if self.kind not in ("Temporal", "Spatio"):
            raise ValueError(f"bad permutation kind {self.kind!r}")
        if not 42 <= self.seed <= 51:
            raise ValueError(f"seed {self.seed} outside [42, 51]")
        if self.spatio_mode not in ("shared", "per_timepoint"):
            raise ValueError(f"bad spatio_mode {self.spatio_mode!r}")


def concatenate_series(items: list[np.ndarray]) -> np.ndarray:
    if not items:
        raise ValueError("no items to concatenate")
    d = items[0].shape[1]
    for m in items:
        if m.ndim != 2 or m.shape[1] != d:
            raise ValueError("all items must share the embedding dimension")
    return np.vstack(items)


def pca_reduce(x: np.ndarray, k: int = 4) -> ReducedSeries:
    x = np.asarray(x, dtype=np.float64)
    t, d = x.shape
    if t <= k:
        raise ValueError(f"need more than k={k} rows, got {t}")
    if d < k:
        raise ValueError(f"need at least k={k} columns, got {d}")
    means = x.mean(axis=0)
    centered = x - means
    cov = centered.T @ centered / (t - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:k]
    eigvals = eigvals[order]
    if eigvals[0] <= 0.0:
        raise ValueError("zero-variance input: covariance has rank 0")
    components = eigvecs[:, order].T  # (k, D)
    # Sign convention: largest-|loading| entry positive, ties lowest index.
    for i in range(k):
        j = int(np.argmax(np.abs(components[i])))
        if components[i, j] < 0:
            components[i] = -components[i]
    return ReducedSeries(
        scores=centered @ components.T,
        pca_components=components,
        explained_variance=np.maximum(eigvals, 0.0),
        column_means=means,
    )


def standardize_binarize(reduced: ReducedSeries) -> BinarySeries:
    """Per node: z-score across time, bit = 1 iff z > 0 strictly."""
    scores = reduced.scores
    std = scores.std(axis=0, ddof=0)
    for j in range(scores.shape[1]):
        if std[j] <= 0.0:
            raise DegenerateNodeError(j)
    z = (scores - scores.mean(axis=0)) / std
    return BinarySeries(bits=(z > 0.0).astype(np.int8))


def spatio_permute(x: np.ndarray, spec: PermutationSpec,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    if spec.kind != "Spatio":
        raise ValueError("spec.kind must be Spatio")
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    x = np.asarray(x)
    d = x.shape[1]
    if spec.spatio_mode == "shared":
        return x[:, rng.permutation(d)]
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        out[i] = x[i, rng.permutation(d)]
    return out


def temporal_permute(item_order: list, spec: PermutationSpec,
                     rng: np.random.Generator | None = None) -> list:
    """Seeded uniform shuffle of item order; tokens within each item keep
    their order."""
    if spec.kind != "Temporal":
        raise ValueError("spec.kind must be Temporal")
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    order = list(item_order)
    rng.shuffle(order)
    return order


def span_representation(reduced: ReducedSeries, s0: int, s1: int) -> np.ndarray:
    """[h_s0; h_s1; h_s0 * h_s1; h_s0 - h_s1] over the node dims."""
    scores = reduced.scores
    t = scores.shape[0]
    if not 0 <= s0 <= s1 < t:
        raise ValueError(f"span indices ({s0}, {s1}) out of range for T={t}")
    a, b = scores[s0], scores[s1]
    return np.concatenate([a, b, a * b, a - b])
