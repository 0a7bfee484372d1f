"""State encoding, empirical TPMs, conditional-independence distance,
the first-order Markov test, and the token-budget search.

States are little-endian over the 4 node bits. TPM rows for unvisited
states are set to the uniform distribution (maximum entropy), keeping
downstream repertoire algebra well defined.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .errors import DegenerateNodeError, MarkovTestUndefinedError
from .series import (
    BinarySeries,
    PermutationSpec,
    concatenate_series,
    pca_reduce,
    spatio_permute,
    standardize_binarize,
    temporal_permute,
)

N_STATES = 16
N_NODES = 4

__all__ = ["Tpm", "SearchOutcome", "encode_states", "decode_state",
           "build_tpm", "conditional_independence_distance",
           "markov_property_test", "search_optimal_series", "derive_rng"]


@dataclass(frozen=True)
class Tpm:
    state_by_state: np.ndarray  # (16, 16), row-stochastic
    state_by_node: np.ndarray  # (16, 4)
    visited: np.ndarray  # (16,) bool
    counts: np.ndarray  # (16, 16) int


@dataclass(frozen=True)
class SearchOutcome:
    t_i: int
    actual_tokens: int
    item_ids: tuple[str, ...]
    d_i: float
    p_i: float
    states: np.ndarray
    tpm: Tpm
    reduced: "object"  # the winning ReducedSeries


def encode_states(series: BinarySeries) -> np.ndarray:
    bits = np.asarray(series.bits)
    if bits.shape[1] != N_NODES:
        raise ValueError("expected 4 node columns")
    return (bits * (1 << np.arange(N_NODES))).sum(axis=1).astype(np.int64)


def decode_state(state: int) -> tuple[int, ...]:
    return tuple((state >> j) & 1 for j in range(N_NODES))


def build_tpm(states: np.ndarray) -> Tpm:
    states = np.asarray(states, dtype=np.int64)
    if states.size < 2:
        raise ValueError("need at least 2 states")
    counts = np.zeros((N_STATES, N_STATES), dtype=np.int64)
    np.add.at(counts, (states[:-1], states[1:]), 1)
    row_sums = counts.sum(axis=1)
    visited = row_sums > 0
    sbs = np.full((N_STATES, N_STATES), 1.0 / N_STATES)
    sbs[visited] = counts[visited] / row_sums[visited, None]
    on_bits = (np.arange(N_STATES)[:, None] >> np.arange(N_NODES)[None, :]) & 1
    sbn = sbs @ on_bits
    return Tpm(state_by_state=sbs, state_by_node=sbn,
               visited=visited, counts=counts)


def conditional_independence_distance(tpm: Tpm) -> float:
    """Percent L1 gap between the TPM and its conditionally independent
    (product-of-node-marginals) reconstruction, over visited rows."""
    visited = np.flatnonzero(tpm.visited)
    if visited.size == 0:
        raise ValueError("no visited rows")
    sbn = tpm.state_by_node
    on_bits = (np.arange(N_STATES)[None, :] >> np.arange(N_NODES)[:, None]) & 1
    p_ci = np.ones((N_STATES, N_STATES))
    for j in range(N_NODES):
        p_ci *= np.where(on_bits[j][None, :], sbn[:, j:j + 1], 1.0 - sbn[:, j:j + 1])
    gap = np.abs(tpm.state_by_state[visited] - p_ci[visited]).sum()
    return float(100.0 * gap / visited.size)


def markov_property_test(states: np.ndarray) -> float:
    """Likelihood-ratio G-test of first- vs second-order dependence.

    G = 2 sum n(a,b,c) ln[p(c|a,b)/p(c|b)] over observed triples, with
    df summed per middle symbol b: (r_b - 1)(c_b - 1) for r_b observed
    predecessor contexts and c_b observed successors.
    """
    states = np.asarray(states, dtype=np.int64)
    if states.size < 3:
        raise ValueError("need at least 3 states")
    transitions = set(zip(states[:-1].tolist(), states[1:].tolist()))
    if len(transitions) < 2:
        raise MarkovTestUndefinedError(
            "fewer than 2 distinct observed transitions")
    n_abc: dict[tuple[int, int, int], int] = {}
    for a, b, c in zip(states[:-2], states[1:-1], states[2:]):
        key = (int(a), int(b), int(c))
        n_abc[key] = n_abc.get(key, 0) + 1
    n_ab: dict[tuple[int, int], int] = {}
    n_bc: dict[tuple[int, int], int] = {}
    n_b: dict[int, int] = {}
    for (a, b, c), n in n_abc.items():
        n_ab[a, b] = n_ab.get((a, b), 0) + n
        n_bc[b, c] = n_bc.get((b, c), 0) + n
        n_b[b] = n_b.get(b, 0) + n
    g = 0.0
    for (a, b, c), n in n_abc.items():
        p2 = n / n_ab[a, b]
        p1 = n_bc[b, c] / n_b[b]
        g += 2.0 * n * np.log(p2 / p1)
    df = 0
    for b in n_b:
        r_b = len({a for (a, bb) in n_ab if bb == b})
        c_b = len({c for (bb, c) in n_bc if bb == b})
        df += (r_b - 1) * (c_b - 1)
    if df <= 0:
        return 1.0
    return float(chi2.sf(max(g, 0.0), df))


def derive_rng(key: tuple, seed: int) -> np.random.Generator:
    """Deterministic per-row random stream: hash the full row key with
    the seed so parallel execution cannot reorder draws."""
    digest = hashlib.sha256(repr((key, seed)).encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _draw_items(originals: list, augmented: list, budget: int,
                rng: np.random.Generator) -> list:
    """Sample without replacement until the token budget is reached:
    originals are exhausted before any augmented item is drawn, and the
    last drawn item is kept whole (actual tokens may exceed the budget)."""
    chosen = []
    total = 0
    for pool in (originals, augmented):
        order = rng.permutation(len(pool))
        for idx in order:
            if total >= budget:
                return chosen
            item = pool[idx]
            chosen.append(item)
            total += item[1].shape[0]
    return chosen


def search_optimal_series(
    originals: list[tuple[str, np.ndarray]],
    augmented: list[tuple[str, np.ndarray]],
    spec: PermutationSpec | None,
    row_key: tuple,
    seed: int,
    budgets: tuple[int, ...] = tuple(range(50, 1001, 50)),
    markov_p_min: float = 0.05,
    d_max: float = 100.0,
) -> tuple[SearchOutcome | None, str | None]:
    """Per token budget: seeded sample (originals first), optional
    permutation control, concatenate, PCA to 4, binarize, test; retain
    iterations with p > markov_p_min and d < d_max and return the one
    minimizing d (ties: smaller budget, then lexicographic item order).

    Items are (id, token-matrix) pairs. When no iteration survives the
    outcome is None and the second value names the dominant failure,
    in priority order: markov_fail (some iteration failed the Markov
    test), ci_fail (some iteration exceeded the distance bound),
    degenerate_node, then too_few_samples.
    """
    if not originals and not augmented:
        raise ValueError("empty candidate pool")
    best: SearchOutcome | None = None
    saw_markov_fail = saw_ci_fail = saw_degenerate = False
    for budget in budgets:
        rng = derive_rng(row_key + (budget,), seed)
        chosen = _draw_items(originals, augmented, budget, rng)
        if not chosen:
            continue
        if spec is not None and spec.kind == "Temporal":
            chosen = temporal_permute(chosen, spec, rng=rng)
        matrices = [m for _, m in chosen]
        x = concatenate_series(matrices)
        if spec is not None and spec.kind == "Spatio":
            x = spatio_permute(x, spec, rng=rng)
        try:
            reduced = pca_reduce(x, k=N_NODES)
            series = standardize_binarize(reduced)
            states = encode_states(series)
            p = markov_property_test(states)
        except DegenerateNodeError:
            saw_degenerate = True
            continue
        except (ValueError, MarkovTestUndefinedError):
            continue
        tpm = build_tpm(states)
        d = conditional_independence_distance(tpm)
        if not (p > markov_p_min and d < d_max):
            saw_markov_fail |= p <= markov_p_min
            saw_ci_fail |= d >= d_max
            continue
        outcome = SearchOutcome(
            t_i=budget, actual_tokens=x.shape[0],
            item_ids=tuple(i for i, _ in chosen),
            d_i=d, p_i=p, states=states, tpm=tpm, reduced=reduced,
        )
        if (best is None or d < best.d_i
                or (d == best.d_i and (budget, outcome.item_ids)
                    < (best.t_i, best.item_ids))):
            best = outcome
    if best is not None:
        return best, None
    if saw_markov_fail:
        return None, "markov_fail"
    if saw_ci_fail:
        return None, "ci_fail"
    if saw_degenerate:
        return None, "degenerate_node"
    return None, "too_few_samples"
