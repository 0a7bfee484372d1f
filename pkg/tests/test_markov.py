"""TPM construction, conditional-independence distance, the Markov order
test (including Monte-Carlo calibration), and the token-budget search."""

import numpy as np
import pytest

from rephi.errors import MarkovTestUndefinedError
from rephi.markov import (
    BinarySeries,
    build_tpm,
    conditional_independence_distance,
    decode_state,
    derive_rng,
    encode_states,
    markov_property_test,
    search_optimal_series,
)
from rephi.series import PermutationSpec


def test_encode_decode_roundtrip():
    for s in range(16):
        bits = np.array([decode_state(s)])
        assert encode_states(BinarySeries(bits=bits))[0] == s
    # Little-endian: bit j of the state is node j.
    assert encode_states(BinarySeries(bits=np.array([[1, 0, 0, 0]])))[0] == 1
    assert encode_states(BinarySeries(bits=np.array([[0, 0, 0, 1]])))[0] == 8


def test_build_tpm_counts_and_uniform_rows():
    states = np.array([0, 1, 0, 1, 2])
    tpm = build_tpm(states)
    assert tpm.counts[0, 1] == 2
    assert tpm.counts[1, 0] == 1
    assert tpm.counts[1, 2] == 1
    assert np.allclose(tpm.state_by_state.sum(axis=1), 1.0)
    assert np.array_equal(tpm.visited,
                          np.isin(np.arange(16), [0, 1]))
    # Unvisited rows are uniform.
    assert np.allclose(tpm.state_by_state[5], 1 / 16)
    # state_by_node marginalizes onto the 4 node bits.
    assert tpm.state_by_node[0, 0] == pytest.approx(1.0)  # 0 -> 1 always
    with pytest.raises(ValueError):
        build_tpm(np.array([3]))


def _product_tpm(rng):
    """A TPM whose rows factor exactly over the 4 node bits."""
    from rephi.markov import Tpm

    sbn = rng.random((16, 4))
    on = (np.arange(16)[None, :] >> np.arange(4)[:, None]) & 1
    sbs = np.ones((16, 16))
    for j in range(4):
        sbs *= np.where(on[j][None, :], sbn[:, j:j + 1], 1 - sbn[:, j:j + 1])
    return Tpm(state_by_state=sbs, state_by_node=sbn,
               visited=np.ones(16, dtype=bool),
               counts=np.zeros((16, 16), dtype=np.int64))


def test_ci_distance_zero_for_product_tpm():
    rng = np.random.default_rng(21)
    for _ in range(20):
        assert conditional_independence_distance(_product_tpm(rng)) <= 1e-10


def test_ci_distance_positive_for_coupled_tpm():
    # Two perfectly copied nodes cannot factor.
    rng = np.random.default_rng(22)
    b = (rng.random(300) < 0.5).astype(np.int8)
    bits = np.stack([b, b, (rng.random(300) < 0.5).astype(np.int8),
                     (rng.random(300) < 0.5).astype(np.int8)], axis=1)
    tpm = build_tpm(encode_states(BinarySeries(bits=bits)))
    assert conditional_independence_distance(tpm) > 1.0


def test_markov_test_undefined():
    with pytest.raises(MarkovTestUndefinedError):
        markov_property_test(np.zeros(50, dtype=np.int64))
    with pytest.raises(ValueError):
        markov_property_test(np.array([0, 1]))


def _first_order_chain(rng, n=2000):
    """Sample a random 4-state first-order chain.

    Chains are long enough that expected second-order cell counts are
    large and the chi-square approximation of the G statistic holds.
    """
    p = rng.random((4, 4)) + 0.2
    p /= p.sum(axis=1, keepdims=True)
    cum = p.cumsum(axis=1)
    out = np.empty(n, dtype=np.int64)
    out[0] = rng.integers(4)
    u = rng.random(n)
    for t in range(1, n):
        out[t] = np.searchsorted(cum[out[t - 1]], u[t])
    return out


def _second_order_chain(rng, n=300):
    """A chain where the next symbol depends strongly on the pair."""
    out = np.empty(n, dtype=np.int64)
    out[0], out[1] = rng.integers(4, size=2)
    for t in range(2, n):
        base = (out[t - 1] + out[t - 2]) % 4
        out[t] = base if rng.random() < 0.85 else rng.integers(4)
    return out


def test_markov_calibration_first_order():
    """False-rejection rate at alpha = 0.05 lands near the nominal level."""
    rng = np.random.default_rng(20260826)
    rejections = sum(markov_property_test(_first_order_chain(rng)) <= 0.05
                     for _ in range(200))
    assert 0.02 <= rejections / 200 <= 0.09


def test_markov_detects_second_order():
    rng = np.random.default_rng(99)
    rejections = sum(markov_property_test(_second_order_chain(rng)) <= 0.05
                     for _ in range(50))
    assert rejections >= 45  # >= 90%


def test_derive_rng_deterministic_and_distinct():
    key = ("m", "0", "Hinting", "s", "x", 1, "Entire", "Temporal", 50)
    a = derive_rng(key, 42).random(4)
    b = derive_rng(key, 42).random(4)
    assert np.array_equal(a, b)
    c = derive_rng(key, 43).random(4)
    d = derive_rng(key + ("y",), 42).random(4)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def _pool(rng, n_items, tokens, d=8, prefix="item"):
    out = []
    for i in range(n_items):
        t = rng.normal(size=(tokens, d)).cumsum(axis=0) * 0.3 \
            + rng.normal(size=(tokens, d))
        out.append((f"{prefix}{i}", t))
    return out


def test_search_contract_thresholds_and_budgets():
    rng = np.random.default_rng(60)
    originals = _pool(rng, 3, 30, prefix="orig")
    augmented = _pool(rng, 2, 40, prefix="aug")
    outcome, failure = search_optimal_series(
        originals, augmented, None, row_key=("k",), seed=42)
    if outcome is not None:
        assert failure is None
        assert outcome.p_i > 0.05
        assert outcome.d_i < 100.0
        assert outcome.t_i in tuple(range(50, 1001, 50))
        # When unpermuted, originals exhaust before any augmented item.
        ids = list(outcome.item_ids)
        first_aug = next((i for i, x in enumerate(ids)
                          if x.startswith("aug")), None)
        if first_aug is not None:
            assert {o for o, _ in originals} <= set(ids[:first_aug])
    else:
        assert failure in ("markov_fail", "ci_fail", "degenerate_node",
                           "too_few_samples")


def test_search_originals_before_augmented():
    rng = np.random.default_rng(61)
    originals = [("orig0", rng.normal(size=(20, 8))),
                 ("orig1", rng.normal(size=(20, 8)))]
    augmented = [("aug0", rng.normal(size=(20, 8)))]
    from rephi.markov import _draw_items

    for budget in (50, 60, 100):
        drawn = _draw_items(originals, augmented,
                            budget, np.random.default_rng(0))
        ids = [i for i, _ in drawn]
        if "aug0" in ids:
            assert ids.index("aug0") == len(ids) - 1
            assert set(ids[:-1]) == {"orig0", "orig1"}


def test_search_last_item_kept_whole():
    rng = np.random.default_rng(62)
    originals = [("o0", rng.normal(size=(30, 8)))]
    from rephi.markov import _draw_items

    drawn = _draw_items(originals, [], 10, np.random.default_rng(0))
    assert [i for i, _ in drawn] == ["o0"]
    assert drawn[0][1].shape[0] == 30  # never truncated


def test_search_determinism():
    rng = np.random.default_rng(63)
    originals = _pool(rng, 3, 40)
    o1, f1 = search_optimal_series(originals, [], None, ("rk",), 43)
    o2, f2 = search_optimal_series(originals, [], None, ("rk",), 43)
    assert f1 == f2
    if o1 is not None:
        assert o1.t_i == o2.t_i
        assert o1.item_ids == o2.item_ids
        assert o1.d_i == o2.d_i
        assert np.array_equal(o1.states, o2.states)


def test_search_failure_priority():
    # Constant tokens make PCA degenerate for every budget.
    flat = [("flat", np.tile(np.arange(8.0), (60, 1)))]
    outcome, failure = search_optimal_series(flat, [], None, ("rk",), 42)
    assert outcome is None
    assert failure in ("too_few_samples", "degenerate_node")
    with pytest.raises(ValueError):
        search_optimal_series([], [], None, ("rk",), 42)
