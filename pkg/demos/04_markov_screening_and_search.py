"""
Markov screening and the token-budget search
=============================================

Binarized representation series are only admitted to the Phi analysis
when their 16-state trajectory looks first-order Markov (G-test
p > 0.05) and the empirical transition matrix is close to conditional
independence (d < 100).  The search sweeps token budgets 50..1000 and
keeps the budget minimizing d among admissible iterations.
"""

import numpy as np

from rephi.markov import (build_tpm, conditional_independence_distance,
                          markov_property_test, search_optimal_series)

rng = np.random.default_rng(3)

# --- screening a first-order chain ------------------------------------
# A genuine first-order chain should rarely be rejected at alpha = 0.05.
p = rng.random((16, 16)) + 0.1
p /= p.sum(axis=1, keepdims=True)
cum = p.cumsum(axis=1)
chain = np.empty(3000, dtype=np.int64)
chain[0] = 0
u = rng.random(3000)
for t in range(1, 3000):
    chain[t] = np.searchsorted(cum[chain[t - 1]], u[t])
print("first-order chain p-value:", round(markov_property_test(chain), 4))

# A chain whose next symbol depends on two steps back gets rejected.
second = np.empty(3000, dtype=np.int64)
second[:2] = 0
for t in range(2, 3000):
    second[t] = ((second[t - 1] + second[t - 2]) % 16
                 if rng.random() < 0.9 else rng.integers(16))
print("second-order chain p-value:", markov_property_test(second))

# --- conditional-independence distance ---------------------------------
# d aggregates, over visited rows, how far the joint transition matrix
# is from the product of its per-node marginals (scaled by 100).
tpm = build_tpm(chain)
print("d of the sampled chain:", round(conditional_independence_distance(tpm), 2))

# --- budget search ------------------------------------------------------
# Items are (id, token-matrix) pairs.  Originals are always drawn before
# augmented items; the last item drawn is kept whole, so the realized
# token count may slightly exceed the budget.
originals = [(f"orig{i}",
              rng.normal(size=(30, 8)) + 0.3 * rng.normal(size=(30, 8)).cumsum(0))
             for i in range(4)]
augmented = [(f"aug{i}", rng.normal(size=(40, 8))) for i in range(4)]
outcome, failure = search_optimal_series(originals, augmented, None,
                                         ("demo",), seed=42)
if outcome is None:
    print("search failed:", failure)
else:
    print(f"best budget t={outcome.t_i}  p={outcome.p_i:.3f}  "
          f"d={outcome.d_i:.2f}  items={list(outcome.item_ids)}")
