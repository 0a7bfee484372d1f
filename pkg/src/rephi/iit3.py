"""IIT 3.0 on 4-node binary networks.

The network is given in state-by-node form: ``node_probs[s, j]`` is the
probability that node ``j`` is ON at the next step given current joint
state ``s`` (little-endian: bit ``j`` of ``s`` is node ``j``). Repertoire
algebra follows the virtual-element convention: each mechanism node
contributes an independent likelihood factor with its non-purview inputs
marginalized uniformly, and effect repertoires are products of per-node
Bernoulli marginals conditioned on the mechanism state.

Documented conventions (fixed here and mirrored by the test oracle):

* Small-phi partitions: unordered mechanism bipartitions crossed with
  directed purview bipartitions, keeping pairs whose two parts are each
  non-empty in mechanism or purview. A partition whose factor repertoire
  has zero mass is skipped.
* Core purview ties (equal phi within 1e-13): larger purview wins, then
  lower bitmask. Purviews are scanned in (size desc, mask asc) order.
* System-level Phi: minimum over the 14 unidirectional cuts A -> B
  (inputs from A into B nodes are noised). The distance between the
  intact and cut cause-effect structures is a sum of per-concept terms,
  term_i = phi_max_i * (full-space cause EMD + summed effect-marginal
  differences) against the matching cut concept, or against the
  unconstrained (null) concept when the cut destroys the concept. This
  per-mechanism additive form realizes the CI decomposition whose
  components sum exactly to the scalar. Cut ties resolve to the lowest
  source bitmask.
* Cause repertoires are carried on the full 16-state space, uniform over
  non-purview nodes; effect repertoires are carried as 4 marginals with
  the network's unconstrained marginal filled in off-purview.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRepertoireError
from .transport import _solve_transport, hamming_cost_matrix

N_NODES = 4
N_STATES = 16
FULL_MASK = N_STATES - 1
PHI_EPS = 1e-10
_TIE_EPS = 1e-13

__all__ = [
    "Concept",
    "Phi3Result",
    "Network3",
    "System3",
    "big_phi_full_subsystem",
    "state_weighted_average",
    "PHI_EPS",
]


def _nodes(mask: int) -> list[int]:
    return [i for i in range(N_NODES) if mask >> i & 1]


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def _build_operators():
    """Per node-subset mask: fiber-sum projection and fiber-mean smoother."""
    states = np.arange(N_STATES)
    proj = {}
    smooth = {}
    for mask in range(N_STATES):
        nodes = _nodes(mask)
        sub = np.zeros(N_STATES, dtype=np.int64)
        for pos, n in enumerate(nodes):
            sub |= ((states >> n) & 1) << pos
        p = np.zeros((1 << len(nodes), N_STATES))
        p[sub, states] = 1.0
        proj[mask] = p
        smooth[mask] = p.T @ p / (1 << (N_NODES - len(nodes)))
    return proj, smooth


_PROJ, _SMOOTH = _build_operators()
_UNIFORM16 = np.full(N_STATES, 1.0 / N_STATES)
_COSTS = {1 << k: hamming_cost_matrix(1 << k) for k in range(N_NODES + 1)}
# Bit-indicator rows per purview mask: marginals of a purview-space
# distribution are one matrix-vector product.
_MARG = {
    mask: np.array(
        [[(z >> b) & 1 for z in range(1 << _popcount(mask))]
         for b in range(_popcount(mask))],
        dtype=np.float64,
    )
    for mask in range(1, N_STATES)
}

# Purview scan order: size descending, then bitmask ascending, so a plain
# strict-improvement scan realizes the documented tie rule.
_PURVIEW_ORDER = sorted(range(1, N_STATES), key=lambda m: (-_popcount(m), m))

_EMD_CACHE: dict[bytes, float] = {}


def _cached_emd(p: np.ndarray, q: np.ndarray) -> float:
    if len(_EMD_CACHE) > 1_000_000:
        _EMD_CACHE.clear()
    key = p.tobytes() + q.tobytes()
    v = _EMD_CACHE.get(key)
    if v is None:
        diff = p - q
        supply = np.where(diff > 0, diff, 0.0)
        demand = np.where(diff < 0, -diff, 0.0)
        tot = supply.sum()
        if tot <= 1e-14:
            v = 0.0
        else:
            demand *= tot / demand.sum()
            v = float(_solve_transport(supply, demand, _COSTS[p.size]))
        _EMD_CACHE[key] = v
        _EMD_CACHE[q.tobytes() + p.tobytes()] = v
    return v


def _mech_bipartitions(mech: int) -> list[tuple[int, int]]:
    """Unordered bipartitions (S, mech \\ S), including (0, mech)."""
    nodes = _nodes(mech)
    if not nodes:
        return [(0, 0)]
    rest = mech & ~(1 << nodes[-1])
    out = []
    sub = 0
    while True:
        out.append((sub, mech ^ sub))
        if sub == rest:
            return out
        sub = (sub - rest) & rest


def _submasks(mask: int) -> list[int]:
    out = []
    sub = 0
    while True:
        out.append(sub)
        if sub == mask:
            return out
        sub = (sub - mask) & mask


@dataclass(frozen=True)
class Concept:
    mechanism: int
    phi: float
    cause_purview: int
    cause_rep: np.ndarray  # (16,), uniform over non-purview nodes
    effect_purview: int
    effect_marginals: np.ndarray  # (4,), unconstrained fill off-purview


@dataclass(frozen=True)
class Phi3Result:
    phi_max: float
    ci_vector: np.ndarray  # (16,), index = mechanism bitmask, [0] == 0
    state: int


class Network3:
    """A 4-node binary network with memoized repertoire pieces."""

    def __init__(self, node_probs: np.ndarray):
        node_probs = np.asarray(node_probs, dtype=np.float64)
        if node_probs.shape != (N_STATES, N_NODES):
            raise ValueError(f"node_probs must be 16x4, got {node_probs.shape}")
        if np.any(node_probs < -1e-12) or np.any(node_probs > 1 + 1e-12):
            raise ValueError("node_probs entries must lie in [0, 1]")
        self.node_probs = np.clip(node_probs, 0.0, 1.0)
        self._cond_mean: dict[tuple[int, int], np.ndarray] = {}
        self._likelihood: dict[tuple[int, int, int], np.ndarray] = {}
        self._cause: dict[tuple[int, int, int], np.ndarray | None] = {}
        self._concept: dict[tuple[int, int], Concept | None] = {}

    def cond_mean(self, mech: int, state: int) -> np.ndarray:
        """Mean next-state node probabilities over states matching the
        mechanism's current substate (non-mechanism nodes uniform)."""
        key = (mech, state & mech)
        r = self._cond_mean.get(key)
        if r is None:
            sel = (np.arange(N_STATES) & mech) == (state & mech)
            r = self.node_probs[sel].mean(axis=0)
            self._cond_mean[key] = r
        return r

    def _node_likelihood(self, node: int, bit: int, purview: int) -> np.ndarray:
        key = (node, bit, purview)
        r = self._likelihood.get(key)
        if r is None:
            col = self.node_probs[:, node]
            raw = col if bit else 1.0 - col
            r = _SMOOTH[purview] @ raw
            self._likelihood[key] = r
        return r

    def cause_repertoire(self, mech: int, purview: int, state: int):
        """Past-state distribution on the full space, uniform off-purview.

        Returns None when the conditioning has zero total mass.
        """
        if mech == 0 or purview == 0:
            return _UNIFORM16
        key = (mech, purview, state & mech)
        if key in self._cause:
            return self._cause[key]
        r = np.ones(N_STATES)
        for i in _nodes(mech):
            r = r * self._node_likelihood(i, state >> i & 1, purview)
        tot = r.sum()
        rep = None if tot <= 0.0 else r / tot
        self._cause[key] = rep
        return rep

    def effect_marginals(self, mech: int, purview: int, state: int) -> np.ndarray:
        """Per-node ON probabilities for purview nodes given the mechanism
        state; off-purview entries are the unconstrained marginals."""
        cm = self.cond_mean(mech, state)
        if purview == FULL_MASK:
            return cm
        out = self.cond_mean(0, 0).copy()
        for j in _nodes(purview):
            out[j] = cm[j]
        return out


def _partitions(mech: int, purview: int):
    for s1, s2 in _mech_bipartitions(mech):
        for d1 in _submasks(purview):
            d2 = purview ^ d1
            if (s1 or d1) and (s2 or d2):
                yield s1, d1, s2, d2


# Cached partition tables per (mech, purview): the flat list of
# (s1, d1, s2, d2) tuples, plus the same partitions grouped by mechanism
# bipartition with a boolean (n_d, 4) purview-half mask per group.
_PART_TABLE: dict[tuple[int, int], tuple[list, list]] = {}


def _part_table(mech: int, purview: int):
    t = _PART_TABLE.get((mech, purview))
    if t is None:
        parts = list(_partitions(mech, purview))
        groups = []
        for s1, s2 in _mech_bipartitions(mech):
            d1s = [d1 for d1 in _submasks(purview)
                   if (s1 or d1) and (s2 or (purview ^ d1))]
            if not d1s:
                continue
            d1_mask = np.array([[(d1 >> j) & 1 for j in range(N_NODES)]
                                for d1 in d1s], dtype=bool)
            groups.append((s1, s2, d1_mask))
        t = (parts, groups)
        _PART_TABLE[(mech, purview)] = t
    return t


def _phi_cause(net: Network3, mech: int, purview: int, state: int,
               whole: np.ndarray) -> float:
    proj = _PROJ[purview]
    marg = _MARG[purview]
    wz = proj @ whole
    n_bits = marg.shape[0]
    parts, _ = _part_table(mech, purview)
    prod = np.empty((len(parts), N_STATES))
    n = 0
    for s1, d1, s2, d2 in parts:
        f1 = net.cause_repertoire(s1, d1, state)
        f2 = net.cause_repertoire(s2, d2, state)
        if f1 is None or f2 is None:
            continue
        np.multiply(f1, f2, out=prod[n])
        n += 1
    if n == 0:
        return 0.0
    prod = prod[:n]
    tot = prod.sum(axis=1)
    ok = tot > 0.0
    if not ok.any():
        return 0.0
    pz = (prod[ok] / tot[ok, None]) @ proj.T
    diff = np.abs(pz - wz)
    if diff.max(axis=1).min() < 1e-14:
        return 0.0
    tv = 0.5 * diff.sum(axis=1)
    if n_bits == 1:
        # One-bit purview: W1 equals total variation exactly.
        return float(tv.min())
    lb = np.maximum(tv, np.abs(pz @ marg.T - wz @ marg.T).sum(axis=1))
    best = np.inf
    for i in np.argsort(lb, kind="stable"):
        if lb[i] >= best:
            break
        best = min(best, _cached_emd(wz, np.ascontiguousarray(pz[i])))
    return 0.0 if best is np.inf else best


def _phi_effect(net: Network3, mech: int, purview: int, state: int,
                whole_cm: np.ndarray) -> float:
    _, groups = _part_table(mech, purview)
    nodes = _nodes(purview)
    best = np.inf
    for s1, s2, d1_mask in groups:
        # d1 | d2 == purview: every purview node takes one of the halves.
        part = np.where(d1_mask, net.cond_mean(s1, state),
                        net.cond_mean(s2, state))
        d = float(np.abs(whole_cm - part)[:, nodes].sum(axis=1).min())
        if d < best:
            best = d
    if best is np.inf:
        return 0.0
    return 0.0 if best < 1e-14 else best


def _core_effect(net: Network3, mech: int, state: int):
    best_phi = 0.0
    best_purview = 0
    for purview in _PURVIEW_ORDER:
        whole_cm = net.cond_mean(mech, state)
        phi = _phi_effect(net, mech, purview, state, whole_cm)
        if phi > best_phi + _TIE_EPS:
            best_phi = phi
            best_purview = purview
    return best_phi, best_purview


def _core_cause(net: Network3, mech: int, state: int):
    best_phi = 0.0
    best_purview = 0
    best_rep = _UNIFORM16
    for purview in _PURVIEW_ORDER:
        whole = net.cause_repertoire(mech, purview, state)
        if whole is None:
            raise DegenerateRepertoireError(
                f"zero-mass cause repertoire: mechanism {mech:04b}, "
                f"purview {purview:04b}, state {state:04b}"
            )
        phi = _phi_cause(net, mech, purview, state, whole)
        if phi > best_phi + _TIE_EPS:
            best_phi = phi
            best_purview = purview
            best_rep = whole
    return best_phi, best_purview, best_rep


def concept(net: Network3, mech: int, state: int) -> Concept | None:
    """The mechanism's concept at this state, or None when reducible."""
    if mech == 0:
        raise ValueError("mechanism must be non-empty")
    # Every repertoire conditions on the mechanism substate only, so the
    # concept is a function of (mech, state & mech) and can be memoized.
    cache_key = (mech, state & mech)
    if cache_key in net._concept:
        return net._concept[cache_key]
    c = _concept_uncached(net, mech, state)
    net._concept[cache_key] = c
    return c


def _concept_uncached(net: Network3, mech: int, state: int) -> Concept | None:
    phi_e, purview_e = _core_effect(net, mech, state)
    if phi_e <= PHI_EPS:
        return None
    phi_c, purview_c, cause_rep = _core_cause(net, mech, state)
    phi = min(phi_c, phi_e)
    if phi <= PHI_EPS:
        return None
    return Concept(
        mechanism=mech,
        phi=phi,
        cause_purview=purview_c,
        cause_rep=cause_rep,
        effect_purview=purview_e,
        effect_marginals=net.effect_marginals(mech, purview_e, state),
    )


def constellation(net: Network3, state: int) -> dict[int, Concept]:
    out = {}
    for mech in range(1, N_STATES):
        c = concept(net, mech, state)
        if c is not None:
            out[mech] = c
    return out


def cut_node_probs(node_probs: np.ndarray, source_mask: int) -> np.ndarray:
    """Sever inputs from the source nodes into the complement: target
    nodes see the source bits replaced by uniform noise."""
    keep = FULL_MASK ^ source_mask
    out = np.array(node_probs, dtype=np.float64, copy=True)
    smoothed = _SMOOTH[keep] @ out
    for j in _nodes(keep):
        out[:, j] = smoothed[:, j]
    return out


class System3:
    """One network plus its 14 unidirectional cut variants, with all
    repertoire caches shared across per-state queries."""

    def __init__(self, node_probs: np.ndarray):
        self.net = Network3(node_probs)
        self.cuts = [Network3(cut_node_probs(self.net.node_probs, source))
                     for source in range(1, FULL_MASK)]

    def big_phi(self, state: int) -> Phi3Result:
        if not 0 <= state < N_STATES:
            raise ValueError(f"state must be in [0, 15], got {state}")
        whole = constellation(self.net, state)
        if not whole:
            return Phi3Result(0.0, np.zeros(N_STATES), state)
        null_effect = self.net.cond_mean(0, 0)

        best_total = np.inf
        best_terms = None
        for cut in self.cuts:
            # Only the whole constellation's mechanisms contribute terms,
            # so skip the cut network's other mechanisms entirely.
            terms = np.zeros(N_STATES)
            for mech, c in whole.items():
                c2 = concept(cut, mech, state)
                if c2 is not None:
                    d = _cached_emd(c.cause_rep, c2.cause_rep) + float(
                        np.abs(c.effect_marginals - c2.effect_marginals).sum()
                    )
                else:
                    d = _cached_emd(c.cause_rep, _UNIFORM16) + float(
                        np.abs(c.effect_marginals - null_effect).sum()
                    )
                terms[mech] = c.phi * d
            total = terms.sum()
            if total < best_total:
                best_total = total
                best_terms = terms
        return Phi3Result(float(best_total), best_terms, state)


def big_phi_full_subsystem(node_probs: np.ndarray, state: int) -> Phi3Result:
    """Scalar Phi over the full 4-node subsystem plus its per-mechanism
    CI decomposition (see module docstring for the cut and distance
    conventions)."""
    return System3(node_probs).big_phi(state)


def state_weighted_average(per_state_values: dict[int, np.ndarray | float],
                           frequencies: np.ndarray):
    """Frequency-weighted mean of per-state values (componentwise for
    vectors). Every state with positive weight must have a value."""
    freq = np.asarray(frequencies, dtype=np.float64)
    if freq.shape != (N_STATES,):
        raise ValueError("frequencies must have 16 entries")
    if np.any(freq < 0) or abs(freq.sum() - 1.0) > 1e-9:
        raise ValueError("frequencies must be a distribution")
    acc = None
    for s in range(N_STATES):
        if freq[s] == 0.0:
            continue
        if s not in per_state_values:
            raise ValueError(f"missing value for weighted state {s}")
        term = freq[s] * np.asarray(per_state_values[s], dtype=np.float64)
        acc = term if acc is None else acc + term
    if acc is None:
        raise ValueError("no state has positive weight")
    return acc if acc.ndim else float(acc)
