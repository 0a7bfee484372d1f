"""IIT 4.0 on 4-node binary networks.

Shares the repertoire algebra with the IIT 3.0 module (state-by-node
networks, virtual-element cause factors, product-form effect
repertoires) but measures irreducibility with the intrinsic difference
ID(p, q) = max_s p(s) * log2(p(s) / q(s)).

Documented conventions (fixed here and mirrored by the test oracle):

* phi for one side of a mechanism/purview pair is the minimum ID over
  the same bipartition family used by the IIT 3.0 module; partitions
  with infinite ID (partitioned repertoire vanishing where the whole one
  does not) are excluded, and a purview where every partition is
  infinite is excluded entirely.
* Core purviews maximize phi with ties to the larger purview, then the
  lower bitmask; phi_d = min(cause side, effect side), threshold 1e-10.
* Each distinction exposes two faces (cause, effect), each carrying its
  purview and the specified state argmax_s w(s) * log2(w(s) / r(s))
  against the minimizing partition's repertoire (ties: lowest index).
* Relations are taken over unordered pairs of distinct faces, including
  the cause/effect pair of a single distinction (self-relation). The
  pair relates when the purview overlap O is non-empty and the specified
  states agree on O; phi_r = |O| * min over the two faces of
  (phi_d / |face purview|).
* structure_vector[m] = phi_d of mechanism m plus relation shares:
  a cross-distinction relation splits phi_r equally between the two
  mechanisms; a self-relation contributes wholly to its own mechanism.
  Phi = sum(phi_d) + sum(phi_r) = structure_vector sum, index 0 fixed 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NetworkInitializationError
from .iit3 import (
    N_STATES,
    PHI_EPS,
    _nodes,
    _partitions,
    _popcount,
    _PROJ,
    _PURVIEW_ORDER,
    _TIE_EPS,
    Network3,
)

__all__ = ["Distinction", "Relation", "Phi4Result",
           "phi_structure_full_subsystem", "intrinsic_difference"]


def intrinsic_difference(p: np.ndarray, q: np.ndarray) -> float:
    """max_s p(s) log2(p(s)/q(s)); inf when q vanishes where p does not."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("mismatched supports")
    mask = p > 0.0
    if np.any(q[mask] <= 0.0):
        return np.inf
    vals = p[mask] * np.log2(p[mask] / q[mask])
    return max(float(vals.max(initial=0.0)), 0.0)


def _specified_state(whole: np.ndarray, mip: np.ndarray) -> int:
    """argmax_s w(s) log2(w(s)/r(s)), ties to the lowest index."""
    best_s, best_v = 0, -np.inf
    for s in range(whole.size):
        w = whole[s]
        if w <= 0.0:
            v = 0.0
        elif mip[s] <= 0.0:
            v = np.inf
        else:
            v = w * np.log2(w / mip[s])
        if v > best_v:
            best_s, best_v = s, v
    return best_s


@dataclass(frozen=True)
class Face:
    purview: int
    specified: dict[int, int]  # node -> specified bit


@dataclass(frozen=True)
class Distinction:
    mechanism: int
    phi_d: float
    cause: Face
    effect: Face


@dataclass(frozen=True)
class Relation:
    mechanisms: tuple[int, ...]
    overlap: int
    phi_r: float


@dataclass(frozen=True)
class Phi4Result:
    phi: float
    structure_vector: np.ndarray  # (16,), index = mechanism bitmask
    state: int


def _product_dist(probs: list[float]) -> np.ndarray:
    d = np.array([1.0])
    for p in probs:
        d = np.concatenate([d * (1.0 - p), d * p])
    return d


def _effect_joint(net: Network3, mech: int, purview: int, state: int) -> np.ndarray:
    cm = net.cond_mean(mech, state)
    return _product_dist([cm[j] for j in _nodes(purview)])


def _cause_joint(net: Network3, mech: int, purview: int, state: int):
    full = net.cause_repertoire(mech, purview, state)
    if full is None:
        return None
    return _PROJ[purview] @ full


def _phi4_side(net: Network3, mech: int, purview: int, state: int, side: str):
    """(phi, whole repertoire, minimizing partitioned repertoire) over the
    purview space, or None when every partition has infinite ID."""
    if side == "cause":
        whole = _cause_joint(net, mech, purview, state)
        if whole is None:
            raise NetworkInitializationError(
                f"zero-mass cause repertoire: mechanism {mech:04b}, "
                f"purview {purview:04b}, state {state:04b}"
            )
    else:
        whole = _effect_joint(net, mech, purview, state)
    proj = _PROJ[purview]
    best = np.inf
    best_rep = None
    for s1, d1, s2, d2 in _partitions(mech, purview):
        if side == "cause":
            f1 = net.cause_repertoire(s1, d1, state)
            f2 = net.cause_repertoire(s2, d2, state)
            if f1 is None or f2 is None:
                continue
            prod = f1 * f2
            tot = prod.sum()
            if tot <= 0.0:
                continue
            part = proj @ (prod / tot)
        else:
            cm1 = net.cond_mean(s1, state)
            cm2 = net.cond_mean(s2, state)
            part = _product_dist([
                cm1[j] if d1 >> j & 1 else cm2[j] for j in _nodes(purview)
            ])
        v = intrinsic_difference(whole, part)
        if v < best:
            best = v
            best_rep = part
            if best <= 0.0:
                break
    if best_rep is None:
        return None
    return best, whole, best_rep


def _core4(net: Network3, mech: int, state: int, side: str):
    best = None
    best_phi = 0.0
    for purview in _PURVIEW_ORDER:
        res = _phi4_side(net, mech, purview, state, side)
        if res is None:
            continue
        phi, whole, mip = res
        if phi > best_phi + _TIE_EPS:
            best_phi = phi
            best = (phi, purview, whole, mip)
    return best


def distinction(net: Network3, mech: int, state: int) -> Distinction | None:
    if mech == 0:
        raise ValueError("mechanism must be non-empty")
    # Every repertoire conditions on the mechanism substate only, so the
    # distinction is a function of (mech, state & mech) and can be memoized
    # on the network alongside the IIT 3.0 concept cache.
    cache = net.__dict__.setdefault("_distinction", {})
    cache_key = (mech, state & mech)
    if cache_key in cache:
        return cache[cache_key]
    d = _distinction_uncached(net, mech, state)
    cache[cache_key] = d
    return d


def _distinction_uncached(net: Network3, mech: int, state: int) -> Distinction | None:
    eff = _core4(net, mech, state, "effect")
    if eff is None or eff[0] <= PHI_EPS:
        return None
    cau = _core4(net, mech, state, "cause")
    if cau is None or cau[0] <= PHI_EPS:
        return None
    phi_d = min(cau[0], eff[0])
    if phi_d <= PHI_EPS:
        return None

    def face(purview, whole, mip):
        label = _specified_state(whole, mip)
        nodes = _nodes(purview)
        return Face(purview, {n: (label >> pos) & 1 for pos, n in enumerate(nodes)})

    return Distinction(
        mechanism=mech,
        phi_d=phi_d,
        cause=face(cau[1], cau[2], cau[3]),
        effect=face(eff[1], eff[2], eff[3]),
    )


def relations(distinctions: list[Distinction]) -> list[Relation]:
    """Pairwise relations over distinction faces (see module docstring)."""
    faces = []
    for d in distinctions:
        faces.append((d, d.cause))
        faces.append((d, d.effect))
    out = []
    for a in range(len(faces)):
        for b in range(a + 1, len(faces)):
            (da, fa), (db, fb) = faces[a], faces[b]
            overlap = fa.purview & fb.purview
            if overlap == 0:
                continue
            if any(fa.specified[n] != fb.specified[n] for n in _nodes(overlap)):
                continue
            phi_r = _popcount(overlap) * min(
                da.phi_d / _popcount(fa.purview),
                db.phi_d / _popcount(fb.purview),
            )
            if phi_r <= PHI_EPS:
                continue
            mechs = (da.mechanism,) if da is db else (da.mechanism, db.mechanism)
            out.append(Relation(mechanisms=mechs, overlap=overlap, phi_r=phi_r))
    return out


def phi_structure_full_subsystem(node_probs: np.ndarray, state: int,
                                 net: Network3 | None = None) -> Phi4Result:
    if not 0 <= state < N_STATES:
        raise ValueError(f"state must be in [0, 15], got {state}")
    if net is None:
        net = Network3(node_probs)
    dists = []
    for mech in range(1, N_STATES):
        d = distinction(net, mech, state)
        if d is not None:
            dists.append(d)
    vector = np.zeros(N_STATES)
    for d in dists:
        vector[d.mechanism] += d.phi_d
    for r in relations(dists):
        share = r.phi_r / len(r.mechanisms)
        for m in r.mechanisms:
            vector[m] += share
    return Phi4Result(float(vector.sum()), vector, state)
