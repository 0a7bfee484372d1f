"""Brute-force IIT 4.0 oracle.

Independent plain-loop implementation of the documented IIT 4.0
contract: intrinsic-difference phi over the same partition family,
pairwise face relations, equal-split attribution. Uses the brute-force
repertoire routines from the IIT 3.0 oracle (not the library engine).
"""

from __future__ import annotations

import math

import numpy as np

from .iit3_oracle import (
    bits_of,
    cause_repertoire,
    effect_repertoire,
    expand_to,
    partitions,
)

PHI_EPS = 1e-10
TIE_EPS = 1e-13


def intrinsic_difference(p, q):
    best = 0.0
    for ps, qs in zip(p, q):
        if ps <= 0.0:
            continue
        if qs <= 0.0:
            return math.inf
        best = max(best, ps * math.log2(ps / qs))
    return best


def specified_state(whole, mip):
    best_s, best_v = 0, -math.inf
    for s in range(len(whole)):
        w = whole[s]
        if w <= 0.0:
            v = 0.0
        elif mip[s] <= 0.0:
            v = math.inf
        else:
            v = w * math.log2(w / mip[s])
        if v > best_v:
            best_s, best_v = s, v
    return best_s


def phi_side(sbn, mech, purview, state, side):
    rep_fn = cause_repertoire if side == "cause" else effect_repertoire
    whole = rep_fn(sbn, mech, purview, state)
    if whole is None:
        raise ZeroDivisionError("degenerate whole repertoire")
    best, best_rep = math.inf, None
    for s1, d1, s2, d2 in partitions(mech, purview):
        f1 = rep_fn(sbn, s1, d1, state)
        f2 = rep_fn(sbn, s2, d2, state)
        if f1 is None or f2 is None:
            continue
        joint = expand_to(purview, d1, f1) * expand_to(purview, d2, f2)
        tot = joint.sum()
        if tot <= 0.0:
            continue
        joint /= tot
        v = intrinsic_difference(whole, joint)
        if v < best:
            best, best_rep = v, joint
    if best_rep is None:
        return None
    return best, whole, best_rep


def core(sbn, mech, state, side):
    order = sorted(range(1, 16), key=lambda m: (-bin(m).count("1"), m))
    best = None
    best_phi = 0.0
    for purview in order:
        res = phi_side(sbn, mech, purview, state, side)
        if res is None:
            continue
        phi, whole, mip = res
        if phi > best_phi + TIE_EPS:
            best_phi = phi
            best = (phi, purview, whole, mip)
    return best


def distinction(sbn, mech, state):
    eff = core(sbn, mech, state, "effect")
    if eff is None or eff[0] <= PHI_EPS:
        return None
    cau = core(sbn, mech, state, "cause")
    if cau is None or cau[0] <= PHI_EPS:
        return None
    phi_d = min(cau[0], eff[0])
    if phi_d <= PHI_EPS:
        return None

    def face(purview, whole, mip):
        label = specified_state(whole, mip)
        nodes = bits_of(purview)
        return purview, {n: (label >> pos) & 1 for pos, n in enumerate(nodes)}

    return {
        "mechanism": mech,
        "phi_d": phi_d,
        "cause": face(cau[1], cau[2], cau[3]),
        "effect": face(eff[1], eff[2], eff[3]),
    }


def phi_structure(sbn, state):
    sbn = [list(map(float, row)) for row in np.asarray(sbn)]
    dists = [d for mech in range(1, 16)
             if (d := distinction(sbn, mech, state)) is not None]
    vector = np.zeros(16)
    for d in dists:
        vector[d["mechanism"]] += d["phi_d"]
    faces = []
    for d in dists:
        faces.append((d, d["cause"]))
        faces.append((d, d["effect"]))
    for a in range(len(faces)):
        for b in range(a + 1, len(faces)):
            (da, (za, sa)), (db, (zb, sb)) = faces[a], faces[b]
            overlap = za & zb
            if overlap == 0:
                continue
            if any(sa[n] != sb[n] for n in bits_of(overlap)):
                continue
            phi_r = bin(overlap).count("1") * min(
                da["phi_d"] / bin(za).count("1"),
                db["phi_d"] / bin(zb).count("1"),
            )
            if phi_r <= PHI_EPS:
                continue
            if da is db:
                vector[da["mechanism"]] += phi_r
            else:
                vector[da["mechanism"]] += phi_r / 2.0
                vector[db["mechanism"]] += phi_r / 2.0
    return float(vector.sum()), vector
