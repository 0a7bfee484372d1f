"""Criterion evaluation: rank tests, Holm correction, Good/Bad
classification, and cross-validated logistic-regression AUC.

The rank test is Mann-Whitney on independent groups with midrank ties:
exact permutation enumeration when the pooled size is at most 8,
otherwise the normal approximation with tie-corrected variance and
continuity correction. ``alternative="greater"`` asks whether the second
sample tends to exceed the first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm, rankdata

__all__ = ["CriterionReport", "wilcoxon_rank_sum", "holm_correct",
           "good_bad_classify", "criterion1_evaluate", "criterion2_evaluate",
           "cv_logreg_auc", "criterion3_evaluate", "roc_auc", "METRICS"]

METRICS = ("phi_max_3", "phi_4", "ci_3", "phi_structure_4", "span_rep")
IIT_METRICS = ("phi_max_3", "phi_4", "ci_3", "phi_structure_4")


@dataclass
class CriterionReport:
    criterion: int
    groups: list[dict] = field(default_factory=list)


def wilcoxon_rank_sum(a, b, alternative: str = "two_sided") -> float:
    if alternative not in ("two_sided", "greater"):
        raise ValueError(f"bad alternative {alternative!r}")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 1 or b.size < 1:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        return 1.0
    n_a, n_b, n = a.size, b.size, pooled.size
    ranks = rankdata(pooled)
    r_b = ranks[n_a:].sum()

    if n <= 8:
        # Exact permutation distribution of the rank sum under H0.
        total = 0
        ge = 0
        le = 0
        for combo in combinations(range(n), n_b):
            r = ranks[list(combo)].sum()
            total += 1
            ge += r >= r_b - 1e-12
            le += r <= r_b + 1e-12
        if alternative == "greater":
            return ge / total
        return min(1.0, 2.0 * min(ge, le) / total)

    u_b = r_b - n_b * (n_b + 1) / 2.0
    mu = n_a * n_b / 2.0
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = ((tie_counts ** 3 - tie_counts).sum()) / (n * (n - 1))
    sigma2 = n_a * n_b / 12.0 * ((n + 1) - tie_term)
    if sigma2 <= 0:
        return 1.0
    sigma = np.sqrt(sigma2)
    if alternative == "greater":
        z = (u_b - mu - 0.5) / sigma
        return float(norm.sf(z))
    z = (abs(u_b - mu) - 0.5) / sigma
    return float(min(1.0, 2.0 * norm.sf(z)))


def holm_correct(p_values) -> list[float]:
    p = np.asarray(p_values, dtype=np.float64)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    k = p.size
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(k)
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, (k - rank) * p[idx])
        adjusted[idx] = min(1.0, running)
    return adjusted.tolist()


def good_bad_classify(mean_by_score: dict[int, float]) -> str:
    scores = sorted(mean_by_score)
    if scores == [0, 1]:
        return "Good" if mean_by_score[1] > mean_by_score[0] else "Bad"
    if scores == [0, 1, 2]:
        good = (mean_by_score[2] >= mean_by_score[1]
                >= mean_by_score[0])
        return "Good" if good else "Bad"
    raise ValueError(f"score set {scores} must be [0,1] or [0,1,2]")


def _metric_value(row, metric: str) -> float | None:
    v = getattr(row, metric)
    if v is None:
        return None
    if isinstance(v, (tuple, list)):
        # Vector metrics enter scalar aggregation via their sum (the
        # scalar each vector decomposes: Phi for CI / Phi-structure).
        return float(sum(v))
    return float(v)


def _group_key(row):
    return (row.model_name, row.task, row.transformer_layer,
            row.linguistic_span, row.permutation_control)


def criterion1_evaluate(rows, metric: str = "phi_max_3") -> CriterionReport:
    """Per stimulus (within model/task/sheet): require at least one valid
    estimate per score category across the seeds, compare seed-mean
    values, classify Good/Bad; a group passes when the Good fraction
    strictly exceeds 0.80."""
    from .bundle import valid_scores

    by_group: dict[tuple, dict] = {}
    for row in rows:
        g = by_group.setdefault(_group_key(row), {})
        stim = g.setdefault((row.sheet, row.stimulus_id), {})
        if row.valid:
            v = _metric_value(row, metric)
            if v is not None:
                stim.setdefault(row.score, []).append(v)

    report = CriterionReport(criterion=1)
    for key in sorted(by_group):
        required = None
        n_good = n_bad = 0
        good_means: dict[int, list[float]] = {}
        for stim_key, by_score in sorted(by_group[key].items()):
            if required is None:
                required = set(valid_scores(key[1]))
            if not required.issubset(by_score):
                continue  # no valid estimate for some score: excluded
            means = {s: float(np.mean(v)) for s, v in by_score.items()
                     if s in required}
            if good_bad_classify(means) == "Good":
                n_good += 1
            else:
                n_bad += 1
            for s, v in means.items():
                good_means.setdefault(s, []).append(v)
        total = n_good + n_bad
        fraction = n_good / total if total else 0.0
        scores = sorted(good_means)
        p = None
        if len(scores) >= 2 and good_means[scores[0]] and good_means[scores[-1]]:
            p = wilcoxon_rank_sum(good_means[scores[0]],
                                  good_means[scores[-1]],
                                  alternative="greater")
        report.groups.append({
            "key": key, "n_stimuli": total, "n_good": n_good,
            "n_bad": n_bad, "fraction_good": fraction,
            "pass": fraction > 0.80, "p_one_sided": p,
        })
    return report


def criterion2_evaluate(rows, metric: str = "phi_max_3") -> CriterionReport:
    """Two-sided rank tests between score categories at task level,
    Holm-adjusted for 3-score tasks; significance flags at 0.05."""
    by_group: dict[tuple, dict[int, list[float]]] = {}
    for row in rows:
        if not row.valid:
            continue
        v = _metric_value(row, metric)
        if v is None:
            continue
        by_group.setdefault(_group_key(row), {}).setdefault(row.score, []).append(v)

    report = CriterionReport(criterion=2)
    for key in sorted(by_group):
        by_score = by_group[key]
        scores = sorted(by_score)
        pairs = [(s0, s1) for i, s0 in enumerate(scores)
                 for s1 in scores[i + 1:]]
        raw = []
        usable = []
        for s0, s1 in pairs:
            if by_score[s0] and by_score[s1]:
                raw.append(wilcoxon_rank_sum(by_score[s0], by_score[s1],
                                             alternative="two_sided"))
                usable.append((s0, s1))
        adjusted = holm_correct(raw) if len(raw) > 1 else list(raw)
        report.groups.append({
            "key": key,
            "pairs": usable,
            "p_raw": raw,
            "p_adjusted": adjusted,
            "significant": [p < 0.05 for p in adjusted],
        })
    return report


def roc_auc(scores, labels) -> float:
    """Midrank pair-counting AUC: concordant + half-ties over all
    positive/negative pairs."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need both classes")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def _fit_logreg(x: np.ndarray, y: np.ndarray, n_classes: int) -> np.ndarray:
    """Unregularized maximum likelihood by L-BFGS; stops when the
    gradient infinity-norm drops below 1e-6 or after 10,000 iterations.
    Returns (n_classes, d+1) weights (binary: one row)."""
    n, d = x.shape
    xb = np.hstack([x, np.ones((n, 1))])
    if n_classes == 2:
        def nll(w):
            z = xb @ w
            # log(1 + exp(-yz)) with y in {-1, +1}, stable form
            yz = np.where(y == 1, z, -z)
            loss = np.logaddexp(0.0, -yz).sum()
            p = 1.0 / (1.0 + np.exp(-z))
            grad = xb.T @ (p - y)
            return loss, grad
        res = minimize(nll, np.zeros(d + 1), jac=True, method="L-BFGS-B",
                       options={"maxiter": 10000, "gtol": 1e-6, "ftol": 0.0})
        return res.x[None, :]
    onehot = np.eye(n_classes)[y]

    def nll(wflat):
        w = wflat.reshape(n_classes, d + 1)
        z = xb @ w.T
        z -= z.max(axis=1, keepdims=True)
        logsum = np.log(np.exp(z).sum(axis=1))
        loss = (logsum - (z * onehot).sum(axis=1)).sum()
        p = np.exp(z - logsum[:, None])
        grad = (p - onehot).T @ xb
        return loss, grad.ravel()

    res = minimize(nll, np.zeros(n_classes * (d + 1)), jac=True,
                   method="L-BFGS-B",
                   options={"maxiter": 10000, "gtol": 1e-6, "ftol": 0.0})
    return res.x.reshape(n_classes, d + 1)


def _stratified_folds(y: np.ndarray, n_folds: int,
                      rng: np.random.Generator) -> list[np.ndarray]:
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            folds[pos % n_folds].append(int(i))
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def cv_logreg_auc(features: np.ndarray, labels: np.ndarray,
                  repeats: int = 5, folds: int = 5,
                  seed: int = 0) -> tuple[float, float] | None:
    """Mean and standard deviation of ROC AUC over repeated stratified
    cross-validation. Returns None when any class has fewer samples than
    the feature count (the group is filtered out). Zero-variance
    features on a training fold are dropped. Three-class labels use
    multinomial regression with one-vs-rest macro AUC."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(labels, dtype=np.int64)
    classes = np.unique(y)
    n_classes = classes.size
    if n_classes < 2:
        raise ValueError("need at least two classes")
    for cls in classes:
        if (y == cls).sum() < x.shape[1]:
            return None
    y = np.searchsorted(classes, y)
    rng = np.random.default_rng(seed)
    aucs = []
    for _ in range(repeats):
        for test_idx in _stratified_folds(y, folds, rng):
            train_mask = np.ones(y.size, dtype=bool)
            train_mask[test_idx] = False
            x_tr, y_tr = x[train_mask], y[train_mask]
            x_te, y_te = x[test_idx], y[test_idx]
            if np.unique(y_te).size < n_classes or np.unique(y_tr).size < n_classes:
                continue
            mu = x_tr.mean(axis=0)
            sd = x_tr.std(axis=0, ddof=0)
            keep = sd > 0
            if not keep.any():
                continue
            x_tr_z = (x_tr[:, keep] - mu[keep]) / sd[keep]
            x_te_z = (x_te[:, keep] - mu[keep]) / sd[keep]
            w = _fit_logreg(x_tr_z, y_tr, n_classes)
            xb = np.hstack([x_te_z, np.ones((x_te_z.shape[0], 1))])
            if n_classes == 2:
                aucs.append(roc_auc(xb @ w[0], y_te))
            else:
                z = xb @ w.T
                z -= z.max(axis=1, keepdims=True)
                p = np.exp(z)
                p /= p.sum(axis=1, keepdims=True)
                per_class = [roc_auc(p[:, c], (y_te == c).astype(int))
                             for c in range(n_classes)]
                aucs.append(float(np.mean(per_class)))
    if not aucs:
        return None
    return float(np.mean(aucs)), float(np.std(aucs, ddof=0))


def criterion3_evaluate(auc_by_metric: dict[str, tuple[float, float] | None]
                        ) -> CriterionReport:
    """Rank the five metrics by mean AUC (ties share rank in stable
    metric-name order) and flag whether any IIT metric beats the
    span-representation baseline."""
    report = CriterionReport(criterion=3)
    present = {m: v for m, v in auc_by_metric.items() if v is not None}
    ordered = sorted(present, key=lambda m: (-present[m][0], METRICS.index(m)))
    ranks = {}
    for pos, m in enumerate(ordered):
        if pos > 0 and present[m][0] == present[ordered[pos - 1]][0]:
            ranks[m] = ranks[ordered[pos - 1]]
        else:
            ranks[m] = pos + 1
    span = present.get("span_rep")
    any_iit_beats = (span is not None and any(
        present[m][0] > span[0] for m in IIT_METRICS if m in present))
    report.groups.append({
        "auc": present,
        "ranks": ranks,
        "iit_beats_span_rep": any_iit_beats,
        "missing": [m for m in METRICS if m not in present],
    })
    return report
