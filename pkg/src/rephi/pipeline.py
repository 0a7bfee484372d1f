"""End-to-end orchestration.

For every combination of (layer, stimulus, linguistic span, score,
permutation control, seed) the pipeline builds attended response
representations, searches token budgets for the best-behaved
concatenated series, derives the empirical TPM, computes the
state-frequency-weighted IIT 3.0 and 4.0 metrics plus the span
representation, and emits exactly one result row (valid or not). All
randomness flows through per-row hashed streams, so reruns and
parallel execution are byte-deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attention import (MaskConfig, apply_span_masks, attended_response,
                        attention_scores, attention_weights)
from .bundle import (RepresentationBundle, SpanAnnotationSet, load_bundle,
                     load_span_annotations, valid_scores)
from .errors import (DegenerateRepertoireError, NetworkInitializationError,
                     RephiError)
from .iit3 import Network3, System3, state_weighted_average
from .iit4 import phi_structure_full_subsystem
from .markov import N_STATES, search_optimal_series
from .results import (BUDGETS, PERMUTATIONS, SEEDS, SPANS, ResultRow,
                      write_result_rows)
from .series import PermutationSpec, span_representation
from .stats import (METRICS, CriterionReport, criterion1_evaluate,
                    criterion2_evaluate, criterion3_evaluate, cv_logreg_auc)

__all__ = ["PipelineConfig", "run_analysis", "emit_report", "layer_labels"]


@dataclass(frozen=True)
class PipelineConfig:
    bundle_path: str
    spans_path: str | None = None
    out_dir: str = "out"
    budgets: tuple[int, ...] = BUDGETS
    seeds: tuple[int, ...] = SEEDS
    permutations: tuple[str, ...] = PERMUTATIONS
    spans: tuple[str, ...] = SPANS
    mask: MaskConfig = field(default_factory=MaskConfig)
    pca_dims: int = 4
    markov_p_min: float = 0.05
    d_max: float = 100.0
    spatio_mode: str = "shared"
    workers: int = 1

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seeds list must be non-empty")
        if any(b <= a for a, b in zip(self.budgets, self.budgets[1:])):
            raise ValueError("budgets must be ascending")
        if self.pca_dims < 2:
            raise ValueError("pca_dims must be at least 2")
        for s in self.spans:
            if s not in SPANS:
                raise ValueError(f"unknown span kind {s!r}")
        for p in self.permutations:
            if p not in PERMUTATIONS:
                raise ValueError(f"unknown permutation kind {p!r}")

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "PipelineConfig":
        doc = json.loads(Path(path).read_text())
        if "mask" in doc:
            doc["mask"] = MaskConfig(**doc["mask"])
        for key in ("budgets", "seeds", "permutations", "spans"):
            if key in doc:
                doc[key] = tuple(doc[key])
        doc.update(overrides)
        return cls(**doc)


def layer_labels(bundle: RepresentationBundle) -> dict[int, str]:
    """Map actual layer numbers to row labels: sampled layers are
    indexed "0".."11" in order; the extra 2L/3 sample is labelled
    "2/3"."""
    labels = {}
    pos = 0
    for layer in bundle.layer_indices:
        if layer == bundle.two_thirds_layer:
            labels[layer] = "2/3"
        else:
            labels[layer] = str(pos)
            pos += 1
    return labels


def _carr(response_mat: np.ndarray, stimulus_mat: np.ndarray,
          span_kind: str, annotations: SpanAnnotationSet | None,
          stimulus_id: str, cfg: MaskConfig) -> np.ndarray | None:
    scores = attention_scores(response_mat, stimulus_mat)
    if span_kind != "Entire":
        if annotations is None:
            return None
        spans = annotations.interested(stimulus_id, span_kind)
        contexts = annotations.context(stimulus_id, span_kind)
        if not spans and not contexts:
            return None
        scores = apply_span_masks(scores, spans, contexts, cfg)
    return attended_response(attention_weights(scores), stimulus_mat)


def _state_frequencies(states: np.ndarray) -> np.ndarray:
    freq = np.bincount(states, minlength=N_STATES).astype(np.float64)
    return freq / freq.sum()


def _invalid_row(key: dict, failure: str) -> ResultRow:
    return ResultRow(**key, actual_tokens=None, phi_max_3=None, phi_4=None,
                     ci_3=None, phi_structure_4=None, span_rep=None,
                     markov_p=None, ci_distance_d=None,
                     valid=False, failure=failure)


def _analyze_one(key: dict, originals, augmented, spec, config) -> ResultRow:
    row_key = tuple(key[k] for k in (
        "model_name", "transformer_layer", "task", "sheet", "stimulus_id",
        "score", "linguistic_span", "permutation_control"))
    outcome, failure = search_optimal_series(
        originals, augmented, spec, row_key, key["seed"],
        budgets=config.budgets, markov_p_min=config.markov_p_min,
        d_max=config.d_max)
    if outcome is None:
        return _invalid_row(key, failure)

    freq = _state_frequencies(outcome.states)
    sbn = outcome.tpm.state_by_node
    visited = [s for s in range(N_STATES) if freq[s] > 0]
    phi3, ci3, phi4, vec4 = {}, {}, {}, {}
    try:
        system = System3(sbn)
        for s in visited:
            r3 = system.big_phi(s)
            phi3[s], ci3[s] = r3.phi_max, r3.ci_vector
    except DegenerateRepertoireError:
        return _invalid_row(key, "degenerate_node")
    try:
        net4 = Network3(sbn)
        for s in visited:
            r4 = phi_structure_full_subsystem(sbn, s, net=net4)
            phi4[s], vec4[s] = r4.phi, r4.structure_vector
    except NetworkInitializationError:
        return _invalid_row(key, "iit4_init_fail")

    t = outcome.reduced.scores.shape[0]
    rep = span_representation(outcome.reduced, 0, t - 1)
    key = dict(key, limited_tokens=outcome.t_i)
    return ResultRow(
        **key,
        actual_tokens=outcome.actual_tokens,
        phi_max_3=float(state_weighted_average(phi3, freq)),
        phi_4=float(state_weighted_average(phi4, freq)),
        ci_3=tuple(state_weighted_average(ci3, freq)),
        phi_structure_4=tuple(state_weighted_average(vec4, freq)),
        span_rep=tuple(float(x) for x in rep),
        markov_p=outcome.p_i,
        ci_distance_d=outcome.d_i,
        valid=True,
    )


def run_analysis(config: PipelineConfig) -> list[ResultRow]:
    bundle = load_bundle(config.bundle_path)
    annotations = (load_span_annotations(config.spans_path, bundle)
                   if config.spans_path else None)
    labels = layer_labels(bundle)

    stimuli = sorted((it for it in bundle.items if it.kind == "stimulus"),
                     key=lambda it: (it.task, it.sheet, it.stimulus_id))
    rows: list[ResultRow] = []
    for stim in stimuli:
        for layer in bundle.layer_indices:
            stim_mat = stim.matrices[layer]
            for span_kind in config.spans:
                # Pre-compute attended representations per response.
                arr_cache: dict[str, np.ndarray | None] = {}
                for score in valid_scores(stim.task):
                    responses = bundle.responses(stim.stimulus_id, score)
                    if not responses:
                        continue
                    pools: dict[bool, list] = {False: [], True: []}
                    skip_span = False
                    for resp in sorted(responses, key=lambda r: r.id):
                        if resp.id not in arr_cache:
                            arr_cache[resp.id] = _carr(
                                resp.matrices[layer], stim_mat, span_kind,
                                annotations, stim.stimulus_id, config.mask)
                        mat = arr_cache[resp.id]
                        if mat is None:
                            skip_span = True
                            break
                        pools[resp.augmented].append((resp.id, mat))
                    if skip_span:
                        break  # stimulus lacks annotations for this span kind
                    for permutation in config.permutations:
                        for seed in config.seeds:
                            key = {
                                "linguistic_span": span_kind,
                                "model_name": bundle.model_name,
                                "transformer_layer": labels[layer],
                                "task": stim.task,
                                "sheet": stim.sheet,
                                "stimulus_id": stim.stimulus_id,
                                "score": score,
                                "limited_tokens": config.budgets[0],
                                "permutation_control": permutation,
                                "seed": seed,
                            }
                            spec = PermutationSpec(
                                kind=permutation, seed=seed,
                                spatio_mode=config.spatio_mode)
                            rows.append(_analyze_one(
                                key, pools[False], pools[True], spec, config))
    return rows


def _filter_valid(rows):
    return [r for r in rows if r.valid]


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=1, default=_jsonable))


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _report_groups(report: CriterionReport) -> list[dict]:
    out = []
    for g in report.groups:
        rec = dict(g)
        if "key" in rec:
            rec["key"] = list(rec["key"])
        if "pairs" in rec:
            rec["pairs"] = [list(p) for p in rec["pairs"]]
        out.append(rec)
    return out


def emit_report(rows: list[ResultRow], kind: str, out_dir: str | Path) -> Path:
    """Emit the plot-ready record stream for one report kind. Returns
    the path written. Empty inputs produce a notice file."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = out / f"{kind}.json"
    valid = _filter_valid(rows)
    if kind == "phi_distributions":
        if not valid:
            return _notice(target)
        groups: dict[tuple, dict] = {}
        for r in valid:
            key = (r.model_name, r.task, r.transformer_layer,
                   r.linguistic_span, r.permutation_control)
            g = groups.setdefault(key, {})
            s = g.setdefault(r.score, {"phi_max_3": [], "phi_4": [], "n": 0})
            s["phi_max_3"].append(r.phi_max_3)
            s["phi_4"].append(r.phi_4)
            s["n"] += 1
        payload = [{"key": list(k),
                    "scores": {str(s): v for s, v in sorted(g.items())}}
                   for k, g in sorted(groups.items())]
        _write_json(target, payload)
        return target
    if kind == "criterion1":
        if not rows:
            return _notice(target)
        payload = {m: _report_groups(criterion1_evaluate(rows, metric=m))
                   for m in ("phi_max_3", "phi_4")}
        _write_json(target, payload)
        return target
    if kind == "criterion2":
        if not valid:
            return _notice(target)
        payload = {m: _report_groups(criterion2_evaluate(rows, metric=m))
                   for m in ("phi_max_3", "phi_4")}
        _write_json(target, payload)
        return target
    if kind == "criterion3":
        if not valid:
            return _notice(target)
        groups: dict[tuple, list] = {}
        for r in valid:
            key = (r.model_name, r.task, r.transformer_layer,
                   r.linguistic_span, r.permutation_control)
            groups.setdefault(key, []).append(r)
        payload = []
        for key, members in sorted(groups.items()):
            auc_by_metric = {}
            labels_all = np.array([r.score for r in members])
            for metric in METRICS:
                feats = []
                for r in members:
                    v = getattr(r, metric)
                    feats.append([v] if isinstance(v, float) else list(v))
                auc_by_metric[metric] = cv_logreg_auc(
                    np.array(feats), labels_all, seed=0)
            rep = criterion3_evaluate(auc_by_metric)
            rec = _report_groups(rep)[0]
            rec["key"] = list(key)
            rec["n_samples"] = len(members)
            rec["auc"] = {m: (list(v) if v else None)
                          for m, v in rec["auc"].items()}
            payload.append(rec)
        _write_json(target, payload)
        return target
    raise ValueError(f"unknown report kind {kind!r}")


def _notice(target: Path) -> Path:
    notice = target.with_suffix(".empty.txt")
    notice.write_text("no rows survived the report filters\n")
    return notice


def run_and_write(config: PipelineConfig) -> tuple[list[ResultRow], Path]:
    """Run the analysis and persist rows under the configured output
    directory (results.csv / results.jsonl)."""
    rows = run_analysis(config)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = out / "results"
    if rows:
        write_result_rows(rows, base)
    return rows, base
