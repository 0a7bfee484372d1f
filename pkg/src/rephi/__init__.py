"""Integrated-information analysis of transformer token representations.

The library turns per-layer token matrices (stimulus/response pairs)
into 4-node binary representation networks and scores them with IIT 3.0
and IIT 4.0 metrics, permutation controls, and criterion-level
statistics.
"""

from .attention import (MaskConfig, apply_span_masks, attended_response,
                        attention_scores, attention_weights)
from .bundle import (ItemRecord, RepresentationBundle, SpanAnnotationSet,
                     load_bundle, load_span_annotations, write_bundle)
from .errors import (BundleLoadError, BundleValidationError,
                     DegenerateNodeError, DegenerateRepertoireError,
                     MarkovTestUndefinedError, NetworkInitializationError,
                     RephiError, SpanError)
from .iit3 import (Concept, Network3, Phi3Result, System3,
                   big_phi_full_subsystem,
                   state_weighted_average)
from .iit4 import (Distinction, Phi4Result, Relation, intrinsic_difference,
                   phi_structure_full_subsystem)
from .markov import (SearchOutcome, Tpm, build_tpm,
                     conditional_independence_distance, encode_states,
                     markov_property_test, search_optimal_series)
from .pipeline import PipelineConfig, emit_report, run_analysis
from .results import ResultRow, read_result_rows, write_result_rows
from .series import (BinarySeries, PermutationSpec, ReducedSeries,
                     concatenate_series, pca_reduce, span_representation,
                     spatio_permute, standardize_binarize, temporal_permute)
from .stats import (criterion1_evaluate, criterion2_evaluate,
                    criterion3_evaluate, cv_logreg_auc, good_bad_classify,
                    holm_correct, roc_auc, wilcoxon_rank_sum)
from .transport import emd, hamming_cost_matrix

__version__ = "0.1.0"
