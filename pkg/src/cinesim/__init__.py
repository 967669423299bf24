"""Multimodal movie similarity engine.

Per-modality representations (subtitle topics, visual statistics, audio
class proportions, metadata tags) are turned into cosine-similarity
matrices, fused with fitted weights, evaluated against a tag-based ground
truth, and exported as an explorable similarity network.
"""

from .audio import aggregate_labels
from .evaluation import (
    EvalReport,
    evaluate,
    ground_truth_from_tags,
    group_differentiation,
    gt_rank,
    recommend,
    wilcoxon_signed_rank,
)
from .graph import build_graph, export_json, louvain
from .metadata import MovieMetadata, build_index, vectorize
from .similarity import FusionWeights, SimilarityMatrix, cosine_matrix, fit_weights, fuse
from .subtitles import (
    BowMatrix,
    SubtitleDocument,
    TokenStream,
    Vocabulary,
    build_bow,
    default_stopwords,
    parse_srt,
    tokenize_and_lemmatize,
)
from .textmodels import LdaModel, LsiModel, fit_lda, fit_lsi, project, tfidf, top_terms
from .visual import Frame, aggregate, color_features, detect_shots, extract_frame_features

__version__ = "0.1.0"

__all__ = [
    "aggregate_labels",
    "EvalReport",
    "evaluate",
    "ground_truth_from_tags",
    "group_differentiation",
    "gt_rank",
    "recommend",
    "wilcoxon_signed_rank",
    "build_graph",
    "export_json",
    "louvain",
    "MovieMetadata",
    "build_index",
    "vectorize",
    "FusionWeights",
    "SimilarityMatrix",
    "cosine_matrix",
    "fit_weights",
    "fuse",
    "BowMatrix",
    "SubtitleDocument",
    "TokenStream",
    "Vocabulary",
    "build_bow",
    "default_stopwords",
    "parse_srt",
    "tokenize_and_lemmatize",
    "LdaModel",
    "LsiModel",
    "fit_lda",
    "fit_lsi",
    "project",
    "tfidf",
    "top_terms",
    "Frame",
    "aggregate",
    "color_features",
    "detect_shots",
    "extract_frame_features",
]
