"""Real-time moderation for code-review comments.

Three stages: a binary toxicity filter, a multi-label category classifier
that explains each assignment, and a verified toxic-to-civil rewriter.
Around them: evaluation metrics, corpus tooling, and an HTTP gateway.
"""

from .records import (
    CategoryAssignment,
    CommentRecord,
    Label,
    ParseStatus,
    PipelineOutcome,
    RewriteResult,
    Verdict,
    outcome_to_dict,
)
from .taxonomy import CategoryDef, Taxonomy, default_taxonomy, load_taxonomy
from .filtering import FilterConfig, calibrate_threshold, classify, classify_text
from .coach import CoachConfig, ParseMode, build_coach_prompt, categorize, parse_coach_response
from .reframer import (
    ParallelPair,
    ReframeConfig,
    build_parallel_corpus,
    reframe,
    verify_rewrite,
)
from .metrics import (
    ConfusionCounts,
    MetricReport,
    MultiLabelEval,
    PairScore,
    RaterPair,
    TstEval,
    cohen_kappa,
    content_preservation,
    fluency,
    j_score,
    macro_f1,
    macro_mcc,
    mcc,
    precision_recall_f1,
    score_pairs,
    sta,
)
from .corpus import (
    LabeledCorpus,
    LabeledRecord,
    SplitAssignment,
    holdout_split,
    ingest,
    stratified_kfold,
)
from .service import (
    FeedbackAction,
    FeedbackRecord,
    GatewayConfig,
    ModerationPipeline,
    ModerationService,
    build_service,
    load_service_config,
)

__version__ = "0.1.0"

__all__ = [
    "CategoryAssignment",
    "CategoryDef",
    "CoachConfig",
    "CommentRecord",
    "ConfusionCounts",
    "FeedbackAction",
    "FeedbackRecord",
    "FilterConfig",
    "GatewayConfig",
    "Label",
    "LabeledCorpus",
    "LabeledRecord",
    "MetricReport",
    "ModerationPipeline",
    "ModerationService",
    "MultiLabelEval",
    "PairScore",
    "ParallelPair",
    "ParseMode",
    "ParseStatus",
    "PipelineOutcome",
    "RaterPair",
    "ReframeConfig",
    "RewriteResult",
    "SplitAssignment",
    "Taxonomy",
    "TstEval",
    "Verdict",
    "build_coach_prompt",
    "build_parallel_corpus",
    "build_service",
    "calibrate_threshold",
    "categorize",
    "classify",
    "classify_text",
    "cohen_kappa",
    "content_preservation",
    "default_taxonomy",
    "fluency",
    "holdout_split",
    "ingest",
    "j_score",
    "load_service_config",
    "load_taxonomy",
    "macro_f1",
    "macro_mcc",
    "mcc",
    "outcome_to_dict",
    "parse_coach_response",
    "precision_recall_f1",
    "reframe",
    "score_pairs",
    "sta",
    "stratified_kfold",
    "verify_rewrite",
]
