"""Model-agnostic hallucination detection and post-hoc RAG mitigation for video captions.

Two pipelines share one deterministic embedding core:

* detection — embed generated and reference captions, score each pair by
  cosine similarity, flag pairs below a threshold, and report the corpus
  mean faithfulness;
* mitigation — build a per-video knowledge base, verify each sentence-level
  claim of a caption against retrieved evidence, and revise ungrounded
  claims until the caption is grounded or the iteration budget runs out.

The embedding kernels come in a compiled variant with a pure-Python fallback
producing bit-identical results; see :mod:`veriscope.kernels`.
"""

from veriscope.clients import (
    ClientMetrics,
    EmbeddingClient,
    GenerationClient,
    GenerationRequest,
    ProviderConfig,
    embed_remote,
    generate_text,
)
from veriscope.corpus import (
    DEFAULT_APPENDIX_POOL,
    DEFAULT_BASE_SENTENCES,
    DEFAULT_SUBSTITUTION_LEXICON,
    CaptionEvent,
    QAPair,
    SynthSpec,
    VideoRecord,
    forge_synthetic,
    load_captions,
    load_forged_corpus,
    load_qa,
    pairs_from_records,
)
from veriscope.embedding import (
    DEFAULT_DIM,
    DETERMINISTIC_HASH,
    REMOTE,
    EmbedderSpec,
    Embedding,
    cosine,
    embed_text,
    embed_texts,
)
from veriscope.errors import (
    ContractViolation,
    DatasetValidationError,
    GenerationError,
    ProviderUnavailable,
    UsageError,
    VeriscopeError,
    VerificationImpossible,
)
from veriscope.faithfulness import (
    DEFAULT_THRESHOLD,
    CaptionPair,
    FaithfulnessReport,
    PairScore,
    classify,
    score_corpus,
    score_pair,
)
from veriscope.kb import (
    KnowledgeEntry,
    SearchHit,
    SessionKnowledgeBase,
    build_session_kb,
    load_snapshot,
    save_snapshot,
    search,
)
from veriscope.metrics import (
    AccuracyResult,
    DetectorQuality,
    accuracy,
    detector_quality,
    emit_report,
)
from veriscope.mitigation import (
    Claim,
    RevisionOutcome,
    VerificationResult,
    mitigate,
    revise_llm,
    revise_stub,
    split_claims,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyResult",
    "CaptionEvent",
    "CaptionPair",
    "Claim",
    "ClientMetrics",
    "ContractViolation",
    "DEFAULT_APPENDIX_POOL",
    "DEFAULT_BASE_SENTENCES",
    "DEFAULT_DIM",
    "DEFAULT_SUBSTITUTION_LEXICON",
    "DEFAULT_THRESHOLD",
    "DETERMINISTIC_HASH",
    "DatasetValidationError",
    "DetectorQuality",
    "EmbedderSpec",
    "Embedding",
    "EmbeddingClient",
    "FaithfulnessReport",
    "GenerationClient",
    "GenerationError",
    "GenerationRequest",
    "KnowledgeEntry",
    "PairScore",
    "ProviderConfig",
    "ProviderUnavailable",
    "QAPair",
    "REMOTE",
    "RevisionOutcome",
    "SearchHit",
    "SessionKnowledgeBase",
    "SynthSpec",
    "UsageError",
    "VeriscopeError",
    "VerificationImpossible",
    "VerificationResult",
    "VideoRecord",
    "accuracy",
    "build_session_kb",
    "classify",
    "cosine",
    "detector_quality",
    "embed_remote",
    "embed_text",
    "embed_texts",
    "emit_report",
    "forge_synthetic",
    "generate_text",
    "load_captions",
    "load_forged_corpus",
    "load_qa",
    "load_snapshot",
    "mitigate",
    "pairs_from_records",
    "revise_llm",
    "revise_stub",
    "save_snapshot",
    "score_corpus",
    "score_pair",
    "search",
    "split_claims",
    "verify",
]
