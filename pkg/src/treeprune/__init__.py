"""treeprune: unsupervised sentence simplification over dependency trees.

Phase 1 deletes redundant content by beam search restricted to the
children of the previously generated token; phase 2 optionally paraphrases
via round-trip translation. Ships with the automatic evaluation suite
(CR, CP, %SP, %A, %D, LevSIM, SIM, SARI) and leave-one-out importance
analysis.
"""

from .analysis import ImportanceProfile, aggregate_profile, leave_one_out_reductions
from .backtranslate import (
    BackTranslator,
    BtConfig,
    BtOutcome,
    DictionaryClient,
    HttpTranslationClient,
    IdentityClient,
    TranslationClient,
    batch_round_trip,
    round_trip,
)
from .decoder import (
    CHUNK_SEPARATOR,
    DecoderConfig,
    Hypothesis,
    ScoreBreakdown,
    SimplificationResult,
    Simplifier,
    expand,
    initial_hypotheses,
    render,
    score,
    simplify,
    simplify_corpus,
)
from .errors import (
    ConfigurationError,
    ConlluParseError,
    DegenerateVectorError,
    EmbeddingServiceError,
    ModelFormatError,
    TrainingError,
    TranslationError,
    TreepruneError,
    TreeStructureError,
)
from .fluency import PosKneserNeyLM, read_pos_corpus, train_pos_lm
from .metrics import (
    EvalInstance,
    MetricsReport,
    SariScore,
    additions_proportion,
    compression_ratio,
    deletions_proportion,
    evaluate_corpus,
    exact_copy,
    levenshtein_distance,
    levenshtein_similarity,
    read_parallel_files,
    sari,
    split_ratio,
    word_tokenize,
)
from .similarity import (
    CachingBackend,
    EmbeddingBackend,
    HashingBackend,
    HttpEmbeddingBackend,
    WordVectorBackend,
    cosine,
    similarity_score,
)
from .treebank import (
    UNK_TAG,
    UPOS_TAGS,
    DepSentence,
    DepToken,
    ParseWarnings,
    iter_conllu,
    parse_conllu,
    read_conllu,
)

__version__ = "0.1.0"
