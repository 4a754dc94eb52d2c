"""Structural simplification: beam search over a sentence's dependency tree.

The search space is child-restricted: at each step, candidate tokens are the
children of the most recently generated token that are not already selected.
When that set is empty a chunk boundary is opened and generation restarts at
the unselected token nearest to the root (minimal depth, ties to the lowest
index). Hypotheses are scored by

    total = sim + alpha * flu + depth

where sim is the clamped cosine between the original sentence and the
hypothesis render, flu the geometric-mean POS n-gram probability (scored per
chunk with fresh context), and depth the inverse maximum tree depth over the
selected tokens; all three live in [0, 1].

The search stops at the first step that produces a hypothesis of at least
ceil(lambda_ratio * n) tokens with sim >= tau, and returns the best-scoring
such hypothesis of that minimal length ("shortest, then most similar"). If
no hypothesis ever satisfies both bounds, the search exhausts the tokens and
returns the best full-coverage hypothesis, which may be an exact copy.

The whole procedure is deterministic: ties break on fewer tokens, then the
lexicographically smaller generation sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from .errors import TreepruneError
from .fluency import PosKneserNeyLM
from .similarity import CachingBackend, EmbeddingBackend, similarity_score
from .treebank import DepSentence
from .validation import check_fitted, check_positive_int, check_unit_interval

CHUNK_SEPARATOR = " - "

REASON_THRESHOLD = "threshold-met"
REASON_EXHAUSTED = "tokens-exhausted"


@dataclass(frozen=True)
class DecoderConfig:
    """Search weights and termination thresholds (defaults: base configuration)."""

    alpha: float = 2.0
    tau: float = 0.95
    lambda_ratio: float = 0.5
    beam_size: int = 5

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        check_unit_interval(self.tau, "tau")
        check_unit_interval(self.lambda_ratio, "lambda_ratio", open_low=True)
        check_positive_int(self.beam_size, "beam_size")


@dataclass(frozen=True)
class ScoreBreakdown:
    sim: float
    flu: float
    depth: float
    total: float


@dataclass
class Hypothesis:
    """A partial simplification: token indices in generation order.

    ``chunks`` partitions ``selected``; within a chunk every token after the
    first is a child of its predecessor. ``frontier`` is the most recently
    generated token. ``chunk_marks`` records the global scored-hypothesis
    counter at each chunk start (work-bound accounting).
    """

    selected: tuple[int, ...]
    chunks: tuple[tuple[int, ...], ...]
    frontier: int
    score: ScoreBreakdown | None = None
    terminated: bool = False
    chunk_marks: tuple[int, ...] = (0,)

    def selected_set(self) -> frozenset[int]:
        return frozenset(self.selected)


@dataclass(frozen=True)
class SimplificationResult:
    """Decoded output for one sentence, with provenance counters."""

    surface: str
    selected: tuple[int, ...]
    chunks: tuple[tuple[int, ...], ...]
    score: ScoreBreakdown
    reason: str
    hypotheses_scored: int
    chunks_created: int
    chunk_work: tuple[int, ...]


def initial_hypotheses(sent: DepSentence) -> list[Hypothesis]:
    """Seed the search with [subject, root] when the root has a subject.

    The subject is selected but not expanded: generation continues from the
    root, so the subject's own subtree stays out of the candidate sets.
    """
    root = sent.root
    subject = sent.root_subject()
    if subject is None:
        selected = (root,)
    else:
        selected = (subject, root)
    return [Hypothesis(selected=selected, chunks=(selected,), frontier=root)]


def expand(sent: DepSentence, hyp: Hypothesis) -> list[Hypothesis]:
    """One-step continuations of a live hypothesis.

    Children of the frontier not yet selected each yield one continuation of
    the current chunk. An empty candidate set opens a new chunk at the
    unselected token with minimal (depth, index). With no unselected tokens
    left, the hypothesis itself is returned marked terminated.
    """
    if hyp.terminated:
        raise ValueError("cannot expand a terminated hypothesis")
    taken = hyp.selected_set()
    candidates = [j for j in sent.children(hyp.frontier) if j not in taken]
    if candidates:
        return [
            Hypothesis(
                selected=hyp.selected + (j,),
                chunks=hyp.chunks[:-1] + (hyp.chunks[-1] + (j,),),
                frontier=j,
                chunk_marks=hyp.chunk_marks,
            )
            for j in candidates
        ]
    unselected = [i for i in range(1, len(sent) + 1) if i not in taken]
    if not unselected:
        hyp.terminated = True
        return [hyp]
    restart = min(unselected, key=lambda i: (sent.depth(i), i))
    return [
        Hypothesis(
            selected=hyp.selected + (restart,),
            chunks=hyp.chunks + ((restart,),),
            frontier=restart,
            chunk_marks=hyp.chunk_marks,  # simplify() appends the step mark
        )
    ]


def render(sent: DepSentence, hyp: Hypothesis | SimplificationResult) -> str:
    """Surface string: chunks joined by the separator, tokens in input order."""
    parts = []
    for chunk in hyp.chunks:
        parts.append(" ".join(sent.tokens[i - 1].form for i in sorted(chunk)))
    return CHUNK_SEPARATOR.join(parts)


def scoring_text(sent: DepSentence, hyp: Hypothesis) -> str:
    """The render without separator markers; this is what similarity sees."""
    words = []
    for chunk in hyp.chunks:
        words.extend(sent.tokens[i - 1].form for i in sorted(chunk))
    return " ".join(words)


def score(
    cfg: DecoderConfig,
    sent: DepSentence,
    hyp: Hypothesis,
    lm: PosKneserNeyLM,
    backend: EmbeddingBackend,
) -> ScoreBreakdown:
    """Score a hypothesis; pure in its inputs."""
    if not hyp.selected:
        raise ValueError("cannot score an empty hypothesis")
    sim = similarity_score(backend, sent.text, scoring_text(sent, hyp))
    chunk_tags = [sent.pos_tags(sorted(chunk)) for chunk in hyp.chunks]
    flu = lm.chunked_fluency_score(chunk_tags)
    depth = 1.0 / sent.max_depth_of(hyp.selected)
    return ScoreBreakdown(sim=sim, flu=flu, depth=depth, total=sim + cfg.alpha * flu + depth)


def _rank(hyp: Hypothesis):
    # higher total first, then fewer tokens, then lexicographic generation order
    return (-hyp.score.total, len(hyp.selected), hyp.selected)


def simplify(
    cfg: DecoderConfig,
    sent: DepSentence,
    lm: PosKneserNeyLM,
    backend: EmbeddingBackend,
) -> SimplificationResult:
    """Run the beam search on one sentence."""
    n = len(sent)
    min_len = math.ceil(cfg.lambda_ratio * n)
    cached = CachingBackend(backend)  # per-sentence cache keyed by rendered string
    scored = 0

    def _score(h: Hypothesis) -> None:
        nonlocal scored
        h.score = score(cfg, sent, h, lm, cached)
        scored += 1

    def completable(h: Hypothesis) -> bool:
        return (
            not h.terminated
            and len(h.selected) >= min_len
            and h.score.sim >= cfg.tau
        )

    def result(h: Hypothesis, reason: str) -> SimplificationResult:
        marks = h.chunk_marks + (scored,)
        work = tuple(marks[i + 1] - marks[i] for i in range(len(h.chunks)))
        return SimplificationResult(
            surface=render(sent, h),
            selected=h.selected,
            chunks=h.chunks,
            score=h.score,
            reason=reason,
            hypotheses_scored=scored,
            chunks_created=len(h.chunks),
            chunk_work=work,
        )

    init = initial_hypotheses(sent)[0]
    _score(init)
    init.chunk_marks = (scored,)
    if completable(init):
        return result(init, REASON_THRESHOLD)

    beam = [init]
    while True:
        if all(h.terminated for h in beam):
            beam.sort(key=_rank)
            return result(beam[0], REASON_EXHAUSTED)
        step_mark = scored
        candidates: list[Hypothesis] = []
        harvest: list[Hypothesis] = []
        for h in beam:
            if h.terminated:
                candidates.append(h)
                continue
            for child in expand(sent, h):
                if child.terminated:
                    candidates.append(child)
                    continue
                if len(child.chunks) > len(h.chunks):
                    child.chunk_marks = h.chunk_marks + (step_mark,)
                _score(child)
                if completable(child):
                    harvest.append(child)
                else:
                    candidates.append(child)
        if harvest:
            harvest.sort(key=_rank)
            return result(harvest[0], REASON_THRESHOLD)
        candidates.sort(key=_rank)
        beam = candidates[: cfg.beam_size]


@dataclass
class SentenceError:
    """Recorded failure for one sentence in a batch run."""

    index: int
    message: str


def simplify_corpus(
    cfg: DecoderConfig,
    sentences: Sequence[DepSentence],
    lm: PosKneserNeyLM,
    backend: EmbeddingBackend,
    jobs: int = 1,
) -> tuple[list[SimplificationResult | None], list[SentenceError]]:
    """Simplify a corpus; per-sentence failures are isolated, order preserved."""
    results: list[SimplificationResult | None] = [None] * len(sentences)
    errors: list[SentenceError] = []

    def run(i: int):
        try:
            results[i] = simplify(cfg, sentences[i], lm, backend)
        except TreepruneError as exc:
            errors.append(SentenceError(index=i, message=str(exc)))

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(run, range(len(sentences))))
    else:
        for i in range(len(sentences)):
            run(i)
    errors.sort(key=lambda e: e.index)
    return results, errors


class Simplifier(TransformerMixin, BaseEstimator):
    """sklearn-style wrapper: transform() maps DepSentences to results.

    The language model and embedding backend are collaborators passed at
    construction, like nested estimators; the transformer itself is
    stateless beyond parameter validation in fit().
    """

    def __init__(
        self,
        lm: PosKneserNeyLM | None = None,
        backend: EmbeddingBackend | None = None,
        alpha: float = 2.0,
        tau: float = 0.95,
        lambda_ratio: float = 0.5,
        beam_size: int = 5,
    ):
        self.lm = lm
        self.backend = backend
        self.alpha = alpha
        self.tau = tau
        self.lambda_ratio = lambda_ratio
        self.beam_size = beam_size

    def fit(self, X=None, y=None) -> "Simplifier":
        if self.lm is None:
            raise ValueError("Simplifier requires a fitted PosKneserNeyLM (lm=...)")
        if self.backend is None:
            raise ValueError("Simplifier requires an EmbeddingBackend (backend=...)")
        check_fitted(self.lm, ["events_"])
        self.config_ = DecoderConfig(
            alpha=self.alpha,
            tau=self.tau,
            lambda_ratio=self.lambda_ratio,
            beam_size=self.beam_size,
        )
        return self

    def transform(self, X: Iterable[DepSentence]) -> list[SimplificationResult]:
        check_fitted(self, ["config_"])
        return [simplify(self.config_, sent, self.lm, self.backend) for sent in X]

    def simplify_sentence(self, sent: DepSentence) -> SimplificationResult:
        check_fitted(self, ["config_"])
        return simplify(self.config_, sent, self.lm, self.backend)
