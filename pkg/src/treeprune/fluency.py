"""Kneser-Ney smoothed n-gram language model over a bounded POS tagset.

The model predicts over a closed event vocabulary (declared tags + UNK +
end-of-sequence), so every conditional distribution sums to one exactly and
every event keeps strictly positive mass. The fluency score of a tag
sequence is the geometric mean of its per-step conditional probabilities,
which keeps the score inside (0, 1] while preserving the ordering of mean
log probabilities.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator

from .errors import ModelFormatError, TrainingError
from .treebank import UNK_TAG, UPOS_TAGS
from .validation import check_fitted

BOS = "<s>"
EOS = "</s>"

_FORMAT_NAME = "treeprune-pos-lm"
_FORMAT_VERSION = 1


class PosKneserNeyLM(BaseEstimator):
    """Interpolated Kneser-Ney n-gram model over POS tags.

    Parameters
    ----------
    order : n-gram order, >= 2 (default 4).
    discount : absolute discount in (0, 1) (default 0.75).
    tagset : declared tags; UNK is appended automatically. Defaults to the
        17 universal POS tags.

    The highest order uses absolute discounting over raw counts; lower
    orders use continuation counts (distinct left extensions), bottoming out
    at a uniform distribution over the event vocabulary. Tags outside the
    declared tagset are mapped to UNK (counted in ``unknown_tags_``).
    """

    def __init__(self, order: int = 4, discount: float = 0.75, tagset: Sequence[str] | None = None):
        self.order = order
        self.discount = discount
        self.tagset = tagset

    # -- construction ----------------------------------------------------

    def fit(self, sequences: Iterable[Sequence[str]], y=None) -> "PosKneserNeyLM":
        """Count n-grams over the corpus of tag sequences."""
        self._validate_params()
        corpus = [list(seq) for seq in sequences]
        if not corpus:
            raise TrainingError("training corpus is empty")
        if any(not seq for seq in corpus):
            raise TrainingError("training corpus contains an empty sequence")

        self.tagset_ = self._declared_tags()
        self.events_ = self.tagset_ + (EOS,)
        self.unknown_tags_ = 0

        known = set(self.tagset_)
        raw: dict[int, dict] = {m: defaultdict(int) for m in range(2, self.order + 1)}
        for seq in corpus:
            mapped = []
            for tag in seq:
                if tag not in known:
                    self.unknown_tags_ += 1
                    tag = UNK_TAG
                mapped.append(tag)
            padded = [BOS] * (self.order - 1) + mapped + [EOS]
            length = len(padded)
            for m in range(2, self.order + 1):
                # start at order-m so the predicted token is never BOS
                for i in range(self.order - m, length - m + 1):
                    ctx = tuple(padded[i : i + m - 1])
                    raw[m][(ctx, padded[i + m - 1])] += 1
        self._raw_counts_ = {m: dict(counts) for m, counts in raw.items()}
        self._build_derived_tables()
        return self

    @classmethod
    def uniform(cls, tagset: Sequence[str] | None = None, order: int = 4) -> "PosKneserNeyLM":
        """A no-evidence model: every conditional is 1/|event vocabulary|."""
        lm = cls(order=order, tagset=tagset)
        lm._validate_params()
        lm.tagset_ = lm._declared_tags()
        lm.events_ = lm.tagset_ + (EOS,)
        lm.unknown_tags_ = 0
        lm._raw_counts_ = {m: {} for m in range(2, order + 1)}
        lm._build_derived_tables()
        return lm

    def _validate_params(self) -> None:
        if not isinstance(self.order, int) or self.order < 2:
            raise TrainingError(f"order must be an integer >= 2, got {self.order!r}")
        if not 0.0 < self.discount < 1.0:
            raise TrainingError(f"discount must be in (0, 1), got {self.discount!r}")

    def _declared_tags(self) -> tuple[str, ...]:
        declared = tuple(self.tagset) if self.tagset is not None else UPOS_TAGS
        for tag in declared:
            if not tag or any(ch.isspace() for ch in tag):
                raise TrainingError(f"tag {tag!r} is empty or contains whitespace")
        if len(set(declared)) != len(declared):
            raise TrainingError("tagset contains duplicates")
        if UNK_TAG not in declared:
            declared = declared + (UNK_TAG,)
        return declared

    def _build_derived_tables(self) -> None:
        """Derive continuation counts and per-context totals from raw counts."""
        order = self.order
        self._cont_counts_: dict[int, dict] = {m: defaultdict(int) for m in range(1, order)}
        for m in range(1, order):
            for (ctx, w) in self._raw_counts_[m + 1]:
                self._cont_counts_[m][(ctx[1:], w)] += 1
        self._cont_counts_ = {m: dict(c) for m, c in self._cont_counts_.items()}

        def totals(table):
            tot: dict = defaultdict(int)
            distinct: dict = defaultdict(int)
            for (ctx, _w), c in table.items():
                tot[ctx] += c
                distinct[ctx] += 1
            return dict(tot), dict(distinct)

        self._ctx_total_ = {}
        self._ctx_distinct_ = {}
        self._ctx_total_[order], self._ctx_distinct_[order] = totals(self._raw_counts_[order])
        for m in range(1, order):
            self._ctx_total_[m], self._ctx_distinct_[m] = totals(self._cont_counts_[m])

    # -- queries ----------------------------------------------------------

    def _map_tag(self, tag: str) -> str:
        if tag in (BOS, EOS):
            return tag
        return tag if tag in self._known_ else UNK_TAG

    @property
    def _known_(self) -> set:
        cached = getattr(self, "_known_cache_", None)
        if cached is None:
            cached = set(self.tagset_)
            self._known_cache_ = cached
        return cached

    def prob(self, tag: str, context: Sequence[str] = ()) -> float:
        """Conditional probability of ``tag`` given the padded context.

        The context is left-padded with BOS to order-1. Querying BOS as the
        target returns 0.0 (it is never a predicted event).
        """
        check_fitted(self, ["events_"])
        tag = self._map_tag(tag)
        if tag == BOS:
            return 0.0
        ctx = tuple(self._map_tag(t) for t in context)
        need = self.order - 1
        if len(ctx) < need:
            ctx = (BOS,) * (need - len(ctx)) + ctx
        else:
            ctx = ctx[-need:] if need else ()
        return self._p(tag, ctx, self.order)

    def _p(self, w: str, ctx: tuple, m: int) -> float:
        d = self.discount
        if m == 1:
            table = self._cont_counts_[1]
            total = self._ctx_total_[1].get((), 0)
            uniform = 1.0 / len(self.events_)
            if total == 0:
                return uniform
            c = table.get(((), w), 0)
            types = self._ctx_distinct_[1].get((), 0)
            return (max(c - d, 0.0) + d * types * uniform) / total
        table = self._raw_counts_[m] if m == self.order else self._cont_counts_[m]
        total = self._ctx_total_[m].get(ctx, 0)
        if total == 0:
            return self._p(w, ctx[1:], m - 1)
        c = table.get((ctx, w), 0)
        types = self._ctx_distinct_[m].get(ctx, 0)
        return (max(c - d, 0.0) + d * types * self._p(w, ctx[1:], m - 1)) / total

    def sequence_log_prob(self, tags: Sequence[str]) -> float:
        """Sum of per-token conditional log probabilities with BOS padding.

        No end-of-sequence term is added: the decoder scores prefixes.
        """
        check_fitted(self, ["events_"])
        tags = list(tags)
        if not tags:
            raise ValueError("tags must be non-empty")
        ctx = (BOS,) * (self.order - 1)
        total = 0.0
        for tag in tags:
            # boundary markers are structural, never sequence content
            tag = tag if tag in self._known_ else UNK_TAG
            total += math.log(self._p(tag, ctx, self.order))
            ctx = ctx[1:] + (tag,)
        return total

    def fluency_score(self, tags: Sequence[str]) -> float:
        """Geometric-mean token probability of the sequence, in (0, 1]."""
        tags = list(tags)
        return math.exp(self.sequence_log_prob(tags) / len(tags))

    def chunked_fluency_score(self, chunks: Sequence[Sequence[str]]) -> float:
        """Length-weighted geometric mean across independently scored chunks.

        Each chunk is scored with a fresh BOS context; chunk boundaries mark
        independent phrases.
        """
        chunks = [list(c) for c in chunks if len(c)]
        if not chunks:
            raise ValueError("chunks must contain at least one non-empty sequence")
        log_total = sum(self.sequence_log_prob(c) for c in chunks)
        length = sum(len(c) for c in chunks)
        return math.exp(log_total / length)

    # -- persistence -------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Write a self-describing JSON dump (header + raw count tables)."""
        check_fitted(self, ["events_"])
        payload = {
            "format": _FORMAT_NAME,
            "version": _FORMAT_VERSION,
            "order": self.order,
            "discount": self.discount,
            "tagset": list(self.tagset_),
            "unknown_tags": self.unknown_tags_,
            "raw_counts": {
                str(m): [[list(ctx), w, c] for (ctx, w), c in sorted(table.items())]
                for m, table in self._raw_counts_.items()
            },
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "PosKneserNeyLM":
        """Load a model saved by :meth:`save`; scores are bit-identical."""
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ModelFormatError(f"corrupt model file {path}: {exc}") from exc
        if not isinstance(payload, dict) or payload.get("format") != _FORMAT_NAME:
            raise ModelFormatError(f"{path} is not a {_FORMAT_NAME} file")
        if payload.get("version") != _FORMAT_VERSION:
            raise ModelFormatError(
                f"unsupported model version {payload.get('version')!r} "
                f"(expected {_FORMAT_VERSION})"
            )
        try:
            lm = cls(
                order=payload["order"],
                discount=payload["discount"],
                tagset=tuple(payload["tagset"]),
            )
            lm._validate_params()
            lm.tagset_ = tuple(payload["tagset"])
            lm.events_ = lm.tagset_ + (EOS,)
            lm.unknown_tags_ = payload.get("unknown_tags", 0)
            lm._raw_counts_ = {
                int(m): {(tuple(ctx), w): int(c) for ctx, w, c in rows}
                for m, rows in payload["raw_counts"].items()
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"corrupt model file {path}: {exc}") from exc
        expected = set(range(2, lm.order + 1))
        if set(lm._raw_counts_) != expected:
            raise ModelFormatError(f"model file {path} is missing count tables")
        lm._build_derived_tables()
        return lm

    # -- introspection -----------------------------------------------------

    def ngram_table_sizes(self) -> dict[int, int]:
        check_fitted(self, ["events_"])
        return {m: len(t) for m, t in self._raw_counts_.items()}


def train_pos_lm(
    corpus: Iterable[Sequence[str]],
    order: int = 4,
    discount: float = 0.75,
    tagset: Sequence[str] | None = None,
) -> PosKneserNeyLM:
    """Train an interpolated Kneser-Ney POS model (functional convenience)."""
    return PosKneserNeyLM(order=order, discount=discount, tagset=tagset).fit(corpus)


def read_pos_corpus(path: str | Path) -> list[list[str]]:
    """Read one space-separated tag sequence per line, skipping blank lines."""
    sequences = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tags = line.split()
            if tags:
                sequences.append(tags)
    return sequences
