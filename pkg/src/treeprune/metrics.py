"""Automatic evaluation suite: compression, copies, splits, additions and
deletions, Levenshtein similarity, and SARI with add/keep/delete components.

Word-level metrics share one tokenizer: lowercase, whitespace split, with a
token's trailing run of terminal punctuation (. ! ?) split off as its own
token. This convention is fixed here for reproducibility; parity with other
packages' tokenizers is not claimed.

SARI conventions (documented because the F1 formula alone does not pin them
down): keep/delete use multiset precision and recall with original/output
n-gram counts scaled by the number of references and references pooled; add
is computed over n-gram types. Delete is scored as F1 like the other two
operations (some published SARI variants use precision-only deletion). At
each n-gram order, an operation with empty candidate sets on both the
precision and recall side skips that order; if only one side is empty, that
side's statistic is 0. An operation with every order skipped scores 0.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import ConfigurationError
from .similarity import EmbeddingBackend, similarity_score

_TERMINALS = ".!?"


def word_tokenize(text: str) -> list[str]:
    """Lowercased tokens with trailing terminal punctuation separated."""
    tokens: list[str] = []
    for raw in text.lower().split():
        core = raw.rstrip(_TERMINALS)
        if core and core != raw:
            tokens.append(core)
            tokens.append(raw[len(core):])
        else:
            tokens.append(raw)
    return tokens


def count_sentences(text: str) -> int:
    """Terminal-punctuation segmentation with an abbreviation guard.

    A whitespace token ends a sentence when it ends with . ! or ? unless its
    remainder contains an internal period ("U.S.") or is a single uppercase
    initial ("J."). Every non-empty text counts as at least one sentence.
    """
    ends = 0
    for raw in text.split():
        if not raw.endswith(tuple(_TERMINALS)):
            continue
        core = raw.rstrip(_TERMINALS)
        if "." in core:
            continue
        if len(core) == 1 and core.isalpha() and core.isupper():
            continue
        ends += 1
    return max(ends, 1)


def compression_ratio(orig: str, out: str) -> float:
    """Characters in the output over characters in the original."""
    if not orig:
        raise ValueError("original must be non-empty")
    return len(out) / len(orig)


def exact_copy(orig: str, out: str) -> int:
    """1 iff the two texts tokenize identically (case- and spacing-blind)."""
    return int(word_tokenize(orig) == word_tokenize(out))


def split_ratio(orig: str, out: str) -> float:
    """Sentence count of the output over sentence count of the original."""
    return count_sentences(out) / count_sentences(orig)


def additions_proportion(orig: str, out: str) -> float:
    """Share of output tokens absent from the original (multiset)."""
    out_tokens = word_tokenize(out)
    if not out_tokens:
        return 0.0
    added = Counter(out_tokens) - Counter(word_tokenize(orig))
    return sum(added.values()) / len(out_tokens)


def deletions_proportion(orig: str, out: str) -> float:
    """Share of original tokens absent from the output (multiset)."""
    orig_tokens = word_tokenize(orig)
    if not orig_tokens:
        raise ValueError("original must be non-empty")
    removed = Counter(orig_tokens) - Counter(word_tokenize(out))
    return sum(removed.values()) / len(orig_tokens)


def levenshtein_distance(a: str, b: str) -> int:
    """Character-level edit distance, two-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def levenshtein_similarity(orig: str, out: str) -> float:
    """1 - distance / max length; two empty strings are fully similar."""
    longest = max(len(orig), len(out))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein_distance(orig, out) / longest


@dataclass(frozen=True)
class SariScore:
    sari: float
    add: float
    keep: float
    delete: float


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _scaled(counter: Counter, factor: int) -> Counter:
    return Counter({g: c * factor for g, c in counter.items()})


def _f1(pred: Counter, targ: Counter) -> float | None:
    """F1 of multiset precision/recall; None when the order carries no signal."""
    pred_size = sum(pred.values())
    targ_size = sum(targ.values())
    if pred_size == 0 and targ_size == 0:
        return None
    good = sum((pred & targ).values())
    p = good / pred_size if pred_size else 0.0
    r = good / targ_size if targ_size else 0.0
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def _mean_score(per_order: list[float | None]) -> float:
    kept = [f for f in per_order if f is not None]
    if not kept:
        return 0.0
    return 100.0 * sum(kept) / len(kept)


def sari(orig: str, out: str, refs: Sequence[str], max_order: int = 4) -> SariScore:
    """SARI against the original and one or more references."""
    if not refs:
        raise ValueError("sari requires at least one reference")
    num_refs = len(refs)
    tok_orig = word_tokenize(orig)
    tok_out = word_tokenize(out)
    tok_refs = [word_tokenize(r) for r in refs]

    keep_by_order: list[float | None] = []
    del_by_order: list[float | None] = []
    add_by_order: list[float | None] = []
    for n in range(1, max_order + 1):
        orig_counts = _scaled(_ngram_counts(tok_orig, n), num_refs)
        out_counts = _scaled(_ngram_counts(tok_out, n), num_refs)
        ref_counts: Counter = Counter()
        for tokens in tok_refs:
            ref_counts.update(_ngram_counts(tokens, n))

        keep_by_order.append(_f1(orig_counts & out_counts, orig_counts & ref_counts))
        del_by_order.append(_f1(orig_counts - out_counts, orig_counts - ref_counts))
        add_pred = Counter(dict.fromkeys(set(out_counts) - set(orig_counts), 1))
        add_targ = Counter(dict.fromkeys(set(ref_counts) - set(orig_counts), 1))
        add_by_order.append(_f1(add_pred, add_targ))

    keep = _mean_score(keep_by_order)
    delete = _mean_score(del_by_order)
    add = _mean_score(add_by_order)
    return SariScore(sari=(keep + delete + add) / 3.0, add=add, keep=keep, delete=delete)


@dataclass(frozen=True)
class EvalInstance:
    """One evaluation row: original, system output, references.

    References may be empty for reference-free runs (SARI is then skipped);
    standard multi-reference corpora carry 1..8 of them.
    """

    original: str
    system_output: str
    references: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.original.strip():
            raise ValueError("original must be non-empty")


@dataclass
class InstanceMetrics:
    cr: float
    cp: int
    split_ratio: float
    additions: float
    deletions: float
    lev_sim: float
    sim: float | None = None
    sari: float | None = None
    sari_add: float | None = None
    sari_keep: float | None = None
    sari_del: float | None = None


@dataclass
class MetricsReport:
    """Corpus means plus the per-instance table. FL is reported unavailable
    (the third-party pseudo-log-likelihood scorer is out of scope)."""

    instances: int
    cr: float
    cp: float
    split_ratio: float
    additions: float
    deletions: float
    lev_sim: float
    sim: float | None
    sari: float | None
    sari_add: float | None
    sari_keep: float | None
    sari_del: float | None
    fl: None = None
    per_instance: list[InstanceMetrics] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "instances": self.instances,
            "cr": self.cr,
            "cp": self.cp,
            "split_ratio": self.split_ratio,
            "additions": self.additions,
            "deletions": self.deletions,
            "lev_sim": self.lev_sim,
            "sim": self.sim,
            "sari": self.sari,
            "sari_add": self.sari_add,
            "sari_keep": self.sari_keep,
            "sari_del": self.sari_del,
            "fl": None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def format_table(self) -> str:
        rows = [
            ("instances", str(self.instances)),
            ("CR", f"{self.cr:.4f}"),
            ("CP", f"{self.cp:.4f}"),
            ("%SP", f"{self.split_ratio:.4f}"),
            ("%A", f"{self.additions:.4f}"),
            ("%D", f"{self.deletions:.4f}"),
            ("LevSIM", f"{self.lev_sim:.4f}"),
            ("SIM", "n/a" if self.sim is None else f"{self.sim:.4f}"),
            ("FL", "unavailable"),
            ("SARI", "n/a" if self.sari is None else f"{self.sari:.2f}"),
            ("Add", "n/a" if self.sari_add is None else f"{self.sari_add:.2f}"),
            ("Keep", "n/a" if self.sari_keep is None else f"{self.sari_keep:.2f}"),
            ("Del", "n/a" if self.sari_del is None else f"{self.sari_del:.2f}"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def evaluate_corpus(
    instances: Sequence[EvalInstance], backend: EmbeddingBackend | None = None
) -> MetricsReport:
    """Per-instance metrics plus corpus means.

    SIM is computed only when a backend is supplied; SARI only when every
    instance carries at least one reference.
    """
    if not instances:
        raise ValueError("cannot evaluate an empty corpus")
    with_sari = all(inst.references for inst in instances)
    table: list[InstanceMetrics] = []
    for inst in instances:
        orig, out = inst.original, inst.system_output
        row = InstanceMetrics(
            cr=compression_ratio(orig, out),
            cp=exact_copy(orig, out),
            split_ratio=split_ratio(orig, out),
            additions=additions_proportion(orig, out),
            deletions=deletions_proportion(orig, out),
            lev_sim=levenshtein_similarity(orig, out),
        )
        if backend is not None:
            row.sim = similarity_score(backend, orig, out) if out.strip() else 0.0
        if with_sari:
            s = sari(orig, out, inst.references)
            row.sari, row.sari_add, row.sari_keep, row.sari_del = (
                s.sari, s.add, s.keep, s.delete,
            )
        table.append(row)

    return MetricsReport(
        instances=len(table),
        cr=_mean([r.cr for r in table]),
        cp=_mean([float(r.cp) for r in table]),
        split_ratio=_mean([r.split_ratio for r in table]),
        additions=_mean([r.additions for r in table]),
        deletions=_mean([r.deletions for r in table]),
        lev_sim=_mean([r.lev_sim for r in table]),
        sim=_mean([r.sim for r in table]) if backend is not None else None,
        sari=_mean([r.sari for r in table]) if with_sari else None,
        sari_add=_mean([r.sari_add for r in table]) if with_sari else None,
        sari_keep=_mean([r.sari_keep for r in table]) if with_sari else None,
        sari_del=_mean([r.sari_del for r in table]) if with_sari else None,
        per_instance=table,
    )


def read_parallel_files(
    orig_path: str | Path,
    sys_path: str | Path,
    ref_paths: Sequence[str | Path] = (),
) -> list[EvalInstance]:
    """Build instances from line-aligned plain-text files (one sentence per line)."""

    def read_lines(path):
        return Path(path).read_text(encoding="utf-8").splitlines()

    orig_lines = read_lines(orig_path)
    sys_lines = read_lines(sys_path)
    ref_lines = [read_lines(p) for p in ref_paths]
    counts = {str(orig_path): len(orig_lines), str(sys_path): len(sys_lines)}
    counts.update({str(p): len(lines) for p, lines in zip(ref_paths, ref_lines)})
    if len(set(counts.values())) != 1:
        detail = ", ".join(f"{p}: {c}" for p, c in counts.items())
        raise ConfigurationError(f"input files are not line-aligned ({detail})")
    return [
        EvalInstance(
            original=orig_lines[i],
            system_output=sys_lines[i],
            references=tuple(lines[i] for lines in ref_lines),
        )
        for i in range(len(orig_lines))
    ]
