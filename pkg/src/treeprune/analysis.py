"""Leave-one-out token-importance profiling.

For every token of a sentence, the similarity reduction is 1 minus the
similarity between the full sentence and the sentence with that token
removed (remaining tokens space-joined in input order). Profiles aggregate
reductions by POS tag, by tree depth, and by position decile, plus the
depth-wise POS distribution.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .similarity import EmbeddingBackend, similarity_score
from .treebank import DepSentence


def leave_one_out_reductions(
    sent: DepSentence, backend: EmbeddingBackend
) -> list[tuple[int, float]]:
    """(token index, similarity reduction) for every token; requires n >= 2."""
    n = len(sent)
    if n < 2:
        raise ValueError("leave-one-out needs at least 2 tokens")
    full = " ".join(sent.forms())
    out = []
    for i in range(1, n + 1):
        without = " ".join(t.form for t in sent.tokens if t.index != i)
        out.append((i, 1.0 - similarity_score(backend, full, without)))
    return out


@dataclass
class ImportanceProfile:
    """Aggregated reductions; distribution rows each sum to one."""

    pos_reduction: dict[str, float]
    depth_reduction: dict[int, float]
    decile_reduction: dict[int, float]
    depth_pos_distribution: dict[int, dict[str, float]]
    sentences_used: int
    sentences_skipped: int


def position_decile(index: int, n: int) -> int:
    """Decile 0..9 of a 1-based token position within a length-n sentence."""
    return min(9, (index - 1) * 10 // n)


def aggregate_profile(
    corpus: Iterable[DepSentence], backend: EmbeddingBackend
) -> ImportanceProfile:
    """Profile a corpus; 1-token sentences are skipped and counted."""
    pos_sums: dict[str, list[float]] = defaultdict(lambda: [0.0, 0])
    depth_sums: dict[int, list[float]] = defaultdict(lambda: [0.0, 0])
    decile_sums: dict[int, list[float]] = defaultdict(lambda: [0.0, 0])
    depth_pos: dict[int, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    used = skipped = 0
    for sent in corpus:
        if len(sent) < 2:
            skipped += 1
            continue
        used += 1
        n = len(sent)
        for idx, reduction in leave_one_out_reductions(sent, backend):
            tok = sent.tokens[idx - 1]
            d = sent.depth(idx)
            for sums, key in (
                (pos_sums, tok.upos),
                (depth_sums, d),
                (decile_sums, position_decile(idx, n)),
            ):
                sums[key][0] += reduction
                sums[key][1] += 1
            depth_pos[d][tok.upos] += 1
    if not used:
        raise ValueError("corpus contains no sentence with at least 2 tokens")

    def means(sums):
        return {k: total / count for k, (total, count) in sorted(sums.items())}

    distribution = {}
    for d, tags in sorted(depth_pos.items()):
        total = sum(tags.values())
        distribution[d] = {t: c / total for t, c in sorted(tags.items())}
    return ImportanceProfile(
        pos_reduction=means(pos_sums),
        depth_reduction=means(depth_sums),
        decile_reduction=means(decile_sums),
        depth_pos_distribution=distribution,
        sentences_used=used,
        sentences_skipped=skipped,
    )


def format_profile(profile: ImportanceProfile) -> str:
    """Human-readable tables for the three groupings and the distribution."""
    lines = [
        f"sentences used: {profile.sentences_used} "
        f"(skipped: {profile.sentences_skipped})",
        "",
        "mean similarity reduction by POS",
    ]
    for tag, value in sorted(profile.pos_reduction.items(), key=lambda kv: -kv[1]):
        lines.append(f"  {tag:<6} {value:.6f}")
    lines.append("")
    lines.append("mean similarity reduction by tree depth")
    for depth, value in profile.depth_reduction.items():
        lines.append(f"  {depth:<6} {value:.6f}")
    lines.append("")
    lines.append("mean similarity reduction by position decile")
    for decile, value in profile.decile_reduction.items():
        lines.append(f"  {decile:<6} {value:.6f}")
    lines.append("")
    lines.append("POS distribution by tree depth")
    for depth, row in profile.depth_pos_distribution.items():
        body = "  ".join(f"{t}={p:.3f}" for t, p in row.items())
        lines.append(f"  depth {depth}: {body}")
    return "\n".join(lines)


def write_profile_csv(profile: ImportanceProfile, path: str | Path) -> None:
    """Delimiter-separated dump for external plotting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "key", "tag", "value"])
        for tag, value in profile.pos_reduction.items():
            writer.writerow(["pos_reduction", "", tag, f"{value:.10f}"])
        for depth, value in profile.depth_reduction.items():
            writer.writerow(["depth_reduction", depth, "", f"{value:.10f}"])
        for decile, value in profile.decile_reduction.items():
            writer.writerow(["decile_reduction", decile, "", f"{value:.10f}"])
        for depth, row in profile.depth_pos_distribution.items():
            for tag, value in row.items():
                writer.writerow(["depth_pos_distribution", depth, tag, f"{value:.10f}"])
