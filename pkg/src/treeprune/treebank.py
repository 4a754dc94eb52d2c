"""CoNLL-U ingestion and dependency-tree navigation.

Only the ID, FORM, UPOS, HEAD and DEPREL columns are semantic here; LEMMA,
XPOS, FEATS, DEPS and MISC are read and ignored. Multiword-token ranges
("3-4") and empty-node ids ("1.1") are skipped with a warning counter since
real treebanks contain them and the algorithm operates on basic nodes only.
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ConlluParseError, TreeStructureError
from .validation import check_token_index

UPOS_TAGS = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)
UNK_TAG = "UNK"

_N_COLUMNS = 10


@dataclass(frozen=True)
class DepToken:
    """One basic node of a dependency tree, 1-based; head 0 means ROOT."""

    index: int
    form: str
    upos: str
    head: int
    deprel: str

    def __post_init__(self):
        if self.index < 1:
            raise TreeStructureError(f"token index must be >= 1, got {self.index}")
        if self.head < 0:
            raise TreeStructureError(f"head must be >= 0, got {self.head}")
        if self.head == self.index:
            raise TreeStructureError(f"token {self.index} is its own head")
        if self.upos not in UPOS_TAGS and self.upos != UNK_TAG:
            raise TreeStructureError(
                f"token {self.index} has UPOS {self.upos!r} outside the tagset"
            )


@dataclass(frozen=True)
class DepSentence:
    """An immutable parsed sentence; safe to share across threads."""

    tokens: tuple[DepToken, ...]
    text: str

    def __post_init__(self):
        n = len(self.tokens)
        if n == 0:
            raise TreeStructureError("sentence has no tokens")
        for pos, tok in enumerate(self.tokens, 1):
            if tok.index != pos:
                raise TreeStructureError(
                    f"token indices not contiguous: expected {pos}, got {tok.index}"
                )
            if tok.head > n:
                raise TreeStructureError(
                    f"token {tok.index} has head {tok.head} beyond sentence length {n}"
                )
        roots = [t.index for t in self.tokens if t.head == 0]
        if len(roots) != 1:
            raise TreeStructureError(
                f"sentence must have exactly one ROOT attachment, found {len(roots)}"
            )
        # BFS from the root must reach every token, otherwise heads contain a cycle.
        reached = set()
        queue = deque(roots)
        kids = {i: [] for i in range(1, n + 1)}
        for t in self.tokens:
            if t.head:
                kids[t.head].append(t.index)
        while queue:
            i = queue.popleft()
            reached.add(i)
            queue.extend(kids[i])
        if len(reached) != n:
            loose = sorted(set(range(1, n + 1)) - reached)
            raise TreeStructureError(f"head links contain a cycle (tokens {loose})")

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, idx: int) -> DepToken:
        check_token_index(len(self.tokens), idx)
        return self.tokens[idx - 1]

    @cached_property
    def root(self) -> int:
        """Index of the token attached to ROOT."""
        return next(t.index for t in self.tokens if t.head == 0)

    @cached_property
    def _children(self) -> tuple[tuple[int, ...], ...]:
        table: list[list[int]] = [[] for _ in range(len(self.tokens) + 1)]
        for t in self.tokens:
            if t.head:
                table[t.head].append(t.index)
        return tuple(tuple(sorted(c)) for c in table)

    @cached_property
    def _depths(self) -> tuple[int, ...]:
        depths = [0] * (len(self.tokens) + 1)
        queue = deque([(self.root, 1)])
        while queue:
            i, d = queue.popleft()
            depths[i] = d
            for c in self._children[i]:
                queue.append((c, d + 1))
        return tuple(depths)

    def children(self, idx: int) -> tuple[int, ...]:
        """Indices whose head is ``idx``, ascending."""
        check_token_index(len(self.tokens), idx)
        return self._children[idx]

    def depth(self, idx: int) -> int:
        """Nodes on the path from the ROOT-attached token to ``idx``, inclusive."""
        check_token_index(len(self.tokens), idx)
        return self._depths[idx]

    def root_subject(self) -> int | None:
        """Lowest-index child of the root whose deprel starts with "nsubj"."""
        for c in self._children[self.root]:
            if self.tokens[c - 1].deprel.startswith("nsubj"):
                return c
        return None

    def max_depth_of(self, indices: Iterable[int]) -> int:
        idx = list(indices)
        if not idx:
            raise ValueError("max_depth_of requires a non-empty index set")
        return max(self.depth(i) for i in idx)

    def tree_depth(self) -> int:
        return max(self._depths[1:])

    def max_children(self) -> int:
        return max((len(c) for c in self._children[1:]), default=0)

    def forms(self, indices: Iterable[int] | None = None) -> tuple[str, ...]:
        if indices is None:
            return tuple(t.form for t in self.tokens)
        return tuple(self.tokens[i - 1].form for i in indices)

    def pos_tags(self, indices: Iterable[int] | None = None) -> tuple[str, ...]:
        if indices is None:
            return tuple(t.upos for t in self.tokens)
        return tuple(self.tokens[i - 1].upos for i in indices)

    def to_conllu(self) -> str:
        """Serialize back to a CoNLL-U block (semantic columns only)."""
        lines = [f"# text = {self.text}"]
        for t in self.tokens:
            lines.append(
                "\t".join(
                    (str(t.index), t.form, "_", t.upos, "_", "_", str(t.head), t.deprel, "_", "_")
                )
            )
        return "\n".join(lines) + "\n"


@dataclass
class ParseWarnings:
    """Counters for tolerated irregularities in a CoNLL-U source."""

    multiword_ranges: int = 0
    empty_nodes: int = 0
    unknown_upos: int = 0


def iter_conllu(
    source: str | Iterable[str], warnings: ParseWarnings | None = None
) -> Iterator[DepSentence]:
    """Yield one DepSentence per blank-line-delimited block.

    ``source`` is CoNLL-U text or an iterable of lines. Raises
    ConlluParseError (with line number) for malformed rows and
    TreeStructureError (identifying the sentence) for invalid trees.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    warnings = warnings if warnings is not None else ParseWarnings()

    rows: list[DepToken] = []
    text_comment: str | None = None
    sent_ordinal = 0
    block_start = 1

    def flush() -> DepSentence | None:
        nonlocal rows, text_comment, sent_ordinal
        if not rows:
            text_comment = None
            return None
        sent_ordinal += 1
        text = text_comment if text_comment is not None else " ".join(t.form for t in rows)
        try:
            sent = DepSentence(tokens=tuple(rows), text=text)
        except TreeStructureError as exc:
            raise TreeStructureError(
                f"sentence {sent_ordinal} (starting at line {block_start}): {exc}"
            ) from exc
        rows = []
        text_comment = None
        return sent

    line_no = 0
    for line_no, raw in enumerate(source, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            sent = flush()
            if sent is not None:
                yield sent
            block_start = line_no + 1
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("text") and "=" in body:
                key, _, value = body.partition("=")
                if key.strip() == "text":
                    text_comment = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != _N_COLUMNS:
            raise ConlluParseError(
                f"expected {_N_COLUMNS} tab-separated columns, got {len(cols)}", line_no
            )
        token_id = cols[0]
        if "-" in token_id:
            warnings.multiword_ranges += 1
            continue
        if "." in token_id:
            warnings.empty_nodes += 1
            continue
        try:
            index = int(token_id)
        except ValueError:
            raise ConlluParseError(f"bad token id {token_id!r}", line_no) from None
        try:
            head = int(cols[6])
        except ValueError:
            raise ConlluParseError(f"bad head {cols[6]!r}", line_no) from None
        upos = cols[3]
        if upos not in UPOS_TAGS and upos != UNK_TAG:
            warnings.unknown_upos += 1
            upos = UNK_TAG
        try:
            rows.append(
                DepToken(index=index, form=cols[1], upos=upos, head=head, deprel=cols[7])
            )
        except TreeStructureError as exc:
            raise TreeStructureError(f"sentence starting at line {block_start}: {exc}") from exc

    sent = flush()
    if sent is not None:
        yield sent


def parse_conllu(
    source: str | Iterable[str], warnings: ParseWarnings | None = None
) -> list[DepSentence]:
    """Parse CoNLL-U text (or lines) into a list of DepSentence."""
    return list(iter_conllu(source, warnings))


def read_conllu(path: str | Path, warnings: ParseWarnings | None = None) -> list[DepSentence]:
    """Parse a UTF-8 CoNLL-U file."""
    with open(path, encoding="utf-8") as fh:
        return list(iter_conllu(fh, warnings))
