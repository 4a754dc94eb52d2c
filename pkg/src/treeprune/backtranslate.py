"""Round-trip translation through a pivot language, behind pluggable clients.

The second pipeline phase: structurally simplified sentences are translated
to a pivot language and back, which paraphrases and substitutes simpler
vocabulary. Clients must be deterministic per (text, source, target) within
a cache epoch; the round-tripper caches both legs.
"""

from __future__ import annotations

import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import requests
from sklearn.base import BaseEstimator, TransformerMixin

from .decoder import CHUNK_SEPARATOR
from .errors import ConfigurationError, TranslationError
from .validation import check_fitted, check_non_empty_text

SEPARATOR_POLICIES = ("strip", "keep")


class TranslationClient(ABC):
    """Translates text between language codes."""

    name: str = "client"

    @abstractmethod
    def translate(self, text: str, source: str, target: str) -> str: ...

    def supports(self, source: str, target: str) -> bool:
        return True


class IdentityClient(TranslationClient):
    """Echoes its input; the offline "no back-translation effect" client."""

    name = "identity"

    def translate(self, text: str, source: str, target: str) -> str:
        return text


class DictionaryClient(TranslationClient):
    """Phrase-table mock backed by a TSV of (source, pivot, back) rows.

    Forward legs replace source phrases with pivot phrases; return legs
    replace pivot phrases with back phrases. Longest phrases win; matching
    is on word boundaries, case-sensitive.
    """

    name = "dict"

    def __init__(self, entries: Sequence[tuple[str, str, str]], source: str = "en", pivot: str = "de"):
        self.source = source
        self.pivot = pivot
        self._forward = {src: piv for src, piv, _back in entries}
        self._backward = {piv: back for _src, piv, back in entries}

    @classmethod
    def from_file(cls, path: str | Path, source: str = "en", pivot: str = "de") -> "DictionaryClient":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) != 3:
                    raise ConfigurationError(
                        f"{path}:{line_no}: expected 3 tab-separated columns, got {len(cols)}"
                    )
                entries.append((cols[0], cols[1], cols[2]))
        return cls(entries, source=source, pivot=pivot)

    def supports(self, source: str, target: str) -> bool:
        return (source, target) in ((self.source, self.pivot), (self.pivot, self.source))

    def translate(self, text: str, source: str, target: str) -> str:
        if (source, target) == (self.source, self.pivot):
            table = self._forward
        elif (source, target) == (self.pivot, self.source):
            table = self._backward
        else:
            raise ConfigurationError(f"dictionary client has no pair {source}->{target}")
        import re

        for phrase in sorted(table, key=len, reverse=True):
            text = re.sub(rf"\b{re.escape(phrase)}\b", table[phrase], text)
        return text


class HttpTranslationClient(TranslationClient):
    """Client for a translation service.

    Protocol: POST {endpoint} with {"q": text, "source": code, "target":
    code}; the service answers 200 with {"translatedText": "..."}. The API
    key, when set, travels in the X-Api-Key header. Server errors and
    transport failures raise retryable TranslationError; client errors are
    not retryable.
    """

    name = "http"

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        timeout: float = 10.0,
        session: requests.Session | None = None,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout
        self._session = session or requests.Session()

    def translate(self, text: str, source: str, target: str) -> str:
        headers = {"X-Api-Key": self.api_key} if self.api_key else {}
        try:
            resp = self._session.post(
                self.endpoint,
                json={"q": text, "source": source, "target": target},
                headers=headers,
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TranslationError(f"translation request failed: {exc}", retryable=True) from exc
        if resp.status_code >= 500:
            raise TranslationError(
                f"translation service returned status {resp.status_code}", retryable=True
            )
        if resp.status_code != 200:
            raise TranslationError(
                f"translation service returned status {resp.status_code}", retryable=False
            )
        try:
            return resp.json()["translatedText"]
        except (ValueError, KeyError) as exc:
            raise TranslationError(f"malformed translation response: {exc}") from exc


@dataclass(frozen=True)
class BtConfig:
    """Round-trip settings; pivot must differ from the source language."""

    source_language: str = "en"
    pivot_language: str = "de"
    separator_policy: str = "strip"

    def __post_init__(self):
        if self.pivot_language == self.source_language:
            raise ConfigurationError("pivot language must differ from source language")
        if self.separator_policy not in SEPARATOR_POLICIES:
            raise ConfigurationError(
                f"separator_policy must be one of {SEPARATOR_POLICIES}, "
                f"got {self.separator_policy!r}"
            )


@dataclass(frozen=True)
class BtOutcome:
    """Per-item result of a batch round trip."""

    status: str  # "ok" | "error" | "skipped"
    text: str | None = None
    error: str | None = None


class BackTranslator(TransformerMixin, BaseEstimator):
    """Caching, retrying round-tripper over a TranslationClient."""

    def __init__(
        self,
        client: TranslationClient | None = None,
        source_language: str = "en",
        pivot_language: str = "de",
        separator_policy: str = "strip",
        max_retries: int = 3,
        backoff_seconds: float = 0.5,
    ):
        self.client = client
        self.source_language = source_language
        self.pivot_language = pivot_language
        self.separator_policy = separator_policy
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds

    def fit(self, X=None, y=None) -> "BackTranslator":
        if self.client is None:
            raise ValueError("BackTranslator requires a TranslationClient (client=...)")
        self.config_ = BtConfig(
            source_language=self.source_language,
            pivot_language=self.pivot_language,
            separator_policy=self.separator_policy,
        )
        for src, tgt in (
            (self.source_language, self.pivot_language),
            (self.pivot_language, self.source_language),
        ):
            if not self.client.supports(src, tgt):
                raise ConfigurationError(f"client {self.client.name} has no pair {src}->{tgt}")
        self.cache_: dict[tuple[str, str, str], str] = {}
        self._lock = threading.Lock()
        return self

    def _cached_translate(self, text: str, source: str, target: str) -> str:
        key = (text, source, target)
        with self._lock:
            hit = self.cache_.get(key)
        if hit is not None:
            return hit
        last_error: TranslationError | None = None
        for attempt in range(self.max_retries):
            try:
                out = self.client.translate(text, source, target)
                break
            except TranslationError as exc:
                last_error = exc
                if not exc.retryable or attempt == self.max_retries - 1:
                    raise
                time.sleep(self.backoff_seconds * (2**attempt))
        else:  # pragma: no cover - loop always breaks or raises
            raise last_error
        with self._lock:
            self.cache_[key] = out
        return out

    def round_trip(self, text: str) -> str:
        """source -> pivot -> source, honoring the separator policy first."""
        check_fitted(self, ["config_"])
        check_non_empty_text(text)
        if self.config_.separator_policy == "strip":
            text = text.replace(CHUNK_SEPARATOR, ", ")
        pivot = self._cached_translate(
            text, self.config_.source_language, self.config_.pivot_language
        )
        return self._cached_translate(
            pivot, self.config_.pivot_language, self.config_.source_language
        )

    def batch_round_trip(self, texts: Sequence[str]) -> list[BtOutcome]:
        """Order-preserving batch; failures are isolated per item."""
        check_fitted(self, ["config_"])
        if not len(texts):
            raise ValueError("texts must be non-empty")
        outcomes = []
        for text in texts:
            if not isinstance(text, str) or not text.strip():
                outcomes.append(BtOutcome(status="skipped", error="empty input"))
                continue
            try:
                outcomes.append(BtOutcome(status="ok", text=self.round_trip(text)))
            except (TranslationError, ConfigurationError) as exc:
                outcomes.append(BtOutcome(status="error", error=str(exc)))
        return outcomes

    def transform(self, X: Sequence[str]) -> list[BtOutcome]:
        return self.batch_round_trip(X)


def round_trip(client: TranslationClient, cfg: BtConfig, text: str) -> str:
    """Functional convenience over BackTranslator.round_trip."""
    bt = BackTranslator(
        client=client,
        source_language=cfg.source_language,
        pivot_language=cfg.pivot_language,
        separator_policy=cfg.separator_policy,
    ).fit()
    return bt.round_trip(text)


def batch_round_trip(
    client: TranslationClient, cfg: BtConfig, texts: Sequence[str]
) -> list[BtOutcome]:
    """Functional convenience over BackTranslator.batch_round_trip."""
    bt = BackTranslator(
        client=client,
        source_language=cfg.source_language,
        pivot_language=cfg.pivot_language,
        separator_policy=cfg.separator_policy,
    ).fit()
    return bt.batch_round_trip(texts)
