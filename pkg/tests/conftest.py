"""Shared fixtures: hand-built trees, seeded random corpora, stub services."""

from __future__ import annotations

import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from treeprune import DepSentence, DepToken, PosKneserNeyLM


def make_sentence(rows, text=None) -> DepSentence:
    """rows: (form, upos, head, deprel) per token, 1-based heads."""
    tokens = tuple(
        DepToken(index=i, form=form, upos=upos, head=head, deprel=deprel)
        for i, (form, upos, head, deprel) in enumerate(rows, 1)
    )
    return DepSentence(tokens=tokens, text=text or " ".join(r[0] for r in rows))


WORDS = {
    "NOUN": ["storm", "city", "report", "garden", "market", "signal", "ship",
             "law", "music", "paper", "river", "doctor", "window", "harbor"],
    "VERB": ["made", "cut", "found", "saw", "built", "moved", "kept", "ran",
             "sent", "told", "closed", "opened"],
    "ADJ": ["big", "old", "red", "slow", "bright", "quiet", "heavy", "narrow"],
    "ADV": ["quickly", "often", "nearly", "very", "late", "soon"],
    "DET": ["the", "a", "this", "each", "some"],
    "ADP": ["in", "on", "under", "with", "from", "near"],
    "PRON": ["she", "he", "they", "it", "we"],
    "PROPN": ["paris", "java", "norway", "lisbon", "oregon"],
    "CCONJ": ["and", "but", "or"],
    "AUX": ["is", "was", "has", "were"],
    "PUNCT": [".", ",", "!"],
}
_CHILD_TAGS = ["NOUN", "VERB", "ADJ", "ADV", "DET", "ADP", "PRON", "PROPN", "CCONJ", "AUX"]
_CHILD_RELS = ["obj", "obl", "amod", "advmod", "det", "case", "nmod", "conj", "mark", "aux"]


def random_sentence(rng: random.Random, n: int | None = None, subject_prob: float = 0.7) -> DepSentence:
    """A random attachment tree with plausible forms and tags."""
    if n is None:
        n = rng.randint(4, 12)
    order = list(range(1, n + 1))
    rng.shuffle(order)
    heads = {order[0]: 0}
    attached = [order[0]]
    for idx in order[1:]:
        heads[idx] = rng.choice(attached)
        attached.append(idx)
    root = order[0]
    root_kids = [i for i in range(1, n + 1) if heads[i] == root]
    subject = min(root_kids) if root_kids and rng.random() < subject_prob else None
    rows = []
    for i in range(1, n + 1):
        if i == root:
            upos, deprel = rng.choice(["VERB", "VERB", "VERB", "NOUN"]), "root"
        elif i == subject:
            upos, deprel = rng.choice(["PRON", "NOUN", "PROPN"]), "nsubj"
        else:
            upos = rng.choice(_CHILD_TAGS)
            deprel = rng.choice(_CHILD_RELS)
        rows.append((rng.choice(WORDS[upos]), upos, heads[i], deprel))
    return make_sentence(rows)


def random_corpus(seed: int, size: int, n_range=(4, 12)) -> list[DepSentence]:
    rng = random.Random(seed)
    return [random_sentence(rng, rng.randint(*n_range)) for _ in range(size)]


@pytest.fixture(scope="session")
def corpus_500() -> list[DepSentence]:
    return random_corpus(20240809, 500, n_range=(5, 14))


@pytest.fixture(scope="session")
def conllu_500(tmp_path_factory, corpus_500) -> str:
    path = tmp_path_factory.mktemp("fixtures") / "corpus500.conllu"
    path.write_text("\n".join(s.to_conllu() for s in corpus_500), encoding="utf-8")
    return str(path)


@pytest.fixture(scope="session")
def pos_lm(corpus_500) -> PosKneserNeyLM:
    """4-gram model trained on tag sequences from an independent random corpus."""
    train = random_corpus(7, 400, n_range=(4, 12))
    return PosKneserNeyLM(order=4).fit([list(s.pos_tags()) for s in train])


class _StubState:
    def __init__(self):
        self.fail_next = 0
        self.requests: list[dict] = []
        self.calls = 0
        self.lock = threading.Lock()


def _stub_vector(text: str) -> list[float]:
    vec = [0.0] * 8
    for ch in text:
        vec[ord(ch) % 8] += 1.0
    return vec


class _StubHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"  # keep-alive, decoding makes many calls

    def log_message(self, *args):  # keep test output clean
        pass

    def _reply(self, code: int, payload: dict):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        state: _StubState = self.server.state
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length)) if length else {}
        with state.lock:
            state.calls += 1
            state.requests.append({"path": self.path, "body": payload,
                                   "headers": dict(self.headers)})
            if state.fail_next > 0:
                state.fail_next -= 1
                self._reply(500, {"error": "injected failure"})
                return
        if self.path == "/embed":
            self._reply(200, {"vectors": [_stub_vector(t) for t in payload["texts"]]})
        elif self.path == "/translate":
            # each leg reverses word order, so a round trip is the identity
            out = " ".join(reversed(payload["q"].split()))
            self._reply(200, {"translatedText": out})
        else:
            self._reply(404, {"error": f"no route {self.path}"})


class StubServer:
    def __init__(self):
        self.state = _StubState()
        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
        self._httpd.state = self.state
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        host, port = self._httpd.server_address
        self.url = f"http://{host}:{port}"

    def close(self):
        self._httpd.shutdown()
        self._httpd.server_close()


@pytest.fixture
def stub_server():
    server = StubServer()
    yield server
    server.close()
