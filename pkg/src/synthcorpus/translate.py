"""Sentence-translation orchestration over a pluggable backend.

A backend translates lists of sentences order-preservingly (one output
per input). This module batches a document's sentences (32 sentences or
8000 chars per request, whichever first), retries failed batches with
exponential backoff, splices translations back into the document's
layout, and applies round-trip back-translation filtering with chrF
similarity. Mock backends (echo, reverse, corrupting, pseudo-Hindi
word mapping) keep everything testable offline; the HTTP backend posts
JSON to a /translate endpoint.
"""

from __future__ import annotations

import hashlib
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional, Protocol, Sequence

import json

from .chrf import chrf_similarity
from .corpus import Document
from .docparse import guess_script, list_sentences, replace_sentences
from .toygen import HINDI_WORDS

logger = logging.getLogger(__name__)

MAX_BATCH_SENTENCES = 32
MAX_BATCH_CHARS = 8000
DEFAULT_RETRIES = 3
DEFAULT_BACKOFF = 0.1
DEFAULT_CONCURRENCY = 8
DEFAULT_ROUNDTRIP_THRESHOLD = 0.5


class BackendError(Exception):
    """Transport-level backend failure; retried with backoff."""


class CountMismatchError(Exception):
    """Backend returned the wrong number of translations; never retried."""


class TranslationBackend(Protocol):
    name: str

    def translate(
        self, sentences: Sequence[str], src_lang: str, tgt_lang: str
    ) -> list[str]: ...


class EchoBackend:
    name = "echo"

    def translate(self, sentences, src_lang, tgt_lang):
        return list(sentences)


class ReverseBackend:
    name = "reverse"

    def translate(self, sentences, src_lang, tgt_lang):
        return [s[::-1] for s in sentences]


def _unit_floats(seed: int, sentence: str, i: int, n: int = 2) -> list[float]:
    """n reproducible floats in [0, 1) tied to (seed, sentence, i)."""
    digest = hashlib.blake2b(
        f"{seed}:{i}:{sentence}".encode("utf-8"), digest_size=4 * n
    ).digest()
    return [
        int.from_bytes(digest[4 * j : 4 * j + 4], "big") / 2**32 for j in range(n)
    ]


class CorruptingBackend:
    """Replaces a seeded fraction of non-space characters.

    Corruption events are coupled across rates: a character corrupted
    at rate r is corrupted at every rate above r, so mean similarity is
    monotone in the rate by construction. Whitespace is never touched.
    """

    def __init__(self, rate: float, seed: int = 0):
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"corruption rate must be in [0, 1], got {rate}")
        self.rate = rate
        self.seed = seed
        self.name = f"corrupt:{rate}"

    def _corrupt(self, sentence: str) -> str:
        out = []
        alphabet = "abcdefghijklmnopqrstuvwxyz"
        for i, ch in enumerate(sentence):
            if ch.isspace():
                out.append(ch)
                continue
            u, v = _unit_floats(self.seed, sentence, i)
            out.append(alphabet[int(v * 26)] if u < self.rate else ch)
        return "".join(out)

    def translate(self, sentences, src_lang, tgt_lang):
        return [self._corrupt(s) for s in sentences]


class MappingBackend:
    """Deterministic pseudo-translation: each word maps to a fixed
    target word by content hash; sentence punctuation is carried over
    (Latin periods become danda when the target is Hindi)."""

    def __init__(self, words: Sequence[str] = HINDI_WORDS, name: str = "mock:hindi"):
        self.words = tuple(words)
        self.name = name

    def _map_word(self, word: str) -> str:
        start = 0
        end = len(word)
        while start < end and not word[start].isalnum():
            start += 1
        while end > start and not word[end - 1].isalnum():
            end -= 1
        core = word[start:end]
        if not core:
            return word
        digest = hashlib.blake2b(core.casefold().encode("utf-8"), digest_size=4)
        mapped = self.words[int.from_bytes(digest.digest(), "big") % len(self.words)]
        prefix = word[:start]
        suffix = word[end:]
        return prefix + mapped + suffix

    def translate(self, sentences, src_lang, tgt_lang):
        out = []
        to_hindi = tgt_lang == "hi"
        for s in sentences:
            mapped = " ".join(self._map_word(w) for w in s.split())
            if to_hindi:
                mapped = mapped.replace(".", "।")
            out.append(mapped)
        return out


class FlakyBackend:
    """Fails the first N translate calls, then delegates; for retry tests."""

    def __init__(self, inner: TranslationBackend, failures: int):
        self.inner = inner
        self.failures = failures
        self.calls = 0
        self.name = f"flaky:{inner.name}"

    def translate(self, sentences, src_lang, tgt_lang):
        self.calls += 1
        if self.calls <= self.failures:
            raise BackendError(f"simulated outage (call {self.calls})")
        return self.inner.translate(sentences, src_lang, tgt_lang)


class HttpBackend:
    """POST /translate {"src_lang","tgt_lang","sentences"} -> {"translations"}."""

    def __init__(self, endpoint: str, timeout: float = 60.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self.name = f"http:{endpoint}"

    def translate(self, sentences, src_lang, tgt_lang):
        import requests

        body = {
            "src_lang": src_lang,
            "tgt_lang": tgt_lang,
            "sentences": list(sentences),
        }
        try:
            reply = requests.post(self.endpoint, json=body, timeout=self.timeout)
            reply.raise_for_status()
            payload = reply.json()
            return list(payload["translations"])
        except (KeyError, ValueError) as exc:
            raise BackendError(f"malformed backend reply: {exc}") from exc
        except requests.RequestException as exc:
            raise BackendError(f"backend request failed: {exc}") from exc


def resolve_backend(spec: str) -> TranslationBackend:
    """Backend from a CLI spec: echo | reverse | corrupt:R[:SEED] |
    mock:hindi | http:URL or a bare http(s) URL."""
    if spec == "echo":
        return EchoBackend()
    if spec == "reverse":
        return ReverseBackend()
    if spec == "mock:hindi":
        return MappingBackend()
    if spec.startswith("corrupt:"):
        parts = spec.split(":")
        rate = float(parts[1])
        seed = int(parts[2]) if len(parts) > 2 else 0
        return CorruptingBackend(rate, seed)
    if spec.startswith("http:") or spec.startswith("https://") or spec.startswith("http://"):
        url = spec[5:] if spec.startswith("http:") and not spec.startswith("http://") else spec
        return HttpBackend(url)
    raise ValueError(f"unknown backend spec {spec!r}")


def batch_sentences(
    sentences: Sequence[str],
    max_sentences: int = MAX_BATCH_SENTENCES,
    max_chars: int = MAX_BATCH_CHARS,
) -> list[list[str]]:
    """Greedy batches under both limits; an oversize sentence rides alone."""
    batches: list[list[str]] = []
    current: list[str] = []
    chars = 0
    for s in sentences:
        if current and (len(current) >= max_sentences or chars + len(s) > max_chars):
            batches.append(current)
            current = []
            chars = 0
        current.append(s)
        chars += len(s)
    if current:
        batches.append(current)
    return batches


def call_with_retry(
    backend: TranslationBackend,
    batch: Sequence[str],
    src_lang: str,
    tgt_lang: str,
    retries: int = DEFAULT_RETRIES,
    backoff: float = DEFAULT_BACKOFF,
    sleep: Callable[[float], None] = time.sleep,
) -> list[str]:
    """Translate one batch; transport errors retried, contract errors not."""
    last_error: Optional[Exception] = None
    for attempt in range(retries):
        try:
            result = backend.translate(batch, src_lang, tgt_lang)
        except BackendError as exc:
            last_error = exc
            logger.warning("backend %s attempt %d failed: %s", backend.name, attempt + 1, exc)
            if attempt + 1 < retries:
                sleep(backoff * 2**attempt)
            continue
        if len(result) != len(batch):
            raise CountMismatchError(
                f"backend {backend.name} returned {len(result)} translations "
                f"for {len(batch)} sentences"
            )
        return result
    raise BackendError(
        f"backend {backend.name} unavailable after {retries} attempts: {last_error}"
    )


def derive_translated_id(doc_id: str, src_lang: str, tgt_lang: str) -> str:
    return f"{doc_id}.{src_lang}-{tgt_lang}"


def translate_document(
    doc: Document,
    backend: TranslationBackend,
    src_lang: str,
    tgt_lang: str,
    retries: int = DEFAULT_RETRIES,
    backoff: float = DEFAULT_BACKOFF,
    sleep: Callable[[float], None] = time.sleep,
) -> Document:
    """Translated copy of a segmented document, layout preserved."""
    sentences = list_sentences(doc)
    texts = [s.text for s in sentences]
    max_sents = getattr(backend, "max_batch_sentences", MAX_BATCH_SENTENCES)
    max_chars = getattr(backend, "max_batch_chars", MAX_BATCH_CHARS)
    translated: list[str] = []
    for batch in batch_sentences(texts, max_sents, max_chars):
        translated.extend(
            call_with_retry(backend, batch, src_lang, tgt_lang, retries, backoff, sleep)
        )
    replacements = {
        (s.block_index, s.cell_index, s.sent_index): t
        for s, t in zip(sentences, translated)
    }
    new_doc = replace_sentences(doc, replacements)
    meta = dict(doc.meta)
    meta["source_id"] = doc.id
    return dc_replace(
        new_doc,
        id=derive_translated_id(doc.id, src_lang, tgt_lang),
        lang=tgt_lang,
        script=guess_script(new_doc.content_text()),
        provenance="synthetic-translated",
        meta=meta,
    )


def _write_checkpoint(path, doc_id: str, completed: int):
    Path(path).write_text(
        json.dumps({"last_completed_id": doc_id, "completed": completed}) + "\n",
        encoding="utf-8",
    )


def read_checkpoint(path) -> Optional[dict]:
    path = Path(path)
    if not path.exists():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def translate_corpus(
    docs: Sequence[Document],
    backend: TranslationBackend,
    src_lang: str,
    tgt_lang: str,
    concurrency: int = DEFAULT_CONCURRENCY,
    retries: int = DEFAULT_RETRIES,
    backoff: float = DEFAULT_BACKOFF,
    checkpoint_path=None,
    resume: bool = False,
    sleep: Callable[[float], None] = time.sleep,
) -> Iterator[Document]:
    """Translate documents concurrently, yielding them in input order.

    A checkpoint file records the last document completed in order;
    with resume=True, documents up to that point are skipped.
    """
    docs = list(docs)
    start = 0
    if resume and checkpoint_path is not None:
        state = read_checkpoint(checkpoint_path)
        if state is not None:
            done = int(state.get("completed", 0))
            if done and done <= len(docs) and docs[done - 1].id == state.get(
                "last_completed_id"
            ):
                start = done
                logger.info("resuming translation after %d documents", done)

    def run(doc: Document) -> Document:
        return translate_document(
            doc, backend, src_lang, tgt_lang, retries, backoff, sleep
        )

    pending = docs[start:]
    if concurrency > 1:
        pool = ThreadPoolExecutor(max_workers=concurrency)
        results = pool.map(run, pending)
    else:
        pool = None
        results = map(run, pending)
    completed = start
    try:
        for doc, translated in zip(pending, results):
            completed += 1
            if checkpoint_path is not None:
                _write_checkpoint(checkpoint_path, doc.id, completed)
            yield translated
    finally:
        if pool is not None:
            pool.shutdown(wait=False, cancel_futures=True)


@dataclass(frozen=True)
class SentencePair:
    source: str
    target: str
    backtranslated: Optional[str] = None
    similarity: Optional[float] = None

    def __post_init__(self):
        if (self.backtranslated is None) != (self.similarity is None):
            raise ValueError("similarity present iff backtranslated present")

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "backtranslated": self.backtranslated,
            "similarity": self.similarity,
        }

    @classmethod
    def from_dict(cls, d) -> "SentencePair":
        return cls(
            source=d["source"],
            target=d["target"],
            backtranslated=d.get("backtranslated"),
            similarity=d.get("similarity"),
        )


def roundtrip_filter(
    pairs: Iterable[SentencePair],
    backend: TranslationBackend,
    threshold: float = DEFAULT_ROUNDTRIP_THRESHOLD,
    src_lang: str = "en",
    tgt_lang: str = "hi",
    retries: int = DEFAULT_RETRIES,
    backoff: float = DEFAULT_BACKOFF,
    checkpoint_path=None,
    sleep: Callable[[float], None] = time.sleep,
) -> tuple[list[SentencePair], list[SentencePair]]:
    """Back-translate targets and split pairs at a chrF threshold.

    Returns (kept, rejected), both in input order; pairs with
    similarity < threshold are rejected. If the backend dies mid-way, a
    checkpoint with the count of completed pairs is written before the
    error propagates.
    """
    pairs = list(pairs)
    done: list[SentencePair] = []
    try:
        for batch_pairs in batch_sentences_of_pairs(pairs):
            batch = [p.target for p in batch_pairs]
            back = call_with_retry(
                backend, batch, tgt_lang, src_lang, retries, backoff, sleep
            )
            for pair, bt in zip(batch_pairs, back):
                done.append(
                    dc_replace(
                        pair,
                        backtranslated=bt,
                        similarity=chrf_similarity(bt, pair.source),
                    )
                )
    except (BackendError, CountMismatchError):
        if checkpoint_path is not None:
            Path(checkpoint_path).write_text(
                json.dumps({"completed": len(done), "total": len(pairs)}) + "\n",
                encoding="utf-8",
            )
        raise
    kept = [p for p in done if p.similarity >= threshold]
    rejected = [p for p in done if p.similarity < threshold]
    return kept, rejected


def batch_sentences_of_pairs(
    pairs: Sequence[SentencePair],
    max_sentences: int = MAX_BATCH_SENTENCES,
    max_chars: int = MAX_BATCH_CHARS,
) -> list[list[SentencePair]]:
    batches: list[list[SentencePair]] = []
    current: list[SentencePair] = []
    chars = 0
    for p in pairs:
        if current and (
            len(current) >= max_sentences or chars + len(p.target) > max_chars
        ):
            batches.append(current)
            current = []
            chars = 0
        current.append(p)
        chars += len(p.target)
    if current:
        batches.append(current)
    return batches
