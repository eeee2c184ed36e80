"""Deterministic toy corpus generation for tests, demos, and benchmarks.

Documents are markdown-ish (headings, paragraphs, lists, tables) drawn
from fixed Hindi and English word lists, so language models trained on
the clean text separate cleanly from generated gibberish. Near-duplicate
pairs are constructed with a verified exact Jaccard over character
shingles.
"""

from __future__ import annotations

import random
from importlib import resources
from pathlib import Path

from .corpus import Document
from .dedup import exact_jaccard, shingle
from .docparse import parse_document, segment_sentences

HINDI_WORDS = (
    "भारत पानी आकाश नदी पहाड़ शहर गाँव किताब विद्यालय बच्चा "
    "आदमी औरत दिन रात सुबह शाम साल समय काम घर "
    "दरवाज़ा खिड़की सड़क बाज़ार दूध चाय खाना फल पेड़ फूल "
    "पत्ता हवा बारिश धूप चाँद सूरज तारा समुद्र जंगल जानवर "
    "पक्षी मछली गाय घोड़ा कुत्ता बिल्ली हाथी शेर राजा रानी "
    "मंदिर त्योहार संगीत नृत्य कहानी कविता भाषा हिंदी विज्ञान गणित "
    "इतिहास भूगोल देश दुनिया लोग परिवार दोस्त प्यार खुशी जीवन "
    "है हैं था थी और लेकिन क्योंकि जब यह वह "
    "हम आप मैं करता जाता आता देखता सुनता कहता लिखता "
    "पढ़ता खेलता बनाता रहता मिलता चलता सोचता समझता बोलता गाता"
).split()

ENGLISH_WORDS = (
    "the a river mountain city village book school child man "
    "woman day night morning evening year time work house door "
    "window road market milk tea food fruit tree flower leaf "
    "wind rain sun moon star sea forest animal bird fish "
    "cow horse dog cat elephant lion king queen temple festival "
    "music dance story poem language science history country world people "
    "family friend love joy life water sky is was and "
    "but because when then this that we you they goes "
    "comes sees says writes reads plays makes lives meets walks"
).split()

_GIBBERISH_DEVANAGARI = "कखगघचछजझटठडढतथदधनपफबभमयरलवशषसह"
_GIBBERISH_MATRAS = "ािीुूेैोौ"
_GIBBERISH_LATIN = "bcdfghjklmnpqrstvwxz"

TERMINATOR = {"hi": "।", "en": "."}


def _words(lang: str) -> tuple[str, ...]:
    return HINDI_WORDS if lang == "hi" else ENGLISH_WORDS


def sentence(rng: random.Random, lang: str, lo: int = 4, hi: int = 10) -> str:
    words = _words(lang)
    n = rng.randint(lo, hi)
    body = " ".join(rng.choice(words) for _ in range(n))
    mark = TERMINATOR[lang] if rng.random() < 0.9 else "?"
    return body + mark


def phrase(rng: random.Random, lang: str, lo: int = 2, hi: int = 5) -> str:
    words = _words(lang)
    return " ".join(rng.choice(words) for _ in range(rng.randint(lo, hi)))


def paragraph(rng: random.Random, lang: str) -> str:
    sents = [sentence(rng, lang) for _ in range(rng.randint(2, 4))]
    text = " ".join(sents)
    if len(text) > 80 and rng.random() < 0.4:
        # wrap at a space near the middle to exercise multi-line cells
        mid = text.find(" ", len(text) // 2)
        if mid != -1:
            text = text[:mid] + "\n" + text[mid + 1 :]
    return text


def heading(rng: random.Random, lang: str) -> str:
    level = rng.randint(1, 3)
    return "#" * level + " " + phrase(rng, lang, 2, 4)


def bullet_list(rng: random.Random, lang: str) -> str:
    return "\n".join(
        f"{rng.choice('-*')} {phrase(rng, lang)}" for _ in range(rng.randint(2, 4))
    )


def numbered_list(rng: random.Random, lang: str) -> str:
    return "\n".join(
        f"{i + 1}. {phrase(rng, lang)}" for i in range(rng.randint(2, 4))
    )


def table(rng: random.Random, lang: str) -> str:
    cols = rng.randint(2, 3)
    rows = rng.randint(2, 3)
    lines = [
        "| " + " | ".join(phrase(rng, lang, 1, 2) for _ in range(cols)) + " |",
        "|" + "|".join(" --- " for _ in range(cols)) + "|",
    ]
    for _ in range(rows):
        lines.append(
            "| " + " | ".join(phrase(rng, lang, 1, 3) for _ in range(cols)) + " |"
        )
    return "\n".join(lines)


def markdown_text(rng: random.Random, lang: str) -> str:
    parts = [heading(rng, lang), paragraph(rng, lang)]
    if rng.random() < 0.5:
        parts.append(bullet_list(rng, lang))
    if rng.random() < 0.3:
        parts.append(numbered_list(rng, lang))
    if rng.random() < 0.4:
        parts.append(table(rng, lang))
    parts.append(paragraph(rng, lang))
    text = "\n\n".join(parts)
    if rng.random() < 0.5:
        text += "\n"
    return text


def gibberish_word(rng: random.Random, lang: str) -> str:
    if lang == "hi":
        return "".join(
            rng.choice(_GIBBERISH_DEVANAGARI) + rng.choice(_GIBBERISH_MATRAS)
            for _ in range(rng.randint(2, 4))
        )
    return "".join(rng.choice(_GIBBERISH_LATIN) for _ in range(rng.randint(4, 9)))


def gibberish_text(rng: random.Random, lang: str = "hi") -> str:
    sents = []
    for _ in range(rng.randint(2, 4)):
        n = rng.randint(5, 10)
        sents.append(
            " ".join(gibberish_word(rng, lang) for _ in range(n)) + TERMINATOR[lang]
        )
    return " ".join(sents)


def make_raw_records(
    n: int,
    seed: int,
    hindi_fraction: float = 0.5,
    noise_fraction: float = 0.0,
    source: str = "toy",
) -> list[dict]:
    """Raw pre-parse records: {"id", "lang", "text"} dicts."""
    rng = random.Random(seed)
    records = []
    for i in range(n):
        lang = "hi" if rng.random() < hindi_fraction else "en"
        if rng.random() < noise_fraction:
            text = gibberish_text(rng, lang)
        else:
            text = markdown_text(rng, lang)
        records.append({"id": f"{source}-{i:06d}", "lang": lang, "text": text})
    return records


def toy_corpus_path() -> Path:
    """Path of the bundled 200-document raw corpus (half Hindi, some noise)."""
    return Path(str(resources.files(__package__).joinpath("data", "toy_corpus.jsonl")))


def make_documents(
    n: int,
    seed: int,
    lang: str = "hi",
    provenance: str = "real-web",
    noise_fraction: float = 0.0,
    source: str = "toy",
) -> list[Document]:
    """Parsed and segmented single-language documents."""
    rng = random.Random(seed)
    docs = []
    for i in range(n):
        if rng.random() < noise_fraction:
            text = gibberish_text(rng, lang)
        else:
            text = markdown_text(rng, lang)
        doc = parse_document(
            text, lang, doc_id=f"{source}-{lang}-{i:06d}", provenance=provenance
        )
        docs.append(segment_sentences(doc))
    return docs


def plain_text(rng: random.Random, lang: str, sentences: int = 8) -> str:
    """A single flat paragraph; its parsed content equals the raw text."""
    return " ".join(sentence(rng, lang) for _ in range(sentences))


def near_duplicate_text(
    base: str,
    rng: random.Random,
    lang: str = "hi",
    shingle_w: int = 5,
    lo: float = 0.85,
    hi: float = 0.97,
) -> str:
    """A copy of base whose exact shingle Jaccard lands in [lo, hi].

    Appends a short tail of fresh words, shrinking or growing the tail
    until the verified exact Jaccard is in range.
    """
    base_shingles = shingle(base, shingle_w)
    tail_words = max(2, len(base.split()) // 12)
    for _ in range(30):
        tail = " ".join(gibberish_word(rng, lang) for _ in range(tail_words))
        variant = base.rstrip("\n") + " " + tail
        j = exact_jaccard(base_shingles, shingle(variant, shingle_w))
        if lo <= j <= hi:
            return variant
        if j > hi:
            tail_words += max(1, tail_words // 2)
        else:
            if tail_words <= 1:
                break
            tail_words = max(1, tail_words // 2)
    raise ValueError(
        f"could not construct a near duplicate in [{lo}, {hi}] "
        f"for a {len(base)}-char base"
    )
