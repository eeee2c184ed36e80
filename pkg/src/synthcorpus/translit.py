"""Rule-based Devanagari-to-Roman transliteration (ASCII Hinglish).

The scheme table ships as a data file covering every codepoint in the
Devanagari block (U+0900-U+097F); anything outside the block passes
through unchanged. Consonants carry an inherent schwa that a matra or
virama overrides and that word-final position deletes (flag-controlled);
anusvara turns into "m" before labial consonants and "n" otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace as dc_replace
from importlib import resources
from typing import Iterable, Iterator, Mapping, Optional

from .corpus import Document
from .docparse import transform_cells

BLOCK_LO = 0x0900
BLOCK_HI = 0x097F

CANDRABINDU = "ँ"
ANUSVARA = "ं"
VISARGA = "ः"
NUKTA = "़"
VIRAMA = "्"

SPECIALS = (CANDRABINDU, ANUSVARA, VISARGA, NUKTA, VIRAMA)

SCHEME_RESOURCE = "translit_hindi.json"


class SchemeError(ValueError):
    """Scheme table incomplete or inconsistent."""


@dataclass(frozen=True)
class TranslitScheme:
    name: str
    consonants: Mapping[str, str]
    independent_vowels: Mapping[str, str]
    matras: Mapping[str, str]
    digits: Mapping[str, str]
    signs: Mapping[str, str]
    nukta_overrides: Mapping[str, str]
    labial_consonants: frozenset[str]
    inherent_vowel: str = "a"
    anusvara_labial: str = "m"
    anusvara_default: str = "n"
    candrabindu: str = "n"
    visarga: str = "h"
    final_schwa_deletion: bool = True

    def __post_init__(self):
        covered = (
            set(self.consonants)
            | set(self.independent_vowels)
            | set(self.matras)
            | set(self.digits)
            | set(self.signs)
            | set(SPECIALS)
        )
        block = {chr(cp) for cp in range(BLOCK_LO, BLOCK_HI + 1)}
        missing = block - covered
        if missing:
            raise SchemeError(
                f"scheme {self.name!r} leaves {len(missing)} codepoints "
                f"unmapped: {sorted(hex(ord(c)) for c in missing)[:8]}"
            )
        outputs = (
            list(self.consonants.values())
            + list(self.independent_vowels.values())
            + list(self.matras.values())
            + list(self.digits.values())
            + list(self.signs.values())
            + list(self.nukta_overrides.values())
            + [
                self.inherent_vowel,
                self.anusvara_labial,
                self.anusvara_default,
                self.candrabindu,
                self.visarga,
            ]
        )
        bad = [s for s in outputs if not s.isascii()]
        if bad:
            raise SchemeError(f"non-ASCII scheme outputs: {bad[:5]}")


def load_scheme(path=None) -> TranslitScheme:
    if path is None:
        raw = resources.files(__package__).joinpath(
            "data", SCHEME_RESOURCE
        ).read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    d = json.loads(raw)
    return TranslitScheme(
        name=d.get("name", "custom"),
        consonants=dict(d["consonants"]),
        independent_vowels=dict(d["independent_vowels"]),
        matras=dict(d["matras"]),
        digits=dict(d["digits"]),
        signs=dict(d["signs"]),
        nukta_overrides=dict(d.get("nukta_overrides", {})),
        labial_consonants=frozenset(d.get("labial_consonants", ())),
        inherent_vowel=d.get("inherent_vowel", "a"),
        anusvara_labial=d.get("anusvara_labial", "m"),
        anusvara_default=d.get("anusvara_default", "n"),
        candrabindu=d.get("candrabindu", "n"),
        visarga=d.get("visarga", "h"),
        final_schwa_deletion=bool(
            d.get("flags", {}).get("final_schwa_deletion", True)
        ),
    )


_DEFAULT_SCHEME: Optional[TranslitScheme] = None


def default_scheme() -> TranslitScheme:
    global _DEFAULT_SCHEME
    if _DEFAULT_SCHEME is None:
        _DEFAULT_SCHEME = load_scheme()
    return _DEFAULT_SCHEME


def _in_block(ch: str) -> bool:
    return BLOCK_LO <= ord(ch) <= BLOCK_HI


def _continues_word(scheme: TranslitScheme, ch: Optional[str]) -> bool:
    """Whether ch keeps the current word going for schwa purposes."""
    if ch is None or not _in_block(ch):
        return False
    return (
        ch in scheme.consonants
        or ch in scheme.independent_vowels
        or ch in scheme.matras
        or ch in SPECIALS
    )


def _next_consonant_base(scheme: TranslitScheme, text: str, i: int) -> Optional[str]:
    """The consonant codepoint right after position i, if any."""
    if i < len(text) and text[i] in scheme.consonants:
        return text[i]
    return None


def transliterate_with_report(
    text: str, scheme: Optional[TranslitScheme] = None
) -> tuple[str, dict[str, int]]:
    """Transliterate and count non-ASCII codepoints that passed through."""
    if scheme is None:
        scheme = default_scheme()
    out: list[str] = []
    unmapped: dict[str, int] = {}
    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        if not _in_block(ch):
            out.append(ch)
            if not ch.isascii():
                unmapped[ch] = unmapped.get(ch, 0) + 1
            i += 1
            continue
        if ch in scheme.consonants:
            base = scheme.consonants[ch]
            j = i + 1
            if j < n and text[j] == NUKTA:
                base = scheme.nukta_overrides.get(ch, base)
                j += 1
            if j < n and text[j] == VIRAMA:
                out.append(base)
                i = j + 1
                continue
            if j < n and text[j] in scheme.matras:
                out.append(base + scheme.matras[text[j]])
                i = j + 1
                continue
            following = text[j] if j < n else None
            if scheme.final_schwa_deletion and not _continues_word(scheme, following):
                out.append(base)
            else:
                out.append(base + scheme.inherent_vowel)
            i = j
            continue
        if ch == ANUSVARA:
            nxt = _next_consonant_base(scheme, text, i + 1)
            if nxt is not None and nxt in scheme.labial_consonants:
                out.append(scheme.anusvara_labial)
            else:
                out.append(scheme.anusvara_default)
            i += 1
            continue
        if ch == CANDRABINDU:
            out.append(scheme.candrabindu)
            i += 1
            continue
        if ch == VISARGA:
            out.append(scheme.visarga)
            i += 1
            continue
        if ch in (NUKTA, VIRAMA):
            # Stray combining mark with no consonant to attach to.
            i += 1
            continue
        for table in (
            scheme.independent_vowels,
            scheme.matras,
            scheme.digits,
            scheme.signs,
        ):
            if ch in table:
                out.append(table[ch])
                break
        i += 1
    return "".join(out), unmapped


def transliterate(text: str, scheme: Optional[TranslitScheme] = None) -> str:
    result, _ = transliterate_with_report(text, scheme)
    return result


def derive_translit_id(source_id: str) -> str:
    return f"{source_id}.translit"


def transliterate_document(
    doc: Document, scheme: Optional[TranslitScheme] = None
) -> Document:
    if doc.script != "devanagari":
        raise ValueError(
            f"document {doc.id} has script {doc.script!r}; expected devanagari"
        )
    if scheme is None:
        scheme = default_scheme()
    transformed = transform_cells(doc, lambda s: transliterate(s, scheme))
    meta = dict(doc.meta)
    meta["source_id"] = doc.id
    return dc_replace(
        transformed,
        id=derive_translit_id(doc.id),
        script="latin",
        provenance="synthetic-transliterated",
        meta=meta,
    )


def transliterate_corpus(
    docs: Iterable[Document], scheme: Optional[TranslitScheme] = None
) -> Iterator[Document]:
    """Latin-script copies of Devanagari documents, structure untouched."""
    if scheme is None:
        scheme = default_scheme()
    for doc in docs:
        yield transliterate_document(doc, scheme)
