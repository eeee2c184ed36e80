"""Devanagari-to-Roman transliteration: golden pairs, ASCII purity, scheme rules."""

import json
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthcorpus.docparse import parse_document
from synthcorpus.translit import (
    BLOCK_HI,
    BLOCK_LO,
    SchemeError,
    TranslitScheme,
    default_scheme,
    derive_translit_id,
    load_scheme,
    transliterate,
    transliterate_corpus,
    transliterate_document,
    transliterate_with_report,
)


def golden_pairs():
    raw = (
        resources.files("synthcorpus")
        .joinpath("data", "translit_golden.tsv")
        .read_text("utf-8")
    )
    pairs = []
    for line in raw.splitlines():
        if not line or line.startswith("#"):
            continue
        deva, latin = line.split("\t")
        pairs.append((deva, latin))
    return pairs


GOLDEN = golden_pairs()


def test_golden_file_has_fifty_entries():
    assert len(GOLDEN) == 50
    assert len({d for d, _ in GOLDEN}) == 50


@pytest.mark.parametrize("deva,expected", GOLDEN, ids=[d for d, _ in GOLDEN])
def test_golden_pair(deva, expected):
    assert transliterate(deva) == expected


# --- individual scheme rules --------------------------------------------------


def test_anusvara_assimilates_to_following_consonant():
    assert transliterate("संभव") == "sambhav"  # labial -> m
    assert transliterate("गंगा") == "gangaa"  # velar -> n
    assert transliterate("अं") == "an"  # word-final -> default


def test_candrabindu_and_visarga():
    assert transliterate("चाँद") == "chaand"
    assert transliterate("दुःख") == "duhkh"


def test_virama_suppresses_inherent_vowel():
    assert transliterate("क्या") == "kyaa"
    assert transliterate("स्कूल") == "skuul"


def test_final_schwa_deleted_medial_kept():
    assert transliterate("कमल") == "kamal"
    assert transliterate("समय") == "samay"


def test_nukta_decomposed_and_precomposed():
    # ड + combining nukta
    assert transliterate("ज़रूर") == "zaruur"
    # precomposed characters
    assert transliterate("फ़िल्म") == "film"  # फ़
    assert transliterate("क़ानून") == "qaanuun"  # क़


def test_danda_and_digits():
    assert transliterate("नमस्ते।") == "namaste."
    assert transliterate("॥") == "."
    assert transliterate("२०२४") == "2024"


def test_stray_combining_marks_are_dropped():
    assert transliterate("़") == ""  # lone nukta
    assert transliterate("्") == ""  # lone virama
    assert transliterate("ा") == "aa"  # lone matra still maps


def test_ascii_text_is_untouched():
    text = "hello world, 123 -- nothing to do."
    assert transliterate(text) == text


def test_mixed_text_only_converts_devanagari():
    assert transliterate("see नमस्ते now") == "see namaste now"


def test_transliteration_is_idempotent():
    once = transliterate("भारत में हिंदी")
    assert transliterate(once) == once


# --- report of non-ASCII passthrough -----------------------------------------


def test_report_counts_foreign_nonascii():
    out, unmapped = transliterate_with_report("क é é ñ")
    assert out == "k é é ñ"
    assert unmapped == {"é": 2, "ñ": 1}


def test_report_empty_for_block_only_input():
    out, unmapped = transliterate_with_report("नमस्ते।")
    assert out.isascii()
    assert unmapped == {}


# --- ASCII purity over the whole block ----------------------------------------


def test_every_block_codepoint_maps_to_ascii():
    scheme = default_scheme()
    for cp in range(BLOCK_LO, BLOCK_HI + 1):
        out = transliterate(chr(cp), scheme)
        assert out.isascii(), hex(cp)


@settings(max_examples=400, deadline=None)
@given(
    st.text(
        alphabet=st.characters(min_codepoint=BLOCK_LO, max_codepoint=BLOCK_HI),
        max_size=40,
    )
)
def test_fuzzed_block_text_yields_pure_ascii(text):
    out, unmapped = transliterate_with_report(text)
    assert out.isascii()
    assert unmapped == {}


# --- scheme validation ---------------------------------------------------------


def scheme_dict():
    raw = (
        resources.files("synthcorpus")
        .joinpath("data", "translit_hindi.json")
        .read_text("utf-8")
    )
    return json.loads(raw)


def test_incomplete_scheme_rejected(tmp_path):
    d = scheme_dict()
    del d["consonants"]["क"]
    path = tmp_path / "bad_scheme.json"
    path.write_text(json.dumps(d, ensure_ascii=False), encoding="utf-8")
    with pytest.raises(SchemeError, match="unmapped"):
        load_scheme(path)


def test_non_ascii_scheme_output_rejected():
    base = default_scheme()
    with pytest.raises(SchemeError, match="non-ASCII"):
        TranslitScheme(
            name="bad",
            consonants=base.consonants,
            independent_vowels=base.independent_vowels,
            matras=base.matras,
            digits=base.digits,
            signs=base.signs,
            nukta_overrides=base.nukta_overrides,
            labial_consonants=base.labial_consonants,
            inherent_vowel="ā",
        )


def test_custom_scheme_round_trips_from_file(tmp_path):
    d = scheme_dict()
    path = tmp_path / "scheme.json"
    path.write_text(json.dumps(d, ensure_ascii=False), encoding="utf-8")
    scheme = load_scheme(path)
    assert transliterate("नमस्ते", scheme) == "namaste"


# --- document / corpus level ----------------------------------------------------


def test_document_transliteration_relabels():
    doc = parse_document("# शीर्षक\n\n- पानी\n- खाना", "hi")
    assert doc.script == "devanagari"
    out = transliterate_document(doc)
    assert out.id == derive_translit_id(doc.id)
    assert out.script == "latin"
    assert out.provenance == "synthetic-transliterated"
    assert out.meta["source_id"] == doc.id
    assert [b.kind for b in out.blocks] == [b.kind for b in doc.blocks]
    assert out.text() == "# shiirshak\n\n- paanii\n- khaanaa"


def test_document_transliteration_requires_devanagari():
    doc = parse_document("plain english", "en")
    with pytest.raises(ValueError, match="expected devanagari"):
        transliterate_document(doc)


def test_corpus_transliteration_preserves_count_and_order():
    docs = [
        parse_document("नमस्ते दुनिया।", "hi"),
        parse_document("भारत एक देश है।", "hi"),
    ]
    outs = list(transliterate_corpus(docs))
    assert [o.meta["source_id"] for o in outs] == [d.id for d in docs]
    assert all(o.text().isascii() for o in outs)
