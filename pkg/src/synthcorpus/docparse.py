"""Markdown-ish parsing, sentence segmentation, and lossless reassembly.

The supported grammar is plain text restricted to ATX headings, bullet
and numbered lists, pipe tables, and paragraphs; anything else degrades
to a paragraph block. Parsing never loses bytes: `reassemble(parse(x))`
with no replacements returns `x` exactly, and replacing each sentence
with its own text is also the identity.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, replace as dc_replace
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable, Mapping, Optional

from .corpus import Block, Cell, Document, Span, derive_id

HEADING_RE = re.compile(r"^#{1,6} +")
BULLET_RE = re.compile(r"^ *[-*] +")
NUMBERED_RE = re.compile(r"^ *\d+[.)] +")
TABLE_RE = re.compile(r"^ *\|.*\| *$")

TERMINATORS = frozenset({".", "!", "?", "।", "॥"})  # . ! ? । ॥
CLOSERS = frozenset("\"')]}»”’")

DEVANAGARI_RANGE = (0x0900, 0x097F)


class ParseError(ValueError):
    """Internal parse invariant broke (lossless reconstruction failed)."""


class ReassemblyError(ValueError):
    """A replacement targets an unknown location or breaks line layout."""


@dataclass(frozen=True)
class Sentence:
    """One segmented sentence and its location within a Document."""

    text: str
    block_index: int
    cell_index: int
    sent_index: int


Location = tuple[int, int, int]


def _classify(line: str) -> Optional[str]:
    """Block kind for one line, or None for a blank (separator) line."""
    if not line.strip():
        return None
    if HEADING_RE.match(line):
        return "heading"
    if BULLET_RE.match(line):
        return "bullet_list"
    if NUMBERED_RE.match(line):
        return "numbered_list"
    if TABLE_RE.match(line):
        return "table"
    return "paragraph"


def _pipe_positions(line: str) -> list[int]:
    return [i for i, ch in enumerate(line) if ch == "|"]


def _trimmed_span(text: str, start: int, end: int) -> tuple[int, int]:
    """Shrink [start, end) in text to exclude surrounding whitespace."""
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def _build_block(kind: str, lines: list[str]) -> Block:
    lines_t = tuple(lines)
    if kind == "paragraph":
        joined = "\n".join(lines)
        return Block(kind, lines_t, (Cell(None, 0, len(joined)),))
    if kind == "heading":
        m = HEADING_RE.match(lines[0])
        return Block(kind, lines_t, (Cell(0, m.end(), len(lines[0])),))
    if kind in ("bullet_list", "numbered_list"):
        marker = BULLET_RE if kind == "bullet_list" else NUMBERED_RE
        cells = []
        for k, line in enumerate(lines):
            m = marker.match(line)
            cells.append(Cell(k, m.end(), len(line)))
        return Block(kind, lines_t, tuple(cells))
    if kind == "table":
        cells = []
        for k, line in enumerate(lines):
            pipes = _pipe_positions(line)
            for a, b in zip(pipes, pipes[1:]):
                start, end = _trimmed_span(line, a + 1, b)
                cells.append(Cell(k, start, end))
        return Block(kind, lines_t, tuple(cells))
    raise ParseError(f"unknown block kind {kind!r}")


def _group_blocks(lines: list[str]) -> list[tuple[int, int, str]]:
    """Group lines into (start, end_inclusive, kind) block ranges.

    Headings are one block per line; a table run with ragged column
    counts degrades to a single paragraph block.
    """
    ranges: list[tuple[int, int, str]] = []
    i = 0
    n = len(lines)
    while i < n:
        kind = _classify(lines[i])
        if kind is None:
            i += 1
            continue
        if kind == "heading":
            ranges.append((i, i, "heading"))
            i += 1
            continue
        j = i
        while j + 1 < n and _classify(lines[j + 1]) == kind:
            j += 1
        if kind == "table":
            widths = {len(_pipe_positions(lines[k])) - 1 for k in range(i, j + 1)}
            if len(widths) > 1:
                kind = "paragraph"
        ranges.append((i, j, kind))
        i = j + 1
    return ranges


def guess_script(text: str) -> str:
    lo, hi = DEVANAGARI_RANGE
    if any(lo <= ord(ch) <= hi for ch in text):
        return "devanagari"
    return "latin"


def parse_document(
    raw: str,
    lang: str,
    doc_id: Optional[str] = None,
    script: Optional[str] = None,
    provenance: str = "real-web",
    meta: Optional[Mapping[str, str]] = None,
) -> Document:
    """Parse raw text into blocks; every input byte lands in the Document.

    Sentence spans are not populated here; run segment_sentences next.
    """
    lines = raw.split("\n")
    ranges = _group_blocks(lines)
    if not ranges:
        # Whitespace-only input still needs one block to hang bytes on.
        joined = raw
        blocks = (Block("paragraph", tuple(lines), (Cell(None, 0, len(joined)),)),)
        separators = ("", "")
    else:
        blocks_l = []
        separators_l = []
        first_start = ranges[0][0]
        separators_l.append(
            "" if first_start == 0 else "\n".join(lines[:first_start]) + "\n"
        )
        for idx, (start, end, kind) in enumerate(ranges):
            blocks_l.append(_build_block(kind, lines[start : end + 1]))
            if idx + 1 < len(ranges):
                between = lines[end + 1 : ranges[idx + 1][0]]
                sep = "\n" + ("\n".join(between) + "\n" if between else "")
            else:
                rest = lines[end + 1 :]
                sep = "\n" + "\n".join(rest) if rest else ""
            separators_l.append(sep)
        blocks = tuple(blocks_l)
        separators = tuple(separators_l)
    doc = Document(
        id=doc_id
        or derive_id(
            dict(meta or {}).get("source", "inline"),
            hashlib.blake2b(raw.encode("utf-8"), digest_size=8).hexdigest(),
        ),
        lang=lang,
        script=script or guess_script(raw),
        provenance=provenance,
        blocks=blocks,
        separators=separators,
        meta=dict(meta or {}),
    )
    reconstructed = doc.text()
    if reconstructed != raw:
        raise ParseError(
            f"lossless-parse invariant failed for document {doc.id}: "
            f"{len(raw)} bytes in, {len(reconstructed)} bytes out"
        )
    return doc


@lru_cache(maxsize=None)
def _load_guard_file(name: str) -> frozenset[str]:
    text = resources.files(__package__).joinpath("data", name).read_text("utf-8")
    entries = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.add(line.lower())
    return frozenset(entries)


def default_abbreviations() -> frozenset[str]:
    return _load_guard_file("guard_en.txt") | _load_guard_file("guard_hi.txt")


def _is_period_boundary(text: str, i: int, abbreviations: frozenset[str]) -> bool:
    n = len(text)
    nxt = text[i + 1] if i + 1 < n else None
    # A period only ends a sentence before whitespace, a closer, more
    # terminal punctuation, or end of text ("3.14", "file.txt").
    if nxt is not None and not (
        nxt.isspace() or nxt in CLOSERS or nxt in TERMINATORS
    ):
        return False
    if i > 0 and nxt is not None and text[i - 1].isdigit() and nxt.isdigit():
        return False
    j = i
    while j > 0 and not text[j - 1].isspace():
        j -= 1
    token = text[j : i + 1]
    while token and not token[0].isalnum():
        token = token[1:]
    if token.lower() in abbreviations:
        return False
    if len(token) == 2 and token[0].isalpha():  # single-letter initial "J."
        return False
    return True


def segment_text(
    text: str, abbreviations: Optional[frozenset[str]] = None
) -> list[Span]:
    """Sentence spans within text, in order, guards applied.

    Spans start at the first non-space character of each sentence and
    absorb trailing terminators and closing quotes/brackets. Text with
    no alphanumeric characters yields no spans (table rules, "---").
    """
    if abbreviations is None:
        abbreviations = default_abbreviations()
    if not any(ch.isalnum() for ch in text):
        return []
    spans: list[Span] = []
    n = len(text)
    start: Optional[int] = None
    i = 0

    def emit(lo: int, hi: int):
        while hi > lo and text[hi - 1].isspace():
            hi -= 1
        if any(ch.isalnum() for ch in text[lo:hi]):
            spans.append(Span(lo, hi))

    while i < n:
        ch = text[i]
        if start is None:
            if ch.isspace():
                i += 1
                continue
            start = i
        if ch in TERMINATORS and (
            ch != "." or _is_period_boundary(text, i, abbreviations)
        ):
            j = i
            while j + 1 < n and text[j + 1] in TERMINATORS | CLOSERS:
                j += 1
            emit(start, j + 1)
            start = None
            i = j + 1
            continue
        i += 1
    if start is not None:
        emit(start, n)
    return spans


def segment_sentences(
    doc: Document, abbreviations: Optional[frozenset[str]] = None
) -> Document:
    """Populate sentence spans in every cell; structure is untouched."""
    if abbreviations is None:
        abbreviations = default_abbreviations()
    new_blocks = []
    for block in doc.blocks:
        new_cells = tuple(
            dc_replace(
                cell,
                sentences=tuple(
                    segment_text(cell.content(block.lines), abbreviations)
                ),
            )
            for cell in block.cells
        )
        new_blocks.append(dc_replace(block, cells=new_cells))
    return dc_replace(doc, blocks=tuple(new_blocks))


def list_sentences(doc: Document) -> list[Sentence]:
    return [Sentence(text, b, c, s) for b, c, s, text in doc.sentences()]


def _splice_tracked(
    content: str,
    spans: Iterable[Span],
    replacement_for: Callable[[int], Optional[str]],
) -> tuple[str, list[Span]]:
    """Rebuild cell content left to right, returning new content + spans."""
    out: list[str] = []
    new_spans: list[Span] = []
    pos = 0
    cursor = 0
    for s, span in enumerate(spans):
        gap = content[pos : span.start]
        out.append(gap)
        cursor += len(gap)
        piece = replacement_for(s)
        if piece is None:
            piece = content[span.start : span.end]
        out.append(piece)
        new_spans.append(Span(cursor, cursor + len(piece)))
        cursor += len(piece)
        pos = span.end
    out.append(content[pos:])
    return "".join(out), new_spans


def _rebuild_block(
    block: Block,
    block_index: int,
    cell_transform: Callable[[int, int, str, tuple[Span, ...]], tuple[str, list[Span]]],
) -> Block:
    """Apply a per-cell content transform and recompute cell geometry.

    cell_transform(block_index, cell_index, content, spans) returns the
    new content and its sentence spans.
    """
    if len(block.cells) == 1 and block.cells[0].line is None:
        cell = block.cells[0]
        content = cell.content(block.lines)
        new_content, new_spans = cell_transform(block_index, 0, content, cell.sentences)
        new_cell = Cell(None, 0, len(new_content), tuple(new_spans))
        return Block(block.kind, tuple(new_content.split("\n")), (new_cell,))

    by_line: dict[int, list[tuple[int, Cell]]] = {}
    for c, cell in enumerate(block.cells):
        by_line.setdefault(cell.line, []).append((c, cell))
    new_lines = list(block.lines)
    new_cells: list[tuple[int, Cell]] = []
    for line_no, cells in by_line.items():
        line = block.lines[line_no]
        parts: list[str] = []
        cursor = 0
        pos = 0
        for c, cell in sorted(cells, key=lambda item: item[1].start):
            lead = line[pos : cell.start]
            parts.append(lead)
            cursor += len(lead)
            content = line[cell.start : cell.end]
            new_content, new_spans = cell_transform(
                block_index, c, content, cell.sentences
            )
            if "\n" in new_content:
                raise ReassemblyError(
                    f"replacement for block {block_index} cell {c} "
                    "introduces a line break inside a single-line cell"
                )
            parts.append(new_content)
            new_cells.append(
                (c, Cell(line_no, cursor, cursor + len(new_content), tuple(new_spans)))
            )
            cursor += len(new_content)
            pos = cell.end
        parts.append(line[pos:])
        new_lines[line_no] = "".join(parts)
    new_cells.sort(key=lambda item: item[0])
    return Block(block.kind, tuple(new_lines), tuple(c for _, c in new_cells))


def _check_locations(doc: Document, replacements: Mapping[Location, str]):
    valid = {(b, c, s) for b, c, s, _ in doc.sentences()}
    unknown = sorted(set(replacements) - valid)
    if unknown:
        raise ReassemblyError(f"replacements for unknown locations: {unknown[:5]}")


def replace_sentences(doc: Document, replacements: Mapping[Location, str]) -> Document:
    """New Document with the given sentences replaced, geometry updated."""
    _check_locations(doc, replacements)

    def transform(b: int, c: int, content: str, spans: tuple[Span, ...]):
        return _splice_tracked(content, spans, lambda s: replacements.get((b, c, s)))

    new_blocks = tuple(
        _rebuild_block(block, b, transform) for b, block in enumerate(doc.blocks)
    )
    return dc_replace(doc, blocks=new_blocks)


def reassemble(
    doc: Document, replacements: Optional[Mapping[Location, str]] = None
) -> str:
    """Render the document back to text, substituting replaced sentences.

    With no (or identity) replacements the output is byte-identical to
    the parsed input. Replacement keys are (block, cell, sentence)
    locations; unknown locations raise.
    """
    if not replacements:
        if replacements is not None:
            _check_locations(doc, replacements)
        return doc.text()
    return replace_sentences(doc, replacements).text()


def transform_cells(
    doc: Document,
    fn: Callable[[str], str],
    resegment: bool = True,
    abbreviations: Optional[frozenset[str]] = None,
) -> Document:
    """Apply fn to every cell's full content (markers and pipes kept).

    Used for whole-text rewrites such as transliteration. New cell
    contents are re-segmented unless resegment is False.
    """
    if abbreviations is None and resegment:
        abbreviations = default_abbreviations()

    def transform(b: int, c: int, content: str, spans: tuple[Span, ...]):
        new_content = fn(content)
        new_spans = segment_text(new_content, abbreviations) if resegment else []
        return new_content, new_spans

    new_blocks = tuple(
        _rebuild_block(block, b, transform) for b, block in enumerate(doc.blocks)
    )
    return dc_replace(doc, blocks=new_blocks)
