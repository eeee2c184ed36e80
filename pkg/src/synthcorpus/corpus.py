"""Shared corpus document model and JSONL shard I/O.

A Document is an immutable, structure-preserving view of one text unit:
ordered blocks (paragraphs, headings, lists, tables), each holding raw
source lines plus cell spans, with optional sentence spans inside each
cell. Shards are UTF-8 JSONL files (plain or gzip), one canonical JSON
object per line, with a sidecar ``<shard>.manifest.json``.
"""

from __future__ import annotations

import gzip
import hashlib
import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional, Sequence

SCRIPTS = ("devanagari", "latin")
PROVENANCES = ("real-web", "synthetic-translated", "synthetic-transliterated")
BLOCK_KINDS = ("paragraph", "heading", "bullet_list", "numbered_list", "table")

MANIFEST_SUFFIX = ".manifest.json"


class ShardError(Exception):
    """Unrecoverable shard read/write problem (I/O, duplicate ids)."""


class DocumentError(ValueError):
    """A document violates the schema or its invariants."""


@dataclass(frozen=True)
class Span:
    """Half-open [start, end) character range inside a cell's content."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise DocumentError(f"invalid span [{self.start}, {self.end})")


@dataclass(frozen=True)
class Cell:
    """One translatable text region of a block.

    ``line`` indexes into the owning block's lines; ``None`` means the
    cell covers the block's lines joined with newlines (paragraphs).
    ``start``/``end`` locate the cell content inside that container and
    ``sentences`` are spans relative to the cell content itself.
    """

    line: Optional[int]
    start: int
    end: int
    sentences: tuple[Span, ...] = ()

    def content(self, lines: Sequence[str]) -> str:
        container = "\n".join(lines) if self.line is None else lines[self.line]
        return container[self.start : self.end]


@dataclass(frozen=True)
class Block:
    kind: str
    lines: tuple[str, ...]
    cells: tuple[Cell, ...]

    def __post_init__(self):
        if self.kind not in BLOCK_KINDS:
            raise DocumentError(f"unknown block kind {self.kind!r}")
        if self.kind == "table":
            widths = {len(row) for row in self.rows}
            if len(widths) > 1:
                raise DocumentError(f"ragged table: column counts {sorted(widths)}")

    @property
    def rows(self) -> list[list[str]]:
        """Cell contents grouped by source line (one row per line)."""
        if not self.cells:
            return []
        if self.cells[0].line is None:
            return [[self.cells[0].content(self.lines)]]
        grouped: dict[int, list[str]] = {}
        for cell in self.cells:
            grouped.setdefault(cell.line, []).append(cell.content(self.lines))
        return [grouped[i] for i in sorted(grouped)]

    @property
    def column_count(self) -> int:
        rows = self.rows
        return len(rows[0]) if rows else 0

    def text(self) -> str:
        return "\n".join(self.lines)


@dataclass(frozen=True)
class QualityScores:
    """Scores attached by the filtering stages that actually ran."""

    log_perplexity: Optional[float] = None  # nats/token under the filter LM
    roundtrip_similarity: Optional[float] = None

    def __post_init__(self):
        if self.log_perplexity is not None and self.log_perplexity < 0:
            raise DocumentError("log_perplexity must be >= 0")
        if self.roundtrip_similarity is not None and not (
            0.0 <= self.roundtrip_similarity <= 1.0
        ):
            raise DocumentError("roundtrip_similarity must be in [0, 1]")


@dataclass(frozen=True)
class MinHashSignature:
    """Fixed-length sketch of a shingle set under seeded 64-bit hashing."""

    values: tuple[int, ...]
    seed: int

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Document:
    id: str
    lang: str
    script: str
    provenance: str
    blocks: tuple[Block, ...]
    separators: tuple[str, ...]
    quality: Optional[QualityScores] = None
    signature: Optional[MinHashSignature] = None
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise DocumentError("document id must be nonempty")
        if self.script not in SCRIPTS:
            raise DocumentError(f"unknown script {self.script!r}")
        if self.provenance not in PROVENANCES:
            raise DocumentError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "synthetic-transliterated" and self.script != "latin":
            raise DocumentError("transliterated documents must be latin-script")
        if not self.blocks:
            raise DocumentError("document has no blocks")
        if len(self.separators) != len(self.blocks) + 1:
            raise DocumentError(
                f"{len(self.blocks)} blocks need {len(self.blocks) + 1} separators, "
                f"got {len(self.separators)}"
            )

    def text(self) -> str:
        """The document's raw text, byte-for-byte as parsed."""
        parts = [self.separators[0]]
        for block, sep in zip(self.blocks, self.separators[1:]):
            parts.append(block.text())
            parts.append(sep)
        return "".join(parts)

    def content_text(self) -> str:
        """Cell contents only (markers and table pipes stripped)."""
        pieces = []
        for block in self.blocks:
            for cell in block.cells:
                pieces.append(cell.content(block.lines))
        return "\n".join(pieces)

    def sentences(self) -> Iterator[tuple[int, int, int, str]]:
        """Yield (block_index, cell_index, sent_index, text) in reading order.

        cell_index counts cells within the block in reading order.
        """
        for b, block in enumerate(self.blocks):
            for c, cell in enumerate(block.cells):
                content = cell.content(block.lines)
                for s, span in enumerate(cell.sentences):
                    yield b, c, s, content[span.start : span.end]

    def with_quality(self, quality: QualityScores) -> "Document":
        return replace(self, quality=quality)

    def with_signature(self, signature: MinHashSignature) -> "Document":
        return replace(self, signature=signature)

    def to_dict(self) -> dict:
        d: dict = {
            "id": self.id,
            "lang": self.lang,
            "script": self.script,
            "provenance": self.provenance,
            "blocks": [
                {
                    "kind": b.kind,
                    "lines": list(b.lines),
                    "cells": [
                        {
                            "line": c.line,
                            "start": c.start,
                            "end": c.end,
                            "sentences": [[s.start, s.end] for s in c.sentences],
                        }
                        for c in b.cells
                    ],
                }
                for b in self.blocks
            ],
            "separators": list(self.separators),
            "meta": dict(self.meta),
        }
        if self.quality is not None:
            d["quality"] = {
                "log_perplexity": self.quality.log_perplexity,
                "roundtrip_similarity": self.quality.roundtrip_similarity,
            }
        if self.signature is not None:
            d["signature"] = {
                "seed": self.signature.seed,
                "values": list(self.signature.values),
            }
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Document":
        try:
            blocks = tuple(
                Block(
                    kind=b["kind"],
                    lines=tuple(b["lines"]),
                    cells=tuple(
                        Cell(
                            line=c["line"],
                            start=c["start"],
                            end=c["end"],
                            sentences=tuple(Span(s, e) for s, e in c["sentences"]),
                        )
                        for c in b["cells"]
                    ),
                )
                for b in d["blocks"]
            )
            quality = None
            if d.get("quality") is not None:
                quality = QualityScores(
                    log_perplexity=d["quality"].get("log_perplexity"),
                    roundtrip_similarity=d["quality"].get("roundtrip_similarity"),
                )
            signature = None
            if d.get("signature") is not None:
                signature = MinHashSignature(
                    values=tuple(d["signature"]["values"]),
                    seed=d["signature"]["seed"],
                )
            return cls(
                id=d["id"],
                lang=d["lang"],
                script=d["script"],
                provenance=d["provenance"],
                blocks=blocks,
                separators=tuple(d["separators"]),
                quality=quality,
                signature=signature,
                meta=dict(d.get("meta", {})),
            )
        except (KeyError, TypeError) as exc:
            raise DocumentError(f"bad document record: {exc}") from exc

    def canonical_json(self) -> str:
        return canonical_json(self.to_dict())


def canonical_json(obj) -> str:
    """Canonical single-line JSON: sorted keys, compact, UTF-8 verbatim."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def derive_id(source: str, offset) -> str:
    """Content-addressed id from a source name and position, stable across runs."""
    h = hashlib.blake2b(f"{source}:{offset}".encode("utf-8"), digest_size=10)
    return h.hexdigest()


@dataclass(frozen=True)
class LineError:
    """One malformed shard line, reported without stopping the stream."""

    line_no: int
    message: str


@dataclass(frozen=True)
class ShardManifest:
    shard: str  # path relative to the manifest's directory
    document_count: int
    provenance_counts: Mapping[str, int]
    token_counts: Mapping[str, int]  # tokenizer-id -> total tokens
    checksum: str  # sha256 of the shard file bytes
    stage_checksums: Mapping[str, str] = field(default_factory=dict)
    seed: Optional[int] = None

    def __post_init__(self):
        if any(v < 0 for v in self.token_counts.values()):
            raise DocumentError("token counts must be nonnegative")
        if sum(self.provenance_counts.values()) != self.document_count:
            raise DocumentError(
                "provenance breakdown does not sum to the document count"
            )

    def to_dict(self) -> dict:
        return {
            "shard": self.shard,
            "document_count": self.document_count,
            "provenance_counts": dict(self.provenance_counts),
            "token_counts": dict(self.token_counts),
            "checksum": self.checksum,
            "stage_checksums": dict(self.stage_checksums),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ShardManifest":
        return cls(
            shard=d["shard"],
            document_count=d["document_count"],
            provenance_counts=dict(d["provenance_counts"]),
            token_counts=dict(d["token_counts"]),
            checksum=d["checksum"],
            stage_checksums=dict(d.get("stage_checksums", {})),
            seed=d.get("seed"),
        )


def _open_text(path: Path, mode: str):
    if str(path).endswith(".gz"):
        if mode == "w":
            # mtime pinned to 0 so equal content gives equal bytes.
            gz = gzip.GzipFile(str(path), "wb", mtime=0)
            return io.TextIOWrapper(gz, encoding="utf-8")
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def read_shard(
    path,
    error_sink: Optional[list[LineError]] = None,
    strict: bool = False,
) -> Iterator[Document]:
    """Stream documents from a JSONL shard in file order.

    Malformed lines become LineError records in ``error_sink`` (1-based
    line numbers) and the stream continues; with ``strict`` they raise.
    """
    path = Path(path)
    with _open_text(path, "r") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                if not isinstance(raw, dict):
                    raise DocumentError("line is not a JSON object")
                doc = Document.from_dict(raw)
            except (json.JSONDecodeError, DocumentError) as exc:
                if strict:
                    raise ShardError(f"{path}:{line_no}: {exc}") from exc
                if error_sink is not None:
                    error_sink.append(LineError(line_no, str(exc)))
                continue
            yield doc


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_path(shard_path) -> Path:
    return Path(str(shard_path) + MANIFEST_SUFFIX)


def write_shard(
    docs: Iterable[Document],
    path,
    tokenizers: Optional[Mapping[str, "object"]] = None,
    seed: Optional[int] = None,
    stage_checksums: Optional[Mapping[str, str]] = None,
) -> ShardManifest:
    """Write documents as canonical JSONL and a sidecar manifest.

    ``tokenizers`` maps tokenizer-id -> tokenizer with a ``tokenize``
    method; token totals are computed over each document's content text.
    Duplicate document ids within the shard raise ShardError.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    seen: set[str] = set()
    provenance_counts: dict[str, int] = {}
    token_counts: dict[str, int] = {t: 0 for t in (tokenizers or {})}
    count = 0
    with _open_text(path, "w") as fh:
        for doc in docs:
            if doc.id in seen:
                raise ShardError(f"duplicate document id {doc.id!r} in {path}")
            seen.add(doc.id)
            provenance_counts[doc.provenance] = (
                provenance_counts.get(doc.provenance, 0) + 1
            )
            if tokenizers:
                content = doc.content_text()
                for tok_id, tok in tokenizers.items():
                    token_counts[tok_id] += len(tok.tokenize(content))
            fh.write(doc.canonical_json())
            fh.write("\n")
            count += 1
    manifest = ShardManifest(
        shard=path.name,
        document_count=count,
        provenance_counts=provenance_counts,
        token_counts=token_counts,
        checksum=sha256_file(path),
        stage_checksums=dict(stage_checksums or {}),
        seed=seed,
    )
    with open(manifest_path(path), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest.to_dict(), ensure_ascii=False, sort_keys=True, indent=2))
        fh.write("\n")
    return manifest


def read_manifest(shard_path) -> ShardManifest:
    mpath = manifest_path(shard_path)
    if not mpath.exists():
        raise ShardError(f"missing manifest {mpath}")
    with open(mpath, encoding="utf-8") as fh:
        return ShardManifest.from_dict(json.load(fh))
