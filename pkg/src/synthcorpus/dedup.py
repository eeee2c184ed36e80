"""Fuzzy deduplication: character shingles, MinHash sketches, banded LSH.

Signatures are 128 (configurable) 64-bit minima under seeded mixing of
a base content hash; banded LSH emits candidate pairs that agree on all
rows of at least one band (hit probability 1-(1-J^r)^b for true Jaccard
J), candidates are verified against the signature-estimated Jaccard,
and union-find resolves verified pairs into clusters that keep one
survivor each.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .corpus import Document, MinHashSignature, PROVENANCES

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB
U64 = np.uint64


@dataclass(frozen=True)
class DedupParams:
    shingle_w: int = 5
    k: int = 128
    bands: int = 16
    rows: int = 8
    verify_threshold: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.bands * self.rows != self.k:
            raise ValueError(
                f"bands*rows must equal k: {self.bands}*{self.rows} != {self.k}"
            )
        if self.shingle_w < 1:
            raise ValueError("shingle_w must be >= 1")


@dataclass(frozen=True)
class DupCluster:
    members: tuple[str, ...]  # sorted ids
    survivor: str


def shingle(text: str, w: int) -> frozenset[str]:
    """Character w-grams after whitespace collapsing and case folding.

    Text shorter than w yields the whole (normalized) text as a single
    shingle.
    """
    if w < 1:
        raise ValueError("shingle width must be >= 1")
    norm = " ".join(text.split()).casefold()
    if len(norm) < w:
        return frozenset({norm})
    return frozenset(norm[i : i + w] for i in range(len(norm) - w + 1))


def _splitmix64(z: np.ndarray) -> np.ndarray:
    z = (z + U64(GOLDEN_GAMMA)).astype(U64)
    z = (z ^ (z >> U64(30))) * U64(MIX_A)
    z = (z ^ (z >> U64(27))) * U64(MIX_B)
    return z ^ (z >> U64(31))


def _seed_stream(seed: int, k: int) -> np.ndarray:
    base = np.arange(1, k + 1, dtype=U64) * U64(GOLDEN_GAMMA)
    return _splitmix64(base + U64(seed & 0xFFFFFFFFFFFFFFFF))


def _base_hashes(shingles: Iterable[str]) -> np.ndarray:
    digests = [
        int.from_bytes(
            hashlib.blake2b(s.encode("utf-8"), digest_size=8).digest(), "big"
        )
        for s in shingles
    ]
    return np.array(digests, dtype=U64)


def minhash(shingles: frozenset[str], k: int = 128, seed: int = 0) -> MinHashSignature:
    """k per-seed minima over the shingle set; deterministic for a seed."""
    if not shingles:
        raise ValueError("cannot MinHash an empty shingle set")
    base = _base_hashes(shingles)  # (S,)
    seeds = _seed_stream(seed, k)  # (k,)
    mixed = _splitmix64(base[:, None] ^ seeds[None, :])  # (S, k)
    minima = mixed.min(axis=0)
    return MinHashSignature(values=tuple(int(v) for v in minima), seed=seed)


def estimate_jaccard(a: MinHashSignature, b: MinHashSignature) -> float:
    if a.seed != b.seed or len(a) != len(b):
        raise ValueError("signatures differ in seed or length")
    matches = sum(1 for x, y in zip(a.values, b.values) if x == y)
    return matches / len(a.values)


def exact_jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 1.0


def lsh_candidates(
    signatures: Mapping[str, MinHashSignature], bands: int, rows: int
) -> list[tuple[str, str]]:
    """Sorted unique id pairs agreeing on all rows of at least one band."""
    ids = sorted(signatures)
    if ids:
        k = len(signatures[ids[0]])
        if bands * rows != k:
            raise ValueError(f"bands*rows must equal k: {bands}*{rows} != {k}")
    pairs: set[tuple[str, str]] = set()
    for band in range(bands):
        buckets: dict[bytes, list[str]] = {}
        lo = band * rows
        hi = lo + rows
        for doc_id in ids:
            sig = signatures[doc_id]
            key = b"".join(v.to_bytes(8, "big") for v in sig.values[lo:hi])
            buckets.setdefault(key, []).append(doc_id)
        for members in buckets.values():
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    pairs.add((members[i], members[j]))
    return sorted(pairs)


class _UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        root = x
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while self.parent.get(x, x) != x:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:  # keep the smaller id as root for determinism
                ra, rb = rb, ra
            self.parent[rb] = ra


def _provenance_rank(provenance: Optional[str]) -> int:
    try:
        return PROVENANCES.index(provenance)
    except ValueError:
        return len(PROVENANCES)


def pick_survivor(
    members: Sequence[str], provenance: Optional[Mapping[str, str]] = None
) -> str:
    """Real-web beats synthetic; ties broken by smallest id."""
    provenance = provenance or {}
    return min(members, key=lambda m: (_provenance_rank(provenance.get(m)), m))


def resolve_clusters(
    candidates: Iterable[tuple[str, str]],
    signatures: Mapping[str, MinHashSignature],
    verify_threshold: float = 0.8,
    provenance: Optional[Mapping[str, str]] = None,
    exact_shingles: Optional[Mapping[str, frozenset[str]]] = None,
) -> list[DupCluster]:
    """Union verified candidate pairs; one survivor per cluster.

    Verification uses the signature-estimated Jaccard, or exact Jaccard
    over provided shingle sets when exact_shingles is given.
    """
    uf = _UnionFind()
    for a, b in sorted(set(candidates)):
        if exact_shingles is not None:
            score = exact_jaccard(exact_shingles[a], exact_shingles[b])
        else:
            score = estimate_jaccard(signatures[a], signatures[b])
        if score >= verify_threshold:
            uf.union(a, b)
    groups: dict[str, list[str]] = {}
    for doc_id in uf.parent:
        groups.setdefault(uf.find(doc_id), []).append(doc_id)
    clusters = []
    for root in sorted(groups):
        members = sorted(set(groups[root]) | {root})
        if len(members) < 2:
            continue
        clusters.append(
            DupCluster(tuple(members), pick_survivor(members, provenance))
        )
    return clusters


def signature_for_text(text: str, params: DedupParams) -> MinHashSignature:
    return minhash(shingle(text, params.shingle_w), params.k, params.seed)


@dataclass
class DedupReport:
    clusters: list[DupCluster]
    removed_ids: list[str]
    input_count: int
    output_count: int


def dedup_documents(
    docs: Sequence[Document],
    params: Optional[DedupParams] = None,
    exact_verify: bool = False,
) -> tuple[list[Document], DedupReport]:
    """Drop near-duplicates; survivors keep their computed signatures.

    Deterministic for a fixed seed: rerunning on the output removes
    nothing (signatures and candidate order are input-order free).
    """
    params = params or DedupParams()
    docs = list(docs)
    shingle_sets: dict[str, frozenset[str]] = {}
    signatures: dict[str, MinHashSignature] = {}
    provenance: dict[str, str] = {}
    out_docs: dict[str, Document] = {}
    for doc in docs:
        if doc.id in out_docs:
            raise ValueError(f"duplicate document id {doc.id!r} in dedup input")
        shingles = shingle(doc.content_text(), params.shingle_w)
        sig = minhash(shingles, params.k, params.seed)
        shingle_sets[doc.id] = shingles
        signatures[doc.id] = sig
        provenance[doc.id] = doc.provenance
        out_docs[doc.id] = doc.with_signature(sig)
    candidates = lsh_candidates(signatures, params.bands, params.rows)
    clusters = resolve_clusters(
        candidates,
        signatures,
        params.verify_threshold,
        provenance,
        exact_shingles=shingle_sets if exact_verify else None,
    )
    removed: set[str] = set()
    for cluster in clusters:
        removed.update(m for m in cluster.members if m != cluster.survivor)
    survivors = [out_docs[d.id] for d in docs if d.id not in removed]
    report = DedupReport(
        clusters=clusters,
        removed_ids=sorted(removed),
        input_count=len(docs),
        output_count=len(survivors),
    )
    return survivors, report
