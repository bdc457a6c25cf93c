"""Embedding stores, idf weighting, and skill representation tables.

Vectors are float32 at rest; every accumulation (means, weighted sums) runs
in float64 before rounding back.  A store is a directory with three files:

* ``meta.json``: magic, version, dim, kind, count, pooling, model
* ``index.jsonl``: one key per row, ``{"phrase": str}`` or ``{"sid": str, "tid": int}``
* ``vectors.f32``: little-endian float32, row-major count x dim

Two store kinds exist: ``phrase`` (one vector per skill phrase, encoded out
of context) and ``contextual-tokens`` (one vector per corpus token in its
sentence).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from skillex.corpus import Dataset, Sentence
from skillex.taxonomy import SkillInventory

logger = logging.getLogger(__name__)

MAGIC = "SKEMB"
FORMAT_VERSION = 1
KIND_PHRASE = "phrase"
KIND_CONTEXTUAL = "contextual-tokens"

META_FILE = "meta.json"
INDEX_FILE = "index.jsonl"
VECTORS_FILE = "vectors.f32"


class StoreFormatError(ValueError):
    """Raised when a store directory fails validation."""


class CoverageError(ValueError):
    """Raised when a store lacks a vector the pipeline needs."""


@dataclass
class EmbeddingStore:
    kind: str
    matrix: np.ndarray
    index: dict
    pooling: str = "none"
    model: str = "unknown"

    def __post_init__(self):
        if self.kind not in (KIND_PHRASE, KIND_CONTEXTUAL):
            raise StoreFormatError(f"unknown store kind {self.kind!r}")
        if self.matrix.ndim != 2:
            raise StoreFormatError(f"matrix must be 2-d, got shape {self.matrix.shape}")
        if self.matrix.dtype != np.float32:
            raise StoreFormatError(f"matrix must be float32, got {self.matrix.dtype}")
        if self.matrix.shape[1] < 1:
            raise StoreFormatError("vector dimension must be positive")
        if len(self.index) != self.matrix.shape[0]:
            raise StoreFormatError(
                f"index has {len(self.index)} keys for {self.matrix.shape[0]} rows"
            )
        rows = sorted(self.index.values())
        if rows != list(range(len(rows))):
            raise StoreFormatError("index rows must cover 0..count-1 exactly once")
        if not np.isfinite(self.matrix).all():
            raise StoreFormatError("non-finite values in vectors")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return self.matrix.shape[0]

    def __contains__(self, key) -> bool:
        return key in self.index

    def vector(self, key) -> np.ndarray:
        row = self.index.get(key)
        if row is None:
            raise CoverageError(f"store has no vector for key {key!r}")
        return self.matrix[row]

    def token_vector(self, sentence_id: str, position: int) -> np.ndarray:
        if self.kind != KIND_CONTEXTUAL:
            raise StoreFormatError(f"token lookup on a {self.kind} store")
        return self.vector((sentence_id, position))

    def covers(self, sentence: Sentence) -> bool:
        return all((sentence.id, i) in self.index for i in range(len(sentence)))


def store_write(store: EmbeddingStore, path: str | Path) -> None:
    """Write a store directory; vectors round-trip bitwise."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    meta = {
        "magic": MAGIC,
        "version": FORMAT_VERSION,
        "dim": store.dim,
        "kind": store.kind,
        "count": len(store),
        "pooling": store.pooling,
        "model": store.model,
    }
    (path / META_FILE).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    by_row = sorted(store.index.items(), key=lambda kv: kv[1])
    with (path / INDEX_FILE).open("w", encoding="utf-8") as fh:
        for key, _ in by_row:
            if store.kind == KIND_PHRASE:
                fh.write(json.dumps({"phrase": key}, ensure_ascii=False) + "\n")
            else:
                sid, tid = key
                fh.write(json.dumps({"sid": sid, "tid": tid}, ensure_ascii=False) + "\n")
    matrix = np.ascontiguousarray(store.matrix, dtype="<f4")
    (path / VECTORS_FILE).write_bytes(matrix.tobytes(order="C"))


def store_read(path: str | Path) -> EmbeddingStore:
    """Read and validate a store directory."""
    path = Path(path)
    try:
        meta = json.loads((path / META_FILE).read_text(encoding="utf-8"))
    except OSError as exc:
        raise StoreFormatError(f"cannot read {path / META_FILE}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StoreFormatError(f"{path / META_FILE}: invalid JSON: {exc}") from exc

    if meta.get("magic") != MAGIC:
        raise StoreFormatError(f"{path}: magic mismatch, got {meta.get('magic')!r}")
    if meta.get("version") != FORMAT_VERSION:
        raise StoreFormatError(f"{path}: unsupported version {meta.get('version')!r}")
    kind = meta.get("kind")
    if kind not in (KIND_PHRASE, KIND_CONTEXTUAL):
        raise StoreFormatError(f"{path}: unknown kind {kind!r}")
    dim, count = meta.get("dim"), meta.get("count")
    if not isinstance(dim, int) or dim < 1 or not isinstance(count, int) or count < 0:
        raise StoreFormatError(f"{path}: bad dim/count in meta")

    index: dict = {}
    try:
        lines = (path / INDEX_FILE).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise StoreFormatError(f"cannot read {path / INDEX_FILE}: {exc}") from exc
    if len(lines) != count:
        raise StoreFormatError(f"{path}: index has {len(lines)} rows, meta says {count}")
    for row, line in enumerate(lines):
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StoreFormatError(f"{path / INDEX_FILE}:{row + 1}: invalid JSON") from exc
        if kind == KIND_PHRASE:
            key = entry.get("phrase")
            if not isinstance(key, str):
                raise StoreFormatError(f"{path / INDEX_FILE}:{row + 1}: missing phrase")
        else:
            sid, tid = entry.get("sid"), entry.get("tid")
            if not isinstance(sid, str) or not isinstance(tid, int):
                raise StoreFormatError(f"{path / INDEX_FILE}:{row + 1}: missing sid/tid")
            key = (sid, tid)
        if key in index:
            raise StoreFormatError(f"{path / INDEX_FILE}:{row + 1}: duplicate key {key!r}")
        index[key] = row

    try:
        payload = (path / VECTORS_FILE).read_bytes()
    except OSError as exc:
        raise StoreFormatError(f"cannot read {path / VECTORS_FILE}: {exc}") from exc
    expected = count * dim * 4
    if len(payload) != expected:
        raise StoreFormatError(
            f"{path / VECTORS_FILE}: payload is {len(payload)} bytes, expected {expected}"
        )
    matrix = np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()
    return EmbeddingStore(
        kind=kind,
        matrix=matrix,
        index=index,
        pooling=meta.get("pooling", "none"),
        model=meta.get("model", "unknown"),
    )


# --- idf --------------------------------------------------------------------


@dataclass
class IdfTable:
    """Token idf over a reference corpus: idf(t) = -log(n_t / N)."""

    total: int
    counts: dict[str, int]
    unseen_queries: int = 0

    def __post_init__(self):
        if self.total < 1:
            raise ValueError("idf reference corpus is empty")
        if sum(self.counts.values()) != self.total:
            raise ValueError("idf counts do not sum to the corpus size")

    def idf(self, token: str) -> float:
        count = self.counts.get(token.lower())
        if count is None:
            # Unseen tokens get the weight of a count-one token in a corpus
            # one token larger, the highest weight the table hands out.
            self.unseen_queries += 1
            return -math.log(1.0 / (self.total + 1))
        return -math.log(count / self.total)


def compute_idf(*datasets: Dataset) -> IdfTable:
    """Count lowercased token forms across the given splits.

    Pass the splits the matcher will run on except test; idf is corpus
    statistics, not supervision, but test stays held out.
    """
    counts: Counter = Counter()
    for dataset in datasets:
        for sent in dataset.sentences:
            for tok in sent.tokens:
                counts[tok.form.lower()] += 1
    if not counts:
        raise ValueError("no tokens to count")
    return IdfTable(total=sum(counts.values()), counts=dict(counts))


def write_idf(table: IdfTable, path: str | Path) -> None:
    payload = {"total": table.total, "counts": dict(sorted(table.counts.items()))}
    Path(path).write_text(json.dumps(payload, ensure_ascii=False) + "\n", encoding="utf-8")


def read_idf(path: str | Path) -> IdfTable:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return IdfTable(total=payload["total"], counts=payload["counts"])


# --- skill representation tables ---------------------------------------------


@dataclass
class SkillRepTable:
    """One vector per representable skill, plus how each row came to be."""

    method: str
    skill_ids: tuple[str, ...]
    matrix: np.ndarray
    context_counts: dict[str, int] = field(default_factory=dict)
    fallback_ids: frozenset = frozenset()
    unrepresentable: tuple[str, ...] = ()

    def __post_init__(self):
        if self.method not in ("ISO", "AOC", "WSE"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.matrix.dtype != np.float32:
            raise ValueError(f"table matrix must be float32, got {self.matrix.dtype}")
        if len(self.skill_ids) != self.matrix.shape[0]:
            raise ValueError("skill_ids and matrix rows disagree")
        if set(self.skill_ids) & set(self.unrepresentable):
            raise ValueError("a skill cannot be both represented and unrepresentable")

    def __len__(self):
        return len(self.skill_ids)

    def row(self, skill_id: str) -> np.ndarray:
        try:
            return self.matrix[self.skill_ids.index(skill_id)]
        except ValueError:
            raise KeyError(skill_id) from None


def _mean_rows(rows: list[np.ndarray]) -> np.ndarray:
    return np.stack(rows).astype(np.float64).mean(axis=0)


def find_occurrences(
    inventory: SkillInventory, datasets: list[Dataset]
) -> dict[str, list[tuple[Sentence, int]]]:
    """Locate every corpus occurrence of each inventory phrase, as
    (sentence, start) pairs, matching on lowercased forms."""
    by_tokens = inventory.by_tokens()
    lengths = sorted({len(k) for k in by_tokens})
    hits: dict[str, list[tuple[Sentence, int]]] = {e.id: [] for e in inventory.entries}
    for dataset in datasets:
        for sent in dataset.sentences:
            forms = tuple(t.form.lower() for t in sent.tokens)
            for n in lengths:
                if n > len(forms):
                    break
                for start in range(len(forms) - n + 1):
                    entry = by_tokens.get(forms[start:start + n])
                    if entry is not None:
                        hits[entry.id].append((sent, start))
    return hits


def _sentence_rows(store: EmbeddingStore, sent: Sentence, start: int, end: int) -> list[np.ndarray]:
    try:
        return [store.token_vector(sent.id, i) for i in range(start, end)]
    except CoverageError as exc:
        raise CoverageError(f"sentence {sent.id!r}: {exc}") from exc


def embed_candidate(candidate, sentence: Sentence, store: EmbeddingStore) -> np.ndarray:
    """Mean of the contextual token vectors under the candidate span."""
    rows = _sentence_rows(store, sentence, candidate.start, candidate.end)
    return _mean_rows(rows).astype(np.float32)


def build_iso(inventory: SkillInventory, phrase_store: EmbeddingStore) -> SkillRepTable:
    """Represent each skill by its out-of-context phrase vector, verbatim."""
    if phrase_store.kind != KIND_PHRASE:
        raise StoreFormatError("build_iso needs a phrase store")
    ids, rows, missing = [], [], []
    for entry in inventory.entries:
        if entry.phrase in phrase_store:
            ids.append(entry.id)
            rows.append(phrase_store.vector(entry.phrase))
        else:
            missing.append(entry.id)
    if missing:
        logger.warning("%d skill(s) missing from the phrase store", len(missing))
    matrix = np.stack(rows) if rows else np.zeros((0, phrase_store.dim), dtype=np.float32)
    return SkillRepTable(
        method="ISO",
        skill_ids=tuple(ids),
        matrix=matrix.astype(np.float32, copy=True),
        unrepresentable=tuple(missing),
    )


def _build_contextual(
    method: str,
    inventory: SkillInventory,
    ctx_store: EmbeddingStore,
    datasets: list[Dataset],
    occ_vector,
    phrase_store: EmbeddingStore | None,
) -> SkillRepTable:
    if ctx_store.kind != KIND_CONTEXTUAL:
        raise StoreFormatError(f"build_{method.lower()} needs a contextual-tokens store")
    occurrences = find_occurrences(inventory, datasets)
    ids, rows, missing, fallback = [], [], [], []
    context_counts: dict[str, int] = {}
    for entry in inventory.entries:
        occs = occurrences[entry.id]
        if occs:
            per_occ = []
            for sent, start in occs:
                vecs = _sentence_rows(ctx_store, sent, start, start + len(entry.tokens))
                per_occ.append(occ_vector(entry, vecs))
            ids.append(entry.id)
            rows.append(_mean_rows(per_occ).astype(np.float32))
            context_counts[entry.id] = len(occs)
        elif phrase_store is not None and entry.phrase in phrase_store:
            # No corpus occurrence to contextualize; fall back to the
            # out-of-context phrase vector rather than dropping the skill.
            ids.append(entry.id)
            rows.append(phrase_store.vector(entry.phrase))
            context_counts[entry.id] = 0
            fallback.append(entry.id)
        else:
            missing.append(entry.id)
    if missing:
        logger.warning("%s: %d skill(s) unrepresentable (no occurrence, no phrase vector)",
                       method, len(missing))
    matrix = np.stack(rows) if rows else np.zeros((0, ctx_store.dim), dtype=np.float32)
    return SkillRepTable(
        method=method,
        skill_ids=tuple(ids),
        matrix=matrix.astype(np.float32, copy=True),
        context_counts=context_counts,
        fallback_ids=frozenset(fallback),
        unrepresentable=tuple(missing),
    )


def build_aoc(
    inventory: SkillInventory,
    ctx_store: EmbeddingStore,
    datasets: list[Dataset],
    phrase_store: EmbeddingStore | None = None,
) -> SkillRepTable:
    """Average-of-contexts: per occurrence, average the contextual vectors
    over the phrase's positions; the row is the mean over occurrences."""

    def occ_vector(entry, vecs):
        return _mean_rows(vecs)

    return _build_contextual("AOC", inventory, ctx_store, datasets, occ_vector, phrase_store)


def build_wse(
    inventory: SkillInventory,
    ctx_store: EmbeddingStore,
    idf: IdfTable,
    datasets: list[Dataset],
    phrase_store: EmbeddingStore | None = None,
) -> SkillRepTable:
    """Weighted-sum encoding: per occurrence, sum idf(token) * vector over the
    phrase's positions; the row is the mean over occurrences.  Rare tokens
    dominate, which is the point: "analysis" alone says little."""

    def occ_vector(entry, vecs):
        acc = np.zeros(ctx_store.dim, dtype=np.float64)
        for tok, vec in zip(entry.tokens, vecs):
            acc += idf.idf(tok) * vec.astype(np.float64)
        return acc

    return _build_contextual("WSE", inventory, ctx_store, datasets, occ_vector, phrase_store)


def table_write(table: SkillRepTable, inventory: SkillInventory, path: str | Path) -> None:
    """Persist a representation table as a phrase store plus provenance JSON."""
    path = Path(path)
    phrase_of = {e.id: e.phrase for e in inventory.entries}
    index = {phrase_of[sid]: row for row, sid in enumerate(table.skill_ids)}
    store = EmbeddingStore(
        kind=KIND_PHRASE,
        matrix=table.matrix,
        index=index,
        pooling=table.method.lower(),
        model=f"skill-table:{table.method}",
    )
    store_write(store, path)
    provenance = {
        "method": table.method,
        "skill_ids": list(table.skill_ids),
        "context_counts": {k: table.context_counts[k] for k in sorted(table.context_counts)},
        "fallback_ids": sorted(table.fallback_ids),
        "unrepresentable": list(table.unrepresentable),
    }
    (path / "provenance.json").write_text(
        json.dumps(provenance, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )


def table_read(path: str | Path) -> SkillRepTable:
    path = Path(path)
    store = store_read(path)
    try:
        provenance = json.loads((path / "provenance.json").read_text(encoding="utf-8"))
    except OSError as exc:
        raise StoreFormatError(f"missing provenance.json in {path}: {exc}") from exc
    skill_ids = provenance["skill_ids"]
    if len(skill_ids) != len(store):
        raise StoreFormatError(f"{path}: provenance lists {len(skill_ids)} ids for {len(store)} rows")
    return SkillRepTable(
        method=provenance["method"],
        skill_ids=tuple(skill_ids),
        matrix=store.matrix,
        context_counts={k: int(v) for k, v in provenance.get("context_counts", {}).items()},
        fallback_ids=frozenset(provenance.get("fallback_ids", [])),
        unrepresentable=tuple(provenance.get("unrepresentable", [])),
    )


# --- deterministic hash provider ---------------------------------------------


class HashEmbeddings:
    """Deterministic stand-in for a real encoder.

    Each key is hashed to a Philox key, which generates the vector; equal
    (key, seed, dim) always yields identical bytes, on any platform.  Useful
    for exercising the pipeline without a model.
    """

    def __init__(self, dim: int, seed: int = 0):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.seed = seed
        self._hash_key = seed.to_bytes(8, "little", signed=True)

    @property
    def model_id(self) -> str:
        return f"hash(dim={self.dim},seed={self.seed})"

    def vector(self, key: str) -> np.ndarray:
        digest = hashlib.blake2b(key.encode("utf-8"), digest_size=16, key=self._hash_key).digest()
        words = np.frombuffer(digest, dtype="<u8")
        gen = np.random.Generator(np.random.Philox(key=words))
        return gen.uniform(-1.0, 1.0, self.dim).astype(np.float32)

    def token_vector(self, sentence_id: str, position: int, form: str) -> np.ndarray:
        return self.vector(f"ctx\x1f{sentence_id}\x1f{position}\x1f{form}")

    def phrase_vector(self, phrase: str) -> np.ndarray:
        return self.vector(f"phrase\x1f{phrase}")

    def contextual_store(self, *datasets: Dataset) -> EmbeddingStore:
        index: dict = {}
        rows = []
        for dataset in datasets:
            for sent in dataset.sentences:
                for i, tok in enumerate(sent.tokens):
                    key = (sent.id, i)
                    if key in index:
                        raise ValueError(f"duplicate sentence id {sent.id!r} across datasets")
                    index[key] = len(rows)
                    rows.append(self.token_vector(sent.id, i, tok.form))
        matrix = np.stack(rows) if rows else np.zeros((0, self.dim), dtype=np.float32)
        return EmbeddingStore(
            kind=KIND_CONTEXTUAL, matrix=matrix, index=index, pooling="hash", model=self.model_id
        )

    def phrase_store(self, phrases) -> EmbeddingStore:
        index: dict = {}
        rows = []
        for phrase in phrases:
            if phrase in index:
                continue
            index[phrase] = len(rows)
            rows.append(self.phrase_vector(phrase))
        matrix = np.stack(rows) if rows else np.zeros((0, self.dim), dtype=np.float32)
        return EmbeddingStore(
            kind=KIND_PHRASE, matrix=matrix, index=index, pooling="hash", model=self.model_id
        )
