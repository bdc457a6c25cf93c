"""Run a transformer encoder over sentences or skill phrases and write the
result as a skillex embedding store.

Words, not subwords, are the unit of the output: each corpus token gets one
vector, pooled from its subword pieces with the configured strategy. Special
marker tokens the tokenizer adds never contribute to pooling. Sentences whose
subword length exceeds the model limit are split into overlapping windows on
word boundaries and every word reads its vector from the window where it sits
most centrally.
"""

import logging
import os
import shutil
import tempfile
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from skillex.corpus import Dataset, Sentence
from skillex.embeddings import (
    EmbeddingStore,
    KIND_CONTEXTUAL,
    KIND_PHRASE,
    store_write,
)
from skillex.taxonomy import SkillInventory

log = logging.getLogger(__name__)

POOLINGS = ("first-subword", "mean-subword")

# subword tokens shared between consecutive windows of an oversized sentence
WINDOW_OVERLAP = 32


class ExportError(RuntimeError):
    """Model loading, alignment, or capacity problem during export."""


@dataclass
class ExportJob:
    model: str
    out: Path
    pooling: str = "first-subword"
    batch_size: int = 16

    def __post_init__(self):
        if self.pooling not in POOLINGS:
            raise ExportError(f"pooling must be one of {POOLINGS}, got {self.pooling!r}")
        if self.batch_size < 1:
            raise ExportError(f"batch size must be >= 1, got {self.batch_size}")
        self.out = Path(self.out)


@dataclass
class ExportReport:
    kind: str
    vectors: int
    dim: int
    sentences: int = 0
    phrases: int = 0
    fallbacks: int = 0
    split_sentences: int = 0

    def summary(self) -> str:
        parts = [f"wrote {self.vectors} vectors (dim {self.dim}, kind {self.kind})"]
        if self.kind == KIND_CONTEXTUAL:
            parts.append(f"for {self.sentences} sentences")
        else:
            parts.append(f"for {self.phrases} phrases")
        if self.split_sentences:
            parts.append(f"{self.split_sentences} split into windows")
        if self.fallbacks:
            parts.append(f"{self.fallbacks} alignment fallbacks")
        return ", ".join(parts)


def plan_windows(counts: list[int], capacity: int, overlap: int = WINDOW_OVERLAP):
    """Split word positions into windows whose subword totals fit capacity.

    Consecutive windows share up to `overlap` subword tokens, never splitting
    inside a word, and each step advances by at least one word.
    """
    if capacity < 1:
        raise ExportError(f"window capacity must be >= 1, got {capacity}")
    windows = []
    start = 0
    while True:
        total = 0
        end = start
        while end < len(counts) and total + counts[end] <= capacity:
            total += counts[end]
            end += 1
        if end == start:
            raise ExportError(
                f"word at position {start} needs {counts[start]} subword tokens, "
                f"over the window capacity of {capacity}"
            )
        windows.append((start, end))
        if end == len(counts):
            return windows
        back = end
        kept = 0
        while back > start + 1 and kept + counts[back - 1] <= overlap:
            kept += counts[back - 1]
            back -= 1
        start = back


def assign_windows(windows, n_words: int) -> list[int]:
    """For each word pick the window where it is most central; ties go to
    the earlier window."""
    owner = [-1] * n_words
    distance = [0.0] * n_words
    for w, (a, b) in enumerate(windows):
        center = (a + b - 1) / 2
        for i in range(a, b):
            d = abs(i - center)
            if owner[i] < 0 or d < distance[i]:
                owner[i] = w
                distance[i] = d
    missing = [i for i, w in enumerate(owner) if w < 0]
    if missing:
        raise ExportError(f"window plan leaves words uncovered: {missing[:5]}")
    return owner


class Encoder:
    """A loaded model plus tokenizer, exposing word-level vectors."""

    def __init__(self, model_id: str, pooling: str, batch_size: int = 16):
        if pooling not in POOLINGS:
            raise ExportError(f"pooling must be one of {POOLINGS}, got {pooling!r}")
        from transformers import AutoModel, AutoTokenizer

        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_id)
            self.model = AutoModel.from_pretrained(model_id)
        except Exception as exc:
            raise ExportError(f"cannot load model {model_id!r}: {exc}") from exc
        if not getattr(self.tokenizer, "is_fast", False):
            raise ExportError(
                f"tokenizer for {model_id!r} provides no word alignment; a fast "
                "tokenizer is required"
            )
        self.model.eval()
        self.pooling = pooling
        self.batch_size = batch_size
        self.dim = int(self.model.config.hidden_size)

        specials = self.tokenizer.num_special_tokens_to_add(pair=False)
        limit = int(self.tokenizer.model_max_length)
        positions = getattr(self.model.config, "max_position_embeddings", None)
        if positions is not None:
            limit = min(limit, int(positions))
        self.capacity = limit - specials
        if self.capacity < 1:
            raise ExportError(f"model {model_id!r} leaves no room for content tokens")

    def subword_counts(self, word_lists: list[list[str]]) -> list[list[int]]:
        out = []
        for chunk in _chunks(word_lists, self.batch_size):
            enc = self.tokenizer(chunk, is_split_into_words=True, add_special_tokens=False)
            for j, words in enumerate(chunk):
                counts = [0] * len(words)
                for wid in enc.word_ids(j):
                    if wid is not None:
                        counts[wid] += 1
                out.append(counts)
        return out

    def encode_word_lists(self, word_lists: list[list[str]]):
        """Per list: ({word index: float32 vector}, fallback vector).

        Words the tokenizer drops entirely are absent from the dict; the
        fallback is the mean over all content subword vectors of the list,
        zeros if there are none.
        """
        results = []
        for chunk in _chunks(word_lists, self.batch_size):
            enc = self.tokenizer(
                chunk,
                is_split_into_words=True,
                padding=True,
                return_tensors="pt",
            )
            with torch.inference_mode():
                hidden = self.model(**enc).last_hidden_state
            states = hidden.cpu().numpy().astype(np.float32, copy=False)
            for j in range(len(chunk)):
                by_word = defaultdict(list)
                content = []
                for pos, wid in enumerate(enc.word_ids(j)):
                    if wid is None:
                        continue  # [CLS], [SEP], padding
                    by_word[wid].append(states[j, pos])
                    content.append(states[j, pos])
                vectors = {}
                for wid, pieces in by_word.items():
                    if self.pooling == "first-subword":
                        vectors[wid] = np.asarray(pieces[0], dtype=np.float32)
                    else:
                        vectors[wid] = _mean_f64(pieces)
                fallback = _mean_f64(content) if content else np.zeros(self.dim, np.float32)
                results.append((vectors, fallback))
        return results


def _mean_f64(rows) -> np.ndarray:
    return np.stack(rows).astype(np.float64).mean(axis=0).astype(np.float32)


def _chunks(items, size):
    for i in range(0, len(items), size):
        yield items[i:i + size]


def _encode_units(encoder: Encoder, word_lists: list[list[str]]):
    """Window every word list to the model capacity and encode the pieces.

    Returns per input list: (per-word vector dict over the full list,
    fallback vectors aligned with the word's owning window, windows).
    """
    counts = encoder.subword_counts(word_lists)
    plans = [plan_windows(c, encoder.capacity) for c in counts]
    units = []
    for words, plan in zip(word_lists, plans):
        for a, b in plan:
            units.append(words[a:b])
    encoded = encoder.encode_word_lists(units)

    results = []
    cursor = 0
    for words, plan in zip(word_lists, plans):
        owner = assign_windows(plan, len(words))
        window_results = encoded[cursor:cursor + len(plan)]
        cursor += len(plan)
        vectors = {}
        fallbacks = []
        for i in range(len(words)):
            a, _ = plan[owner[i]]
            window_vectors, window_fallback = window_results[owner[i]]
            vec = window_vectors.get(i - a)
            if vec is not None:
                vectors[i] = vec
            fallbacks.append(window_fallback)
        results.append((vectors, fallbacks, plan))
    return results


def _atomic_store_write(store: EmbeddingStore, out: Path) -> None:
    # never leave a half-written store at the final path
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix=out.name + ".tmp-", dir=out.parent)
    try:
        store_write(store, tmp)
        if out.exists():
            shutil.rmtree(out)
        os.replace(tmp, out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def export_contextual(job: ExportJob, datasets: list[Dataset]) -> ExportReport:
    """One vector per (sentence id, token index) across all datasets."""
    sentences: list[Sentence] = []
    seen = set()
    for d in datasets:
        for s in d.sentences:
            if s.id in seen:
                raise ExportError(f"duplicate sentence id {s.id!r} across inputs")
            seen.add(s.id)
            sentences.append(s)
    if not sentences:
        raise ExportError("no sentences to export")

    encoder = Encoder(job.model, job.pooling, job.batch_size)
    word_lists = [[t.form for t in s.tokens] for s in sentences]
    encoded = _encode_units(encoder, word_lists)

    total = sum(len(s) for s in sentences)
    matrix = np.empty((total, encoder.dim), dtype=np.float32)
    index: dict = {}
    row = 0
    fallbacks = 0
    split_sentences = 0
    for sent, (vectors, window_fallbacks, plan) in zip(sentences, encoded):
        if len(plan) > 1:
            split_sentences += 1
        for i in range(len(sent)):
            vec = vectors.get(i)
            if vec is None:
                vec = window_fallbacks[i]
                fallbacks += 1
                log.warning("no subwords for token %d of %s, using window mean", i, sent.id)
            matrix[row] = vec
            index[(sent.id, i)] = row
            row += 1

    store = EmbeddingStore(
        kind=KIND_CONTEXTUAL,
        matrix=matrix,
        index=index,
        pooling=job.pooling,
        model=job.model,
    )
    _atomic_store_write(store, job.out)
    return ExportReport(
        kind=KIND_CONTEXTUAL,
        vectors=total,
        dim=encoder.dim,
        sentences=len(sentences),
        fallbacks=fallbacks,
        split_sentences=split_sentences,
    )


def export_phrases(job: ExportJob, inventory: SkillInventory) -> ExportReport:
    """One vector per preprocessed phrase, each encoded as its own sequence
    and pooled (mean) over its word vectors."""
    phrases = []
    seen = set()
    for e in inventory.entries:
        if e.phrase not in seen:
            seen.add(e.phrase)
            phrases.append(e.tokens)
    if not phrases:
        raise ExportError("no phrases to export")

    encoder = Encoder(job.model, job.pooling, job.batch_size)
    word_lists = [list(tokens) for tokens in phrases]
    encoded = _encode_units(encoder, word_lists)

    matrix = np.empty((len(phrases), encoder.dim), dtype=np.float32)
    index: dict = {}
    fallbacks = 0
    for row, (tokens, (vectors, window_fallbacks, _)) in enumerate(zip(phrases, encoded)):
        parts = []
        for i in range(len(tokens)):
            vec = vectors.get(i)
            if vec is None:
                vec = window_fallbacks[i]
                fallbacks += 1
                log.warning("no subwords for word %d of phrase %r", i, " ".join(tokens))
            parts.append(vec)
        matrix[row] = _mean_f64(parts)
        index[" ".join(tokens)] = row

    store = EmbeddingStore(
        kind=KIND_PHRASE,
        matrix=matrix,
        index=index,
        pooling=job.pooling,
        model=job.model,
    )
    _atomic_store_write(store, job.out)
    return ExportReport(
        kind=KIND_PHRASE,
        vectors=len(phrases),
        dim=encoder.dim,
        phrases=len(phrases),
        fallbacks=fallbacks,
    )
