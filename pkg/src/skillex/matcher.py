"""Candidate-to-skill matching by cosine similarity.

Per sentence, every n-gram candidate is pooled to one vector and scored
against every skill representation row.  Single-span mode keeps the global
best candidate when its score clears tau (strictly); multi-span mode keeps
greedily by descending score, suppressing overlaps.

Numerical discipline: scores are computed in float64 as
``dot(c, s) / sqrt(dot(c, c) * dot(s, s))`` using elementwise multiply and
numpy's pairwise-summed reductions.  BLAS matmul kernels accumulate in a
different order and do not reproduce these values bitwise, so they are
deliberately avoided; any reimplementation (tests, oracles) that follows the
formula above with float64 accumulation gets identical floats.
"""

from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from skillex.baselines import PredictedSpan, Predictions
from skillex.candidates import CandidateSpan, generate_ngrams
from skillex.corpus import Dataset, Sentence, Span
from skillex.embeddings import (
    KIND_CONTEXTUAL,
    KIND_PHRASE,
    CoverageError,
    EmbeddingStore,
    SkillRepTable,
    embed_candidate,
)
from skillex.evaluation import EvalReport, evaluate_loose, evaluate_strict

logger = logging.getLogger(__name__)

MODES = ("single-span", "multi-span")
ENCODINGS = ("contextual", "isolated")


class _ZeroNormCounter:
    """Counts (candidate, skill) pairs whose cosine was forced to 0 by a
    zero-norm side.  Warn once, count always."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0
        self._warned = False

    def add(self, n: int):
        if n <= 0:
            return
        with self._lock:
            self._count += n
            if not self._warned:
                logger.warning("zero-norm vector in cosine; score forced to 0")
                self._warned = True

    @property
    def count(self) -> int:
        return self._count

    def reset(self):
        with self._lock:
            self._count = 0
            self._warned = False


zero_norm_events = _ZeroNormCounter()


@dataclass(frozen=True)
class MatchConfig:
    tau: float = 0.8
    n_max: int = 4
    mode: str = "single-span"
    candidate_encoding: str = "contextual"

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be positive, got {self.n_max}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.candidate_encoding not in ENCODINGS:
            raise ValueError(f"candidate_encoding must be one of {ENCODINGS}")


def cos_sim(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity with float64 accumulation, clamped to [-1, 1].

    A zero-norm side yields 0.0 (counted).  Self-similarity of a nonzero
    vector is exactly 1.0 because the denominator is sqrt(dot(a,a)*dot(b,b)).
    """
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    a64 = a.astype(np.float64)
    b64 = b.astype(np.float64)
    sa = (a64 * a64).sum()
    sb = (b64 * b64).sum()
    if sa == 0.0 or sb == 0.0:
        zero_norm_events.add(1)
        return 0.0
    return float(min(1.0, max(-1.0, (a64 * b64).sum() / np.sqrt(sa * sb))))


@dataclass
class _Prepared:
    matrix64: np.ndarray
    sq_norms: np.ndarray


def _prepare(table: SkillRepTable) -> _Prepared:
    matrix64 = table.matrix.astype(np.float64)
    sq_norms = (matrix64 * matrix64).sum(axis=1)
    return _Prepared(matrix64=matrix64, sq_norms=sq_norms)


def _candidate_vector(
    cand: CandidateSpan,
    sentence: Sentence,
    store: EmbeddingStore,
    cfg: MatchConfig,
    phrase_store: EmbeddingStore | None,
) -> np.ndarray:
    if cfg.candidate_encoding == "contextual":
        return embed_candidate(cand, sentence, store)
    phrase = " ".join(t.form.lower() for t in sentence.tokens[cand.start:cand.end])
    if phrase_store is None:
        raise CoverageError("isolated candidate encoding needs a phrase store")
    return phrase_store.vector(phrase)


def _score_sentence(
    sentence: Sentence,
    table: SkillRepTable,
    store: EmbeddingStore,
    cfg: MatchConfig,
    prep: _Prepared,
    phrase_store: EmbeddingStore | None,
) -> list[PredictedSpan]:
    """Best-scoring skill for every candidate span, in candidate order."""
    if len(table) == 0:
        return []
    scored = []
    for cand in generate_ngrams(sentence, cfg.n_max):
        g64 = _candidate_vector(cand, sentence, store, cfg, phrase_store).astype(np.float64)
        gsq = (g64 * g64).sum()
        num = (prep.matrix64 * g64).sum(axis=1)
        mask = (prep.sq_norms > 0.0) & (gsq > 0.0)
        sims = np.zeros(len(num), dtype=np.float64)
        np.divide(num, np.sqrt(prep.sq_norms * gsq), out=sims, where=mask)
        np.minimum(sims, 1.0, out=sims)
        np.maximum(sims, -1.0, out=sims)
        zero_norm_events.add(int((~mask).sum()))
        best = int(np.argmax(sims))
        scored.append(
            PredictedSpan(
                span=Span(cand.start, cand.end),
                skill_id=table.skill_ids[best],
                score=float(sims[best]),
            )
        )
    return scored


def _select(scored: list[PredictedSpan], tau: float, mode: str) -> tuple[PredictedSpan, ...]:
    if mode == "single-span":
        best = None
        # Candidate order is (start, length) ascending, so on equal scores
        # the earlier, shorter span wins.
        for p in scored:
            if p.score > tau and (best is None or p.score > best.score):
                best = p
        return (best,) if best is not None else ()
    eligible = sorted(
        (p for p in scored if p.score > tau),
        key=lambda p: (-p.score, p.span.start, p.span.end - p.span.start),
    )
    chosen: list[PredictedSpan] = []
    for p in eligible:
        if not any(p.span.overlaps(c.span) for c in chosen):
            chosen.append(p)
    return tuple(sorted(chosen, key=lambda p: p.span.start))


def match_sentence(
    sentence: Sentence,
    table: SkillRepTable,
    store: EmbeddingStore,
    cfg: MatchConfig,
    phrase_store: EmbeddingStore | None = None,
) -> list[PredictedSpan]:
    """Predicted spans for one sentence under the given config."""
    prep = _prepare(table)
    scored = _score_sentence(sentence, table, store, cfg, prep, phrase_store)
    return list(_select(scored, cfg.tau, cfg.mode))


def _score_corpus(
    dataset: Dataset,
    table: SkillRepTable,
    store: EmbeddingStore,
    cfg: MatchConfig,
    workers: int,
    phrase_store: EmbeddingStore | None,
) -> list[list[PredictedSpan]]:
    prep = _prepare(table)

    def job(sent: Sentence) -> list[PredictedSpan]:
        return _score_sentence(sent, table, store, cfg, prep, phrase_store)

    if workers <= 1:
        return [job(s) for s in dataset.sentences]
    # Scores are per-sentence and merged in input order, so the worker count
    # cannot change the output.
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, dataset.sentences))


def match_corpus(
    dataset: Dataset,
    table: SkillRepTable,
    store: EmbeddingStore,
    cfg: MatchConfig,
    workers: int = 1,
    phrase_store: EmbeddingStore | None = None,
) -> Predictions:
    scored = _score_corpus(dataset, table, store, cfg, workers, phrase_store)
    spans = {
        sent.id: _select(s, cfg.tau, cfg.mode)
        for sent, s in zip(dataset.sentences, scored)
    }
    return Predictions(method=table.method.lower(), spans=spans)


@dataclass(frozen=True)
class SweepPoint:
    tau: float
    strict: EvalReport
    loose: EvalReport
    predicted_spans: int
    sentences_with_predictions: int

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "strict": self.strict.to_json(),
            "loose": self.loose.to_json(),
            "predicted_spans": self.predicted_spans,
            "sentences_with_predictions": self.sentences_with_predictions,
        }


def sweep(
    dataset: Dataset,
    table: SkillRepTable,
    store: EmbeddingStore,
    taus: list[float],
    gold: Dataset,
    cfg: MatchConfig,
    workers: int = 1,
    phrase_store: EmbeddingStore | None = None,
) -> list[SweepPoint]:
    """Evaluate a tau grid.  Candidates are scored once; each threshold only
    re-runs selection, which equals an independent run at that tau."""
    if not taus:
        raise ValueError("empty tau grid")
    if any(not 0.0 <= t <= 1.0 for t in taus):
        raise ValueError("taus must lie in [0, 1]")
    if any(a >= b for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must be strictly ascending")
    scored = _score_corpus(dataset, table, store, cfg, workers, phrase_store)
    points = []
    for tau in taus:
        spans = {
            sent.id: _select(s, tau, cfg.mode)
            for sent, s in zip(dataset.sentences, scored)
        }
        preds = Predictions(method=table.method.lower(), spans=spans)
        points.append(
            SweepPoint(
                tau=tau,
                strict=evaluate_strict(preds, gold),
                loose=evaluate_loose(preds, gold),
                predicted_spans=preds.n_spans(),
                sentences_with_predictions=preds.n_sentences_with_spans(),
            )
        )
    return points
