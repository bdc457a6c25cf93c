"""Surface-form baselines and the prediction container shared with the matcher.

Predictions are serialized as JSONL, one sentence per line:
``{"id": ..., "spans": [{"start", "end", "label", "skill_id"?, "score"?}]}``.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from skillex.corpus import Dataset, Sentence, Span
from skillex.taxonomy import SkillInventory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PredictedSpan:
    span: Span
    skill_id: str | None = None
    score: float | None = None

    def __post_init__(self):
        if self.score is not None and not -1.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [-1, 1]")


@dataclass(frozen=True)
class Predictions:
    """Per-sentence predicted spans, keyed by sentence id."""

    method: str
    spans: dict[str, tuple[PredictedSpan, ...]]

    def __post_init__(self):
        for sid, preds in self.spans.items():
            ordered = sorted(preds, key=lambda p: (p.span.start, p.span.end))
            for a, b in zip(ordered, ordered[1:]):
                if a.span.overlaps(b.span):
                    raise ValueError(f"sentence {sid!r}: overlapping predictions {a.span} / {b.span}")

    def n_spans(self) -> int:
        return sum(len(v) for v in self.spans.values())

    def n_sentences_with_spans(self) -> int:
        return sum(1 for v in self.spans.values() if v)


def resolve_overlaps(candidates: list[PredictedSpan]) -> tuple[PredictedSpan, ...]:
    """Keep a non-overlapping subset, preferring longer spans, then earlier
    ones.  Output is ordered by start."""
    chosen: list[PredictedSpan] = []
    for cand in sorted(candidates, key=lambda p: (-(p.span.end - p.span.start), p.span.start)):
        if not any(cand.span.overlaps(c.span) for c in chosen):
            chosen.append(cand)
    return tuple(sorted(chosen, key=lambda p: p.span.start))


def _match_sequences(
    dataset: Dataset,
    method: str,
    table: dict[tuple[str, ...], str],
    key_of: Callable[[Sentence], tuple[str, ...]],
) -> Predictions:
    max_len = max(len(k) for k in table)
    out: dict[str, tuple[PredictedSpan, ...]] = {}
    for sent in dataset.sentences:
        key = key_of(sent)
        found = []
        for n in range(1, min(max_len, len(key)) + 1):
            for start in range(len(key) - n + 1):
                sid = table.get(key[start:start + n])
                if sid is not None:
                    found.append(PredictedSpan(span=Span(start, start + n), skill_id=sid))
        out[sent.id] = resolve_overlaps(found)
    return Predictions(method=method, spans=out)


def exact_match(dataset: Dataset, inventory: SkillInventory) -> Predictions:
    """Mark candidate spans whose lowercased forms equal an inventory phrase."""
    table = {e.tokens: e.id for e in inventory.entries}
    return _match_sequences(dataset, "exact", table, lambda s: tuple(t.form.lower() for t in s.tokens))


def lemma_match(dataset: Dataset, inventory: SkillInventory) -> Predictions:
    """Like exact_match but over lemmas on both sides.

    Inventory entries without a lemma column fall back to their surface
    tokens; taxonomy phrases are typically written in base form already.
    """
    for sent in dataset.sentences:
        if sent.lemmas() is None:
            raise ValueError(f"sentence {sent.id!r} has no lemma column")
    table: dict[tuple[str, ...], str] = {}
    for e in inventory.entries:
        key = tuple(t.lower() for t in (e.lemma if e.lemma is not None else e.tokens))
        table.setdefault(key, e.id)
    return _match_sequences(dataset, "lemma", table, lambda s: tuple(t.lower() for t in s.lemmas()))


def pos_match(
    dataset: Dataset,
    inventory: SkillInventory,
    max_len: int = 4,
    top_k: int | None = None,
) -> Predictions:
    """Mark candidate spans whose POS tag sequence occurs in the inventory.

    The pattern set is every UPOS sequence of length <= max_len observed on
    inventory entries, optionally pruned to the top_k most frequent.  Purely
    syntactic, so precision is expected to be poor; this is the recall-
    oriented end of the baseline family.
    """
    counts = Counter(e.upos for e in inventory.entries if e.upos is not None and len(e.upos) <= max_len)
    if not counts:
        raise ValueError("no inventory entry carries UPOS tags")
    if top_k is not None:
        patterns = {seq for seq, _ in counts.most_common(top_k)}
    else:
        patterns = set(counts)
    for sent in dataset.sentences:
        if sent.upos() is None:
            raise ValueError(f"sentence {sent.id!r} has no UPOS column")

    out: dict[str, tuple[PredictedSpan, ...]] = {}
    for sent in dataset.sentences:
        pos = sent.upos()
        found = []
        for n in range(1, min(max_len, len(pos)) + 1):
            for start in range(len(pos) - n + 1):
                if pos[start:start + n] in patterns:
                    found.append(PredictedSpan(span=Span(start, start + n)))
        out[sent.id] = resolve_overlaps(found)
    return Predictions(method="pos", spans=out)


def write_predictions(predictions: Predictions, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for sid, preds in predictions.spans.items():
            spans = []
            for p in preds:
                row = {"start": p.span.start, "end": p.span.end, "label": p.span.label}
                if p.skill_id is not None:
                    row["skill_id"] = p.skill_id
                if p.score is not None:
                    row["score"] = p.score
                spans.append(row)
            fh.write(json.dumps({"id": sid, "spans": spans}, ensure_ascii=False) + "\n")


def read_predictions(path: str | Path, method: str = "file") -> Predictions:
    path = Path(path)
    out: dict[str, tuple[PredictedSpan, ...]] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            preds = tuple(
                PredictedSpan(
                    span=Span(sp["start"], sp["end"], sp.get("label", "SKILL")),
                    skill_id=sp.get("skill_id"),
                    score=sp.get("score"),
                )
                for sp in row["spans"]
            )
            sid = row["id"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: bad prediction row: {exc}") from exc
        if sid in out:
            raise ValueError(f"{path}:{lineno}: duplicate sentence id {sid!r}")
        out[sid] = preds
    return Predictions(method=method, spans=out)
