"""Span-level evaluation, strict and loose.

Strict requires exact (start, end, label) agreement, matched one-to-one.
Loose credits any same-label overlap, counting the precision side (predictions
touching some gold) and the recall side (golds touched by some prediction)
separately: one prediction overlapping two golds is one precision hit but two
recall hits, so tp and recall_tp can differ.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from skillex.baselines import Predictions
from skillex.corpus import Dataset, spans_from_bio


class AlignmentError(ValueError):
    """Raised when predictions do not line up with the gold corpus."""


@dataclass(frozen=True)
class EvalReport:
    mode: str
    tp: int
    fp: int
    fn: int
    recall_tp: int
    precision: float = field(init=False)
    recall: float = field(init=False)
    f1: float = field(init=False)

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.recall_tp) < 0:
            raise ValueError("negative counts")
        p = self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 0.0
        r = self.recall_tp / (self.recall_tp + self.fn) if (self.recall_tp + self.fn) else 0.0
        f1 = 2.0 * p * r / (p + r) if (p + r) else 0.0
        object.__setattr__(self, "precision", p)
        object.__setattr__(self, "recall", r)
        object.__setattr__(self, "f1", f1)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "tp": self.tp,
            "recall_tp": self.recall_tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def _gold_by_sentence(gold: Dataset) -> dict:
    return {s.id: (spans_from_bio(s), len(s)) for s in gold.sentences}


def _check_alignment(predictions: Predictions, gold_map: dict) -> None:
    extra = set(predictions.spans) - set(gold_map)
    if extra:
        sample = sorted(extra)[:3]
        raise AlignmentError(f"predictions for unknown sentence id(s): {sample}")
    for sid, preds in predictions.spans.items():
        length = gold_map[sid][1]
        for p in preds:
            if p.span.end > length:
                raise AlignmentError(
                    f"sentence {sid!r}: prediction [{p.span.start}, {p.span.end}) "
                    f"exceeds length {length}"
                )


def evaluate_strict(predictions: Predictions, gold: Dataset) -> EvalReport:
    """Exact-boundary micro scores.  Sentences without predictions count as
    empty; predictions for ids outside the gold corpus are an error."""
    gold_map = _gold_by_sentence(gold)
    _check_alignment(predictions, gold_map)
    tp = fp = fn = 0
    for sid, (gold_spans, _) in gold_map.items():
        pred = Counter(
            (p.span.start, p.span.end, p.span.label) for p in predictions.spans.get(sid, ())
        )
        ref = Counter((sp.start, sp.end, sp.label) for sp in gold_spans)
        hits = sum((pred & ref).values())
        tp += hits
        fp += sum(pred.values()) - hits
        fn += sum(ref.values()) - hits
    return EvalReport(mode="strict", tp=tp, fp=fp, fn=fn, recall_tp=tp)


def evaluate_loose(predictions: Predictions, gold: Dataset) -> EvalReport:
    """Overlap-based micro scores with precision and recall hits counted on
    their own sides."""
    gold_map = _gold_by_sentence(gold)
    _check_alignment(predictions, gold_map)
    tp = fp = fn = recall_tp = 0
    for sid, (gold_spans, _) in gold_map.items():
        preds = predictions.spans.get(sid, ())
        for p in preds:
            if any(p.span.overlaps(g) and p.span.label == g.label for g in gold_spans):
                tp += 1
            else:
                fp += 1
        for g in gold_spans:
            if any(p.span.overlaps(g) and p.span.label == g.label for p in preds):
                recall_tp += 1
            else:
                fn += 1
    return EvalReport(mode="loose", tp=tp, fp=fp, fn=fn, recall_tp=recall_tp)


def format_report_table(*reports: EvalReport) -> str:
    """Fixed-width table for terminal output."""
    header = f"{'metric':<8}{'TP.p':>6}{'TP.r':>6}{'FP':>6}{'FN':>6}{'precision':>11}{'recall':>9}{'f1':>9}"
    lines = [header]
    for r in reports:
        lines.append(
            f"{r.mode:<8}{r.tp:>6}{r.recall_tp:>6}{r.fp:>6}{r.fn:>6}"
            f"{r.precision:>11.4f}{r.recall:>9.4f}{r.f1:>9.4f}"
        )
    return "\n".join(lines)
