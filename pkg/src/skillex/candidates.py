"""Candidate span enumeration."""

from __future__ import annotations

from dataclasses import dataclass

from skillex.corpus import Sentence


@dataclass(frozen=True)
class CandidateSpan:
    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid candidate bounds [{self.start}, {self.end})")

    @property
    def n(self) -> int:
        return self.end - self.start


def generate_ngrams(sentence: Sentence | int, n_max: int) -> list[CandidateSpan]:
    """All contiguous spans of 1..n_max tokens, ordered by start then span
    length.  This order is the tie-break order used downstream, so it must
    stay stable.  Accepts a Sentence or a bare token count."""
    length = sentence if isinstance(sentence, int) else len(sentence)
    if length < 1:
        raise ValueError(f"sentence length must be positive, got {length}")
    if n_max < 1:
        raise ValueError(f"n_max must be positive, got {n_max}")
    out = []
    for start in range(length):
        for n in range(1, min(n_max, length - start) + 1):
            out.append(CandidateSpan(start=start, end=start + n))
    return out
