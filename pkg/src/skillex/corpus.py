"""Job posting corpora: CoNLL-style files, BIO tag sequences, span conversion.

Files are TAB-separated with one token per line and a blank line between
sentences.  Two layouts are accepted: ``FORM LABEL`` and
``FORM LEMMA UPOS LABEL``.  Comment lines start with ``# `` and may carry a
sentence id as ``# id = <string>``.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path

logger = logging.getLogger(__name__)

# Universal Dependencies v2 tag set.
UPOS_TAGS = frozenset({
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
})

# Label space before simplification; KNOWLEDGE collapses into SKILL.
BIO_LABELS = frozenset({"O", "B-SKILL", "I-SKILL", "B-KNOWLEDGE", "I-KNOWLEDGE"})

SPLITS = ("train", "dev", "test")


class CorpusFormatError(ValueError):
    """Raised for unreadable or structurally inconsistent corpus input."""


@dataclass(frozen=True)
class Token:
    form: str
    lemma: str | None = None
    upos: str | None = None
    bio: str | None = None

    def __post_init__(self):
        if not self.form or any(ch.isspace() for ch in self.form):
            raise CorpusFormatError(f"token form must be non-empty without whitespace: {self.form!r}")
        if self.upos is not None and self.upos not in UPOS_TAGS:
            raise CorpusFormatError(f"unknown UPOS tag {self.upos!r}")
        if self.bio is not None and self.bio not in BIO_LABELS:
            raise CorpusFormatError(f"unknown label {self.bio!r}")


@dataclass(frozen=True)
class Sentence:
    """A tokenized sentence.  Annotation columns are all-or-nothing."""

    id: str
    tokens: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise CorpusFormatError(f"sentence {self.id!r} has no tokens")
        for attr in ("lemma", "upos", "bio"):
            present = [getattr(t, attr) is not None for t in self.tokens]
            if any(present) and not all(present):
                raise CorpusFormatError(f"sentence {self.id!r}: {attr} set on some tokens but not all")
        labels = [t.bio for t in self.tokens]
        if labels[0] is not None:
            prev = "O"
            for i, lab in enumerate(labels):
                if lab.startswith("I-") and prev[2:] != lab[2:]:
                    raise CorpusFormatError(
                        f"sentence {self.id!r}: {lab} at position {i} does not continue a span"
                    )
                prev = lab

    def __len__(self):
        return len(self.tokens)

    def forms(self) -> tuple[str, ...]:
        return tuple(t.form for t in self.tokens)

    def lemmas(self) -> tuple[str, ...] | None:
        if self.tokens[0].lemma is None:
            return None
        return tuple(t.lemma for t in self.tokens)

    def upos(self) -> tuple[str, ...] | None:
        if self.tokens[0].upos is None:
            return None
        return tuple(t.upos for t in self.tokens)

    def labels(self) -> tuple[str, ...] | None:
        if self.tokens[0].bio is None:
            return None
        return tuple(t.bio for t in self.tokens)


@dataclass(frozen=True)
class Dataset:
    name: str
    split: str
    sentences: tuple[Sentence, ...]
    bio_repairs: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if self.split not in SPLITS:
            raise CorpusFormatError(f"split must be one of {SPLITS}, got {self.split!r}")
        ids = [s.id for s in self.sentences]
        if len(set(ids)) != len(ids):
            dup = next(i for i, c in Counter(ids).items() if c > 1)
            raise CorpusFormatError(f"duplicate sentence id {dup!r} in {self.name}/{self.split}")

    def __len__(self):
        return len(self.sentences)

    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)


@dataclass(frozen=True, order=True)
class Span:
    """Token span with exclusive end, as used for both gold and predictions."""

    start: int
    end: int
    label: str = "SKILL"

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span bounds [{self.start}, {self.end})")

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


def _repair_bio(labels: list[str]) -> tuple[list[str], int]:
    # An I- tag at sentence start, after O, or after a different span type has
    # no span to continue; promote it to B- rather than dropping the token.
    repaired = 0
    prev = "O"
    out = []
    for lab in labels:
        if lab.startswith("I-") and prev[2:] != lab[2:]:
            lab = "B-" + lab[2:]
            repaired += 1
        out.append(lab)
        prev = lab
    return out, repaired


def _infer_split(path: Path) -> str:
    stem = path.stem.lower()
    for split in SPLITS:
        if split in stem:
            return split
    logger.debug("no split hint in %s, defaulting to train", path.name)
    return "train"


def parse_conll(path: str | Path, name: str | None = None, split: str | None = None) -> Dataset:
    """Read a CoNLL-style file into a Dataset.

    Column layout (2 or 4 columns) is detected from the first token line and
    must stay consistent within each sentence.  Orphan I- labels are repaired
    to B- and counted on the returned Dataset.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusFormatError(f"cannot read {path}: {exc}") from exc

    name = name if name is not None else path.stem
    split = split if split is not None else _infer_split(path)

    sentences: list[Sentence] = []
    total_repairs = 0
    rows: list[tuple[int, list[str]]] = []
    pending_id: str | None = None

    def flush():
        nonlocal rows, pending_id, total_repairs
        if not rows:
            pending_id = None
            return
        widths = {len(cols) for _, cols in rows}
        if len(widths) > 1:
            lineno = rows[0][0]
            raise CorpusFormatError(
                f"{path}:{lineno}: inconsistent column count within a sentence: {sorted(widths)}"
            )
        width = widths.pop()
        if width not in (2, 4):
            raise CorpusFormatError(f"{path}:{rows[0][0]}: unsupported column count {width}")
        labels = [cols[-1] for _, cols in rows]
        for lineno, cols in rows:
            if cols[-1] not in BIO_LABELS:
                raise CorpusFormatError(f"{path}:{lineno}: unknown label {cols[-1]!r}")
        labels, repairs = _repair_bio(labels)
        total_repairs += repairs
        tokens = []
        for (lineno, cols), lab in zip(rows, labels):
            try:
                if width == 2:
                    tokens.append(Token(form=cols[0], bio=lab))
                else:
                    tokens.append(Token(form=cols[0], lemma=cols[1], upos=cols[2], bio=lab))
            except CorpusFormatError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
        sid = pending_id if pending_id is not None else f"{name}-{split}-{len(sentences):05d}"
        sentences.append(Sentence(id=sid, tokens=tuple(tokens)))
        rows = []
        pending_id = None

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        if line.startswith("# "):
            body = line[2:].strip()
            if body.startswith("id") and "=" in body:
                key, _, value = body.partition("=")
                if key.strip() == "id":
                    pending_id = value.strip()
            continue
        rows.append((lineno, line.split("\t")))
    flush()

    if not sentences:
        raise CorpusFormatError(f"{path}: no sentences found")
    if total_repairs:
        logger.warning("%s: repaired %d orphan I- label(s)", path, total_repairs)
    return Dataset(name=name, split=split, sentences=tuple(sentences), bio_repairs=total_repairs)


def simplify_labels(dataset: Dataset) -> Dataset:
    """Collapse KNOWLEDGE spans into SKILL, keeping the B/I prefix."""
    out = []
    for sent in dataset.sentences:
        tokens = tuple(
            replace(t, bio=t.bio[:2] + "SKILL") if t.bio in ("B-KNOWLEDGE", "I-KNOWLEDGE") else t
            for t in sent.tokens
        )
        out.append(replace(sent, tokens=tokens))
    return replace(dataset, sentences=tuple(out))


def spans_from_bio(sentence: Sentence) -> list[Span]:
    """Extract labeled spans from a sentence's BIO column."""
    labels = sentence.labels()
    if labels is None:
        raise CorpusFormatError(f"sentence {sentence.id!r} has no labels")
    spans: list[Span] = []
    start = None
    kind = None

    def close(end):
        nonlocal start, kind
        if start is not None:
            spans.append(Span(start=start, end=end, label=kind))
        start = kind = None

    for i, lab in enumerate(labels):
        if lab == "O":
            close(i)
        elif lab.startswith("B-"):
            close(i)
            start, kind = i, lab[2:]
        # I- continues the open span; well-formedness is a Sentence invariant.
    close(len(labels))
    return spans


def bio_from_spans(spans: list[Span], length: int) -> list[str]:
    """Render spans as a BIO sequence of the given length.

    Spans must lie within bounds and must not overlap.
    """
    ordered = sorted(spans, key=lambda sp: (sp.start, sp.end))
    prev_end = 0
    for sp in ordered:
        if sp.end > length:
            raise ValueError(f"span [{sp.start}, {sp.end}) exceeds sentence length {length}")
        if sp.start < prev_end:
            raise ValueError(f"overlapping span [{sp.start}, {sp.end})")
        prev_end = sp.end
    labels = ["O"] * length
    for sp in ordered:
        labels[sp.start] = "B-" + sp.label
        for i in range(sp.start + 1, sp.end):
            labels[i] = "I-" + sp.label
    return labels


def gold_spans(dataset: Dataset) -> dict[str, list[Span]]:
    """Gold spans per sentence id."""
    return {s.id: spans_from_bio(s) for s in dataset.sentences}


def summarize(dataset: Dataset) -> dict:
    """Sentence/token/span counts plus mean gold span length in tokens."""
    spans = [sp for s in dataset.sentences for sp in spans_from_bio(s)]
    lengths = [sp.end - sp.start for sp in spans]
    return {
        "sentences": len(dataset),
        "tokens": dataset.n_tokens(),
        "spans": len(spans),
        "avg_span_len": sum(lengths) / len(lengths) if lengths else 0.0,
    }


def gold_pos_sequences(dataset: Dataset, unique: bool = True) -> Counter:
    """POS tag sequences of gold spans.

    With unique=True each distinct span surface (lowercased form sequence)
    contributes once, so frequent skills do not dominate the distribution.
    """
    seen: set[tuple[str, ...]] = set()
    counts: Counter = Counter()
    for sent in dataset.sentences:
        pos = sent.upos()
        if pos is None:
            raise CorpusFormatError(f"sentence {sent.id!r} has no UPOS column")
        for sp in spans_from_bio(sent):
            if unique:
                surface = tuple(t.form.lower() for t in sent.tokens[sp.start:sp.end])
                if surface in seen:
                    continue
                seen.add(surface)
            counts[tuple(pos[sp.start:sp.end])] += 1
    return counts
