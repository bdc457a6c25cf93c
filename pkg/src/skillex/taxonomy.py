"""Skill inventory loading, phrase normalization, and inventory statistics."""

from __future__ import annotations

import json
import logging
import statistics
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)


class SkillFileError(ValueError):
    """Raised for unreadable or malformed skill list files."""


class EmptyPhraseError(ValueError):
    """Raised when normalization leaves no tokens."""


def preprocess_skill(raw: str) -> list[str]:
    """Normalize a skill phrase to lowercase tokens.

    Bracketed disambiguators such as "Java (programming)" are removed
    including the brackets; an unclosed bracket discards the rest of the
    string.  Tokens without any alphanumeric character are dropped.
    Raises EmptyPhraseError when nothing survives.
    """
    kept: list[str] = []
    depth = 0
    for ch in raw:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            if depth:
                depth -= 1
            else:
                kept.append(ch)  # stray closer, plain text
        elif depth == 0:
            kept.append(ch)
    tokens = [t.lower() for t in "".join(kept).split() if any(c.isalnum() for c in t)]
    if not tokens:
        raise EmptyPhraseError(f"phrase {raw!r} is empty after normalization")
    return tokens


@dataclass(frozen=True)
class SkillEntry:
    id: str
    raw: str
    tokens: tuple[str, ...]
    upos: tuple[str, ...] | None = None
    lemma: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise SkillFileError(f"skill {self.id!r} has no tokens")
        for attr in ("upos", "lemma"):
            value = getattr(self, attr)
            if value is not None:
                object.__setattr__(self, attr, tuple(value))
                if len(value) != len(self.tokens):
                    raise SkillFileError(
                        f"skill {self.id!r}: {attr} has {len(value)} entries for {len(self.tokens)} tokens"
                    )

    @property
    def phrase(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class SkillInventory:
    entries: tuple[SkillEntry, ...]
    version: str = "unknown"
    duplicates: int = 0
    skipped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise SkillFileError("inventory has no entries")
        seqs = [e.tokens for e in self.entries]
        if len(set(seqs)) != len(seqs):
            dup = next(s for s, c in Counter(seqs).items() if c > 1)
            raise SkillFileError(f"duplicate token sequence {' '.join(dup)!r} in inventory")
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise SkillFileError("duplicate skill id in inventory")

    def __len__(self):
        return len(self.entries)

    def max_len(self) -> int:
        return max(len(e.tokens) for e in self.entries)

    def by_tokens(self) -> dict[tuple[str, ...], SkillEntry]:
        return {e.tokens: e for e in self.entries}


def _dedup(entries: list[SkillEntry]) -> tuple[list[SkillEntry], int]:
    # Distinct raw phrases can normalize to the same token sequence
    # ("Java (programming)" / "Java (Computing)"); the first id wins.
    seen: set[tuple[str, ...]] = set()
    out: list[SkillEntry] = []
    duplicates = 0
    for e in entries:
        if e.tokens in seen:
            duplicates += 1
            continue
        seen.add(e.tokens)
        out.append(e)
    return out, duplicates


def load_skills(path: str | Path, version: str = "unknown") -> SkillInventory:
    """Load a skill list from JSONL ({"id", "phrase", optional "upos"/"lemma"})
    or plain text (one phrase per line, ordinal ids)."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise SkillFileError(f"cannot read {path}: {exc}") from exc

    content = [(i, line) for i, line in enumerate(lines, start=1) if line.strip()]
    if not content:
        raise SkillFileError(f"{path}: no skill rows")
    jsonl = content[0][1].lstrip().startswith("{")

    entries: list[SkillEntry] = []
    skipped = 0
    for lineno, line in content:
        if jsonl:
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SkillFileError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(row.get("id"), str) or not isinstance(row.get("phrase"), str):
                raise SkillFileError(f"{path}:{lineno}: rows need string 'id' and 'phrase'")
            sid, raw = row["id"], row["phrase"]
            upos = row.get("upos")
            lemma = row.get("lemma")
        else:
            sid, raw, upos, lemma = str(lineno - 1), line.strip(), None, None
        try:
            tokens = preprocess_skill(raw)
        except EmptyPhraseError:
            skipped += 1
            continue
        try:
            entries.append(SkillEntry(id=sid, raw=raw, tokens=tuple(tokens), upos=upos, lemma=lemma))
        except SkillFileError as exc:
            raise SkillFileError(f"{path}:{lineno}: {exc}") from exc

    if skipped:
        logger.warning("%s: skipped %d phrase(s) empty after normalization", path, skipped)
    entries, duplicates = _dedup(entries)
    if not entries:
        raise SkillFileError(f"{path}: every row was skipped")
    return SkillInventory(entries=tuple(entries), version=version, duplicates=duplicates, skipped=skipped)


@dataclass(frozen=True)
class StatsReport:
    """Inventory statistics backing the n-gram range and POS pattern choices."""

    n_entries: int
    length_histogram: dict[int, int]
    ngram_freq: dict[int, Counter]
    pos_seq_freq: Counter | None
    length_median: float = field(init=False)
    length_mode: int = field(init=False)

    def __post_init__(self):
        lengths = [n for n, c in self.length_histogram.items() for _ in range(c)]
        object.__setattr__(self, "length_median", float(statistics.median(lengths)))
        object.__setattr__(self, "length_mode", max(self.length_histogram.items(), key=lambda kv: (kv[1], -kv[0]))[0])

    def to_json(self) -> dict:
        return {
            "n_entries": self.n_entries,
            "length_histogram": {str(k): v for k, v in sorted(self.length_histogram.items())},
            "length_median": self.length_median,
            "length_mode": self.length_mode,
            "ngram_freq": {
                str(n): {" ".join(g): c for g, c in counter.most_common()}
                for n, counter in sorted(self.ngram_freq.items())
            },
            "pos_seq_freq": (
                {" ".join(seq): c for seq, c in self.pos_seq_freq.most_common()}
                if self.pos_seq_freq is not None
                else None
            ),
        }


def compute_stats(inventory: SkillInventory, require_pos: bool = False) -> StatsReport:
    """Length histogram, n-gram frequencies (n in 1..3), and POS sequence
    frequencies over inventory phrases."""
    length_histogram = Counter(len(e.tokens) for e in inventory.entries)
    ngram_freq: dict[int, Counter] = {}
    for n in (1, 2, 3):
        counter: Counter = Counter()
        for e in inventory.entries:
            toks = e.tokens
            for i in range(len(toks) - n + 1):
                counter[toks[i:i + n]] += 1
        ngram_freq[n] = counter
    with_pos = [e for e in inventory.entries if e.upos is not None]
    if require_pos and not with_pos:
        raise SkillFileError("POS statistics requested but no entry carries UPOS tags")
    pos_seq_freq = Counter(e.upos for e in with_pos) if with_pos else None
    return StatsReport(
        n_entries=len(inventory),
        length_histogram=dict(length_histogram),
        ngram_freq=ngram_freq,
        pos_seq_freq=pos_seq_freq,
    )
