from pathlib import Path

import pytest

from skillex.corpus import Dataset, Sentence, Token, parse_conll, simplify_labels
from skillex.embeddings import HashEmbeddings
from skillex.taxonomy import SkillEntry, SkillInventory, load_skills

FIXTURES = Path(__file__).parent / "fixtures"


def make_sentence(sid: str, words, bio=None, lemma=None, upos=None) -> Sentence:
    tokens = tuple(
        Token(
            form=w,
            lemma=lemma[i] if lemma else None,
            upos=upos[i] if upos else None,
            bio=bio[i] if bio else None,
        )
        for i, w in enumerate(words)
    )
    return Sentence(id=sid, tokens=tokens)


def make_dataset(sentences, name="synth", split="train") -> Dataset:
    return Dataset(name=name, split=split, sentences=tuple(sentences))


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def toy_train_raw() -> Dataset:
    return parse_conll(FIXTURES / "toy_train.conll")


@pytest.fixture
def toy_train(toy_train_raw) -> Dataset:
    return simplify_labels(toy_train_raw)


@pytest.fixture
def toy_test() -> Dataset:
    return simplify_labels(parse_conll(FIXTURES / "toy_test.conll"))


@pytest.fixture
def toy_inventory() -> SkillInventory:
    return load_skills(FIXTURES / "skills.jsonl", version="toy")


@pytest.fixture
def hash16() -> HashEmbeddings:
    return HashEmbeddings(dim=16, seed=42)


def entry(sid, tokens, upos=None, lemma=None) -> SkillEntry:
    return SkillEntry(id=sid, raw=" ".join(tokens), tokens=tuple(tokens), upos=upos, lemma=lemma)
