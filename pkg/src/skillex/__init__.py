"""Weakly supervised skill extraction: taxonomy matching over job posting text."""

from skillex.corpus import (
    Dataset,
    Sentence,
    Span,
    Token,
    bio_from_spans,
    parse_conll,
    simplify_labels,
    spans_from_bio,
)
from skillex.taxonomy import SkillEntry, SkillInventory, compute_stats, load_skills, preprocess_skill
from skillex.candidates import CandidateSpan, generate_ngrams
from skillex.baselines import PredictedSpan, Predictions, exact_match, lemma_match, pos_match
from skillex.embeddings import (
    EmbeddingStore,
    HashEmbeddings,
    IdfTable,
    SkillRepTable,
    build_aoc,
    build_iso,
    build_wse,
    compute_idf,
    embed_candidate,
    store_read,
    store_write,
)
from skillex.matcher import MatchConfig, cos_sim, match_corpus, match_sentence, sweep
from skillex.evaluation import EvalReport, evaluate_loose, evaluate_strict

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Sentence",
    "Span",
    "Token",
    "parse_conll",
    "simplify_labels",
    "spans_from_bio",
    "bio_from_spans",
    "SkillEntry",
    "SkillInventory",
    "load_skills",
    "preprocess_skill",
    "compute_stats",
    "CandidateSpan",
    "generate_ngrams",
    "Predictions",
    "PredictedSpan",
    "exact_match",
    "lemma_match",
    "pos_match",
    "EmbeddingStore",
    "HashEmbeddings",
    "IdfTable",
    "SkillRepTable",
    "compute_idf",
    "build_iso",
    "build_aoc",
    "build_wse",
    "embed_candidate",
    "store_read",
    "store_write",
    "MatchConfig",
    "cos_sim",
    "match_sentence",
    "match_corpus",
    "sweep",
    "EvalReport",
    "evaluate_strict",
    "evaluate_loose",
    "__version__",
]
