"""Builds a tiny local BERT so tests never touch the network."""

import os

import pytest
import torch

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

# pieces chosen so some words split into several subwords
WORD_PIECES = [
    "data", "##base", "##bases", "big", "pipelines", "we", "use", "java",
    "desk", "##top", "ana", "##lysis", "the", "and", "of", "manage",
    "##ment", "skills", "team", "work", "with", "a", "in", "cloud",
    "python", "sql", "test", "##ing", "agile", "report", "##s",
]
SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]

HIDDEN = 32
MAX_POSITIONS = 48


def build_tiny_model(target: str) -> str:
    from tokenizers import Tokenizer
    from tokenizers.models import WordPiece
    from tokenizers.normalizers import BertNormalizer
    from tokenizers.pre_tokenizers import BertPreTokenizer
    from tokenizers.processors import TemplateProcessing
    from transformers import BertConfig, BertModel, BertTokenizerFast

    vocab = {tok: i for i, tok in enumerate(SPECIALS + WORD_PIECES)}
    tk = Tokenizer(WordPiece(vocab=vocab, unk_token="[UNK]"))
    tk.normalizer = BertNormalizer(lowercase=True)
    tk.pre_tokenizer = BertPreTokenizer()
    tk.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    tokenizer = BertTokenizerFast(
        tokenizer_object=tk,
        unk_token="[UNK]", pad_token="[PAD]", cls_token="[CLS]",
        sep_token="[SEP]", mask_token="[MASK]",
        model_max_length=MAX_POSITIONS,
    )
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=HIDDEN,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=MAX_POSITIONS,
    )
    torch.manual_seed(1234)
    model = BertModel(config)
    model.eval()
    tokenizer.save_pretrained(target)
    model.save_pretrained(target)
    return target


@pytest.fixture(scope="session")
def tiny_model(tmp_path_factory) -> str:
    return build_tiny_model(str(tmp_path_factory.mktemp("tiny-bert")))


def corpus_lines():
    """50 small sentences, a long one to force windowing, and a token the
    normalizer deletes to force the alignment fallback."""
    vocab = ["we", "use", "big", "data", "pipelines", "python", "sql",
             "teamwork", "agile", "testing", "reports", "management",
             "database", "analysis", "cloud", "skills", "desktop", "java"]
    lines = []
    for i in range(48):
        words = [vocab[(i * 5 + k) % len(vocab)] for k in range(3 + i % 5)]
        lines.append(f"# id = ex-{i:03d}")
        lines.extend(f"{w}\tO" for w in words)
        lines.append("")
    lines.append("# id = ex-long")
    lines.extend(f"{vocab[k % len(vocab)]}\tO" for k in range(70))
    lines.append("")
    lines.append("# id = ex-ghost")
    lines.append("we\tO")
    lines.append("​\tO")  # zero width space, vanishes in normalization
    lines.append("big\tO")
    lines.append("")
    return lines


@pytest.fixture(scope="session")
def corpus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "sentences.conll"
    path.write_text("\n".join(corpus_lines()) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def skills_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("skills") / "skills.txt"
    path.write_text(
        "big data\n"
        "Database Analysis\n"
        "big data\n"  # duplicate, must collapse to one row
        "python\n"
        "management (advanced)\n",
        encoding="utf-8",
    )
    return path
