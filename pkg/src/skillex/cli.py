"""Command line interface.

Subcommands cover the full pipeline: inventory/corpus statistics, surface
baselines, idf tables, skill representation tables, matching, threshold
sweeps, and evaluation of prediction files.  Options can come from a JSON
config (--config); explicit flags override it.  Every run writes the resolved
config and a manifest into the output directory; timestamps only ever appear
in the manifest, so reruns with identical inputs produce identical bytes
everywhere else.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

import skillex
from skillex.baselines import (
    Predictions,
    exact_match,
    lemma_match,
    pos_match,
    read_predictions,
    write_predictions,
)
from skillex.corpus import (
    SPLITS,
    CorpusFormatError,
    Dataset,
    gold_pos_sequences,
    parse_conll,
    simplify_labels,
    summarize,
)
from skillex.embeddings import (
    CoverageError,
    EmbeddingStore,
    HashEmbeddings,
    IdfTable,
    StoreFormatError,
    build_aoc,
    build_iso,
    build_wse,
    compute_idf,
    read_idf,
    store_read,
    table_read,
    table_write,
    write_idf,
)
from skillex.evaluation import AlignmentError, evaluate_loose, evaluate_strict, format_report_table
from skillex.figures import save_stats_figure, save_sweep_figure
from skillex.matcher import MatchConfig, match_corpus, sweep
from skillex.taxonomy import SkillFileError, compute_stats, load_skills

logger = logging.getLogger(__name__)

# Exit codes by pipeline stage; 2 is argparse's own usage error.
STAGE_EXIT = {
    "config": 3,
    "corpus": 4,
    "taxonomy": 5,
    "store": 6,
    "represent": 7,
    "match": 8,
    "eval": 9,
    "io": 10,
}

METHODS_BASELINE = ("exact", "lemma", "pos")
METHODS_EMBED = ("iso", "aoc", "wse")
DEFAULT_TAUS = tuple(round(0.1 * i, 1) for i in range(11))


class PipelineError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


def _fail(stage: str, message: str) -> PipelineError:
    return PipelineError(stage, message)


# --- config handling ----------------------------------------------------------


def resolve_config(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < explicit flags."""
    cfg = dict(defaults)
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise _fail("config", f"cannot read config: {exc}")
        except json.JSONDecodeError as exc:
            raise _fail("config", f"config is not valid JSON: {exc}")
        unknown = set(loaded) - set(defaults)
        if unknown:
            raise _fail("config", f"unknown config key(s): {sorted(unknown)}")
        cfg.update(loaded)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _config_digest(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _emit_run_records(out: Path, command: str, cfg: dict, stores: dict) -> None:
    _write_json(out / "config.json", {"command": command, **cfg})
    manifest = {
        "command": command,
        "config_sha256": _config_digest({"command": command, **cfg}),
        "seed": cfg.get("seed"),
        "stores": stores,
        "versions": {"skillex": skillex.__version__, "numpy": np.__version__},
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    _write_json(out / "manifest.json", manifest)


def _out_dir(cfg: dict) -> Path:
    if not cfg.get("out"):
        raise _fail("config", "--out is required")
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _fail("io", f"cannot create output directory: {exc}")
    return out


# --- shared input loading -----------------------------------------------------


def _load_datasets(cfg: dict) -> dict[str, Dataset]:
    out = {}
    for split in SPLITS:
        path = cfg.get(split)
        if path:
            out[split] = simplify_labels(parse_conll(path, split=split))
    return out


def _need_split(datasets: dict[str, Dataset], split: str) -> Dataset:
    if split not in SPLITS:
        raise _fail("config", f"--split must be one of {SPLITS}")
    if split not in datasets:
        raise _fail("config", f"--split {split} requested but --{split} was not given")
    return datasets[split]


def _load_inventory(cfg: dict):
    if not cfg.get("skills"):
        raise _fail("config", "--skills is required")
    return load_skills(cfg["skills"], version=cfg.get("skills_version", "unknown"))


def _split_list(cfg: dict, key: str, datasets: dict[str, Dataset]) -> list[Dataset]:
    names = [s.strip() for s in cfg[key].split(",") if s.strip()]
    for name in names:
        if name not in SPLITS:
            raise _fail("config", f"{key} names unknown split {name!r}")
        if name not in datasets:
            raise _fail("config", f"{key} includes {name} but --{name} was not given")
    return [datasets[name] for name in names]


# --- embedding store plumbing -------------------------------------------------


def _hash_provider(cfg: dict) -> HashEmbeddings | None:
    if cfg.get("hash_dim"):
        return HashEmbeddings(dim=int(cfg["hash_dim"]), seed=int(cfg.get("seed") or 0))
    return None


def _contextual_store(cfg: dict, datasets: dict[str, Dataset]) -> EmbeddingStore:
    provider = _hash_provider(cfg)
    if cfg.get("store"):
        return store_read(cfg["store"])
    if provider is not None:
        if not datasets:
            raise _fail("config", "hash store needs at least one data split")
        return provider.contextual_store(*datasets.values())
    raise _fail("config", "need --store or --hash-dim for contextual vectors")


def _phrase_store(cfg: dict, inventory, datasets: dict[str, Dataset],
                  need_candidates: bool) -> EmbeddingStore | None:
    if cfg.get("phrase_store"):
        return store_read(cfg["phrase_store"])
    provider = _hash_provider(cfg)
    if provider is None:
        return None
    phrases = [e.phrase for e in inventory.entries] if inventory is not None else []
    if need_candidates:
        # Isolated candidate scoring needs a vector for every n-gram surface.
        from skillex.candidates import generate_ngrams

        seen = set(phrases)
        for dataset in datasets.values():
            for sent in dataset.sentences:
                forms = [t.form.lower() for t in sent.tokens]
                for cand in generate_ngrams(sent, int(cfg.get("n_max") or 4)):
                    phrase = " ".join(forms[cand.start:cand.end])
                    if phrase not in seen:
                        seen.add(phrase)
                        phrases.append(phrase)
    return provider.phrase_store(phrases)


def _idf_table(cfg: dict, datasets: dict[str, Dataset]) -> IdfTable:
    if cfg.get("idf"):
        return read_idf(cfg["idf"])
    included = _split_list(cfg, "idf_splits", datasets)
    if not included:
        raise _fail("config", "idf needs --idf or at least one split in idf_splits")
    return compute_idf(*included)


def _build_table(cfg: dict, inventory, datasets: dict[str, Dataset]):
    method = (cfg.get("method") or "").upper()
    if method not in ("ISO", "AOC", "WSE"):
        raise _fail("config", f"--method must be one of {METHODS_EMBED}")
    phrase_store = _phrase_store(cfg, inventory, datasets, need_candidates=False)
    if method == "ISO":
        if phrase_store is None:
            raise _fail("config", "iso needs --phrase-store or --hash-dim")
        return build_iso(inventory, phrase_store), None
    ctx = _contextual_store(cfg, datasets)
    rep_datasets = _split_list(cfg, "rep_splits", datasets)
    if not rep_datasets:
        raise _fail("config", "aoc/wse need at least one split in rep_splits")
    if method == "AOC":
        return build_aoc(inventory, ctx, rep_datasets, phrase_store=phrase_store), ctx
    idf = _idf_table(cfg, datasets)
    return build_wse(inventory, ctx, idf, rep_datasets, phrase_store=phrase_store), ctx


# --- subcommands ---------------------------------------------------------------


def cmd_stats(args: argparse.Namespace) -> int:
    defaults = {
        "skills": None, "skills_version": "unknown", "train": None, "dev": None,
        "test": None, "out": None, "seed": 0,
    }
    cfg = resolve_config(args, defaults)
    out = _out_dir(cfg)
    inventory = _load_inventory(cfg)
    datasets = _load_datasets(cfg)
    report = compute_stats(inventory)

    with (out / "skill_length_histogram.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["length", "count"])
        for length in sorted(report.length_histogram):
            writer.writerow([length, report.length_histogram[length]])

    with (out / "skill_ngrams.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "ngram", "count"])
        for n, counter in sorted(report.ngram_freq.items()):
            for gram, count in sorted(counter.items(), key=lambda kv: (-kv[1], kv[0])):
                writer.writerow([n, " ".join(gram), count])

    if report.pos_seq_freq is not None:
        with (out / "skill_pos_sequences.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sequence", "count"])
            for seq, count in sorted(report.pos_seq_freq.items(), key=lambda kv: (-kv[1], kv[0])):
                writer.writerow([" ".join(seq), count])

    corpus_summary = {split: summarize(d) for split, d in datasets.items()}
    corpus_pos: dict = {}
    for split, dataset in datasets.items():
        if dataset.sentences[0].upos() is not None:
            corpus_pos[split] = gold_pos_sequences(dataset)
    if corpus_summary:
        with (out / "corpus_summary.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["split", "sentences", "tokens", "spans", "avg_span_len"])
            for split in SPLITS:
                if split in corpus_summary:
                    s = corpus_summary[split]
                    writer.writerow([split, s["sentences"], s["tokens"], s["spans"],
                                     f"{s['avg_span_len']:.6f}"])
    if corpus_pos:
        with (out / "corpus_pos_sequences.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["split", "sequence", "count"])
            for split in SPLITS:
                if split in corpus_pos:
                    ranked = sorted(corpus_pos[split].items(), key=lambda kv: (-kv[1], kv[0]))
                    for seq, count in ranked:
                        writer.writerow([split, " ".join(seq), count])

    payload = report.to_json()
    payload["inventory"] = {
        "version": inventory.version,
        "entries": len(inventory),
        "duplicates": inventory.duplicates,
        "skipped": inventory.skipped,
    }
    payload["corpus"] = corpus_summary
    payload["corpus_pos"] = {
        split: {" ".join(seq): c for seq, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))}
        for split, counts in corpus_pos.items()
    }
    _write_json(out / "stats.json", payload)
    save_stats_figure(report, out / "stats.png", corpus_pos=corpus_pos or None)
    _emit_run_records(out, "stats", cfg, stores={})
    print(f"stats: {len(inventory)} skills, median length {report.length_median:g}, "
          f"mode {report.length_mode}")
    return 0


def _write_eval(out: Path, predictions: Predictions, gold: Dataset) -> None:
    strict = evaluate_strict(predictions, gold)
    loose = evaluate_loose(predictions, gold)
    _write_json(out / "eval_strict.json", strict.to_json())
    _write_json(out / "eval_loose.json", loose.to_json())
    print(format_report_table(strict, loose))


def cmd_baseline(args: argparse.Namespace) -> int:
    defaults = {
        "method": None, "skills": None, "skills_version": "unknown",
        "train": None, "dev": None, "test": None, "split": "test",
        "pos_max_len": 4, "pos_top_k": None, "out": None, "seed": 0,
    }
    cfg = resolve_config(args, defaults)
    if cfg.get("method") not in METHODS_BASELINE:
        raise _fail("config", f"--method must be one of {METHODS_BASELINE}")
    out = _out_dir(cfg)
    inventory = _load_inventory(cfg)
    datasets = _load_datasets(cfg)
    target = _need_split(datasets, cfg["split"])
    if cfg["method"] == "exact":
        predictions = exact_match(target, inventory)
    elif cfg["method"] == "lemma":
        predictions = lemma_match(target, inventory)
    else:
        predictions = pos_match(target, inventory, max_len=int(cfg["pos_max_len"]),
                                top_k=cfg["pos_top_k"])
    write_predictions(predictions, out / "predictions.jsonl")
    _write_eval(out, predictions, target)
    _emit_run_records(out, "baseline", cfg, stores={})
    return 0


def cmd_idf(args: argparse.Namespace) -> int:
    defaults = {
        "train": None, "dev": None, "test": None, "idf_splits": "train,dev",
        "out": None, "seed": 0,
    }
    cfg = resolve_config(args, defaults)
    out = _out_dir(cfg)
    datasets = _load_datasets(cfg)
    available = [s for s in cfg["idf_splits"].split(",") if s.strip() in datasets]
    cfg["idf_splits"] = ",".join(available) if available else cfg["idf_splits"]
    table = compute_idf(*_split_list(cfg, "idf_splits", datasets))
    write_idf(table, out / "idf.json")
    _emit_run_records(out, "idf", cfg, stores={})
    print(f"idf: {len(table.counts)} types over {table.total} tokens")
    return 0


def cmd_represent(args: argparse.Namespace) -> int:
    defaults = {
        "method": None, "skills": None, "skills_version": "unknown",
        "train": None, "dev": None, "test": None, "rep_splits": "train,dev",
        "idf_splits": "train,dev", "store": None, "phrase_store": None,
        "hash_dim": None, "idf": None, "out": None, "seed": 0,
    }
    cfg = resolve_config(args, defaults)
    out = _out_dir(cfg)
    inventory = _load_inventory(cfg)
    datasets = _load_datasets(cfg)
    cfg["rep_splits"] = ",".join(s for s in cfg["rep_splits"].split(",") if s.strip() in datasets)
    cfg["idf_splits"] = ",".join(s for s in cfg["idf_splits"].split(",") if s.strip() in datasets)
    table, ctx = _build_table(cfg, inventory, datasets)
    table_write(table, inventory, out / "table")
    stores = {"table": {"method": table.method, "rows": len(table),
                        "fallback": len(table.fallback_ids),
                        "unrepresentable": len(table.unrepresentable)}}
    if ctx is not None:
        stores["contextual"] = {"model": ctx.model, "pooling": ctx.pooling}
    _emit_run_records(out, "represent", cfg, stores=stores)
    print(f"represent: {table.method} table with {len(table)} rows "
          f"({len(table.fallback_ids)} fallback, {len(table.unrepresentable)} unrepresentable)")
    return 0


def _match_common(args: argparse.Namespace, sweep_mode: bool):
    defaults = {
        "method": None, "table": None, "skills": None, "skills_version": "unknown",
        "train": None, "dev": None, "test": None, "split": "test",
        "rep_splits": "train,dev", "idf_splits": "train,dev",
        "store": None, "phrase_store": None, "hash_dim": None, "idf": None,
        "tau": 0.8, "n_max": 4, "mode": "single", "candidate_encoding": "contextual",
        "workers": 1, "out": None, "seed": 0,
    }
    if sweep_mode:
        defaults["taus"] = ",".join(str(t) for t in DEFAULT_TAUS)
    cfg = resolve_config(args, defaults)
    out = _out_dir(cfg)
    inventory = _load_inventory(cfg) if cfg.get("skills") else None
    datasets = _load_datasets(cfg)
    target = _need_split(datasets, cfg["split"])
    cfg["rep_splits"] = ",".join(s for s in cfg["rep_splits"].split(",") if s.strip() in datasets)
    cfg["idf_splits"] = ",".join(s for s in cfg["idf_splits"].split(",") if s.strip() in datasets)

    if cfg.get("table"):
        table = table_read(cfg["table"])
        ctx = None
    else:
        if inventory is None:
            raise _fail("config", "--skills is required unless --table is given")
        table, ctx = _build_table(cfg, inventory, datasets)
    mode = {"single": "single-span", "multi": "multi-span"}.get(cfg["mode"], cfg["mode"])
    try:
        match_cfg = MatchConfig(
            tau=float(cfg["tau"]), n_max=int(cfg["n_max"]), mode=mode,
            candidate_encoding=cfg["candidate_encoding"],
        )
    except ValueError as exc:
        raise _fail("config", str(exc))
    phrase_store = None
    if match_cfg.candidate_encoding == "isolated":
        phrase_store = _phrase_store(cfg, inventory, {cfg["split"]: target}, need_candidates=True)
        if phrase_store is None:
            raise _fail("config", "isolated encoding needs --phrase-store or --hash-dim")
    if ctx is None and match_cfg.candidate_encoding == "contextual":
        ctx = _contextual_store(cfg, datasets)
    stores = {"table": {"method": table.method, "rows": len(table)}}
    if ctx is not None:
        stores["contextual"] = {"model": ctx.model, "pooling": ctx.pooling}
    if phrase_store is not None:
        stores["phrase"] = {"model": phrase_store.model, "pooling": phrase_store.pooling}
    return cfg, out, target, table, ctx, match_cfg, phrase_store, stores


def cmd_match(args: argparse.Namespace) -> int:
    cfg, out, target, table, ctx, match_cfg, phrase_store, stores = _match_common(args, False)
    predictions = match_corpus(target, table, ctx, match_cfg,
                               workers=int(cfg["workers"]), phrase_store=phrase_store)
    write_predictions(predictions, out / "predictions.jsonl")
    _write_eval(out, predictions, target)
    _emit_run_records(out, "match", cfg, stores=stores)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg, out, target, table, ctx, match_cfg, phrase_store, stores = _match_common(args, True)
    try:
        taus = [float(t) for t in str(cfg["taus"]).split(",") if t.strip()]
    except ValueError as exc:
        raise _fail("config", f"bad --taus: {exc}")
    points = sweep(target, table, ctx, taus, target, match_cfg,
                   workers=int(cfg["workers"]), phrase_store=phrase_store)
    _write_json(out / "sweep.json", {"points": [pt.to_json() for pt in points]})
    with (out / "sweep.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "tau", "predicted_spans", "sentences_with_predictions",
            "strict_tp", "strict_fp", "strict_fn",
            "strict_precision", "strict_recall", "strict_f1",
            "loose_tp", "loose_recall_tp", "loose_fp", "loose_fn",
            "loose_precision", "loose_recall", "loose_f1",
        ])
        for pt in points:
            writer.writerow([
                f"{pt.tau:g}", pt.predicted_spans, pt.sentences_with_predictions,
                pt.strict.tp, pt.strict.fp, pt.strict.fn,
                f"{pt.strict.precision:.6f}", f"{pt.strict.recall:.6f}", f"{pt.strict.f1:.6f}",
                pt.loose.tp, pt.loose.recall_tp, pt.loose.fp, pt.loose.fn,
                f"{pt.loose.precision:.6f}", f"{pt.loose.recall:.6f}", f"{pt.loose.f1:.6f}",
            ])
    save_sweep_figure(points, out / "sweep.png")
    _emit_run_records(out, "sweep", cfg, stores=stores)
    best = max(points, key=lambda pt: pt.strict.f1)
    print(f"sweep: {len(points)} points, best strict F1 {best.strict.f1:.4f} at tau {best.tau:g}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    defaults = {
        "pred": None, "train": None, "dev": None, "test": None, "split": "test",
        "out": None, "seed": 0,
    }
    cfg = resolve_config(args, defaults)
    if not cfg.get("pred"):
        raise _fail("config", "--pred is required")
    out = _out_dir(cfg)
    datasets = _load_datasets(cfg)
    target = _need_split(datasets, cfg["split"])
    try:
        predictions = read_predictions(cfg["pred"])
    except OSError as exc:
        raise _fail("io", f"cannot read predictions: {exc}")
    except ValueError as exc:
        raise _fail("eval", str(exc))
    _write_eval(out, predictions, target)
    _emit_run_records(out, "eval", cfg, stores={})
    return 0


# --- argument parsing -----------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser, *, data=True):
    parser.add_argument("--config", help="JSON config; flags override its keys")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="seed for the hash embedding provider")
    if data:
        parser.add_argument("--train", help="train split CoNLL file")
        parser.add_argument("--dev", help="dev split CoNLL file")
        parser.add_argument("--test", help="test split CoNLL file")


def _add_store_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--store", help="contextual-tokens store directory")
    parser.add_argument("--phrase-store", dest="phrase_store", help="phrase store directory")
    parser.add_argument("--hash-dim", dest="hash_dim", type=int,
                        help="use the deterministic hash provider at this dimension")
    parser.add_argument("--idf", help="idf table JSON (else computed from idf_splits)")
    parser.add_argument("--rep-splits", dest="rep_splits",
                        help="splits used to collect skill occurrences (default train,dev)")
    parser.add_argument("--idf-splits", dest="idf_splits",
                        help="splits counted for idf (default train,dev)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skillex",
        description="Weakly supervised skill extraction over job posting corpora.",
    )
    parser.add_argument("--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="inventory and corpus statistics with figures")
    _add_common(p)
    p.add_argument("--skills", help="skill list (JSONL or plain text)")
    p.add_argument("--skills-version", dest="skills_version", help="inventory version tag")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("baseline", help="surface-form baselines")
    _add_common(p)
    p.add_argument("--method", choices=METHODS_BASELINE)
    p.add_argument("--skills")
    p.add_argument("--skills-version", dest="skills_version")
    p.add_argument("--split", help="split to predict on (default test)")
    p.add_argument("--pos-max-len", dest="pos_max_len", type=int)
    p.add_argument("--pos-top-k", dest="pos_top_k", type=int)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("idf", help="token idf table from corpus splits")
    _add_common(p)
    p.add_argument("--idf-splits", dest="idf_splits")
    p.set_defaults(func=cmd_idf)

    p = sub.add_parser("represent", help="build a skill representation table")
    _add_common(p)
    p.add_argument("--method", choices=METHODS_EMBED)
    p.add_argument("--skills")
    p.add_argument("--skills-version", dest="skills_version")
    _add_store_flags(p)
    p.set_defaults(func=cmd_represent)

    for name, func, extra_help in (("match", cmd_match, "match candidates against skills"),
                                   ("sweep", cmd_sweep, "evaluate a grid of tau thresholds")):
        p = sub.add_parser(name, help=extra_help)
        _add_common(p)
        p.add_argument("--method", choices=METHODS_EMBED)
        p.add_argument("--table", help="prebuilt representation table directory")
        p.add_argument("--skills")
        p.add_argument("--skills-version", dest="skills_version")
        p.add_argument("--split")
        _add_store_flags(p)
        p.add_argument("--tau", type=float)
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--mode", choices=("single", "multi"))
        p.add_argument("--candidate-encoding", dest="candidate_encoding",
                       choices=("contextual", "isolated"))
        p.add_argument("--workers", type=int)
        if name == "sweep":
            p.add_argument("--taus", help="comma-separated ascending thresholds")
        p.set_defaults(func=func)

    p = sub.add_parser("eval", help="evaluate a predictions file against gold")
    _add_common(p)
    p.add_argument("--pred", help="predictions JSONL")
    p.add_argument("--split")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return STAGE_EXIT.get(exc.stage, 1)
    except CorpusFormatError as exc:
        print(f"error [corpus]: {exc}", file=sys.stderr)
        return STAGE_EXIT["corpus"]
    except SkillFileError as exc:
        print(f"error [taxonomy]: {exc}", file=sys.stderr)
        return STAGE_EXIT["taxonomy"]
    except (StoreFormatError, CoverageError) as exc:
        print(f"error [store]: {exc}", file=sys.stderr)
        return STAGE_EXIT["store"]
    except AlignmentError as exc:
        print(f"error [eval]: {exc}", file=sys.stderr)
        return STAGE_EXIT["eval"]
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return STAGE_EXIT["io"]
    except ValueError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return STAGE_EXIT["config"]


if __name__ == "__main__":
    sys.exit(main())
