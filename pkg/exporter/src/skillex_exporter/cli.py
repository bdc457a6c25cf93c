"""Command line entry point: skillex-export {contextual|phrases}."""

import argparse
import logging
import sys
from pathlib import Path

from skillex.corpus import CorpusFormatError, parse_conll
from skillex.taxonomy import SkillFileError, load_skills

from skillex_exporter.encode import ExportError, ExportJob, export_contextual, export_phrases


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skillex-export",
        description="Encode corpus tokens or skill phrases with a transformer "
        "model and write a skillex embedding store.",
    )
    parser.add_argument("--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", required=True, help="model name or local directory")
        p.add_argument("--pooling", choices=["first-subword", "mean-subword"],
                       default="first-subword", help="subword to word pooling")
        p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="FILE")
        p.add_argument("--out", required=True, help="store directory to write")
        p.add_argument("--batch-size", type=int, default=16)

    common(sub.add_parser("contextual", help="one vector per corpus token"))
    common(sub.add_parser("phrases", help="one vector per skill phrase"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        job = ExportJob(model=args.model, out=Path(args.out),
                        pooling=args.pooling, batch_size=args.batch_size)
        if args.command == "contextual":
            datasets = [parse_conll(p) for p in args.inputs]
            report = export_contextual(job, datasets)
        else:
            if len(args.inputs) != 1:
                parser.error("phrases takes exactly one --in file")
            report = export_phrases(job, load_skills(args.inputs[0]))
    except (ExportError, CorpusFormatError, SkillFileError, OSError) as exc:
        print(f"skillex-export: {exc}", file=sys.stderr)
        return 1
    print(report.summary())
    return 0


if __name__ == "__main__":
    sys.exit(main())
