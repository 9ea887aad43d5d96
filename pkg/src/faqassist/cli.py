"""Command line entry point.

Subcommands follow the pipeline order: ingest raw chat exports, inspect
stats, split the corpus, export training pairs, evaluate rankers, serve
the suggestion API. Exit codes: 0 success, 1 usage/config error, 2 data
error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_service_config
from .corpus import (
    all_utterances,
    attach_annotations,
    corpus_stats,
    load_annotations,
    load_corpus,
    load_faqs,
    parse_whatsapp_export,
    save_corpus,
    select_conversations,
    split_dataset,
)
from .embeddings import SidecarEmbeddingProvider
from .errors import ConfigError, DataError
from .evaluation import evaluate, render_report
from .retrieval import make_ranker
from .sampling import (
    SamplingSetting,
    export_training_pairs,
    plan_sampling,
    write_training_pairs,
)

DEFAULT_SEED = 0


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="faqassist",
        description="FAQ suggestion engine and agent-assist service",
    )
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="global RNG seed (default 0)")
    parser.add_argument("--config", default=None, help="service config JSON (used by serve)")
    sub = parser.add_subparsers(dest="command", required=True)

    def _shared_flags(p):
        # accepted after the subcommand too; absent values fall back to the
        # global parser defaults via SUPPRESS
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        p.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)

    p = sub.add_parser("ingest", help="parse raw chat exports into the canonical corpus")
    p.add_argument("--export", nargs="+", required=True, help="WhatsApp-style export text file(s)")
    p.add_argument("--faqs", required=True, help="FAQ database JSON")
    p.add_argument("--annotations", help="annotation sidecar CSV")
    p.add_argument("--conversation-id", help="conversation id (single export only; default: file stem)")
    p.add_argument("--out", required=True, help="canonical corpus JSONL to write")
    _shared_flags(p)

    p = sub.add_parser("stats", help="print corpus statistics")
    p.add_argument("--corpus", required=True, help="canonical corpus JSONL")
    p.add_argument("--faqs", help="FAQ database JSON (validates gold ids)")
    p.add_argument("--figures", help="directory for statistic figures (PNG)")
    _shared_flags(p)

    p = sub.add_parser("split", help="conversation-level train/dev/test split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ratios", default="0.7,0.1,0.2", help="train,dev,test (default 0.7,0.1,0.2)")
    p.add_argument("--out-dir", required=True, help="directory for train/dev/test JSONL files")
    _shared_flags(p)

    p = sub.add_parser("export-pairs", help="export training pairs with random negatives")
    p.add_argument("--corpus", required=True, help="split JSONL to sample from")
    p.add_argument("--faqs", required=True)
    p.add_argument("--setting", required=True, choices=[s.value for s in SamplingSetting])
    p.add_argument("--negatives", type=int, default=1, help="negatives per pair (default 1)")
    p.add_argument("--out", required=True, help="training pair JSONL to write")
    _shared_flags(p)

    p = sub.add_parser("evaluate", help="dual-class MRR@10 evaluation")
    p.add_argument("--model", required=True, choices=["dumb", "random", "bm25", "dense"])
    p.add_argument(
        "--setting",
        default="n/a",
        choices=[s.value for s in SamplingSetting] + ["n/a"],
        help="sampling setting label for the report row",
    )
    p.add_argument("--corpus", required=True, help="test split JSONL")
    p.add_argument("--faqs", required=True)
    p.add_argument("--embeddings", help="embedding sidecar (dense only)")
    p.add_argument("--format", default="md", choices=["md", "csv"])
    p.add_argument("--window", type=int, default=4, choices=[1, 2, 3, 4], help="query window size")
    p.add_argument(
        "--silence",
        default="candidate",
        choices=["candidate", "threshold", "none"],
        help="dense silence mechanism (default: reserved candidate)",
    )
    p.add_argument("--silence-threshold", type=float, help="threshold for --silence threshold")
    p.add_argument("--out", help="write the table to a file instead of stdout")
    p.add_argument("--figures", help="directory for a report figure (PNG)")
    _shared_flags(p)

    p = sub.add_parser("serve", help="run the suggestion service")
    p.add_argument("--host", help="override listen host")
    p.add_argument("--port", type=int, help="override listen port")
    _shared_flags(p)

    return parser


def _print_stats(stats) -> None:
    print(f"conversations:       {stats.num_conversations}")
    print(f"utterances:          {stats.num_utterances}")
    print(f"annotated fraction:  {stats.annotated_fraction:.3f}")
    print(
        "conversation length: "
        f"min {stats.min_conversation_length} / "
        f"mean {stats.mean_conversation_length:.1f} / "
        f"max {stats.max_conversation_length}"
    )
    for faq_id, count in sorted(stats.per_faq_counts.items()):
        print(f"  faq {faq_id}: {count}")


def cmd_ingest(args) -> int:
    faqs = load_faqs(args.faqs)
    annotations = load_annotations(args.annotations) if args.annotations else {}
    if args.conversation_id and len(args.export) > 1:
        raise ConfigError("--conversation-id only works with a single --export file")
    conversations = []
    seen_ids = set()
    for export_path in args.export:
        path = Path(export_path)
        conv_id = args.conversation_id or path.stem
        if conv_id in seen_ids:
            raise DataError(f"duplicate conversation id {conv_id!r} (same file stem?)")
        seen_ids.add(conv_id)
        conv = parse_whatsapp_export(path.read_text(encoding="utf-8"), conv_id)
        conv = attach_annotations(conv, annotations.get(conv_id, []), faqs)
        conversations.append(conv)
    save_corpus(conversations, args.out)
    _print_stats(corpus_stats(conversations))
    print(f"wrote {args.out}")
    return 0


def cmd_stats(args) -> int:
    faqs = load_faqs(args.faqs) if args.faqs else None
    conversations = load_corpus(args.corpus, faqs)
    stats = corpus_stats(conversations)
    _print_stats(stats)
    if args.figures:
        from . import figures

        out_dir = Path(args.figures)
        out_dir.mkdir(parents=True, exist_ok=True)
        print(f"wrote {figures.conversation_length_figure(conversations, out_dir / 'conversation_lengths.png')}")
        print(f"wrote {figures.faq_count_figure(stats.per_faq_counts, out_dir / 'faq_counts.png')}")
    return 0


def cmd_split(args) -> int:
    conversations = load_corpus(args.corpus)
    try:
        ratios = tuple(float(r) for r in args.ratios.split(","))
    except ValueError:
        raise ConfigError(f"--ratios must be three comma-separated numbers, got {args.ratios!r}")
    if len(ratios) != 3:
        raise ConfigError(f"--ratios must be three comma-separated numbers, got {args.ratios!r}")
    splits = split_dataset(conversations, ratios, args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, ids in (("train", splits.train), ("dev", splits.dev), ("test", splits.test)):
        selected = select_conversations(conversations, ids)
        save_corpus(selected, out_dir / f"{name}.jsonl")
        print(f"{name}: {len(selected)} conversations -> {out_dir / f'{name}.jsonl'}")
    return 0


def cmd_export_pairs(args) -> int:
    faqs = load_faqs(args.faqs)
    conversations = load_corpus(args.corpus, faqs)
    utterances = all_utterances(conversations)
    plan = plan_sampling(utterances, SamplingSetting(args.setting), args.seed)
    pairs = export_training_pairs(
        plan, utterances, faqs, num_negatives=args.negatives, seed=args.seed
    )
    write_training_pairs(pairs, args.out)
    print(
        f"{len(pairs)} pairs ({len(plan.kept_faq)} faq + "
        f"{len(plan.kept_silence)} silence) -> {args.out}"
    )
    return 0


def cmd_evaluate(args) -> int:
    faqs = load_faqs(args.faqs)
    conversations = load_corpus(args.corpus, faqs)
    utterances = all_utterances(conversations)
    provider = None
    if args.model == "dense":
        if not args.embeddings:
            raise ConfigError("--model dense needs --embeddings")
        provider = SidecarEmbeddingProvider.load(args.embeddings)
    if args.silence == "threshold" and args.silence_threshold is None:
        raise ConfigError("--silence threshold needs --silence-threshold")
    ranker = make_ranker(
        args.model,
        faqs,
        seed=args.seed,
        provider=provider,
        include_silence=args.silence == "candidate",
        silence_threshold=(
            args.silence_threshold if args.silence == "threshold" else None
        ),
    )
    report = evaluate(
        ranker, utterances, faqs, window=args.window, setting=args.setting
    )
    table = render_report([report], args.format)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(table, end="")
    if args.figures:
        from . import figures

        out_dir = Path(args.figures)
        out_dir.mkdir(parents=True, exist_ok=True)
        print(f"wrote {figures.report_figure([report], out_dir / 'mrr_report.png')}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .config import build_store
    from .service import create_app

    config = load_service_config(args.config)
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    app = create_app(build_store(config))
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    except OSError as exc:
        raise ConfigError(f"cannot listen on {config.host}:{config.port}: {exc}")
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "split": cmd_split,
    "export-pairs": cmd_export_pairs,
    "evaluate": cmd_evaluate,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"faqassist: config error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"faqassist: file not found: {exc.filename or exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"faqassist: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
