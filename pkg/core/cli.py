"""
cli.py
------
Batch entry point: ``python -m core.cli <subcommand> ...``

Exit status: 0 on success, 1 when verification finds a failing step,
2 on a usage error or bad input.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path
from typing import Iterable, Sequence

from tqdm import tqdm

from core.catalog import export_catalog, load_catalog
from core.config import RunConfig, load_config
from core.data_generator import (
    ForgeJob,
    TraceRecord,
    derive_seed,
    generate_curated,
    generate_records,
    instantiate_exprs,
    load_lexicon,
)
from core.dataset import compute_stats, dataset_files, iter_records, write_records
from core.diagnostics import (
    MASK_KINDS,
    gold_response,
    item_from_dict,
    make_masked,
    make_step_completion,
    make_truth_eval,
    score_task1,
    score_task2,
    score_truth_eval,
)
from core.errors import ChainTooShort, FolTraceError, NoMaskableSpan
from core.evaluation import write_scorecard, write_stats
from core.formula import is_quantified
from core.logger import configure_logging, get_logger
from core.model_client import CallableClient, OpenAIChatClient, ReplayClient, TranscriptLog, query_many
from core.parser import parse
from core.pdf_exporter import export_score_pdf, export_stats_pdf
from core.verifier import verify_record

log = get_logger(__name__)

SPLIT_INDEX = {"train": 0, "dev": 1, "test": 2}
MASK_STREAM, TRUTH_STREAM = 3, 4
GARBAGE = "((P |"


# -------------------------------------------------------------------
# Helpers
# -------------------------------------------------------------------
def _records(path: str, metrics: bool = True) -> Iterable[TraceRecord]:
    for f in dataset_files(path):
        yield from iter_records(f, metrics=metrics)


def _write_items(items: Sequence, path: str) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as f:
        for it in items:
            f.write(json.dumps(it.to_dict(), ensure_ascii=False) + "\n")


def _read_items(path: str) -> list:
    with open(path, "r", encoding="utf-8") as f:
        return [item_from_dict(json.loads(line)) for line in f if line.strip()]


def _config(args) -> RunConfig:
    overrides: dict = {}
    if getattr(args, "seed", None) is not None:
        overrides.setdefault("dataset", {})["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        overrides.setdefault("dataset", {})["workers"] = args.workers
    return load_config(args.config, overrides)


# -------------------------------------------------------------------
# Subcommands
# -------------------------------------------------------------------
def cmd_generate(args, cfg: RunConfig) -> int:
    gen, simp, ds = cfg.generation, cfg.simplify, cfg.dataset
    splits = {args.split: args.count} if args.count is not None else cfg.splits()
    per_rule = args.curated_per_rule if args.curated_per_rule is not None else ds.curated_per_rule
    families = sorted({r.family for r in load_catalog()})
    lex = load_lexicon(cfg.lexicon_path) if per_rule else None

    for split, count in splits.items():
        index = SPLIT_INDEX.get(split, len(SPLIT_INDEX))
        job = ForgeJob(ds.seed, index, tuple(gen.alphabet), gen.depth_min, gen.depth_max, gen.max_variables,
                       simp.depth_threshold, simp.max_steps)
        records = generate_records(job, count, workers=ds.workers, progress=not args.quiet)
        if per_rule:
            records = itertools.chain(records, generate_curated(families, per_rule, lex, ds.seed, index))
        manifest = write_records(records, Path(args.out) / f"{split}.jsonl", split, cfg.digest())
        print(f"{split}: {manifest.record_count} records, {manifest.token_count} tokens")
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    checked = failed = skipped = 0
    for rec in tqdm(_records(args.input, metrics=False), desc="verify", disable=args.quiet, unit="rec"):
        checked += 1
        for i, v in enumerate(verify_record(rec)):
            if v.skipped:
                skipped += 1
            elif not v.ok:
                failed += 1
                print(f"{rec.rule_id}: step {i}->{i + 1} {v.status.value} witness={json.dumps(v.to_dict()['witness'])}",
                      file=sys.stderr)
    print(f"verified {checked} records: {failed} failing step(s), {skipped} skipped")
    return 1 if failed else 0


def cmd_stats(args, cfg: RunConfig) -> int:
    report = compute_stats(_records(args.input), cfg.digest())
    plots = cfg.report.plots and not args.no_plots
    write_stats(report, args.out, plots=plots)
    if cfg.report.pdf or args.pdf:
        export_stats_pdf(report, Path(args.out) / "stats.pdf", figures_dir=args.out if plots else None)
    print(f"stats of {report.record_count} records written to {args.out}")
    return 0


def cmd_mask(args, cfg: RunConfig) -> int:
    kinds = MASK_KINDS if args.kind == "all" else (args.kind,)
    lex = load_lexicon(cfg.lexicon_path)
    items = []
    for n, rec in enumerate(_records(args.input)):
        if len(items) >= args.count:
            break
        seed = derive_seed(cfg.dataset.seed, MASK_STREAM, n)
        kind = kinds[n % len(kinds)]
        f = parse(rec.exprs[0])
        if kind == "predicate":
            f = instantiate_exprs([f], lex, seed)[0]
        try:
            items.append(make_masked(f, kind, seed))
        except NoMaskableSpan:
            log.debug("record %s has no %s span", rec.rule_id, kind)
    _write_items(items, args.out)
    print(f"{len(items)} masked item(s) written to {args.out}")
    return 0


def cmd_taskgen(args, cfg: RunConfig) -> int:
    items = []
    for rec in _records(args.input):
        if len(items) >= args.count:
            break
        try:
            items.append(make_step_completion(rec, args.blanks))
        except ChainTooShort:
            continue
    _write_items(items, args.out)
    print(f"{len(items)} step-completion item(s) written to {args.out}")
    return 0


def cmd_truthgen(args, cfg: RunConfig) -> int:
    items = []
    for n, rec in enumerate(_records(args.input)):
        if len(items) >= args.count:
            break
        f = parse(rec.exprs[0])
        if not is_quantified(f):
            items.append(make_truth_eval(f, derive_seed(cfg.dataset.seed, TRUTH_STREAM, n)))
    _write_items(items, args.out)
    print(f"{len(items)} truth item(s) written to {args.out}")
    return 0


def _client(args, cfg: RunConfig, items: Sequence):
    if args.stub == "gold":
        answers = {it.item_id: gold_response(it) for it in items}
        return CallableClient(lambda system, prompt, key: answers[key], model="stub-gold")
    if args.stub == "garbage":
        return CallableClient(lambda system, prompt, key: GARBAGE, model="stub-garbage")
    if args.replay:
        return ReplayClient(args.transcript, model=cfg.endpoint.model)
    return OpenAIChatClient(cfg.endpoint)


def cmd_score(args, cfg: RunConfig) -> int:
    items = _read_items(args.input)
    client = _client(args, cfg, items)
    transcript = None
    if args.transcript and not args.replay:
        transcript = TranscriptLog(args.transcript, cfg.digest())
    responses = query_many(client, items, cfg.endpoint.max_in_flight, transcript, progress=not args.quiet)

    scorer = {"1": score_task1, "2": score_task2, "tf": score_truth_eval}[args.task]
    card = scorer(items, responses)
    card.config_digest = cfg.digest()
    write_scorecard(card, args.report, plots=cfg.report.plots)
    if cfg.report.pdf or args.pdf:
        export_score_pdf(card, Path(args.report) / "score.pdf")
    summary = card.task1 or card.task2 or card.truth
    print(f"task {args.task}: " + ", ".join(f"{k}={v:.4f}" for k, v in summary.items()))
    return 0


def cmd_catalog_export(args, cfg: RunConfig) -> int:
    path = export_catalog(args.out)
    print(f"{len(load_catalog())} rules written to {path}")
    return 0


# -------------------------------------------------------------------
# Parser
# -------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--log-level", default="WARNING", type=str.upper,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    common.add_argument("--log-file")
    common.add_argument("--quiet", action="store_true", help="hide progress bars")

    p = argparse.ArgumentParser(prog="python -m core.cli", description="FOL reasoning-trace factory and diagnostics")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="generate trace splits")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--count", type=int, help="write one split of this size instead of the configured splits")
    g.add_argument("--split", default="train", choices=sorted(SPLIT_INDEX))
    g.add_argument("--workers", type=int)
    g.add_argument("--curated-per-rule", type=int)
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", parents=[common], help="oracle-check every step of a dataset")
    v.add_argument("--in", dest="input", required=True)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("stats", parents=[common], help="corpus statistics report")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--pdf", action="store_true")
    s.add_argument("--no-plots", action="store_true")
    s.set_defaults(func=cmd_stats)

    m = sub.add_parser("mask", parents=[common], help="build masked-prediction items")
    m.add_argument("--in", dest="input", required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--kind", default="all", choices=(*MASK_KINDS, "all"))
    m.add_argument("--count", type=int, default=1000)
    m.add_argument("--seed", type=int)
    m.set_defaults(func=cmd_mask)

    t = sub.add_parser("taskgen", parents=[common], help="build step-completion items")
    t.add_argument("--in", dest="input", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--blanks", type=int, default=1, choices=(1, 2))
    t.add_argument("--count", type=int, default=1000)
    t.set_defaults(func=cmd_taskgen)

    tf = sub.add_parser("truthgen", parents=[common], help="build True/False evaluation items")
    tf.add_argument("--in", dest="input", required=True)
    tf.add_argument("--out", required=True)
    tf.add_argument("--count", type=int, default=1000)
    tf.add_argument("--seed", type=int)
    tf.set_defaults(func=cmd_truthgen)

    sc = sub.add_parser("score", parents=[common], help="query a model and score its answers")
    sc.add_argument("--task", required=True, choices=("1", "2", "tf"))
    sc.add_argument("--in", dest="input", required=True)
    sc.add_argument("--report", required=True)
    sc.add_argument("--transcript", help="append-only request/response log")
    sc.add_argument("--replay", action="store_true", help="answer from --transcript instead of the endpoint")
    sc.add_argument("--stub", choices=("gold", "garbage"), help="offline stub endpoint")
    sc.add_argument("--pdf", action="store_true")
    sc.set_defaults(func=cmd_score)

    c = sub.add_parser("catalog-export", parents=[common], help="write the rule catalog as JSON")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_catalog_export)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    if getattr(args, "replay", False) and not args.transcript:
        print("error: --replay needs --transcript", file=sys.stderr)
        return 2

    try:
        configure_logging(args.log_level, args.log_file)
        cfg = _config(args)
        return args.func(args, cfg)
    except (FolTraceError, OSError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
