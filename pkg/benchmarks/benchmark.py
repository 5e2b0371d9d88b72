"""
benchmark.py
------------
Corpus-scale acceptance sweep. Generates one large split in memory, runs
every check over it and prints a PASS/FAIL table.

    python -m benchmarks.benchmark --count 50000 --seed 7
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from core.catalog import check_rule, load_catalog
from core.complexity import circuit_complexity, original_complexity
from core.data_generator import ForgeJob, derive_seed, generate_records, instantiate_exprs, load_lexicon
from core.dataset import compute_stats
from core.diagnostics import (
    MASK,
    MASK_KINDS,
    gold_response,
    make_masked,
    make_step_completion,
    make_truth_eval,
    score_task1,
    score_task2,
)
from core.errors import ChainTooShort, FolTraceError, NoMaskableSpan
from core.formula import atoms
from core.graph_builder import formula_graph, graph_circuit, graph_depth
from core.parser import parse
from core.verifier import evaluate_stack, verify_record


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _timed(name, fn, *args) -> CheckResult:
    start = time.time()
    passed, detail = fn(*args)
    return CheckResult(name, passed, detail, time.time() - start)


# -------------------------------------------------------------------
# Checks
# -------------------------------------------------------------------
def check_chain_soundness(records) -> tuple[bool, str]:
    failed = checked = 0
    for rec in tqdm(records, desc="soundness", unit="rec"):
        for v in verify_record(rec):
            if v.skipped:
                continue
            checked += 1
            failed += not v.ok
    return failed == 0, f"{checked} step pairs, {failed} failing"


def check_catalog() -> tuple[bool, str]:
    rules = load_catalog()
    bad = []
    for rule in rules:
        try:
            check_rule(rule)
        except FolTraceError:
            bad.append(rule.id)
    return not bad, f"{len(rules)} rules, failing: {', '.join(bad) or 'none'}"


def check_metrics(records, limit: int) -> tuple[bool, str]:
    mismatches = 0
    sample = records[:limit]
    for rec in sample:
        for text, c in zip(rec.exprs, rec.complexity_by_step):
            f = parse(text)
            G = formula_graph(f)
            if graph_circuit(G) != c or circuit_complexity(f) != c:
                mismatches += 1
            if original_complexity(f) != graph_circuit(G) + graph_depth(G) + len(atoms(f)):
                mismatches += 1
    return mismatches == 0, f"{len(sample)} records, {mismatches} mismatches"


def check_bucket_trend(report) -> tuple[bool, str]:
    table = [r for r in report.bucket_table if r["count"]]
    starts = [r["start_mean"] for r in table]
    monotone = all(a <= b for a, b in zip(starts, starts[1:]))
    shrinking = all(r["end_mean"] < r["start_mean"] for r in table)
    shown = " ".join(f"{r['bucket']}:{r['start_mean']:.2f}->{r['end_mean']:.2f}" for r in table)
    return monotone and shrinking, shown


def check_histogram_shape(report) -> tuple[bool, str]:
    steps = np.repeat(list(report.steps_hist), list(report.steps_hist.values()))
    mode = max(report.steps_hist, key=report.steps_hist.get)
    p95 = float(np.percentile(steps, 95))
    # the final step of a band may rise on a handful of long chains
    rising = [
        band for band, values in report.trajectories.items()
        if any(b > a for a, b in zip(values[:-2], values[1:-1]))
    ]
    return mode < p95 and not rising, f"mode={mode} p95={p95:.0f} rising bands: {rising or 'none'}"


def check_closed_loop(records, count: int) -> tuple[bool, str]:
    items = []
    for rec in records:
        if len(items) >= count:
            break
        try:
            items.append(make_step_completion(rec, 2))
        except ChainTooShort:
            continue
    gold = score_task2(items, [gold_response(it) for it in items])
    garbage = score_task2(items, ["((P |"] * len(items))
    ok = gold.task2 == {"two_step": 1.0, "two_step_chain": 1.0}
    ok = ok and garbage.error_breakdown["Malformed"] == len(items)
    return ok, f"{len(items)} items, gold={gold.task2}, malformed={garbage.error_breakdown['Malformed']}"


def check_mask_round_trip(records, count: int, seed: int) -> tuple[bool, str]:
    lex = load_lexicon()
    items = []
    for n, rec in enumerate(records):
        if len(items) >= count:
            break
        kind, item_seed = MASK_KINDS[n % len(MASK_KINDS)], derive_seed(seed, 3, n)
        f = parse(rec.exprs[0])
        if kind == "predicate":
            f = instantiate_exprs([f], lex, item_seed)[0]
        try:
            items.append(make_masked(f, kind, item_seed))
        except NoMaskableSpan:
            continue
    broken = sum(it.masked_text.replace(MASK, it.gold, 1) != it.source for it in items)
    card = score_task1(items, [it.gold for it in items])
    return broken == 0 and card.task1["overall"] == 1.0, f"{len(items)} items, {broken} broken"


def check_truth_consistency(records, count: int, seed: int) -> tuple[bool, str]:
    disagree = 0
    n = 0
    for i, rec in enumerate(records[:count]):
        item = make_truth_eval(parse(rec.exprs[0]), derive_seed(seed, 4, i))
        disagree += evaluate_stack(parse(item.formula), item.interpretation) != item.gold
        n += 1
    return disagree == 0, f"{n} items, {disagree} disagreements"


# -------------------------------------------------------------------
# Sweep
# -------------------------------------------------------------------
def run_benchmark(count: int, seed: int, workers: int) -> list[CheckResult]:
    print("\n==========================================")
    print(f"   Acceptance sweep: {count} records, seed {seed}")
    print("==========================================\n")

    start = time.time()
    records = list(generate_records(ForgeJob(seed, 0), count, workers=workers))
    print(f"Generated {len(records)} records in {time.time() - start:.1f}s")
    report = compute_stats(records)

    return [
        _timed("chain soundness", check_chain_soundness, records),
        _timed("catalog validity", check_catalog),
        _timed("metric recount", check_metrics, records, 10_000),
        _timed("bucket trend", check_bucket_trend, report),
        _timed("histogram shape", check_histogram_shape, report),
        _timed("closed loop", check_closed_loop, records, 2_000),
        _timed("mask round-trip", check_mask_round_trip, records, 5_000, seed),
        _timed("truth consistency", check_truth_consistency, records, 5_000, seed),
    ]


def print_table(results: list[CheckResult]) -> None:
    print("\n" + "=" * 100)
    print(f"| {'Check':<20} | {'Result':^6} | {'Time':^9} | {'Detail':<52} |")
    print("|" + "-" * 22 + "+" + "-" * 8 + "+" + "-" * 11 + "+" + "-" * 54 + "|")
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"| {r.name:<20} | {status:^6} | {r.seconds:7.2f} s | {r.detail[:52]:<52} |")
    print("=" * 100 + "\n")


def main() -> int:
    p = argparse.ArgumentParser(description="corpus-scale acceptance sweep")
    p.add_argument("--count", type=int, default=50_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()

    results = run_benchmark(args.count, args.seed, args.workers)
    print_table(results)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    raise SystemExit(main())
