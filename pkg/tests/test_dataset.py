import json

import pytest

from core.data_generator import ForgeJob, TraceRecord, generate_records
from core.dataset import (
    compute_stats,
    count_tokens,
    dataset_files,
    length_bucket,
    manifest_path,
    read_manifest,
    read_records,
    record_from_json,
    record_to_json,
    start_band,
    tokenize,
    trace_text,
    write_records,
)
from core.errors import SchemaError
from core.formula import depth
from core.parser import parse


def _rec(exprs, complexity, rule_id="r1"):
    return TraceRecord(
        rule_id=rule_id,
        seed=0,
        rule=exprs[0],
        exprs=exprs,
        complexity_by_step=complexity,
        elimination_complexity=[1] * (len(exprs) - 1),
        program_complexity=len(exprs) - 1,
        original_depth=depth(parse(exprs[0])),
    )


@pytest.fixture(scope="module")
def records():
    return list(generate_records(ForgeJob(top_seed=7, split=0), 25, progress=False))


def test_tokenizer():
    assert tokenize(r"(p <~> ~q) \Leftrightarrow Sunny(x)") == [
        "(", "p", "<~>", "~", "q", ")", r"\Leftrightarrow", "Sunny", "(", "x", ")",
    ]
    assert trace_text(["p", "q"]) == r"p \Leftrightarrow q"
    assert count_tokens("(p -> q)") == 5


def test_write_and_read_back(tmp_path, records):
    path = tmp_path / "train.jsonl"
    manifest = write_records(records, path, config_digest="abc")
    assert read_records(path) == records
    assert manifest.split == "train"
    assert manifest.record_count == len(records)
    assert manifest.token_count == sum(count_tokens(r) for r in records)

    on_disk = read_manifest(manifest_path(path))
    assert on_disk.config_digest == "abc"
    assert on_disk.created_at is not None and on_disk.created_at.tzinfo is not None


def test_writes_are_byte_identical(tmp_path, records):
    write_records(records, tmp_path / "a.jsonl")
    write_records(records, tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_schema_errors():
    good = json.loads(record_to_json(_rec(["(p & q)", "p"], [3, 1])))
    with pytest.raises(SchemaError):
        record_from_json("{not json")
    with pytest.raises(SchemaError):
        record_from_json(json.dumps({**good, "extra": 1}))
    missing = dict(good)
    del missing["seed"]
    with pytest.raises(SchemaError):
        record_from_json(json.dumps(missing))
    with pytest.raises(SchemaError) as e:
        record_from_json(json.dumps({**good, "complexity_by_step": [3, 2]}), "x.jsonl", 4)
    assert (e.value.path, e.value.line) == ("x.jsonl", 4)


def test_structural_read_skips_metric_checks():
    good = json.loads(record_to_json(_rec(["(p & q)", "p"], [3, 1])))
    stale = json.dumps({**good, "exprs": ["(p & q)", "~(p | q)"]})
    with pytest.raises(SchemaError):
        record_from_json(stale)
    assert record_from_json(stale, metrics=False).exprs == ["(p & q)", "~(p | q)"]
    for broken in ({**good, "exprs": ["(p &"]}, {**good, "complexity_by_step": [3]}, {**good, "seed": "0"}):
        with pytest.raises(SchemaError):
            record_from_json(json.dumps(broken), metrics=False)


def test_write_rejects_invalid_record(tmp_path):
    with pytest.raises(SchemaError):
        write_records([_rec(["(p & q)", "p"], [3, 1, 1])], tmp_path / "bad.jsonl")


def test_dataset_files(tmp_path):
    (tmp_path / "dev.jsonl").write_text("", encoding="utf-8")
    (tmp_path / "train.jsonl").write_text("", encoding="utf-8")
    assert [p.name for p in dataset_files(tmp_path)] == ["dev.jsonl", "train.jsonl"]
    assert dataset_files(tmp_path / "dev.jsonl") == [tmp_path / "dev.jsonl"]


@pytest.mark.parametrize("n, bucket", [(1, None), (2, 2), (3, 2), (4, 4), (13, 12), (40, 25)])
def test_length_bucket(n, bucket):
    assert length_bucket(n) == bucket


@pytest.mark.parametrize("c, band", [(0, "[0-9]"), (9, "[0-9]"), (10, "[10-19]"), (29, "[20-29]"), (30, ">=30")])
def test_start_band(c, band):
    assert start_band(c) == band


def test_stats_on_a_tiny_corpus():
    recs = [
        _rec(["(p & ~p)", "False"], [4, 1], "a"),
        _rec(["~~p", "p"], [3, 1], "b"),
        _rec(["((p -> q) & p)", "((~p | q) & p)", "(q & p)"], [5, 6, 3], "c"),
    ]
    report = compute_stats(recs)
    assert report.record_count == 3
    assert report.steps_hist == {1: 2, 2: 1}
    assert report.step0_circuit_hist == {3: 1, 4: 1, 5: 1}
    assert [row["bucket"] for row in report.bucket_table] == [2]
    assert report.bucket_table[0]["count"] == 3
    assert report.trajectories == {"[0-9]": [4.0, 2.6667, 1.6667]}
    assert compute_stats(list(reversed(recs))).to_dict() == report.to_dict()


def test_stats_on_empty_corpus():
    with pytest.raises(ValueError):
        compute_stats([])


def test_stats_on_generated_corpus(records):
    report = compute_stats(records)
    assert sum(report.steps_hist.values()) == len(records)
    assert sum(row["count"] for row in report.bucket_table) <= len(records)
    json.dumps(report.to_dict())
