"""
dataset.py
----------
Line-delimited JSON records, split manifests, the local tokenizer and the
corpus statistics report.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator

import pandas as pd
from dateutil import parser as dtparser
from dateutil import tz

from core.catalog import CATALOG_VERSION
from core.complexity import circuit_complexity, original_complexity
from core.data_generator import TraceRecord
from core.errors import ParseError, SchemaError
from core.formula import depth
from core.logger import get_logger
from core.parser import parse

log = get_logger(__name__)

RECORD_FIELDS = tuple(f.name for f in fields(TraceRecord))
CHAIN_SEPARATOR = r" \Leftrightarrow "
TOKEN_PATTERN = re.compile(r"\\Leftrightarrow|<~>|->|[A-Za-z_][A-Za-z0-9_]*|[()~&|^,.]")
BUCKET_EDGES = (2, 4, 8, 12, 15, 20, 25)
START_BANDS = ((0, 9, "[0-9]"), (10, 19, "[10-19]"), (20, 29, "[20-29]"), (30, None, ">=30"))


@dataclass
class DatasetManifest:
    split: str
    record_count: int
    token_count: int
    config_digest: str
    catalog_version: str = CATALOG_VERSION
    metadata: dict = field(default_factory=dict)

    @property
    def created_at(self) -> datetime | None:
        stamp = self.metadata.get("created_at")
        return dtparser.isoparse(stamp) if stamp else None


# -------------------------------------------------------------------
# Tokens
# -------------------------------------------------------------------
def trace_text(record: TraceRecord | Iterable[str]) -> str:
    exprs = record.exprs if isinstance(record, TraceRecord) else list(record)
    return CHAIN_SEPARATOR.join(exprs)


def tokenize(text: str) -> list[str]:
    return TOKEN_PATTERN.findall(text)


def count_tokens(record: TraceRecord | str) -> int:
    text = record if isinstance(record, str) else trace_text(record)
    return len(tokenize(text))


# -------------------------------------------------------------------
# Validation
# -------------------------------------------------------------------
def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def check_record(rec: TraceRecord, metrics: bool = True) -> list[str]:
    """Invariant violations of one record (empty when valid). With ``metrics`` off
    only fields, types, lengths and step syntax are checked."""
    problems = []
    if not isinstance(rec.rule_id, str) or not rec.rule_id:
        problems.append("rule_id must be a nonempty string")
    if not _is_int(rec.seed):
        problems.append("seed must be an integer")
    if not isinstance(rec.rule, str):
        problems.append("rule must be a string")
    if not isinstance(rec.exprs, list) or not rec.exprs or not all(isinstance(e, str) for e in rec.exprs):
        return problems + ["exprs must be a nonempty list of strings"]
    for name in ("complexity_by_step", "elimination_complexity"):
        value = getattr(rec, name)
        if not isinstance(value, list) or not all(_is_int(v) and v >= 0 for v in value):
            problems.append(f"{name} must be a list of nonnegative integers")
    for name in ("program_complexity", "original_depth"):
        if not _is_int(getattr(rec, name)) or getattr(rec, name) < 0:
            problems.append(f"{name} must be a nonnegative integer")
    if problems:
        return problems

    if len(rec.complexity_by_step) != len(rec.exprs):
        problems.append(f"|complexity_by_step|={len(rec.complexity_by_step)} but |exprs|={len(rec.exprs)}")
    if len(rec.elimination_complexity) != len(rec.exprs) - 1:
        problems.append(
            f"|elimination_complexity|={len(rec.elimination_complexity)} but |exprs|-1={len(rec.exprs) - 1}"
        )
    try:
        parsed = [parse(e) for e in rec.exprs]
    except ParseError as e:
        return problems + [f"unparseable step: {e}"]
    if not metrics:
        return problems
    if len(rec.complexity_by_step) == len(parsed):
        for i, (f, c) in enumerate(zip(parsed, rec.complexity_by_step)):
            if circuit_complexity(f) != c:
                problems.append(f"complexity_by_step[{i}]={c} but the formula has {circuit_complexity(f)} gates")
                break
    if rec.original_depth != depth(parsed[0]):
        problems.append(f"original_depth={rec.original_depth} but exprs[0] has depth {depth(parsed[0])}")
    if rec.program_complexity < sum(rec.elimination_complexity):
        problems.append("program_complexity is below the sum of elimination_complexity")
    return problems


def record_to_json(rec: TraceRecord) -> str:
    return json.dumps({k: getattr(rec, k) for k in RECORD_FIELDS}, ensure_ascii=False)


def record_from_json(line: str, path: str = "<memory>", line_no: int = 1, metrics: bool = True) -> TraceRecord:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as e:
        raise SchemaError(path, line_no, f"invalid JSON: {e.msg}") from None
    if not isinstance(raw, dict):
        raise SchemaError(path, line_no, "record must be a JSON object")
    unknown = sorted(set(raw) - set(RECORD_FIELDS))
    missing = [k for k in RECORD_FIELDS if k not in raw]
    if unknown:
        raise SchemaError(path, line_no, f"unknown field(s): {', '.join(unknown)}")
    if missing:
        raise SchemaError(path, line_no, f"missing field(s): {', '.join(missing)}")
    rec = TraceRecord(**raw)
    problems = check_record(rec, metrics)
    if problems:
        raise SchemaError(path, line_no, problems[0])
    return rec


# -------------------------------------------------------------------
# Files
# -------------------------------------------------------------------
def manifest_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name.split(".")[0] + ".manifest.json")


def write_records(
    records: Iterable[TraceRecord], path: str | Path, split: str | None = None, config_digest: str = ""
) -> DatasetManifest:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = tokens = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for i, rec in enumerate(records, start=1):
            problems = check_record(rec)
            if problems:
                raise SchemaError(str(path), i, problems[0])
            f.write(record_to_json(rec) + "\n")
            count += 1
            tokens += count_tokens(rec)
    manifest = DatasetManifest(
        split=split or path.name.split(".")[0],
        record_count=count,
        token_count=tokens,
        config_digest=config_digest,
        metadata={"created_at": datetime.now(tz.tzutc()).isoformat()},
    )
    manifest_path(path).write_text(json.dumps(asdict(manifest), indent=2) + "\n", encoding="utf-8")
    log.info("wrote %d records (%d tokens) to %s", count, tokens, path)
    return manifest


def iter_records(path: str | Path, metrics: bool = True) -> Iterator[TraceRecord]:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if line.strip():
                yield record_from_json(line, str(path), line_no, metrics)


def read_records(path: str | Path) -> list[TraceRecord]:
    return list(iter_records(path))


def read_manifest(path: str | Path) -> DatasetManifest:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return DatasetManifest(**raw)


def dataset_files(path: str | Path) -> list[Path]:
    """A .jsonl file, or every .jsonl file of a directory (sorted)."""
    path = Path(path)
    if path.is_dir():
        return sorted(path.glob("*.jsonl"))
    return [path]


# -------------------------------------------------------------------
# Statistics
# -------------------------------------------------------------------
@dataclass
class StatsReport:
    record_count: int
    step0_circuit_hist: dict[int, int]
    original_hist: dict[int, int]
    program_hist: dict[int, int]
    steps_hist: dict[int, int]
    bucket_table: list[dict]
    trajectories: dict[str, list[float]]
    config_digest: str = ""

    def to_dict(self) -> dict:
        out = asdict(self)
        for k in ("step0_circuit_hist", "original_hist", "program_hist", "steps_hist"):
            out[k] = {str(key): v for key, v in out[k].items()}
        return out


def length_bucket(n_exprs: int) -> int | None:
    fitting = [e for e in BUCKET_EDGES if e <= n_exprs]
    return max(fitting) if fitting else None


def start_band(circuit: int) -> str:
    for low, high, label in START_BANDS:
        if circuit >= low and (high is None or circuit <= high):
            return label
    return START_BANDS[0][2]


def _hist(series: pd.Series) -> dict[int, int]:
    return {int(k): int(v) for k, v in series.value_counts().sort_index().items()}


def records_frame(records: Iterable[TraceRecord]) -> pd.DataFrame:
    rows = []
    for rec in records:
        first, last = parse(rec.exprs[0]), parse(rec.exprs[-1])
        rows.append({
            "rule_id": rec.rule_id,
            "n_exprs": len(rec.exprs),
            "steps": len(rec.exprs) - 1,
            "circuit_start": rec.complexity_by_step[0],
            "original_start": original_complexity(first),
            "original_end": original_complexity(last),
            "program": rec.program_complexity,
            "trajectory": list(rec.complexity_by_step),
        })
    return pd.DataFrame(rows)


def compute_stats(records: Iterable[TraceRecord], config_digest: str = "") -> StatsReport:
    df = records_frame(records)
    if df.empty:
        raise ValueError("cannot compute statistics of an empty corpus")
    # permutation invariance
    df = df.sort_values("rule_id", kind="mergesort").reset_index(drop=True)

    df["bucket"] = df["n_exprs"].map(length_bucket)
    bucketed = df.dropna(subset=["bucket"])
    table = (
        bucketed.groupby("bucket")
        .agg(n=("rule_id", "size"), start_mean=("original_start", "mean"), end_mean=("original_end", "mean"))
        .reset_index()
    )
    bucket_table = [
        {
            "bucket": int(r.bucket),
            "count": int(r.n),
            "start_mean": round(float(r.start_mean), 4),
            "end_mean": round(float(r.end_mean), 4),
            "delta": round(float(r.start_mean - r.end_mean), 4),
        }
        for r in table.itertuples(index=False)
    ]

    df["band"] = df["circuit_start"].map(start_band)
    # a finished chain holds its final complexity until the band's longest chain ends
    longest = df["trajectory"].map(len).groupby(df["band"]).transform("max")
    padded = [t + [t[-1]] * (n - len(t)) for t, n in zip(df["trajectory"], longest)]
    long = pd.DataFrame({"band": df["band"], "trajectory": padded}).explode("trajectory")
    long["step"] = long.groupby(level=0).cumcount()
    long["trajectory"] = long["trajectory"].astype(float)
    means = long.groupby(["band", "step"])["trajectory"].mean()
    trajectories = {
        label: [round(float(v), 4) for v in means.loc[label].sort_index().tolist()]
        for _, _, label in START_BANDS
        if label in means.index.get_level_values(0)
    }

    return StatsReport(
        record_count=len(df),
        step0_circuit_hist=_hist(df["circuit_start"]),
        original_hist=_hist(df["original_start"]),
        program_hist=_hist(df["program"]),
        steps_hist=_hist(df["steps"]),
        bucket_table=bucket_table,
        trajectories=trajectories,
        config_digest=config_digest,
    )
