"""
diagnostics.py
--------------
Builds and scores the diagnostic tasks run against language models.

Tasks:
    - masked operation prediction: one component, operator or predicate
      span of a formula is hidden behind <MASK>
    - step completion: the last one or two steps of a trace are blanked
    - truth evaluation: a formula under a drawn interpretation, answered
      with True or False
Scoring is pure; responses come from core.model_client.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from core.complexity import complexity_bucket, original_complexity
from core.data_generator import TraceRecord
from core.errors import ChainTooShort, NoMaskableSpan
from core.formula import FALSE, TRUE, Formula, atoms, evaluate, is_quantified, print_with_spans, substitute, to_text
from core.logger import get_logger
from core.parser import parse, try_parse
from core.verifier import equivalent

log = get_logger(__name__)

MASK = "<MASK>"
BLANK = "<BLANK>"
MASK_KINDS = ("component", "operator", "predicate")
ERROR_CLASSES = ("BothCorrect", "Step1Only", "Step2Only", "BothWrong", "ChainOnly", "Malformed")
CHAIN_SEPARATOR = r" \Leftrightarrow "
RESPONSE_SEPARATOR = re.compile(r"\s*(?:\\Leftrightarrow|⇔)\s*")

MASK_PROMPT = (
    "You are given a first-order logic expression where one {kind} is hidden (replaced by <MASK>).\n"
    "Respond with ONLY the hidden {kind} that should replace <MASK>, with no explanation, no quotes, no extra text."
)
STEP_PROMPTS = {
    1: (
        "You are given a first-order logic equivalence chain where the last step is missing (replaced by <BLANK>).\n"
        "Your task is to complete the chain by providing the final step that logically follows from the previous steps.\n"
        "The chain uses \\Leftrightarrow to separate each step, and each step should be a valid logical expression.\n"
        "Respond with ONLY the final step that should replace <BLANK>, with no explanation, no quotes, no extra text.\n"
        "The final step should be a complete logical expression in parentheses."
    ),
    2: (
        "You are given a first-order logic equivalence chain where the last 2 steps are missing (replaced by <BLANK>).\n"
        "Your task is to complete the chain by providing the final 2 steps that logically follow from the previous steps.\n"
        "The chain uses \\Leftrightarrow to separate each step, and each step should be a valid logical expression.\n"
        "Respond with ONLY the final 2 steps separated by \\Leftrightarrow that should replace the <BLANK>s, "
        "with no explanation, no quotes, no extra text.\n"
        "Each step should be a complete logical expression in parentheses."
    ),
}
TRUTH_PROMPT = "<bos> {formula} ⇔ __"


def _item_id(*parts) -> str:
    return hashlib.sha256("|".join(str(p) for p in parts).encode("utf-8")).hexdigest()[:16]


def _bucket(text: str) -> str:
    f = try_parse(text)
    return complexity_bucket(original_complexity(f)) if f is not None else "unknown"


# ============================================================
# Item types
# ============================================================
@dataclass
class MaskedInstance:
    item_id: str
    source: str
    mask_kind: str
    masked_text: str
    gold: str
    bucket: str = ""

    @property
    def system(self) -> str:
        return MASK_PROMPT.format(kind=self.mask_kind)

    @property
    def prompt(self) -> str:
        return self.masked_text

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class StepCompletionItem:
    item_id: str
    rule_id: str
    chain_prefix: list[str]
    blanks: int
    gold_steps: list[str]
    prompt: str
    bucket: str = ""

    @property
    def system(self) -> str:
        return STEP_PROMPTS[self.blanks]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TruthEvalItem:
    item_id: str
    formula: str
    interpretation: dict[str, bool]
    prompt: str
    gold: bool
    bucket: str = ""

    system = ""

    def to_dict(self) -> dict:
        return asdict(self)


ITEM_TYPES = {"mask": MaskedInstance, "step": StepCompletionItem, "truth": TruthEvalItem}


def item_from_dict(raw: Mapping) -> MaskedInstance | StepCompletionItem | TruthEvalItem:
    if "mask_kind" in raw:
        return MaskedInstance(**raw)
    if "blanks" in raw:
        return StepCompletionItem(**raw)
    return TruthEvalItem(**raw)


@dataclass
class StepScore:
    step_ok: list[bool]
    chain_ok: bool
    final_ok: bool
    error_class: str


@dataclass
class ScoreCard:
    task1: dict[str, float] = field(default_factory=dict)
    task2: dict[str, float] = field(default_factory=dict)
    truth: dict[str, float] = field(default_factory=dict)
    error_breakdown: dict[str, int] = field(default_factory=dict)
    stratified: list[dict] = field(default_factory=list)
    item_count: int = 0
    config_digest: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _stratify(df: pd.DataFrame, task: str, metrics: Sequence[str]) -> list[dict]:
    rows = []
    for bucket, group in df.groupby("bucket", sort=True):
        for metric in metrics:
            values = group[metric].dropna()
            if len(values):
                rows.append({
                    "task": task,
                    "bucket": bucket,
                    "metric": metric,
                    "count": int(len(values)),
                    "accuracy": round(float(values.mean()), 4),
                })
    return rows


def _check_lengths(items: Sequence, responses: Sequence) -> None:
    if len(items) != len(responses):
        raise ValueError(f"{len(items)} items but {len(responses)} responses")


# ============================================================
# Task 1: masked operation prediction
# ============================================================
def maskable_spans(f: Formula, kind: str):
    if kind not in MASK_KINDS:
        raise ValueError(f"unknown mask kind {kind!r}; expected one of {', '.join(MASK_KINDS)}")
    text, spans = print_with_spans(f)
    if kind == "component":
        return text, [s for s in spans if s.kind == "formula" and s.path]
    return text, [s for s in spans if s.kind == kind]


def make_masked(f: Formula, kind: str, seed: int) -> MaskedInstance:
    text, candidates = maskable_spans(f, kind)
    if not candidates:
        raise NoMaskableSpan(kind)
    rng = np.random.default_rng(seed)
    span = candidates[int(rng.integers(len(candidates)))]
    return MaskedInstance(
        item_id=_item_id(text, kind, seed),
        source=text,
        mask_kind=kind,
        masked_text=text[: span.start] + MASK + text[span.end :],
        gold=span.cut(text),
        bucket=complexity_bucket(original_complexity(f)),
    )


def _squash(s: str) -> str:
    return "".join(s.split())


def mask_correct(item: MaskedInstance, response: str) -> bool:
    if item.mask_kind == "component":
        predicted = try_parse(response.strip())
        return predicted is not None and predicted == parse(item.gold)
    return _squash(response) == _squash(item.gold)


def score_task1(items: Sequence[MaskedInstance], responses: Sequence[str]) -> ScoreCard:
    _check_lengths(items, responses)
    df = pd.DataFrame({
        "kind": [it.mask_kind for it in items],
        "bucket": [it.bucket for it in items],
        "correct": [mask_correct(it, r) for it, r in zip(items, responses)],
    })
    accuracies = {k: round(float(g["correct"].mean()), 4) for k, g in df.groupby("kind")}
    if accuracies:
        accuracies["overall"] = round(float(np.mean([accuracies[k] for k in MASK_KINDS if k in accuracies])), 4)
    return ScoreCard(task1=accuracies, stratified=_stratify(df, "task1", ["correct"]), item_count=len(items))


# ============================================================
# Task 2: step completion
# ============================================================
def make_step_completion(record: TraceRecord, blanks: int) -> StepCompletionItem:
    if blanks not in STEP_PROMPTS:
        raise ValueError("blanks must be 1 or 2")
    exprs = list(record.exprs)
    if len(exprs) <= blanks:
        raise ChainTooShort(len(exprs), blanks)
    prefix, gold = exprs[: len(exprs) - blanks], exprs[len(exprs) - blanks :]
    return StepCompletionItem(
        item_id=_item_id(record.rule_id, blanks),
        rule_id=record.rule_id,
        chain_prefix=prefix,
        blanks=blanks,
        gold_steps=gold,
        prompt=CHAIN_SEPARATOR.join(prefix + [BLANK] * blanks),
        bucket=_bucket(prefix[0]),
    )


def split_response(text: str, blanks: int) -> list[str] | None:
    """Predicted steps of a response, or None when the step count is off."""
    text = text.strip()
    if text.endswith("."):
        text = text[:-1].rstrip()
    steps = [s.strip() for s in RESPONSE_SEPARATOR.split(text)]
    if len(steps) != blanks or not all(steps):
        return None
    return steps


def _same(a: Formula, b: Formula) -> bool:
    return equivalent(a, b).ok


def score_step_completion(item: StepCompletionItem, response: str) -> StepScore:
    steps = split_response(response, item.blanks)
    predicted = [try_parse(s) for s in steps] if steps is not None else None
    if predicted is None or any(p is None for p in predicted):
        return StepScore([False] * item.blanks, False, False, "Malformed")

    gold = [parse(s) for s in item.gold_steps]
    step_ok = [_same(p, g) for p, g in zip(predicted, gold)]
    trajectory = [parse(s) for s in item.chain_prefix] + gold
    chain_ok = all(any(_same(p, g) for g in trajectory) for p in predicted)

    if item.blanks == 1:
        error_class = "BothCorrect" if step_ok[0] else "BothWrong"
    elif all(step_ok):
        error_class = "BothCorrect"
    elif step_ok[1]:
        error_class = "Step1Only"
    elif step_ok[0]:
        error_class = "Step2Only"
    else:
        error_class = "ChainOnly" if chain_ok else "BothWrong"
    return StepScore(step_ok, chain_ok, step_ok[-1], error_class)


def score_task2(items: Sequence[StepCompletionItem], responses: Sequence[str]) -> ScoreCard:
    _check_lengths(items, responses)
    rows = []
    for it, r in zip(items, responses):
        s = score_step_completion(it, r)
        two = it.blanks == 2
        rows.append({
            "bucket": it.bucket,
            "one_step": None if two else float(s.final_ok),
            "two_step": float(s.final_ok) if two else None,
            "two_step_chain": float(s.chain_ok) if two else None,
            "error_class": s.error_class if two else None,
        })
    df = pd.DataFrame(rows, columns=["bucket", "one_step", "two_step", "two_step_chain", "error_class"])
    metrics = ["one_step", "two_step", "two_step_chain"]
    task2 = {m: round(float(df[m].dropna().mean()), 4) for m in metrics if df[m].notna().any()}
    counts = df["error_class"].dropna().value_counts()
    breakdown = {c: int(counts.get(c, 0)) for c in ERROR_CLASSES}
    return ScoreCard(
        task2=task2, error_breakdown=breakdown, stratified=_stratify(df, "task2", metrics), item_count=len(items)
    )


# ============================================================
# One-step truth evaluation
# ============================================================
def make_truth_eval(f: Formula, seed: int) -> TruthEvalItem:
    if is_quantified(f):
        raise ValueError("truth evaluation needs a quantifier-free formula")
    names = sorted(atoms(f))
    draws = np.random.default_rng(seed).integers(0, 2, size=len(names))
    interp = {n: bool(v) for n, v in zip(names, draws)}
    grounded = substitute(f, {n: TRUE if v else FALSE for n, v in interp.items()})
    text = to_text(f)
    return TruthEvalItem(
        item_id=_item_id(text, seed),
        formula=text,
        interpretation=interp,
        prompt=TRUTH_PROMPT.format(formula=to_text(grounded)),
        gold=evaluate(f, interp),
        bucket=complexity_bucket(original_complexity(f)),
    )


def truth_answer(response: str) -> bool | None:
    tokens = response.split()
    if not tokens:
        return None
    first = tokens[0].strip(".,;:!\"'").lower()
    return {"true": True, "false": False}.get(first)


def score_truth_eval(items: Sequence[TruthEvalItem], responses: Sequence[str]) -> ScoreCard:
    _check_lengths(items, responses)
    df = pd.DataFrame({
        "bucket": [it.bucket for it in items],
        "correct": [truth_answer(r) == it.gold for it, r in zip(items, responses)],
        "gold": [it.gold for it in items],
    })
    truth = {}
    if len(df):
        truth = {
            "accuracy": round(float(df["correct"].mean()), 4),
            "gold_true_rate": round(float(df["gold"].mean()), 4),
        }
    return ScoreCard(truth=truth, stratified=_stratify(df, "truth", ["correct"]), item_count=len(items))


def gold_response(item) -> str:
    """The response a perfect model would give."""
    if isinstance(item, MaskedInstance):
        return item.gold
    if isinstance(item, StepCompletionItem):
        return CHAIN_SEPARATOR.join(item.gold_steps)
    return "True" if item.gold else "False"
