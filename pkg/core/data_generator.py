"""
data_generator.py
-----------------
Synthetic trace generator.

Generates:
    - random formulas over a small alphabet (depth-bounded, seeded)
    - simplification traces of those formulas with every complexity field filled
    - curated traces of catalogued rules, instantiated with lexicon predicates
All randomness flows from one top-level seed through per-record derived seeds,
so a worker pool never perturbs the output.
"""

from __future__ import annotations

import hashlib
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
import yaml
from tqdm import tqdm

from core.catalog import RewriteRule, get_rule, rules_in_family
from core.complexity import circuit_complexity
from core.errors import ConfigError, LexiconExhausted, UnknownRule
from core.formula import (
    And,
    Atom,
    Formula,
    Implies,
    Or,
    depth,
    is_quantified,
    join,
    negate,
    predicate_args,
    predicate_head,
    substitute,
    to_text,
    walk,
)
from core.logger import get_logger
from core.parser import parse
from core.rewriter import DEFAULT_DEPTH_THRESHOLD, DEFAULT_MAX_STEPS, locate_visits, simplify_chain

log = get_logger(__name__)

DEFAULT_ALPHABET = tuple("abcdefgh")
DEFAULT_LEXICON = Path(__file__).parent / "resources" / "lexicon.yaml"
OPERATORS = ("And", "Or", "Not", "Implies")

_PREDICATE_NAME = re.compile(r"^[A-Z][A-Za-z0-9]*$")
_VARIABLE_NAME = re.compile(r"^[a-z][a-z0-9]*$")


@dataclass(frozen=True)
class GenParams:
    alphabet: tuple[str, ...] = DEFAULT_ALPHABET
    depth: int = 3
    max_variables: int = 8
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        if not self.alphabet:
            raise ValueError("alphabet must not be empty")
        if len(self.alphabet) > self.max_variables:
            raise ValueError(f"alphabet of {len(self.alphabet)} exceeds max_variables={self.max_variables}")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")


@dataclass
class TraceRecord:
    rule_id: str
    seed: int
    rule: str
    exprs: list[str]
    complexity_by_step: list[int]
    elimination_complexity: list[int]
    program_complexity: int
    original_depth: int

    @property
    def quantified(self) -> bool:
        return any(is_quantified(parse(e)) for e in self.exprs)

    @property
    def curated(self) -> bool:
        return ":" in self.rule_id


# ============================================================
# Seeds
# ============================================================
def derive_seed(top_seed: int, split: int, index: int) -> int:
    """64-bit per-record seed, independent of worker scheduling."""
    state = np.random.SeedSequence([top_seed, split, index]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def record_id(first_expr: str, seed: int) -> str:
    return hashlib.sha256(f"{first_expr}{seed}".encode("utf-8")).hexdigest()[:16]


# ============================================================
# Random formulas
# ============================================================
def draw_operator(rng: np.random.Generator) -> str:
    """One uniform draw from OPERATORS."""
    return OPERATORS[int(rng.integers(len(OPERATORS)))]


def _random_formula(rng: np.random.Generator, symbols: Sequence[str], d: int, count: int) -> tuple[Formula, int]:
    if d == 0:
        return Atom(symbols[int(rng.integers(len(symbols)))]), count + 1
    op = draw_operator(rng)
    if op == "Not":
        sub, count = _random_formula(rng, symbols, d - 1, count)
        return negate(sub), count + 1
    left, count = _random_formula(rng, symbols, d - 1, count)
    right, count = _random_formula(rng, symbols, d - 1, count)
    if op == "Implies":
        return Implies(left, right), count + 1
    return join(And if op == "And" else Or, (left, right)), count + 1


def random_formula(params: GenParams, count: int = 0) -> tuple[Formula, int]:
    """Draw a formula of depth at most ``params.depth``; count grows by one per drawn
    node. Same-operator nesting and double negation are folded as they are built,
    so folded nodes still count."""
    rng = np.random.default_rng(params.seed)
    return _random_formula(rng, params.alphabet, params.depth, count)


def params_for_seed(
    seed: int,
    alphabet: Sequence[str] = DEFAULT_ALPHABET,
    depth_min: int = 3,
    depth_max: int = 6,
    max_variables: int = 8,
) -> GenParams:
    if depth_min > depth_max:
        raise ConfigError(f"depth_min={depth_min} exceeds depth_max={depth_max}")
    d = int(np.random.default_rng([seed, 1]).integers(depth_min, depth_max + 1))
    return GenParams(tuple(alphabet), d, max_variables, seed)


def forge_record(
    params: GenParams,
    d_threshold: int = DEFAULT_DEPTH_THRESHOLD,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> TraceRecord:
    f, count = random_formula(params)
    chain = simplify_chain(f, d_threshold, max_steps, generation_count=count)
    exprs = [to_text(e) for e in chain.exprs]
    return TraceRecord(
        rule_id=record_id(exprs[0], params.seed),
        seed=params.seed,
        rule=exprs[0],
        exprs=exprs,
        complexity_by_step=[circuit_complexity(e) for e in chain.exprs],
        elimination_complexity=list(chain.elimination_complexity),
        program_complexity=chain.program_complexity,
        original_depth=depth(f),
    )


# ============================================================
# Lexicon
# ============================================================
@dataclass(frozen=True)
class PredicateLexicon:
    entries: dict = field(hash=False)  # domain tag -> list of (name, arity)
    variables: tuple[str, ...] = ("x", "y", "z", "w")

    def forms(self) -> list[tuple[str, int]]:
        return [p for domain in self.entries for p in self.entries[domain]]

    def surface(self, name: str, arity: int) -> str:
        return f"{name}({','.join(self.variables[:arity])})"

    def __len__(self) -> int:
        return len(self.forms())


def load_lexicon(path: str | Path | None = None) -> PredicateLexicon:
    path = Path(path) if path else DEFAULT_LEXICON
    with open(path, "r", encoding="utf-8") as f:
        raw = yaml.safe_load(f) or {}
    variables = tuple(raw.get("variables", ("x", "y", "z", "w")))
    for v in variables:
        if not _VARIABLE_NAME.match(v):
            raise ConfigError(f"{path}: bad variable name {v!r}")
    entries: dict[str, list[tuple[str, int]]] = {}
    seen: set[str] = set()
    for domain, preds in (raw.get("domains") or {}).items():
        entries[domain] = []
        for item in preds:
            name, arity = str(item["name"]), int(item.get("arity", 1))
            if not _PREDICATE_NAME.match(name) or name in ("True", "False"):
                raise ConfigError(f"{path}: bad predicate name {name!r}")
            if arity < 1 or arity > len(variables):
                raise ConfigError(f"{path}: predicate {name} has arity {arity}")
            if name in seen:
                raise ConfigError(f"{path}: duplicate predicate {name}")
            seen.add(name)
            entries[domain].append((name, arity))
    return PredicateLexicon(entries, variables)


# ============================================================
# Instantiation
# ============================================================
def _heads_in_order(exprs: Sequence[Formula]) -> list[str]:
    heads: list[str] = []
    for e in exprs:
        for _, g in walk(e):
            if isinstance(g, Atom) and predicate_head(g) not in heads:
                heads.append(predicate_head(g))
    return heads


def instantiate_exprs(exprs: Sequence[Formula], lex: PredicateLexicon, seed: int) -> list[Formula]:
    """Map every distinct predicate head to a distinct lexicon predicate, the
    same map for every step."""
    heads = _heads_in_order(exprs)
    forms = lex.forms()
    if len(forms) < len(heads):
        raise LexiconExhausted(len(heads), len(forms))
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(forms), size=len(heads), replace=False)
    chosen = {h: forms[int(i)] for h, i in zip(heads, picks)}

    mapping: dict[str, Formula] = {}
    for e in exprs:
        for _, g in walk(e):
            if not isinstance(g, Atom) or g.name in mapping:
                continue
            name, arity = chosen[predicate_head(g)]
            args = predicate_args(g)
            mapping[g.name] = Atom(f"{name}({','.join(args)})" if args else lex.surface(name, arity))
    return [substitute(e, mapping) for e in exprs]


def _complexity_fields(exprs: Sequence[Formula]) -> tuple[list[int], list[int]]:
    by_step = [circuit_complexity(e) for e in exprs]
    elim = [locate_visits(a, b) for a, b in zip(exprs, exprs[1:])]
    return by_step, elim


def _curated_record(rule: RewriteRule, lex: PredicateLexicon, seed: int) -> TraceRecord:
    exprs = instantiate_exprs(rule.exprs, lex, seed)
    texts = [to_text(e) for e in exprs]
    by_step, elim = _complexity_fields(exprs)
    return TraceRecord(
        rule_id=f"{rule.id}:{record_id(texts[0], seed)}",
        seed=seed,
        rule=rule.steps[0],
        exprs=texts,
        complexity_by_step=by_step,
        elimination_complexity=elim,
        program_complexity=sum(elim),
        original_depth=depth(exprs[0]),
    )


def instantiate_template(item: RewriteRule | TraceRecord, lex: PredicateLexicon, seed: int) -> TraceRecord:
    """Instantiate a catalogued rule or an existing record with lexicon predicates."""
    if isinstance(item, RewriteRule):
        return _curated_record(item, lex, seed)
    exprs = [to_text(e) for e in instantiate_exprs([parse(e) for e in item.exprs], lex, seed)]
    return replace(item, rule=exprs[0], exprs=exprs)


def forge_curated(rule_id: str, lex: PredicateLexicon, seed: int) -> TraceRecord:
    """Curated trace of a rule id (``DM.2``) or a family (``DM``: variant drawn by seed)."""
    try:
        variants = rules_in_family(rule_id)
    except UnknownRule:
        variants = [get_rule(rule_id)]
    rule = variants[int(np.random.default_rng([seed, 2]).integers(len(variants)))]
    record = _curated_record(rule, lex, seed)
    if record.quantified:
        log.debug("curated %s is quantified; it will not be oracle-checked", rule.id)
    return record


# ============================================================
# Corpus generation
# ============================================================
@dataclass(frozen=True)
class ForgeJob:
    top_seed: int
    split: int
    alphabet: tuple[str, ...] = DEFAULT_ALPHABET
    depth_min: int = 3
    depth_max: int = 6
    max_variables: int = 8
    d_threshold: int = DEFAULT_DEPTH_THRESHOLD
    max_steps: int = DEFAULT_MAX_STEPS


def _forge_indexed(job_and_index: tuple[ForgeJob, int]) -> TraceRecord:
    job, index = job_and_index
    seed = derive_seed(job.top_seed, job.split, index)
    params = params_for_seed(seed, job.alphabet, job.depth_min, job.depth_max, job.max_variables)
    return forge_record(params, job.d_threshold, job.max_steps)


def generate_records(job: ForgeJob, count: int, workers: int = 1, progress: bool = True) -> Iterator[TraceRecord]:
    """Yield ``count`` random records in index order."""
    tasks = ((job, i) for i in range(count))
    bar = tqdm(total=count, desc=f"forge split {job.split}", disable=not progress, unit="rec")
    try:
        if workers <= 1:
            for task in tasks:
                yield _forge_indexed(task)
                bar.update()
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for rec in pool.map(_forge_indexed, tasks, chunksize=256):
                    yield rec
                    bar.update()
    finally:
        bar.close()


def generate_curated(
    families: Sequence[str], per_rule: int, lex: PredicateLexicon, top_seed: int, split: int
) -> Iterator[TraceRecord]:
    for r, family in enumerate(families):
        for i in range(per_rule):
            yield forge_curated(family, lex, derive_seed(top_seed, split, (1 << 32) + r * per_rule + i))
