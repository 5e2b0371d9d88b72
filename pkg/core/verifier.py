"""
verifier.py
-----------
Truth-table oracle for quantifier-free formulas.

Rows are enumerated block-wise as numpy boolean columns: with the union atom
set sorted, atom i is bit i of the row index. The first differing row is the
witness, so verdicts are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from core.errors import ParseError
from core.formula import (
    And,
    Atom,
    Const,
    Formula,
    Implies,
    Not,
    Or,
    Xnor,
    Xor,
    atoms,
    is_quantified,
)
from core.logger import get_logger
from core.parser import parse

log = get_logger(__name__)

MAX_ATOMS = 20
BLOCK_ROWS = 1 << 16


class Status(str, Enum):
    EQUIVALENT = "Equivalent"
    NOT_EQUIVALENT = "NotEquivalent"
    ENTAILED = "Entailed"
    NOT_ENTAILED = "NotEntailed"
    MALFORMED = "Malformed"
    UNSUPPORTED = "Unsupported"


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Mapping[str, bool] | None = field(default=None, compare=False)
    detail: str | None = field(default=None, compare=False)

    @property
    def ok(self) -> bool:
        return self.status in (Status.EQUIVALENT, Status.ENTAILED)

    @property
    def skipped(self) -> bool:
        return self.status is Status.UNSUPPORTED

    def to_dict(self) -> dict:
        return {"status": self.status.value, "witness": dict(self.witness) if self.witness else None,
                "detail": self.detail}


# -------------------------------------------------------------------
# Column-wise evaluation
# -------------------------------------------------------------------
def evaluate_columns(f: Formula, columns: Mapping[str, np.ndarray], n_rows: int) -> np.ndarray:
    """Evaluate ``f`` over ``n_rows`` interpretations at once (one column per atom)."""
    if isinstance(f, Atom):
        return columns[f.name]
    if isinstance(f, Const):
        return np.full(n_rows, f.value, dtype=bool)
    if isinstance(f, Not):
        return ~evaluate_columns(f.child, columns, n_rows)
    if isinstance(f, Implies):
        return ~evaluate_columns(f.lhs, columns, n_rows) | evaluate_columns(f.rhs, columns, n_rows)
    if isinstance(f, (And, Or, Xor, Xnor)):
        stack = np.stack([evaluate_columns(c, columns, n_rows) for c in f.children])
        if isinstance(f, And):
            return stack.all(axis=0)
        if isinstance(f, Or):
            return stack.any(axis=0)
        parity = np.logical_xor.reduce(stack, axis=0)
        return parity if isinstance(f, Xor) else ~parity
    raise TypeError(f"quantified node {type(f).__name__} has no truth table")


def evaluate_stack(f: Formula, interpretation: Mapping[str, bool]) -> bool:
    """Iterative postfix evaluation, kept independent of formula.evaluate."""
    order: list[Formula] = []
    todo = [f]
    while todo:
        g = todo.pop()
        order.append(g)
        if isinstance(g, Not):
            todo.append(g.child)
        elif isinstance(g, Implies):
            todo.extend((g.lhs, g.rhs))
        elif isinstance(g, (And, Or, Xor, Xnor)):
            todo.extend(g.children)
    values: dict[int, bool] = {}
    for g in reversed(order):
        if isinstance(g, Atom):
            v = bool(interpretation[g.name])
        elif isinstance(g, Const):
            v = g.value
        elif isinstance(g, Not):
            v = not values[id(g.child)]
        elif isinstance(g, Implies):
            v = (not values[id(g.lhs)]) or values[id(g.rhs)]
        elif isinstance(g, And):
            v = all(values[id(c)] for c in g.children)
        elif isinstance(g, Or):
            v = any(values[id(c)] for c in g.children)
        elif isinstance(g, (Xor, Xnor)):
            odd = sum(values[id(c)] for c in g.children) % 2 == 1
            v = odd if isinstance(g, Xor) else not odd
        else:
            raise TypeError(f"quantified node {type(g).__name__} has no truth value")
        values[id(g)] = v
    return values[id(f)]


def row_blocks(names: Sequence[str]) -> Iterable[tuple[int, int, dict[str, np.ndarray]]]:
    """Yield (first row, row count, columns) blocks covering all 2**len(names) rows."""
    total = 1 << len(names)
    for start in range(0, total, BLOCK_ROWS):
        rows = np.arange(start, min(start + BLOCK_ROWS, total), dtype=np.int64)
        cols = {name: ((rows >> i) & 1).astype(bool) for i, name in enumerate(names)}
        yield start, len(rows), cols


def _witness(names: Sequence[str], row: int) -> dict[str, bool]:
    return {name: bool((row >> i) & 1) for i, name in enumerate(names)}


def _first_violation(a: Formula, b: Formula, entail: bool) -> tuple[bool, dict | None]:
    """Returns (supported, witness)."""
    if is_quantified(a) or is_quantified(b):
        return False, None
    names = sorted(atoms(a) | atoms(b))
    if len(names) > MAX_ATOMS:
        return False, None
    for start, n, cols in row_blocks(names):
        va = evaluate_columns(a, cols, n)
        vb = evaluate_columns(b, cols, n)
        bad = (va & ~vb) if entail else (va != vb)
        if bad.any():
            return True, _witness(names, start + int(np.argmax(bad)))
    return True, None


# -------------------------------------------------------------------
# Public checks
# -------------------------------------------------------------------
def equivalent(a: Formula, b: Formula) -> Verdict:
    supported, witness = _first_violation(a, b, entail=False)
    if not supported:
        return Verdict(Status.UNSUPPORTED, detail="quantified input or more than %d atoms" % MAX_ATOMS)
    if witness is not None:
        return Verdict(Status.NOT_EQUIVALENT, witness)
    return Verdict(Status.EQUIVALENT)


def entails(premise: Formula, conclusion: Formula) -> Verdict:
    supported, witness = _first_violation(premise, conclusion, entail=True)
    if not supported:
        return Verdict(Status.UNSUPPORTED, detail="quantified input or more than %d atoms" % MAX_ATOMS)
    if witness is not None:
        return Verdict(Status.NOT_ENTAILED, witness)
    return Verdict(Status.ENTAILED)


def check_text(a_text: str, b_text: str) -> Verdict:
    try:
        a, b = parse(a_text), parse(b_text)
    except ParseError as e:
        return Verdict(Status.MALFORMED, detail=str(e))
    return equivalent(a, b)


def verify_chain(exprs: Sequence[str], relation: str = "equivalence") -> list[Verdict]:
    """Verdict i compares exprs[i] with exprs[i+1]."""
    check = entails if relation == "entailment" else equivalent
    parsed: list[Formula | None] = []
    for text in exprs:
        try:
            parsed.append(parse(text))
        except ParseError:
            parsed.append(None)
    verdicts = []
    for a, b in zip(parsed, parsed[1:]):
        if a is None or b is None:
            verdicts.append(Verdict(Status.MALFORMED))
        else:
            verdicts.append(check(a, b))
    return verdicts


def chain_ok(verdicts: Sequence[Verdict]) -> bool:
    """Valid when no step failed; Unsupported steps are skipped."""
    return all(v.ok or v.skipped for v in verdicts)


def verify_record(record) -> list[Verdict]:
    """Check a TraceRecord, choosing entailment or equivalence from its rule id."""
    from core.catalog import relation_for_record_id

    relation = relation_for_record_id(record.rule_id)
    verdicts = verify_chain(record.exprs, relation)
    failed = [i for i, v in enumerate(verdicts) if not (v.ok or v.skipped)]
    if failed:
        log.debug("record %s: %d failing step(s), first at %d", record.rule_id, len(failed), failed[0])
    return verdicts
