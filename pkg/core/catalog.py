"""
catalog.py
----------
The named rewrite rules: inference rules, basic properties, elimination
identities E0-E33 and complex compositions C1-C23.

Every rule is written as a list of canonical-grammar steps. Step 0 is the
pattern, the last step the result, anything between is an intermediate form
used when a curated trace is emitted. Atoms in a pattern are metavariables.
Premise sets are stored as one conjunction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Mapping

from core.complexity import circuit_complexity
from core.errors import CatalogError, UnknownRule
from core.formula import Atom, Const, Formula, atoms, children, is_quantified, substitute
from core.logger import get_logger
from core.parser import parse
from core.verifier import entails, equivalent

log = get_logger(__name__)

CATALOG_VERSION = "1.0"

ENTAILS = "⊨"
IMPLIES = "→"
IFF = "↔"


@dataclass(frozen=True)
class RewriteRule:
    id: str
    family: str
    category: str  # inference | property | elimination | complex
    arrow: str
    steps: tuple[str, ...]
    name: str = ""
    combination: str | None = None
    training: bool | None = None

    @property
    def exprs(self) -> tuple[Formula, ...]:
        return _parsed(self.steps)

    @property
    def pattern(self) -> Formula:
        return self.exprs[0]

    @property
    def result(self) -> Formula:
        return self.exprs[-1]

    @property
    def intermediates(self) -> tuple[Formula, ...]:
        return self.exprs[1:-1]

    @property
    def relation(self) -> str:
        return "equivalence" if self.arrow == IFF else "entailment"

    @property
    def quantified(self) -> bool:
        return any(is_quantified(e) for e in self.exprs)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "family": self.family,
            "category": self.category,
            "name": self.name,
            "arrow": self.arrow,
            "pattern": self.steps[0],
            "result": self.steps[-1],
            "intermediates": list(self.steps[1:-1]),
            "combination": self.combination,
            "training": self.training,
        }


@lru_cache(maxsize=None)
def _parsed(steps: tuple[str, ...]) -> tuple[Formula, ...]:
    return tuple(parse(s) for s in steps)


def _variants(family, category, arrow, name, *variants, **extra):
    """Multi-line table entries: first variant keeps the bare id, later ones get .2, .3 ..."""
    out = []
    for i, steps in enumerate(variants):
        rid = family if i == 0 else f"{family}.{i + 1}"
        out.append(RewriteRule(rid, family, category, arrow, tuple(steps), name, **extra))
    return out


def _complex(cid, combination, training, arrow, *steps):
    return RewriteRule(cid, cid, "complex", arrow, tuple(steps), "", combination, training)


def _elim(eid, *steps):
    return RewriteRule(eid, eid, "elimination", IFF, tuple(steps))


# -------------------------------------------------------------------
# Inference rules
# -------------------------------------------------------------------
_INFERENCE = [
    *_variants("BD", "inference", ENTAILS, "Bidirectional Dilemma",
               ["((p -> q) & (r -> s) & (p | ~s))", "(q | ~r)"]),
    *_variants("CD", "inference", ENTAILS, "Constructive Dilemma",
               ["((p -> q) & (r -> s) & (p | r))", "(q | s)"]),
    *_variants("DD", "inference", ENTAILS, "Destructive Dilemma",
               ["((p -> q) & (r -> s) & (~q | ~s))", "(~p | ~r)"]),
    *_variants("DS", "inference", ENTAILS, "Disjunctive Syllogism", ["((p | q) & ~p)", "q"]),
    *_variants("HS", "inference", ENTAILS, "Hypothetical Syllogism", ["((p -> q) & (q -> r))", "(p -> r)"]),
    *_variants("MP", "inference", ENTAILS, "Modus Ponens", ["((p -> q) & p)", "q"]),
    *_variants("MT", "inference", ENTAILS, "Modus Tollens", ["((p -> q) & ~q)", "~p"]),
    *_variants("UI", "inference", ENTAILS, "Universal Instantiation", ["forall x. P(x)", "exists a. P(a)"]),
    *_variants("EG", "inference", ENTAILS, "Existential Generalization", ["exists x. P(x)", "P(a)"]),
]

# -------------------------------------------------------------------
# Basic properties
# -------------------------------------------------------------------
_PROPERTIES = [
    *_variants("Dist", "property", IFF, "Distributive",
               ["(p | (q & r))", "((p | q) & (p | r))"],
               ["(p & (q | r))", "((p & q) | (p & r))"]),
    *_variants("AS", "property", IFF, "Association",
               ["(p | (q | r))", "((p | q) | r)"],
               ["(p & (q & r))", "((p & q) & r)"]),
    *_variants("TT", "property", IFF, "Tautology", ["p", "(p | p)"], ["p", "(p & p)"]),
    *_variants("TS", "property", IFF, "Transposition", ["(p -> q)", "(~q -> ~p)"]),
    *_variants("IM", "property", IFF, "Importation", ["(p -> (q -> r))", "((p & q) -> r)"]),
    *_variants("EX", "property", IMPLIES, "Exportation", ["((p & q) -> r)", "(p -> (q -> r))"]),
    *_variants("DN", "property", IFF, "Double Negation", ["p", "~~p"]),
    *_variants("DM", "property", IFF, "De Morgan's Law",
               ["~(p & q)", "(~p | ~q)"],
               ["~(p | q)", "(~p & ~q)"]),
    *_variants("NX", "property", IFF, "Negation of XOR",
               ["~(p ^ q)", "(~p ^ q)"],
               ["~(p ^ q)", "(p <~> q)"]),
    *_variants("NN", "property", IFF, "Negation of XNOR",
               ["~(p <~> q)", "(~p <~> q)"],
               ["~(p <~> q)", "(p ^ q)"]),
]

# -------------------------------------------------------------------
# Elimination identities
# -------------------------------------------------------------------
_ELIMINATION = [
    _elim("E0", "(p | True)", "True"),
    _elim("E1", "(p | False)", "p"),
    _elim("E2", "(p & True)", "p"),
    _elim("E3", "(p & False)", "False"),
    _elim("E4", "(True | p)", "True"),
    _elim("E5", "(False | p)", "p"),
    _elim("E6", "(True & p)", "p"),
    _elim("E7", "(False & p)", "False"),
    _elim("E8", "(p | p)", "p"),
    _elim("E9", "(p & p)", "p"),
    _elim("E10", "(p & ~p)", "False"),
    _elim("E11", "(p | ~p)", "True"),
    _elim("E12", "(~p & p)", "False"),
    _elim("E13", "(~p | p)", "True"),
    _elim("E14", "(p & (p | q))", "p"),
    _elim("E15", "(p & (~p | q))", "((p & ~p) | (p & q))", "(False | (p & q))", "(p & q)"),
    _elim("E16", "(p & (~p | q))", "(False | (p & q))", "(p & q)"),
    _elim("E17", "(p & (~p | q))", "((p & ~p) | (p & q))", "(p & q)"),
    _elim("E18", "(p | (p & q))", "p"),
    _elim("E19", "(p | (p & q & r))", "p"),
    _elim("E20", "(r | (p & q & r))", "r"),
    _elim("E21", "(r | (p & q & r & s))", "r"),
    _elim("E22", "(p | (~p & q))", "((p | ~p) & (p | q))", "(True & (p | q))", "(p | q)"),
    _elim("E23", "(p | (~p & q))", "(True & (p | q))", "(p | q)"),
    _elim("E24", "(p | (~p & q))", "((p | ~p) & (p | q))", "(p | q)"),
    _elim("E25", "(p | ~(p & q))", "(p | (~p | ~q))", "((p | ~p) | ~q)", "(True | ~q)", "True"),
    _elim("E26", "(p | ~(p & q))", "(p | (~p | ~q))", "(p | ~p | ~q)", "(True | ~q)", "True"),
    _elim("E27", "(p | ~(p & q))", "((p | ~p) | ~q)", "(True | ~q)", "True"),
    _elim("E28", "(p | ~(p & q))", "(p | (~p | ~q))", "(True | ~q)", "True"),
    _elim("E29", "(p | ~(p & q))", "(p | (~p | ~q))", "((p | ~p) | ~q)", "True"),
    _elim("E30", "(p & ~(p | q))", "(p & (~p & ~q))", "((p & ~p) & ~q)", "(False & ~q)", "False"),
    _elim("E31", "(p & ~(p | q))", "((p & ~p) & ~q)", "(False & ~q)", "False"),
    _elim("E32", "(p & ~(p | q))", "(p & (~p & ~q))", "(False & ~q)", "False"),
    _elim("E33", "(p & ~(p | q))", "(p & (~p & ~q))", "((p & ~p) & ~q)", "False"),
]

# -------------------------------------------------------------------
# Complex compositions (no C16 / C19 rows)
# -------------------------------------------------------------------
_COMPLEX = [
    _complex("C1", "MT + DM", False, IMPLIES, "(((a | b) -> q) & ~q)", "(~a & ~b)"),
    _complex("C2", "MT + DM + DN", True, IMPLIES, "(((a & ~b) -> q) & ~q)", "(~a | b)"),
    _complex("C3", "TS + DD", True, IMPLIES,
             "((p -> q) & (q -> r) & (s -> t) & (~t | ~r))", "(~p | ~s)"),
    _complex("C4", "DS + AS", True, IFF,
             "(p | (q & (a | b)))", "((p | q) & ((p | a) | b))"),
    _complex("C5", "DS + AS", True, IFF,
             "(p & ((a & b) | q | r))",
             "(((p & a) & b) | (p & q) | (p & r))",
             "(((p & a) & b) | (p & (q | r)))"),
    _complex("C6", "DS + AS", False, IFF,
             "((p & q & r) | (a & p & b) | (c & d & e))",
             "((p & ((q & r) | (a & b))) | (c & d & e))"),
    _complex("C7", "DS + AS", True, IFF,
             "(p | (q & r & (a | b) & s))",
             "((p | q) & (p | r) & (p | a | b) & (p | s))"),
    _complex("C8", "DS + AS + TT", True, IFF,
             "(p | (q & (p | b) & r))",
             "((p | q) & (p | b) & (p | r))",
             "(p | (q & b & r))"),
    _complex("C9", "DS + DM + DN", False, IFF,
             "~(p | (q & (~a | b) & ~r))",
             "~((p | q) & (p | ~a | b) & (p | ~r))",
             "(~(p | q) | ~(p | ~a | b) | ~(p | ~r))",
             "((~p & ~q) | (~p & a & ~b) | (~p & r))",
             "(~p & (~q | (a & ~b) | r))"),
    _complex("C10", "TS + DN", True, IFF, "(~p -> q)", "(~q -> p)"),
    _complex("C11", "TS + DN", True, IFF, "(p -> ~q)", "(q -> ~p)"),
    _complex("C12", "TS + DM", False, IFF, "((a & b) -> q)", "(~q -> (~a | ~b))"),
    _complex("C13", "TS + DM", True, IFF, "(p -> (~a | ~b))", "((a & b) -> ~p)"),
    _complex("C14", "DM + NX", True, IFF, "~((a | b) ^ c ^ d)", "(~(a | b) ^ ~c ^ ~d)"),
    _complex("C15", "DM + NX", False, IFF, "~(c ^ (~a | b) ^ d)", "(~c ^ (a & ~b) ^ ~d)"),
    _complex("C17", "DM + NN", True, IFF, "~(p <~> q <~> (a | ~b))", "(~p <~> ~q <~> (~a & b))"),
    _complex("C18", "DD + DN + DM + AS + TT", False, IMPLIES,
             "(((a & b) -> q) & ((a & ~c) -> s) & (~q | ~s))",
             "((~a | ~b) | (~a | c))",
             "(~a | ~b | c)",
             "~(a & b & ~c)"),
    _complex("C20", "CD + AS", True, IMPLIES,
             "(((a | b) -> q) & (r -> s) & (a | b | r))", "(q | s)"),
    _complex("C21", "CD + AS", True, IMPLIES,
             "((p -> (a | b)) & (r -> s) & (p | r))", "(a | (b | s))"),
    _complex("C22", "BD + DN + DM + DS", False, IMPLIES,
             "((p -> q) & ((a | ~b) -> s) & (p | ~s))",
             "(q | (~a & b))",
             "((q | ~a) & (q | b))"),
    _complex("C23", "BD + DM + AS", True, IMPLIES,
             "((p -> q) & ((~a & ~b) -> s) & (p | ~s))",
             "(q | ~(~a & ~b))",
             "((q | a) | b)"),
]


# -------------------------------------------------------------------
# Loading and checks
# -------------------------------------------------------------------
def check_rule(rule: RewriteRule) -> None:
    """Raise CatalogError when a step of a quantifier-free rule is unsound."""
    if rule.quantified:
        return
    if not atoms(rule.result) <= atoms(rule.pattern):
        raise CatalogError(f"{rule.id}: result uses metavariables absent from the pattern")
    check = equivalent if rule.relation == "equivalence" else entails
    for i, (a, b) in enumerate(zip(rule.exprs, rule.exprs[1:])):
        verdict = check(a, b)
        if not verdict.ok:
            raise CatalogError(
                f"{rule.id}: step {i} {rule.steps[i]!r} {rule.arrow} {rule.steps[i + 1]!r} fails "
                f"({verdict.status.value}, witness {dict(verdict.witness or {})})"
            )


@lru_cache(maxsize=1)
def _load() -> tuple[RewriteRule, ...]:
    rules = tuple(_INFERENCE + _PROPERTIES + _ELIMINATION + _COMPLEX)
    for rule in rules:
        check_rule(rule)
    log.debug("catalog %s loaded: %d rules", CATALOG_VERSION, len(rules))
    return rules


def load_catalog() -> list[RewriteRule]:
    return list(_load())


def get_rule(rule_id: str) -> RewriteRule:
    for rule in _load():
        if rule.id == rule_id:
            return rule
    raise UnknownRule(rule_id)


def rules_in_family(family: str) -> list[RewriteRule]:
    found = [r for r in _load() if r.family == family]
    if not found:
        raise UnknownRule(family)
    return found


def relation_for_record_id(record_id: str) -> str:
    """Random records (bare hash) are equivalence chains; curated ones follow their rule."""
    if ":" not in record_id:
        return "equivalence"
    return get_rule(record_id.split(":", 1)[0]).relation


def export_catalog(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"version": CATALOG_VERSION, "rules": [r.to_dict() for r in _load()]}
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


# -------------------------------------------------------------------
# Pattern matching
# -------------------------------------------------------------------
def match(pattern: Formula, f: Formula, bindings: Mapping[str, Formula] | None = None) -> dict | None:
    """Bind pattern atoms to subformulas of ``f``; None when the shapes differ.
    N-ary nodes match only with the same arity, child by child."""
    b = dict(bindings or {})
    if isinstance(pattern, Atom):
        bound = b.get(pattern.name)
        if bound is None:
            b[pattern.name] = f
            return b
        return b if bound == f else None
    if isinstance(pattern, Const):
        return b if pattern == f else None
    if type(pattern) is not type(f):
        return None
    pk, fk = children(pattern), children(f)
    if len(pk) != len(fk):
        return None
    for p, g in zip(pk, fk):
        b = match(p, g, b)
        if b is None:
            return None
    return b


def oriented(rule: RewriteRule) -> tuple[Formula, Formula]:
    """(lhs, rhs) in the simplifying direction: the smaller side on the right."""
    if circuit_complexity(rule.result) <= circuit_complexity(rule.pattern):
        return rule.pattern, rule.result
    return rule.result, rule.pattern


def apply_rule(rule: RewriteRule, f: Formula) -> Formula | None:
    lhs, rhs = oriented(rule)
    b = match(lhs, f)
    return None if b is None else substitute(rhs, b)
