from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Tuple

from core.catalog import RewriteRule, apply_rule, get_rule
from core.formula import (
    FALSE,
    TRUE,
    And,
    Formula,
    Implies,
    Not,
    Or,
    Path,
    children,
    depth,
    is_constant,
    is_leaf,
    is_literal,
    join,
    negate,
    splice,
)

DEFAULT_DEPTH_THRESHOLD = 2
DEFAULT_MAX_STEPS = 30
IMPLIES_EXPANSION_DEPTH = 5

# root-level identities tried by shallow_simplify, first match wins
SHALLOW_ORDER = (
    "E0", "E1", "E2", "E3", "E4", "E5", "E6", "E7",
    "E8", "E9", "E10", "E11", "E12", "E13",
    "DN", "TT", "TT.2",
)


@dataclass
class PassResult:
    output: Formula
    changed: bool
    visits: int
    rule_fired: Optional[str] = None
    site: Optional[Path] = None  # path of the rewritten node in the input


@dataclass
class ChainResult:
    exprs: List[Formula]
    elimination_complexity: List[int]
    program_complexity: int
    terminated: bool
    rules: List[str] = field(default_factory=list)


@lru_cache(maxsize=1)
def _shallow_rules() -> Tuple[RewriteRule, ...]:
    return tuple(get_rule(rid) for rid in SHALLOW_ORDER)


def shallow_simplify_rule(f: Formula) -> Tuple[Formula, Optional[str]]:
    for rule in _shallow_rules():
        out = apply_rule(rule, f)
        if out is not None and out != f:
            return out, rule.id
    return f, None


def shallow_simplify(f: Formula) -> Formula:
    return shallow_simplify_rule(f)[0]


def _literal_clause(f: Formula) -> bool:
    return isinstance(f, (And, Or)) and all(is_literal(c) for c in f.children)


def _shallow(f: Formula) -> bool:
    return depth(f) < 2 or _literal_clause(f)


# -------------------------------------------------------------------
# Clause normalisation (one rewrite per call)
# -------------------------------------------------------------------
def _complementary(a: Formula, b: Formula) -> bool:
    return a == Not(b) or b == Not(a)


def _rebuild(kind, kids) -> Formula:
    kids = tuple(kids)
    return kids[0] if len(kids) == 1 else kind(kids)


def normalize_clause(f: Formula) -> Tuple[Formula, Optional[str]]:
    """Apply the first applicable clause identity at the root of an And/Or node."""
    if not isinstance(f, (And, Or)):
        return f, None
    kind = type(f)
    dual = Or if kind is And else And
    kids = f.children
    is_and = kind is And
    annihilator, identity = (FALSE, TRUE) if is_and else (TRUE, FALSE)

    # AS: flatten the first nested same-operator child
    for i, c in enumerate(kids):
        if type(c) is kind:
            return kind(kids[:i] + c.children + kids[i + 1:]), "AS"

    # E0/E4, E3/E7: annihilating constant
    for i, c in enumerate(kids):
        if c == annihilator:
            if is_and:
                return FALSE, "E7" if i == 0 else "E3"
            return TRUE, "E4" if i == 0 else "E0"

    # E1/E5, E2/E6: identity constant
    for i, c in enumerate(kids):
        if c == identity:
            rid = ("E6" if i == 0 else "E2") if is_and else ("E5" if i == 0 else "E1")
            return _rebuild(kind, kids[:i] + kids[i + 1:]), rid

    # E8/E9: duplicate child
    for j, c in enumerate(kids):
        if c in kids[:j]:
            return _rebuild(kind, kids[:j] + kids[j + 1:]), "E9" if is_and else "E8"

    # E10-E13: complementary children
    for i, a in enumerate(kids):
        for b in kids[i + 1:]:
            if _complementary(a, b):
                negated_first = isinstance(a, Not) and a.child == b
                if is_and:
                    return FALSE, "E12" if negated_first else "E10"
                return TRUE, "E13" if negated_first else "E11"

    # E14, E18-E21: absorption
    for i, x in enumerate(kids):
        for j, y in enumerate(kids):
            if i != j and type(y) is dual and x in y.children:
                if is_and:
                    rid = "E14"
                elif len(y.children) == 2:
                    rid = "E18"
                elif len(y.children) == 3:
                    rid = "E19" if y.children[0] == x else "E20"
                else:
                    rid = "E21"
                return _rebuild(kind, kids[:j] + kids[j + 1:]), rid

    # E17/E24: complement absorption
    for i, x in enumerate(kids):
        for j, y in enumerate(kids):
            if i == j or type(y) is not dual:
                continue
            for k, z in enumerate(y.children):
                if _complementary(x, z):
                    shrunk = _rebuild(dual, y.children[:k] + y.children[k + 1:])
                    return splice(kind, kids, j, shrunk), "E17" if is_and else "E24"

    return f, None


# -------------------------------------------------------------------
# One pass
# -------------------------------------------------------------------
class _Pass:
    """Call-local counters of one traversal."""

    def __init__(self):
        self.visits = 0
        self.rule: Optional[str] = None
        self.site: Optional[Path] = None

    @property
    def simplified_once(self) -> bool:
        return self.rule is not None

    def fire(self, rule: str, path: Path, out: Formula) -> Formula:
        self.rule, self.site = rule, path
        return out

    def traverse(self, expr: Formula, d: int, path: Path) -> Formula:
        self.visits += 1
        if self.simplified_once:
            return expr

        if depth(expr) < d or _literal_clause(expr):
            for i in range(d):
                if i < 2:
                    out, rule = shallow_simplify_rule(expr)
                    if rule is not None:
                        return self.fire(rule, path, out)
                else:
                    out = self.traverse(expr, i, path)
                    if out != expr:
                        return out

        if isinstance(expr, Not):
            return self._negation(expr, d, path)
        if isinstance(expr, Implies):
            return self._implication(expr, d, path)
        if isinstance(expr, (And, Or)):
            return self._clause(expr, d, path)
        # Xor, Xnor and quantified nodes are opaque
        return expr

    def _negation(self, expr: Not, d: int, path: Path) -> Formula:
        c = expr.child
        if c == TRUE:
            return self.fire("NOT-TRUE", path, FALSE)
        if c == FALSE:
            return self.fire("NOT-FALSE", path, TRUE)
        if isinstance(c, Not):
            return self.fire("DN", path, c.child)
        if isinstance(c, Or):
            return self.fire("DM.2", path, join(And, [negate(x) for x in c.children]))
        if isinstance(c, And):
            return self.fire("DM", path, join(Or, [negate(x) for x in c.children]))
        return negate(self.traverse(c, d, path + (0,)))

    def _implication(self, expr: Implies, d: int, path: Path) -> Formula:
        lhs, rhs = expr.lhs, expr.rhs
        if lhs == rhs:
            return self.fire("IMP-SELF", path, TRUE)
        if is_leaf(lhs) and is_leaf(rhs):
            out = _implication_constants(lhs, rhs)
            if out is not None:
                return self.fire("IMP-CONST", path, out)
        if depth(expr) < IMPLIES_EXPANSION_DEPTH:
            return self.fire("IMP-MAT", path, join(Or, (negate(lhs), rhs)))
        return Implies(self.traverse(lhs, d, path + (0,)), self.traverse(rhs, d, path + (1,)))

    def _clause(self, expr: Formula, d: int, path: Path) -> Formula:
        out, rule = normalize_clause(expr)
        if rule is not None:
            return self.fire(rule, path, out)
        kids = children(expr)
        for i, arg in enumerate(kids):
            if _shallow(arg):
                simplified, rule = shallow_simplify_rule(arg)
                if rule is not None:
                    return self.fire(rule, path + (i,), splice(type(expr), kids, i, simplified))
        outs = [self.traverse(arg, d, path + (i,)) for i, arg in enumerate(kids)]
        for i, (arg, out) in enumerate(zip(kids, outs)):
            if out != arg:
                return splice(type(expr), kids, i, out)
        return expr


def _implication_constants(lhs: Formula, rhs: Formula) -> Optional[Formula]:
    if lhs == FALSE or rhs == TRUE:
        return TRUE
    if lhs == TRUE:
        return rhs
    if rhs == FALSE:
        return Not(lhs)
    return None


def get_depth_threshold_pass(f: Formula, d: int = DEFAULT_DEPTH_THRESHOLD) -> PassResult:
    if d < 1:
        raise ValueError("depth threshold must be >= 1")
    state = _Pass()
    out = state.traverse(f, d, ())
    changed = state.simplified_once and out != f
    return PassResult(out if changed else f, changed, state.visits, state.rule, state.site)


def simplify_chain(
    f: Formula,
    d: int = DEFAULT_DEPTH_THRESHOLD,
    max_steps: int = DEFAULT_MAX_STEPS,
    generation_count: int = 0,
) -> ChainResult:
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    exprs = [f]
    elim: List[int] = []
    rules: List[str] = []
    terminated = False
    for _ in range(max_steps):
        if is_constant(exprs[-1]):
            terminated = True
            break
        res = get_depth_threshold_pass(exprs[-1], d)
        if not res.changed:
            terminated = True
            break
        exprs.append(res.output)
        elim.append(res.visits)
        rules.append(res.rule_fired)
    else:
        terminated = is_constant(exprs[-1])
    return ChainResult(exprs, elim, generation_count + sum(elim), terminated, rules)


# -------------------------------------------------------------------
# Structural diffs
# -------------------------------------------------------------------
def _same_shape(a: Formula, b: Formula) -> bool:
    if type(a) is not type(b) or len(children(a)) != len(children(b)):
        return False
    if not children(a):
        return a == b
    return getattr(a, "var", None) == getattr(b, "var", None)


def diff_sites(a: Formula, b: Formula) -> int:
    """Number of disjoint regions where ``a`` and ``b`` differ structurally."""
    if a == b:
        return 0
    if not _same_shape(a, b):
        return 1
    return sum(diff_sites(x, y) for x, y in zip(children(a), children(b)))


def locate_visits(a: Formula, b: Formula) -> int:
    """Preorder node entries needed to reach the first node where ``a`` and ``b`` differ."""
    if a == b:
        return 0
    count = 0

    def go(x: Formula, y: Formula) -> bool:
        nonlocal count
        count += 1
        if x == y:
            return False
        if _same_shape(x, y):
            for cx, cy in zip(children(x), children(y)):
                if go(cx, cy):
                    break
        return True

    go(a, b)
    return count
