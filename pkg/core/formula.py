"""
formula.py
----------
Logical expression tree shared by every other module.

Nodes are frozen dataclasses, so they hash, compare structurally and can be
shipped to worker processes as-is. And/Or/Xor/Xnor are n-ary (at least two
children). The constructors never flatten; the folding helpers ``join``,
``splice`` and ``negate`` keep same-operator nesting and double negation out
of generated and rewritten trees. Implies is binary; quantifiers bind a single
variable.

The canonical text form:
    ~p            negation
    (p & q & r)   conjunction      (p | q)    disjunction
    (p -> q)      implication      (p ^ q)    xor     (p <~> q)   xnor
    forall x. P(x)   exists x. P(x)
    True / False
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from core.errors import MissingAssignment, UnsupportedQuantifier


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class _NAry:
    children: tuple

    def __post_init__(self):
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError(f"{type(self).__name__} needs at least two children")


@dataclass(frozen=True)
class And(_NAry):
    pass


@dataclass(frozen=True)
class Or(_NAry):
    pass


@dataclass(frozen=True)
class Xor(_NAry):
    pass


@dataclass(frozen=True)
class Xnor(_NAry):
    pass


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Atom, Const, Not, And, Or, Xor, Xnor, Implies, Forall, Exists]
Interpretation = Mapping[str, bool]
Path = tuple[int, ...]

TRUE = Const(True)
FALSE = Const(False)

NARY_SYMBOL = {And: "&", Or: "|", Xor: "^", Xnor: "<~>"}
SYMBOL_NARY = {v: k for k, v in NARY_SYMBOL.items()}
IMPLIES_SYMBOL = "->"
NOT_SYMBOL = "~"


# -------------------------------------------------------------------
# Structure
# -------------------------------------------------------------------
def children(f: Formula) -> tuple:
    if isinstance(f, _NAry):
        return f.children
    if isinstance(f, Not):
        return (f.child,)
    if isinstance(f, Implies):
        return (f.lhs, f.rhs)
    if isinstance(f, (Forall, Exists)):
        return (f.body,)
    return ()


def with_children(f: Formula, kids) -> Formula:
    """Rebuild ``f`` with new children, keeping its node type (and bound variable)."""
    kids = tuple(kids)
    if isinstance(f, _NAry):
        return type(f)(kids)
    if isinstance(f, Not):
        return Not(kids[0])
    if isinstance(f, Implies):
        return Implies(kids[0], kids[1])
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, kids[0])
    return f


# -------------------------------------------------------------------
# Folding constructors
# -------------------------------------------------------------------
def negate(f: Formula) -> Formula:
    """``~f`` with a double negation folded away."""
    return f.child if isinstance(f, Not) else Not(f)


def join(kind: type, kids) -> Formula:
    """``kind`` (And or Or) over ``kids``, splicing in children of the same operator."""
    flat: list = []
    for c in kids:
        flat.extend(c.children if type(c) is kind else (c,))
    return kind(tuple(flat))


def splice(kind: type, kids: tuple, i: int, new: Formula) -> Formula:
    """``kind(kids)`` with child ``i`` replaced by ``new``; only ``new`` is merged
    into the parent when it carries the same operator."""
    inner = new.children if type(new) is kind else (new,)
    return kind(tuple(kids[:i]) + inner + tuple(kids[i + 1:]))


def is_constant(f: Formula) -> bool:
    return isinstance(f, Const)


def is_leaf(f: Formula) -> bool:
    return isinstance(f, (Atom, Const))


def is_literal(f: Formula) -> bool:
    return is_leaf(f) or (isinstance(f, Not) and is_leaf(f.child))


def is_quantified(f: Formula) -> bool:
    return any(isinstance(g, (Forall, Exists)) for _, g in walk(f))


def walk(f: Formula, path: Path = ()) -> Iterator[tuple[Path, Formula]]:
    """Preorder traversal yielding (path, subformula)."""
    yield path, f
    for i, c in enumerate(children(f)):
        yield from walk(c, path + (i,))


def subformula(f: Formula, path: Path) -> Formula:
    for i in path:
        f = children(f)[i]
    return f


def replace_at(f: Formula, path: Path, new: Formula) -> Formula:
    if not path:
        return new
    kids = list(children(f))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return with_children(f, kids)


def substitute(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    """Replace atoms by name. Bound variables inside predicate atoms are untouched."""
    if isinstance(f, Atom):
        return mapping.get(f.name, f)
    kids = children(f)
    if not kids:
        return f
    return with_children(f, [substitute(c, mapping) for c in kids])


def predicate_head(atom: Atom) -> str:
    return atom.name.split("(", 1)[0]


def predicate_args(atom: Atom) -> tuple[str, ...]:
    if "(" not in atom.name:
        return ()
    inner = atom.name[atom.name.index("(") + 1 : -1]
    return tuple(a.strip() for a in inner.split(","))


# -------------------------------------------------------------------
# Queries
# -------------------------------------------------------------------
def depth(f: Formula) -> int:
    kids = children(f)
    if not kids:
        return 0
    return 1 + max(depth(c) for c in kids)


def atoms(f: Formula) -> frozenset[str]:
    """Distinct atom names. Quantifier variables are not atoms; a predicate atom
    such as ``P(x)`` is one atom whatever its arguments are bound to."""
    return frozenset(g.name for _, g in walk(f) if isinstance(g, Atom))


def evaluate(f: Formula, interpretation: Interpretation) -> bool:
    if isinstance(f, Atom):
        try:
            return bool(interpretation[f.name])
        except KeyError:
            raise MissingAssignment(f.name) from None
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not evaluate(f.child, interpretation)
    if isinstance(f, And):
        return all(evaluate(c, interpretation) for c in f.children)
    if isinstance(f, Or):
        return any(evaluate(c, interpretation) for c in f.children)
    if isinstance(f, Implies):
        return (not evaluate(f.lhs, interpretation)) or evaluate(f.rhs, interpretation)
    if isinstance(f, Xor):
        return sum(evaluate(c, interpretation) for c in f.children) % 2 == 1
    if isinstance(f, Xnor):
        return sum(evaluate(c, interpretation) for c in f.children) % 2 == 0
    raise UnsupportedQuantifier(f"cannot evaluate quantified formula {to_text(f)!r}")


# -------------------------------------------------------------------
# Printing
# -------------------------------------------------------------------
@dataclass(frozen=True)
class Span:
    start: int
    end: int
    kind: str  # "formula" | "operator" | "predicate"
    path: Path

    def cut(self, text: str) -> str:
        return text[self.start : self.end]


class _Writer:
    def __init__(self):
        self.parts: list[str] = []
        self.pos = 0
        self.spans: list[Span] = []

    def put(self, s: str, kind: str | None = None, path: Path = ()) -> None:
        if kind:
            self.spans.append(Span(self.pos, self.pos + len(s), kind, path))
        self.parts.append(s)
        self.pos += len(s)

    def emit(self, f: Formula, path: Path) -> None:
        start = self.pos
        if isinstance(f, Atom):
            head = predicate_head(f)
            self.put(head, "predicate" if head != f.name else None, path)
            self.put(f.name[len(head):])
        elif isinstance(f, Const):
            self.put("True" if f.value else "False")
        elif isinstance(f, Not):
            self.put(NOT_SYMBOL, "operator", path)
            self.emit(f.child, path + (0,))
        elif isinstance(f, (Forall, Exists)):
            self.put("forall" if isinstance(f, Forall) else "exists")
            self.put(f" {f.var}. ")
            self.emit(f.body, path + (0,))
        else:
            sym = IMPLIES_SYMBOL if isinstance(f, Implies) else NARY_SYMBOL[type(f)]
            self.put("(")
            for i, c in enumerate(children(f)):
                if i:
                    self.put(" ")
                    self.put(sym, "operator", path)
                    self.put(" ")
                self.emit(c, path + (i,))
            self.put(")")
        self.spans.append(Span(start, self.pos, "formula", path))


def to_text(f: Formula) -> str:
    w = _Writer()
    w.emit(f, ())
    return "".join(w.parts)


def print_with_spans(f: Formula) -> tuple[str, list[Span]]:
    """Canonical text plus the character span of every subformula, connective
    token and predicate head, ordered by start offset."""
    w = _Writer()
    w.emit(f, ())
    spans = sorted(w.spans, key=lambda s: (s.start, -(s.end - s.start), s.kind))
    return "".join(w.parts), spans
