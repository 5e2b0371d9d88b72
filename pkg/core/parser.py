"""
parser.py
---------
LALR parser for the canonical formula grammar (see core.formula).

Every parenthesised group holds a single connective; ``->`` is binary.
Parentheses around a lone formula are accepted and dropped.
"""

from __future__ import annotations

from functools import lru_cache

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedToken, VisitError

from core.errors import ParseError
from core.formula import (
    FALSE,
    IMPLIES_SYMBOL,
    SYMBOL_NARY,
    TRUE,
    Atom,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
)

FORMULA_GRAMMAR = r"""
    ?start: formula

    ?formula: "~" formula                      -> neg
            | "forall" ATOM "." formula        -> forall
            | "exists" ATOM "." formula        -> exists
            | "True"                           -> true
            | "False"                          -> false
            | ATOM                             -> atom
            | "(" formula (OP formula)* ")"    -> group

    OP: "<~>" | "->" | "&" | "|" | "^"
    ATOM: /[A-Za-z_][A-Za-z0-9_]*(\(\s*[A-Za-z0-9_]+(\s*,\s*[A-Za-z0-9_]+)*\s*\))?/

    %import common.WS
    %ignore WS
"""

# readable names for the expected-token set
_TERMINAL_TEXT = {
    "LPAR": "(",
    "RPAR": ")",
    "TILDE": "~",
    "DOT": ".",
    "OP": "operator",
    "ATOM": "atom",
    "TRUE": "True",
    "FALSE": "False",
    "FORALL": "forall",
    "EXISTS": "exists",
    "$END": "end-of-input",
}


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _ToFormula(Transformer):
    def __init__(self, text: str):
        super().__init__()
        self.text = text

    def _fail(self, token: Token, expected: set[str]):
        raise ParseError(self.text, _byte_offset(self.text, token.start_pos), expected)

    @v_args(inline=True)
    def atom(self, tok: Token) -> Formula:
        return Atom("".join(str(tok).split()))

    def true(self, _):
        return TRUE

    def false(self, _):
        return FALSE

    @v_args(inline=True)
    def neg(self, child):
        return Not(child)

    def _bound(self, tok: Token) -> str:
        if "(" in tok:
            self._fail(tok, {"variable"})
        return str(tok)

    @v_args(inline=True)
    def forall(self, var, body):
        return Forall(self._bound(var), body)

    @v_args(inline=True)
    def exists(self, var, body):
        return Exists(self._bound(var), body)

    def group(self, items):
        operands, ops = items[0::2], items[1::2]
        if not ops:
            return operands[0]
        first = str(ops[0])
        for tok in ops[1:]:
            if str(tok) != first:
                self._fail(tok, {first, ")"})
        if first == IMPLIES_SYMBOL:
            if len(operands) > 2:
                self._fail(ops[1], {")"})
            return Implies(operands[0], operands[1])
        return SYMBOL_NARY[first](tuple(operands))


@lru_cache(maxsize=1)
def _lark() -> Lark:
    return Lark(FORMULA_GRAMMAR, parser="lalr", lexer="contextual", maybe_placeholders=False)


def _expected(names) -> set[str]:
    return {_TERMINAL_TEXT.get(n, n) for n in names}


def parse(text: str) -> Formula:
    """Parse canonical text into a Formula; raises ParseError with a byte offset."""
    end = len(text.encode("utf-8"))
    try:
        tree = _lark().parse(text)
    except UnexpectedCharacters as e:
        raise ParseError(text, _byte_offset(text, e.pos_in_stream), _expected(e.allowed or ())) from None
    except UnexpectedToken as e:
        if e.token.type == "$END":
            offset = end
        else:
            offset = _byte_offset(text, e.token.start_pos)
        raise ParseError(text, offset, _expected(e.expected)) from None
    except UnexpectedEOF as e:
        raise ParseError(text, end, _expected(e.expected)) from None
    try:
        return _ToFormula(text).transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, ParseError):
            raise e.orig_exc from None
        raise


def try_parse(text: str) -> Formula | None:
    try:
        return parse(text)
    except ParseError:
        return None
