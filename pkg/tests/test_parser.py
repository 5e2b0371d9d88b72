import pytest
from hypothesis import given

from core.errors import ParseError
from core.formula import FALSE, And, Atom, Exists, Forall, Implies, Not, Or, to_text
from core.parser import parse, try_parse
from strategies import formulas

p, q, r = Atom("p"), Atom("q"), Atom("r")


@given(formulas)
def test_print_parse_roundtrip(f):
    assert parse(to_text(f)) == f


@pytest.mark.parametrize(
    "text, expected",
    [
        ("(p & q)", And((p, q))),
        ("( p->q )", Implies(p, q)),
        ("(p | q | r)", Or((p, q, r))),
        ("((p | q) | r)", Or((Or((p, q)), r))),
        ("(~p)", Not(p)),
        ("(False)", FALSE),
        ("~~p", Not(Not(p))),
        ("Loves( x , y )", Atom("Loves(x,y)")),
        ("forall x. P(x)", Forall("x", Atom("P(x)"))),
        ("exists a. (P(a) & Q(a))", Exists("a", And((Atom("P(a)"), Atom("Q(a)"))))),
    ],
)
def test_parse(text, expected):
    assert parse(text) == expected


@pytest.mark.parametrize("text", ["(p & q | r)", "(p -> q -> r)", "(p &", "p $", "", "forall P(x). Q"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse(text)
    assert try_parse(text) is None


def test_error_offsets():
    with pytest.raises(ParseError) as e:
        parse("(p & q")
    assert e.value.at_end
    assert "end-of-input" in str(e.value)

    with pytest.raises(ParseError) as e:
        parse("p $")
    assert e.value.offset == 2
    assert not e.value.at_end

    with pytest.raises(ParseError) as e:
        parse("(p & q | r)")
    assert e.value.offset == 7
