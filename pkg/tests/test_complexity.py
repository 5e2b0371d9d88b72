import pytest
from hypothesis import given

from core.complexity import circuit_complexity, complexity_bucket, complexity_report, original_complexity
from core.formula import depth
from core.graph_builder import formula_graph, graph_circuit, graph_depth
from core.parser import parse
from strategies import formulas


@pytest.mark.parametrize(
    "text, circuit, original",
    [
        ("p", 1, 2),
        ("True", 1, 1),
        ("(p & q)", 3, 6),
        ("~(p | ~q)", 5, 10),
        ("(p -> (p & q))", 5, 9),
        ("forall x. P(x)", 2, 4),
    ],
)
def test_metrics(text, circuit, original):
    f = parse(text)
    assert circuit_complexity(f) == circuit
    assert original_complexity(f) == original


def test_report_fields_add_up():
    rep = complexity_report(parse("((p -> q) & ~r)"))
    assert (rep.circuit, rep.depth, rep.unique_vars) == (6, 2, 3)
    assert rep.original == rep.circuit + rep.depth + rep.unique_vars


@pytest.mark.parametrize(
    "original, preset, bucket",
    [(35, "diagnostic", "high"), (20, "diagnostic", "medium"), (10, "diagnostic", "low"), (4, "diagnostic", "sub"),
     (33, "tertile", "high"), (32, "tertile", "medium"), (21, "tertile", "low")],
)
def test_buckets(original, preset, bucket):
    assert complexity_bucket(original, preset) == bucket


def test_unknown_preset():
    with pytest.raises(ValueError):
        complexity_bucket(3, "quartile")


@given(formulas)
def test_graph_recount_matches(f):
    G = formula_graph(f)
    assert graph_circuit(G) == circuit_complexity(f)
    assert graph_depth(G) == depth(f)


def test_graph_labels():
    G = formula_graph(parse("(p & ~p)"))
    assert G.nodes[()]["label"] == "And"
    assert G.nodes[(1, 0)]["label"] == "p"
    assert G.number_of_edges() == 3
