import pytest
from hypothesis import given, strategies as st

from core.data_generator import TraceRecord
from core.diagnostics import (
    BLANK,
    ERROR_CLASSES,
    MASK,
    STEP_PROMPTS,
    MaskedInstance,
    gold_response,
    item_from_dict,
    make_masked,
    make_step_completion,
    make_truth_eval,
    score_step_completion,
    score_task1,
    score_task2,
    score_truth_eval,
    split_response,
    truth_answer,
)
from core.errors import ChainTooShort, NoMaskableSpan
from core.parser import parse
from strategies import plain_formulas


def _record(exprs, rule_id="abc123"):
    return TraceRecord(rule_id, 0, exprs[0], exprs, [1] * len(exprs), [1] * (len(exprs) - 1), 0, 0)


@pytest.fixture
def worked_item():
    return make_step_completion(_record(["P", "~P", "False"]), blanks=2)


# -------------------------------------------------------------------
# Masked prediction
# -------------------------------------------------------------------
def test_operator_mask():
    item = make_masked(parse("(p & q)"), "operator", seed=0)
    assert item.masked_text == f"(p {MASK} q)"
    assert item.gold == "&"


def test_predicate_mask_keeps_arguments():
    item = make_masked(parse("~(Sunny(x) | Breezy(x))"), "predicate", seed=3)
    assert item.gold in {"Sunny", "Breezy"}
    assert f"{MASK}(x)" in item.masked_text


def test_component_mask_can_hide_a_subexpression():
    f = parse("((p -> q) & p)")
    golds = {make_masked(f, "component", seed=s).gold for s in range(50)}
    assert "(p -> q)" in golds
    assert "((p -> q) & p)" not in golds


@pytest.mark.parametrize("text, kind", [("(p & q)", "predicate"), ("p", "operator"), ("p", "component")])
def test_nothing_to_mask(text, kind):
    with pytest.raises(NoMaskableSpan):
        make_masked(parse(text), kind, seed=0)


def test_unknown_mask_kind():
    with pytest.raises(ValueError):
        make_masked(parse("(p & q)"), "quantifier", seed=0)


@given(plain_formulas, st.sampled_from(["component", "operator"]), st.integers(0, 2**32))
def test_mask_round_trip(f, kind, seed):
    try:
        item = make_masked(f, kind, seed)
    except NoMaskableSpan:
        return
    assert item.masked_text.count(MASK) == 1
    assert item.masked_text.replace(MASK, item.gold) == item.source


def _mi(kind, gold):
    return MaskedInstance("id", "src", kind, MASK, gold, "sub")


def test_score_task1():
    items = [_mi("operator", "&"), _mi("component", "(p -> q)"), _mi("predicate", "Sunny"), _mi("predicate", "Rainy")]
    card = score_task1(items, ["&", "( p->q )", "Rainy", " Rainy "])
    assert card.task1 == {"component": 1.0, "operator": 1.0, "predicate": 0.5, "overall": 0.8333}
    assert sum(r["count"] for r in card.stratified) == 4


def test_unparseable_component_is_wrong():
    card = score_task1([_mi("component", "(p -> q)")], ["(p ->"])
    assert card.task1["component"] == 0.0


# -------------------------------------------------------------------
# Step completion
# -------------------------------------------------------------------
def test_step_completion_item(worked_item):
    assert worked_item.chain_prefix == ["P"]
    assert worked_item.gold_steps == ["~P", "False"]
    assert worked_item.prompt == rf"P \Leftrightarrow {BLANK} \Leftrightarrow {BLANK}"
    assert worked_item.system == STEP_PROMPTS[2]
    assert worked_item.system.startswith("You are given a first-order logic equivalence chain where the last 2 steps")


def test_one_blank_item():
    item = make_step_completion(_record(["(p & True)", "p", "p"]), blanks=1)
    assert item.gold_steps == ["p"]
    assert item.prompt.endswith(BLANK)
    assert "the last step is missing" in item.system


def test_chain_too_short():
    with pytest.raises(ChainTooShort):
        make_step_completion(_record(["p", "q"]), blanks=2)


@pytest.mark.parametrize(
    "text, steps",
    [
        (r"~P \Leftrightarrow False", ["~P", "False"]),
        ("  ~P ⇔ False. ", ["~P", "False"]),
        ("~P", None),
        (r"~P \Leftrightarrow \Leftrightarrow False", None),
    ],
)
def test_split_response(text, steps):
    assert split_response(text, 2) == steps


def test_step2_correct_chain_wrong(worked_item):
    s = score_step_completion(worked_item, r"Q \Leftrightarrow False")
    assert s.final_ok and not s.chain_ok
    assert s.error_class == "Step1Only"


def test_different_step_chain_still_correct(worked_item):
    s = score_step_completion(worked_item, r"(P & ~P) \Leftrightarrow False")
    assert s.final_ok and s.chain_ok


@pytest.mark.parametrize(
    "response, error_class",
    [
        (r"~P \Leftrightarrow False", "BothCorrect"),
        (r"~P \Leftrightarrow Q", "Step2Only"),
        (r"Q \Leftrightarrow R", "BothWrong"),
        (r"False \Leftrightarrow ~P", "ChainOnly"),
        ("((P |", "Malformed"),
        (r"~P \Leftrightarrow ((P |", "Malformed"),
    ],
)
def test_error_classes(worked_item, response, error_class):
    assert score_step_completion(worked_item, response).error_class == error_class


def test_score_task2_closed_loop():
    items = [
        make_step_completion(_record(["P", "~P", "False"], "a"), 2),
        make_step_completion(_record(["(p -> q)", "(~p | q)", "(q | ~p)"], "b"), 1),
    ]
    card = score_task2(items, [gold_response(it) for it in items])
    assert card.task2 == {"one_step": 1.0, "two_step": 1.0, "two_step_chain": 1.0}
    assert card.error_breakdown["BothCorrect"] == 1
    assert sum(card.error_breakdown.values()) == 1
    assert set(card.error_breakdown) == set(ERROR_CLASSES)


def test_score_task2_garbage():
    items = [make_step_completion(_record(["P", "~P", "False"], str(i)), 2) for i in range(4)]
    card = score_task2(items, ["((P |"] * 4)
    assert card.error_breakdown["Malformed"] == 4
    assert card.task2["two_step"] == 0.0


def test_scoring_is_order_invariant():
    items = [make_step_completion(_record(["P", "~P", "False"], str(i)), 2) for i in range(3)]
    answers = [r"~P \Leftrightarrow False", r"Q \Leftrightarrow R", "((P |"]
    forward = score_task2(items, answers)
    backward = score_task2(items[::-1], answers[::-1])
    assert forward.task2 == backward.task2
    assert forward.error_breakdown == backward.error_breakdown


def test_length_mismatch():
    with pytest.raises(ValueError):
        score_task2([], ["x"])


# -------------------------------------------------------------------
# Truth evaluation
# -------------------------------------------------------------------
def test_tautology_is_always_true():
    for seed in range(20):
        assert make_truth_eval(parse("(p | ~p)"), seed).gold is True


def test_truth_item():
    item = make_truth_eval(parse("p"), seed=1)
    assert item.gold == item.interpretation["p"]
    assert item.prompt == f"<bos> {item.gold} ⇔ __"


def test_truth_base_rate():
    rate = sum(make_truth_eval(parse("p"), s).gold for s in range(1000)) / 1000
    assert 0.4 <= rate <= 0.6


def test_truth_rejects_quantifiers():
    with pytest.raises(ValueError):
        make_truth_eval(parse("forall x. P(x)"), 0)


@pytest.mark.parametrize("response, answer", [("True", True), ("false.", False), (" TRUE because", True), ("maybe", None), ("", None)])
def test_truth_answer(response, answer):
    assert truth_answer(response) is answer


def test_score_truth_eval():
    items = [make_truth_eval(parse("(p | ~p)"), s) for s in range(4)]
    card = score_truth_eval(items, ["True", "True", "False", "nonsense"])
    assert card.truth == {"accuracy": 0.5, "gold_true_rate": 1.0}


def test_items_round_trip_through_dicts(worked_item):
    masked = make_masked(parse("(p & q)"), "operator", 0)
    truth = make_truth_eval(parse("(p & q)"), 0)
    for it in (worked_item, masked, truth):
        assert item_from_dict(it.to_dict()) == it
