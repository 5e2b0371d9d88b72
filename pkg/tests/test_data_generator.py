from collections import Counter

import numpy as np
import pytest

from core.catalog import load_catalog
from core.complexity import circuit_complexity
from core.data_generator import (
    OPERATORS,
    ForgeJob,
    GenParams,
    PredicateLexicon,
    _forge_indexed,
    derive_seed,
    draw_operator,
    forge_curated,
    forge_record,
    generate_curated,
    generate_records,
    instantiate_exprs,
    instantiate_template,
    load_lexicon,
    params_for_seed,
    random_formula,
    record_id,
)
from core.dataset import check_record
from core.errors import ConfigError, LexiconExhausted
from core.formula import And, Atom, Not, Or, atoms, depth, predicate_head, to_text, walk
from core.parser import parse
from core.rewriter import simplify_chain
from core.verifier import chain_ok, verify_chain, verify_record


@pytest.fixture(scope="module")
def lex():
    return load_lexicon()


@pytest.mark.parametrize("d", [0, 1, 3, 6])
def test_random_formula_depth_bound(d):
    f, count = random_formula(GenParams(depth=d, seed=11))
    assert depth(f) == d if d <= 1 else depth(f) <= d
    assert count >= circuit_complexity(f)
    assert {n for _, n in walk(f) if isinstance(n, Atom)} <= {Atom(c) for c in "abcdefgh"}


def test_random_formula_is_seeded():
    assert random_formula(GenParams(depth=4, seed=3)) == random_formula(GenParams(depth=4, seed=3))


def test_random_formula_golden(golden):
    f, count = random_formula(GenParams(alphabet=("a", "b", "c"), depth=3, seed=7))
    assert atoms(f) <= {"a", "b", "c"}
    golden("random_formula_seed7_depth3", {"formula": to_text(f), "count": count})


def _folded(f):
    for _, n in walk(f):
        if isinstance(n, Not) and isinstance(n.child, Not):
            return False
        if isinstance(n, (And, Or)) and any(type(c) is type(n) for c in n.children):
            return False
    return True


def test_generated_formulas_and_chains_stay_folded():
    for seed in range(60):
        f, _ = random_formula(GenParams(depth=6, seed=seed))
        chain = simplify_chain(f)
        assert all(_folded(e) for e in chain.exprs)
        assert "AS" not in chain.rules and "DN" not in chain.rules


def test_operator_draws_are_uniform():
    rng = np.random.default_rng(2024)
    n = 100_000
    drawn = Counter(draw_operator(rng) for _ in range(n))
    sigma = (0.25 * 0.75 / n) ** 0.5
    assert set(drawn) == set(OPERATORS)
    for op in OPERATORS:
        assert abs(drawn[op] / n - 0.25) <= 3 * sigma


@pytest.mark.parametrize(
    "kwargs",
    [dict(alphabet=()), dict(alphabet=tuple("abc"), max_variables=2), dict(depth=-1)],
)
def test_gen_params_validation(kwargs):
    with pytest.raises(ValueError):
        GenParams(**kwargs)


def test_derived_seeds():
    assert derive_seed(0, 0, 5) == derive_seed(0, 0, 5)
    assert len({derive_seed(0, s, i) for s in range(3) for i in range(50)}) == 150


def test_params_for_seed():
    depths = {params_for_seed(s, depth_min=3, depth_max=6).depth for s in range(200)}
    assert depths == {3, 4, 5, 6}
    with pytest.raises(ConfigError):
        params_for_seed(1, depth_min=5, depth_max=3)


def test_forged_record_is_consistent():
    params = params_for_seed(derive_seed(1, 0, 0))
    rec = forge_record(params)
    assert check_record(rec) == []
    assert rec.rule == rec.exprs[0]
    assert rec.rule_id == record_id(rec.exprs[0], rec.seed)
    assert not rec.curated
    assert chain_ok(verify_record(rec))
    assert forge_record(params) == rec


def test_seed_42_chain_golden(golden):
    f, count = random_formula(GenParams(depth=4, seed=42))
    chain = simplify_chain(f, 2)
    exprs = [to_text(e) for e in chain.exprs]
    assert chain_ok(verify_chain(exprs))
    golden("chain_seed42_depth4", {"exprs": exprs, "rules": chain.rules, "count": count})


def test_bundled_lexicon(lex):
    assert len(lex) == 200
    assert len(lex.entries) == 10
    names = [n for n, _ in lex.forms()]
    assert len(set(names)) == len(names)
    assert lex.surface("Sunny", 1) == "Sunny(x)"
    assert lex.surface("Colder", 2) == "Colder(x,y)"


def test_lexicon_rejects_duplicates(tmp_path):
    path = tmp_path / "lex.yaml"
    path.write_text("domains:\n  a:\n    - {name: Sunny}\n  b:\n    - {name: Sunny}\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_lexicon(path)


def test_instantiation_is_a_consistent_bijection(lex):
    exprs = [parse("((p -> q) & p)"), parse("q")]
    out = instantiate_exprs(exprs, lex, seed=4)
    heads_first = {predicate_head(g) for _, g in walk(out[0]) if isinstance(g, Atom)}
    heads_last = {predicate_head(g) for _, g in walk(out[1]) if isinstance(g, Atom)}
    assert len(heads_first) == 2
    assert heads_last <= heads_first
    assert out == instantiate_exprs(exprs, lex, seed=4)


def test_instantiation_keeps_predicate_arguments(lex):
    out = instantiate_exprs([parse("forall x. P(x)"), parse("exists a. P(a)")], lex, seed=2)
    assert out[0].body.name.endswith("(x)")
    assert out[1].body.name.endswith("(a)")
    assert predicate_head(out[0].body) == predicate_head(out[1].body)


def test_lexicon_exhausted():
    tiny = PredicateLexicon({"one": [("Sunny", 1)]})
    with pytest.raises(LexiconExhausted):
        instantiate_exprs([parse("(p & q)")], tiny, seed=0)


@pytest.mark.parametrize("rule_id", ["MP", "DM.2", "E15", "C9", "C18"])
def test_curated_records_verify(lex, rule_id):
    rec = forge_curated(rule_id, lex, seed=9)
    assert rec.rule_id.startswith(f"{rule_id}:")
    assert rec.curated
    assert check_record(rec) == []
    assert chain_ok(verify_record(rec))


def test_curated_family_draws_a_variant(lex):
    drawn = {forge_curated("DM", lex, seed=s).rule_id.split(":")[0] for s in range(40)}
    assert drawn == {"DM", "DM.2"}


def test_curated_quantified_rule(lex):
    rec = forge_curated("UI", lex, seed=1)
    assert rec.quantified
    assert all(v.skipped for v in verify_record(rec))


def test_instantiate_template_on_a_record(lex):
    rec = forge_record(params_for_seed(5))
    out = instantiate_template(rec, lex, seed=5)
    assert len(out.exprs) == len(rec.exprs)
    assert out.rule == out.exprs[0] != rec.rule
    assert out.complexity_by_step == rec.complexity_by_step
    assert check_record(out) == []


def test_generation_order_does_not_depend_on_workers():
    job = ForgeJob(top_seed=3, split=0)
    serial = list(generate_records(job, 6, workers=1, progress=False))
    assert serial == [_forge_indexed((job, i)) for i in range(6)]
    assert list(generate_records(job, 6, workers=2, progress=False)) == serial


def test_generate_curated_count(lex):
    families = sorted({r.family for r in load_catalog()})[:3]
    recs = list(generate_curated(families, 2, lex, top_seed=0, split=0))
    assert len(recs) == 6
