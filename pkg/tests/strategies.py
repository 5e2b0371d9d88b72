"""Hypothesis strategies for formula trees."""

from hypothesis import strategies as st

from core.formula import FALSE, TRUE, And, Atom, Implies, Not, Or, Xnor, Xor

atom_names = st.sampled_from(["p", "q", "r", "s"])
leaves = st.one_of(atom_names.map(Atom), st.sampled_from([TRUE, FALSE]))


def _extend(inner):
    return st.one_of(
        inner.map(Not),
        st.tuples(inner, inner).map(lambda t: Implies(*t)),
        st.builds(
            lambda op, kids: op(tuple(kids)),
            st.sampled_from([And, Or, Xor, Xnor]),
            st.lists(inner, min_size=2, max_size=3),
        ),
    )


formulas = st.recursive(leaves, _extend, max_leaves=10)

# the connectives the random generator draws from
plain_formulas = st.recursive(
    atom_names.map(Atom),
    lambda inner: st.one_of(
        inner.map(Not),
        st.tuples(inner, inner).map(lambda t: Implies(*t)),
        st.tuples(inner, inner).map(lambda t: And(t)),
        st.tuples(inner, inner).map(lambda t: Or(t)),
    ),
    max_leaves=10,
)
