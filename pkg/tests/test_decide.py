import itertools

import pytest

from app.data.generators import oracle_models, small_formula_family
from app.logic.decide import (
    brandom_check,
    entails,
    entails_neg,
    fresh_action,
    height_bound,
    incompatibility_set,
    incompatibility_witness,
    incompatible,
    neg_eliminate,
    s_extensions,
    to_dnf,
)
from app.logic.semantics import eval_extended, satisfies
from app.logic.syntax import BOTTOM, TOP, And, May, Or, bang, modal_depth, parse_formula
from app.models.lattice import simpl
from app.models.model import make_model
from app.utils.errors import CathoristicError, DialectError, NotATreeError


def neg(text):
    return parse_formula(text, dialect="neg")


@pytest.mark.parametrize("f, g, expected", [
    ("<a><b>T", "<a>T", True),
    ("<a>T", "<a><b>T", False),
    ("!{a}", "!{a,b}", True),
    ("!{a,b}", "!{a}", False),
    ("<a>!{b} /\\ <a><b>T", "<a>(<b>T /\\ !{b})", True),
    ("<a>T /\\ !{b}", "<c>T", True),
    ("F", "<c>T", True),
    ("T", "F", False),
])
def test_entails_examples(f, g, expected):
    assert entails(parse_formula(f), parse_formula(g)) is expected


def test_entails_rejects_negation():
    with pytest.raises(DialectError):
        entails(neg("~<a>T"), TOP)


def test_incompatible_rejects_other_dialects():
    with pytest.raises(DialectError):
        incompatible(parse_formula("<X>T", dialect="quantified"), TOP)
    with pytest.raises(DialectError):
        incompatible(TOP, neg("<a>T \\/ <b>T"))
    with pytest.raises(DialectError):
        incompatibility_set(neg("~<a>T"), [TOP])


@pytest.mark.slow
def test_entails_matches_exhaustive_models(family, oracle):
    _, masks = oracle
    for f, g in itertools.product(family, repeat=2):
        assert entails(f, g) == (masks[f] & ~masks[g] == 0), (f, g)


def test_incompatibility():
    assert incompatible(parse_formula("<a>T"), parse_formula("!{b}"))
    assert not incompatible(parse_formula("<a>T"), parse_formula("<b>T"))
    assert incompatible(parse_formula("<a>!{b}"), parse_formula("<a>!{c} /\\ <a><c>T"))
    candidates = [parse_formula(t) for t in ["!{b}", "<b>T", "!{a}", "<a>!{}"]]
    assert incompatibility_set(parse_formula("<a><b>T"), candidates) == [candidates[0], candidates[3]]


def test_entailment_is_inclusion_of_incompatibilities(family):
    assert brandom_check(parse_formula("<a><b>T"), parse_formula("<a>T"), family)
    assert brandom_check(parse_formula("<a>T"), parse_formula("<a><b>T"), family)
    assert brandom_check(parse_formula("!{a,b}"), parse_formula("!{a}"), family)


def test_inclusion_needs_a_witness_among_the_candidates(family):
    f, g = TOP, parse_formula("!{a,b}")
    assert not brandom_check(f, g, family)
    assert brandom_check(f, g, family + [incompatibility_witness(f, g)])


@pytest.mark.parametrize("f, g", [
    ("<a>T", "<a><b>T"),
    ("<a>T", "!{b}"),
    ("T", "!{a}"),
    ("!{a,b}", "!{a}"),
    ("<a>!{b,c}", "<a>!{b}"),
])
def test_incompatibility_witness(f, g):
    f, g = parse_formula(f), parse_formula(g)
    x = incompatibility_witness(f, g)
    assert x is not None
    assert incompatible(x, g)
    assert not incompatible(x, f)


def test_no_witness_when_entailed():
    assert incompatibility_witness(parse_formula("<a><b>T"), parse_formula("<a>T")) is None


@pytest.mark.slow
def test_witness_over_family(family):
    for f, g in itertools.product(family, repeat=2):
        x = incompatibility_witness(f, g)
        if x is None:
            assert entails(f, g), (f, g)
        else:
            assert not entails(f, g), (f, g)
            assert incompatible(x, g) and not incompatible(x, f), (f, g)


@pytest.mark.slow
def test_entailment_is_inclusion_of_incompatibilities_over_family(family):
    # the family alone plus, per pair, the witness for that pair
    clashes = {f: {x for x in family if incompatible(f, x)} for f in family}
    for f, g in itertools.product(family, repeat=2):
        x = incompatibility_witness(f, g)
        included = clashes[g] <= clashes[f]
        if x is not None:
            included = included and not (incompatible(x, g) and not incompatible(x, f))
        assert entails(f, g) == included, (f, g)
    for f, g in itertools.product(family[:8], repeat=2):
        assert brandom_check(f, g, family + [incompatibility_witness(f, g) or TOP]), (f, g)


def test_fresh_action():
    assert fresh_action(frozenset("ab")) == "z"
    assert fresh_action(frozenset(["z", "z1"])) == "z2"


def test_neg_eliminate():
    s = frozenset("ab")
    assert neg_eliminate(neg("~<a>T"), s) == Or(bang("b"), May("a", BOTTOM))
    assert neg_eliminate(neg("~!{a}"), s) == May("b", TOP)
    assert neg_eliminate(neg("~!{a,b}"), s) == BOTTOM
    assert neg_eliminate(parse_formula("<a>!{b}"), s) == parse_formula("<a>!{b}")


def test_neg_eliminate_preserves_truth_on_saturated_models():
    # labels equal to the outgoing actions, so ! and ~ read the same facts
    s = ("a", "b")
    formulas = [neg(t) for t in ["~<a>T", "~!{a}", "~(<a>T /\\ !{a})", "~<a>!{b}", "<b>T /\\ ~<a>T"]]
    saturated = [
        m for m in oracle_models(actions=s, height=2)
        if all(m.label(x) == m.out(x) for x in m.states)
    ]
    assert saturated
    for m in saturated:
        for f in formulas:
            assert eval_extended(m, f) == eval_extended(m, neg_eliminate(f, s)), (m, f)


def test_to_dnf_splits_under_modalities():
    f = neg("<a>(<b>T \\/ <c>T) /\\ !{a}")
    assert to_dnf(f) == [
        And(May("a", May("b", TOP)), bang("a")),
        And(May("a", May("c", TOP)), bang("a")),
    ]
    assert to_dnf(parse_formula("<a>T")) == [parse_formula("<a>T")]


def test_s_extensions_counts():
    top = simpl(TOP)
    assert len(list(s_extensions(top, ["a"], 1))) == 2
    assert len(list(s_extensions(top, ["a"], 2))) == 3
    assert len(list(s_extensions(top, ["a", "b"], 2))) == 25
    assert len(list(s_extensions(simpl(bang("a")), ["a", "b"], 1))) == 2
    assert len(list(s_extensions(top, ["a"], 0))) == 1


def test_s_extensions_start_with_base_and_refine_it():
    base = simpl(parse_formula("<a>!{b}"))
    extensions = list(s_extensions(base, ["a", "b"], 2))
    assert extensions[0] == base
    for ext in extensions:
        assert satisfies(ext, parse_formula("<a>!{b}"))


def test_s_extensions_need_a_tree():
    loop = make_model([("s0", "a", "s0")], {"s0": "*"})
    with pytest.raises(NotATreeError):
        list(s_extensions(loop, ["a"], 1))


def test_height_bound(monkeypatch):
    g = parse_formula("<a>(<b>T /\\ !{c})")
    assert height_bound(g, "depth") == 2
    assert height_bound(g, "length") == 5
    monkeypatch.setenv("CL_HEIGHT_BOUND", "length")
    assert height_bound(g) == 5


@pytest.mark.parametrize("f, g", [
    ("<a><b>T", "<a>T"),
    ("<a>T", "<a><b>T"),
    ("!{a}", "!{a,b}"),
    ("<a>!{b}", "<a><c>T"),
])
def test_entails_neg_agrees_on_core(f, g):
    assert entails_neg(parse_formula(f), parse_formula(g)) == entails(parse_formula(f), parse_formula(g))


def test_entails_neg_excluded_middle():
    assert entails_neg(TOP, neg("<a>T \\/ ~<a>T"))
    # a b-successor and no a-successor refutes every disjunct
    assert not entails_neg(TOP, neg("<a>T \\/ !{b} \\/ <a>F"))


def test_entails_neg_with_negated_premise():
    assert entails_neg(neg("<a>T /\\ ~<b>T"), neg("~<b>T"))
    assert not entails_neg(neg("~<a>T"), neg("!{b}"))
    assert entails_neg(neg("~!{a}"), neg("~!{a}"))


def test_entails_neg_strengthened_negation_gap():
    # ~!{} is read as "some action happens" on every S-extension, so T appears to entail it
    assert entails_neg(TOP, neg("~!{}"))
    assert not eval_extended(make_model([], {"s0": []}), neg("~!{}"))


def test_entails_neg_rejects_negative_bound():
    with pytest.raises(CathoristicError):
        entails_neg(TOP, TOP, bound=-1)


def test_entails_neg_parallel_matches_serial():
    f = neg("~<a>T \\/ <b>!{a}")
    for g in ["!{b,z}", "~<a>T", "<b>T \\/ !{b}"]:
        assert entails_neg(f, neg(g), n_jobs=2) == entails_neg(f, neg(g), n_jobs=1)




def _saturated_shapes(actions, height):
    if height == 0:
        return [()]
    below = _saturated_shapes(actions, height - 1)
    options = [[None] + below for _ in actions]
    return [
        tuple((a, sub) for a, sub in zip(actions, choice) if sub is not None)
        for choice in itertools.product(*options)
    ]


def saturated_trees(actions, height):
    """Every tree over actions of at most the given height, each state labelled by its outgoing actions."""
    for shape in _saturated_shapes(tuple(actions), height):
        labels, transitions = {}, []
        counter = itertools.count()
        pending = [(f"s{next(counter)}", shape)]
        while pending:
            name, kids = pending.pop()
            labels[name] = [a for a, _ in kids]
            for a, sub in kids:
                child = f"s{next(counter)}"
                transitions.append((name, a, child))
                pending.append((child, sub))
        yield make_model(transitions, labels)


def test_saturated_trees():
    trees = list(saturated_trees("ab", 1))
    assert len(trees) == 4
    assert all(m.label(s) == m.out(s) for m in trees for s in m.states)
    assert len(list(saturated_trees("abz", 2))) == 729


NEG_PREMISES = [
    "T",
    "~<a>T",
    "~!{a}",
    "~!{}",
    "<a>T /\\ ~<b>T",
    "~(<a>T /\\ !{a,b})",
    "~<b>T \\/ !{a}",
    "<a>!{b} \\/ ~<a>T",
]

# ~ never sits above a tantum here; ~!A is the one reading that differs on Sigma-labelled states
NEG_CONCLUSIONS = [
    "~<a>T",
    "~~<a>T",
    "~<b>T \\/ !{a}",
    "<a>T \\/ ~<a>T",
    "~<a>T /\\ ~<b>T",
    "~(<a>T /\\ <b>T)",
    "<a>!{a} \\/ ~<b>T",
    "!{b} \\/ <a>T",
    "~(<a>T \\/ <b>F)",
    "<b>(!{} \\/ !{a})",
]


@pytest.mark.slow
def test_entails_neg_matches_saturated_models_with_a_fresh_action(family):
    # over {a, b, z}, height 2 covers premises and conclusions of modal depth one
    models = list(saturated_trees("abz", 2))
    premises = [neg(t) for t in NEG_PREMISES]
    conclusions = [neg(t) for t in NEG_CONCLUSIONS] + [g for g in family if modal_depth(g) <= 1]
    truth = {g: [eval_extended(m, g) for m in models] for g in premises + conclusions}
    for f in premises:
        for g in conclusions:
            expected = all(not h or t for h, t in zip(truth[f], truth[g]))
            assert entails_neg(f, g) == expected, (f, g)
