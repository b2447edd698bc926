import pytest

from app.data.generators import oracle_models
from app.logic import fol
from app.logic.fol import (
    Arrow,
    Const,
    Eq,
    FolModel,
    FVar,
    determinism_constraint,
    eval_fol,
    extract_model,
    guards,
    print_fol,
    translate_fol1,
    translate_fol2,
    translate_hml,
    translate_model,
)
from app.logic.semantics import eval_extended, satisfies
from app.logic.syntax import Alphabet, conjuncts, is_core, parse_formula, print_formula
from app.models.model import SIGMA, CathoristicTS, make_model
from app.utils.errors import (
    BottomUnsupportedError,
    CathoristicError,
    DialectError,
    GuardsViolatedError,
    OpenAlphabetError,
    SortMismatchError,
)

ABCD = Alphabet.closed("abcd")


@pytest.mark.parametrize("text, expected", [
    ("<a>T /\\ !{a}", "(exists y. (Arrow_a(x,y) /\\ T) /\\ Restrict{a}(x))"),
    ("<a><b>T", "exists y. (Arrow_a(x,y) /\\ exists x. (Arrow_b(y,x) /\\ T))"),
    ("!{b,c}", "Restrict{b,c}(x)"),
])
def test_single_sorted_translation(text, expected):
    assert print_fol(translate_fol1(parse_formula(text))) == expected


def test_single_sorted_translation_on_the_other_side():
    assert str(translate_fol1(parse_formula("<a>T"), side="y")) == "exists x. (Arrow_a(y,x) /\\ T)"


@pytest.mark.parametrize("text, expected", [
    ("<a>T", "exists y:st. (Arrow(x,a,y) /\\ T)"),
    ("!{a}", "forall k:act. (Allowed(x,k) -> k = a)"),
    ("!{a,b}", "forall k:act. (Allowed(x,k) -> (k = a \\/ k = b))"),
    ("!{}", "forall k:act. (Allowed(x,k) -> F)"),
])
def test_two_sorted_translation(text, expected):
    assert print_fol(translate_fol2(parse_formula(text))) == expected


def test_falsity_has_no_translation():
    with pytest.raises(BottomUnsupportedError):
        translate_fol1(parse_formula("<a>F"))
    with pytest.raises(BottomUnsupportedError):
        translate_fol2(parse_formula("F"))


@pytest.mark.parametrize("translate", [translate_fol1, translate_fol2])
def test_translations_check_the_dialect_once(translate, monkeypatch):
    seen = []
    monkeypatch.setattr(fol, "check_dialect", lambda f, dialect: seen.append((f, dialect)))
    f = parse_formula("<a>(<b>!{a} /\\ <c><a>T)")
    translate(f)
    assert seen == [(f, "core")]


@pytest.mark.parametrize("translate", [translate_fol1, translate_fol2, translate_hml])
def test_translations_reject_other_dialects(translate):
    with pytest.raises(DialectError):
        translate(parse_formula("<a>~<b>T", dialect="neg"))
    with pytest.raises(DialectError):
        determinism_constraint([parse_formula("<a>T \\/ <b>T", dialect="neg")], Alphabet.closed("ab"))


def test_translation_side_must_be_x_or_y():
    with pytest.raises(CathoristicError):
        translate_fol1(parse_formula("<a>T"), side="z")


@pytest.mark.parametrize("target, translate", [("fol1", translate_fol1), ("fol2", translate_fol2)])
def test_translation_preserves_truth(fixtures, family, target, translate):
    for name, m in fixtures.items():
        structure = translate_model(m, target, ABCD)
        for state in sorted(m.states):
            for f in family:
                expected = satisfies(make_model(m.transitions, m.labels, start=state), f)
                assert eval_fol(structure, translate(f), {"x": state}) == expected, (name, state, f)


def test_guards_hold_on_translated_models(fixtures):
    admissible, deterministic = guards()
    for m in fixtures.values():
        structure = translate_model(m, "fol2", ABCD)
        assert eval_fol(structure, admissible)
        assert eval_fol(structure, deterministic)


def test_guards_detect_violations():
    admissible, deterministic = guards()
    branching = FolModel(
        frozenset(["s0", "s1", "s2"]),
        frozenset([("s0", "a", "s1"), ("s0", "a", "s2")]),
        actions=frozenset("a"),
        allowed=frozenset([("s0", "a")]),
    )
    assert eval_fol(branching, admissible)
    assert not eval_fol(branching, deterministic)
    with pytest.raises(GuardsViolatedError):
        extract_model(branching, Alphabet.closed("a"))

    unallowed = FolModel(frozenset(["s0", "s1"]), frozenset([("s0", "a", "s1")]), actions=frozenset("a"))
    assert not eval_fol(unallowed, admissible)


def test_extract_inverts_translate(fig1):
    sigma = Alphabet.closed("abc")
    assert extract_model(translate_model(fig1, "fol2", sigma), sigma) == fig1.ts


def test_extract_drops_exotic_actions():
    ts = CathoristicTS(
        frozenset(["s0", "s1"]),
        frozenset([("s0", "e", "s1"), ("s0", "a", "s1")]),
        {"s0": SIGMA, "s1": frozenset("ae")},
    )
    structure = translate_model(ts, "fol2", Alphabet.closed("abe"))
    extracted = extract_model(structure, Alphabet.closed("ab"))
    assert extracted.transitions == frozenset([("s0", "a", "s1")])
    assert extracted.labels == {"s0": SIGMA, "s1": frozenset("a")}


def test_full_allowed_set_reads_back_as_sigma():
    ts = CathoristicTS(frozenset(["s0"]), frozenset(), {"s0": frozenset("ab")})
    sigma = Alphabet.closed("ab")
    assert extract_model(translate_model(ts, "fol2", sigma), sigma).labels == {"s0": SIGMA}


def test_two_sorted_needs_a_closed_alphabet(fig1, monkeypatch):
    monkeypatch.delenv("CL_ALPHABET", raising=False)
    with pytest.raises(OpenAlphabetError):
        translate_model(fig1, "fol2")
    with pytest.raises(OpenAlphabetError):
        extract_model(translate_model(fig1, "fol2", ABCD), Alphabet.open())
    monkeypatch.setenv("CL_ALPHABET", "a,b,c")
    assert translate_model(fig1, "fol2").actions == frozenset("abc")


def test_sorts_are_checked(fig1):
    single = translate_model(fig1, "fol1")
    with pytest.raises(SortMismatchError):
        eval_fol(single, translate_fol2(parse_formula("!{a}")), {"x": "s0"})
    double = translate_model(fig1, "fol2", ABCD)
    with pytest.raises(SortMismatchError):
        eval_fol(double, Eq(FVar("x"), Const("a")), {"x": "s0"})
    with pytest.raises(SortMismatchError):
        eval_fol(double, Arrow(FVar("x"), FVar("x"), FVar("x")), {"x": "s0"})


@pytest.mark.parametrize("text, actions, expected", [
    ("!{a}", "abc", "~<b>T /\\ ~<c>T"),
    ("<a>!{a}", "a", "<a>T"),
    ("<a>!{b}", "ab", "<a>~<a>T"),
    ("<a>T /\\ <b>T", "ab", "<a>T /\\ <b>T"),
])
def test_hml_translation(text, actions, expected):
    g = translate_hml(parse_formula(text), Alphabet.closed(actions))
    assert print_formula(g) == expected


def test_hml_uses_the_ambient_alphabet(monkeypatch):
    monkeypatch.setenv("CL_ALPHABET", "a,b")
    assert print_formula(translate_hml(parse_formula("!{a}"))) == "~<b>T"
    monkeypatch.delenv("CL_ALPHABET")
    with pytest.raises(OpenAlphabetError):
        translate_hml(parse_formula("!{a}"))


def test_hml_agrees_on_saturated_models(family):
    # labels equal to the outgoing actions
    sigma = Alphabet.closed("ab")
    saturated = [
        m for m in oracle_models(actions=("a", "b"), height=2)
        if all(m.label(x) == m.out(x) for x in m.states)
    ]
    for f in family:
        g = translate_hml(f, sigma)
        for m in saturated:
            assert satisfies(m, f) == eval_extended(m, g), (f, m)


def test_determinism_constraint():
    f = parse_formula("<a>T")
    sigma = Alphabet.closed("ab")
    constraint = determinism_constraint([f], sigma)
    # one action, closure {<a>T, T}
    assert len(conjuncts(constraint)) == 4
    assert not is_core(constraint)
    for m in oracle_models(actions=("a", "b"), height=2):
        assert eval_extended(m, constraint)


def test_constrained_hml_translation():
    sigma = Alphabet.closed("ab")
    f = parse_formula("<a>!{b}")
    g = translate_hml(f, sigma, constrain=True)
    assert conjuncts(g)[0] == translate_hml(f, sigma)
    assert g.right == determinism_constraint([f], sigma)
