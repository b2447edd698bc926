import numpy as np
import pytest

from app.data.generators import random_formula, random_tree_model
from app.logic.semantics import satisfies
from app.logic.syntax import Alphabet, parse_formula, print_formula
from app.models.lattice import bottom_formula, char, glb, lub, model_incompatible, simpl
from app.models.model import BOT, SIGMA, make_model
from app.models.order import equivalent, preceq
from app.utils.errors import NotATreeError
from app.utils.load_data import load_fixture


def test_simpl_of_path():
    m = simpl(parse_formula("<a><b>T"))
    assert equivalent(m, load_fixture("M_AB"))
    assert m.states == frozenset(["s0", "s1", "s2"])


def test_simpl_merges_shared_modalities():
    m = simpl(parse_formula("<a>!{b,c} /\\ <a>!{c,d}"))
    assert len(m.states) == 2
    assert m.label(m.step("s0", "a")) == frozenset("c")


def test_simpl_detects_inconsistency():
    assert simpl(parse_formula("<a>T /\\ !{b}")) is BOT
    assert simpl(parse_formula("<a>!{b} /\\ <a><c>T")) is BOT
    assert simpl(parse_formula("<a>F")) is BOT


def test_simpl_of_top():
    m = simpl(parse_formula("T"))
    assert m.states == frozenset(["s0"]) and m.label() is SIGMA


@pytest.mark.parametrize("kind", ["glb", "lub"])
def test_lattice_figures(figures, kind):
    operation = glb if kind == "glb" else lub
    for case in figures[kind]:
        result = operation(case["left"], case["right"])
        if case["result"] is None:
            assert result is BOT, case["name"]
        else:
            assert result is not BOT, case["name"]
            assert equivalent(result, case["result"]), case["name"]


def test_glb_and_lub_are_bounds(figures):
    for case in figures["glb"] + figures["lub"]:
        left, right = case["left"], case["right"]
        meet, join = glb(left, right), lub(left, right)
        assert preceq(meet, left) and preceq(meet, right)
        assert preceq(left, join) and preceq(right, join)


def test_bottom_absorbs():
    m = load_fixture("M_AB")
    assert glb(BOT, m) is BOT
    assert lub(BOT, m) is m
    assert model_incompatible(m, load_fixture("M_AB_STRICT")) is False
    assert model_incompatible(load_fixture("M_LEFTBANG"), load_fixture("M_RIGHTBANG"))


def test_glb_rejects_cycles():
    loop = make_model([("s0", "a", "s0")], {"s0": "*"})
    with pytest.raises(NotATreeError):
        glb(loop, loop)
    with pytest.raises(NotATreeError):
        char(loop)


def test_char_of_fig1(fig1):
    assert print_formula(char(fig1)) == "<a>(!{b,c} /\\ <b>T) /\\ <c>!{}"


def test_char_of_bottom():
    assert print_formula(char(BOT)) == "<a0>T /\\ !{}"
    assert print_formula(bottom_formula(Alphabet.closed("qb"))) == "<b>T /\\ !{}"
    assert simpl(char(BOT)) is BOT


def test_char_characterises_the_models_below(fig1, figures):
    f = char(fig1)
    for m in figures["preceq_chain"] + [fig1, load_fixture("M_AB")]:
        assert satisfies(m, f) == preceq(m, fig1)


def test_simpl_char_round_trip_on_random_trees():
    rng = np.random.default_rng(1)
    for _ in range(500):
        m = random_tree_model(rng)
        assert equivalent(simpl(char(m)), m)


def test_char_simpl_agrees_with_formula_on_random_pairs():
    rng = np.random.default_rng(2)
    checked = 0
    while checked < 500:
        f = random_formula(rng)
        s = simpl(f)
        if s is BOT:
            continue
        m = random_tree_model(rng)
        assert satisfies(m, f) == satisfies(m, char(s))
        checked += 1


def test_simpl_is_a_model_of_its_formula():
    rng = np.random.default_rng(3)
    for _ in range(200):
        f = random_formula(rng)
        s = simpl(f)
        if s is not BOT:
            assert satisfies(s, f)


def _same(m, n):
    if m is BOT or n is BOT:
        return m is n
    return equivalent(m, n)


@pytest.mark.parametrize("seed", range(4))
def test_lattice_laws_on_random_trees(seed):
    rng = np.random.default_rng(100 + seed)
    top = simpl(parse_formula("T"))
    for _ in range(100):
        m = random_tree_model(rng, actions=("a", "b"), max_depth=2)
        n = random_tree_model(rng, actions=("a", "b"), max_depth=2)
        meet, join = glb(m, n), lub(m, n)

        assert _same(meet, glb(n, m))
        assert _same(join, lub(n, m))
        assert _same(glb(m, m), m) and _same(lub(m, m), m)
        assert _same(glb(m, join), m)
        assert _same(lub(m, meet), m)
        assert glb(m, BOT) is BOT
        assert _same(lub(m, top), top)

        assert preceq(m, join) and preceq(n, join)
        if meet is not BOT:
            assert preceq(meet, m) and preceq(meet, n)
            lower = glb(meet, random_tree_model(rng, actions=("a", "b"), max_depth=2))
            if lower is not BOT:
                assert preceq(lower, meet)
        upper = lub(join, random_tree_model(rng, actions=("a", "b"), max_depth=2))
        assert preceq(join, upper)


def test_lower_bounds_sit_below_the_meet():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(3000):
        k, m, n = (random_tree_model(rng, actions=("a", "b"), max_depth=2) for _ in range(3))
        for left, right in [(m, n), (k, n), (m, k)]:
            if preceq(k, left) and preceq(k, right):
                meet = glb(left, right)
                assert meet is not BOT and preceq(k, meet)
                checked += 1
    assert checked > 0


def test_models_of_a_formula_sit_below_its_simplification():
    rng = np.random.default_rng(8)
    checked = 0
    for _ in range(5000):
        f = random_formula(rng, actions=("a", "b"), depth=2)
        m = random_tree_model(rng, actions=("a", "b"), max_depth=2, branch_prob=0.7)
        if satisfies(m, f):
            s = simpl(f)
            assert s is not BOT and preceq(m, s), print_formula(f)
            checked += 1
    assert checked > 100
