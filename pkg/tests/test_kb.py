import itertools

import numpy as np
import pytest

from app.data.generators import random_formula, welsh_dataset
from app.data.knowledge_base import (
    WELSH_QUERY,
    KnowledgeBase,
    QueryLiteral,
    move_schema,
    optimize_query,
    parse_query,
    welsh_kb,
)
from app.logic.semantics import satisfies
from app.logic.syntax import And, Var, parse_formula
from app.models.lattice import simpl
from app.models.model import BOT, SIGMA, is_tree, make_model, validate_model
from app.models.order import equivalent
from app.utils.errors import (
    CathoristicError,
    FormulaSyntaxError,
    NotATreeError,
    PathNotFoundError,
    UnsatisfiableError,
)
from app.utils.load_data import dumps_model

RED = "<tl><colour>(<red>T /\\ !{red})"
AMBER = "<tl><colour>(<amber>T /\\ !{amber})"


def _paths(m):
    out = []
    pending = [(m.start, ())]
    while pending:
        state, path = pending.pop()
        for a, t in m.edges(state):
            out.append(path + (a,))
            pending.append((t, path + (a,)))
    return sorted(out)


@pytest.fixture
def kb():
    return KnowledgeBase()


def test_empty_store(kb):
    m = kb.model
    assert m.start == "n0" and m.label() is SIGMA and not m.transitions
    assert kb.revision == 0


def test_traffic_light(kb):
    first = kb.assert_fact(RED)
    assert first.added == ["tl"] and first.removed == []
    report = kb.assert_fact(AMBER)
    assert report.removed == ["tl/colour/red"]
    assert report.added == ["tl/colour/amber"]
    assert report.revision == 2
    assert satisfies(kb.model, parse_formula(AMBER))
    assert kb.query("<tl><colour><X>").bindings == [{"X": "amber"}]


def test_new_facts_override_old_ones(kb):
    kb.assert_fact("<brown><married>(<elizabeth>T /\\ !{elizabeth})")
    assert kb.query("<brown><married><X>").bindings == [{"X": "elizabeth"}]
    report = kb.assert_fact("<brown><married>(<jane>T /\\ !{jane})")
    assert report.removed == ["brown/married/elizabeth"]
    assert kb.query("<brown><married><X>").bindings == [{"X": "jane"}]


def test_compatible_facts_accumulate(kb):
    kb.assert_fact("<a>!{b,c}")
    report = kb.assert_fact("<a>(!{c,d} /\\ <c>T)")
    assert report.removed == [] and report.added == ["a/c"]
    assert kb.model.label(kb.model.step("n0", "a")) == frozenset("c")


def test_assert_is_idempotent(kb):
    kb.assert_fact(RED)
    before = dumps_model(kb.model)
    report = kb.assert_fact(RED)
    assert report.removed == [] and report.added == []
    assert dumps_model(kb.model) == before


def test_unsatisfiable_fact_is_rejected(kb):
    with pytest.raises(UnsatisfiableError):
        kb.assert_fact("<a>T /\\ !{b}")
    assert kb.revision == 0


def test_retract_keeps_labels(kb):
    kb.assert_fact(RED)
    report = kb.retract_path("tl/colour/red")
    assert report.removed == ["tl/colour/red"]
    assert not kb.query("<tl><colour><X>")
    colour = kb.model.step(kb.model.step("n0", "tl"), "colour")
    assert kb.model.label(colour) == frozenset(["red"])


def test_retract_errors(kb):
    kb.assert_fact(RED)
    with pytest.raises(PathNotFoundError) as info:
        kb.retract_path(["tl", "size"])
    assert info.value.path == ["tl", "size"]
    with pytest.raises(PathNotFoundError):
        kb.retract_path("nowhere/at/all")
    with pytest.raises(CathoristicError):
        kb.retract_path("")


def test_relabel_opens_a_state(kb):
    kb.assert_fact(RED)
    kb.relabel("tl/colour")
    report = kb.assert_fact("<tl><colour><green>T")
    assert report.removed == [] and report.added == ["tl/colour/green"]
    assert sorted(b["X"] for b in kb.query("<tl><colour><X>").bindings) == ["green", "red"]


@pytest.mark.slow
def test_random_sequences_keep_the_store_valid():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        kb = KnowledgeBase()
        for _ in range(6):
            if rng.random() < 0.25 and kb.model.transitions:
                paths = _paths(kb.model)
                kb.retract_path(list(paths[rng.integers(0, len(paths))]))
            else:
                f = random_formula(rng)
                if simpl(f) is BOT:
                    continue
                kb.assert_fact(f)
                assert satisfies(kb.model, f)
            m = kb.model
            assert is_tree(m)
            validate_model(m.states, m.transitions, m.labels, m.start)


def test_assert_then_query_paths_of_the_fact(kb):
    rng = np.random.default_rng(9)
    for _ in range(50):
        f = random_formula(rng)
        m = simpl(f)
        if m is BOT:
            continue
        kb.assert_fact(f)
        for path in _paths(m):
            assert kb.query([QueryLiteral(path)]), path


def test_parse_query():
    literals = parse_query(WELSH_QUERY)
    assert literals[0] == QueryLiteral(("welsh", Var("X")))
    assert literals[2] == QueryLiteral(("spouse", Var("X"), Var("Y")), True)
    assert literals[2].variables == ["X", "Y"]
    assert str(literals[2]) == "<spouse><X>(<Y> /\\ !{Y})"
    assert parse_query("<a><b>T") == [QueryLiteral(("a", "b"))]
    assert parse_query("<a>(<b>T /\\ !{b})") == [QueryLiteral(("a", "b"), True)]


@pytest.mark.parametrize("text", ["<a", "<a>(<X> /\\ !{Y})", ""])
def test_bad_queries(text):
    with pytest.raises(FormulaSyntaxError):
        parse_query(text)


def test_optimizer_order_for_the_welsh_query():
    l1, l2, l3 = parse_query(WELSH_QUERY)
    assert optimize_query([l1, l2, l3]) == [l1, l3, l2]
    assert optimize_query([l1, l2, l3], bound=["X", "Y"]) == [l3, l1, l2]


def test_optimizer_keeps_ties_in_written_order():
    literals = parse_query("<b><X>, <a><X>, <c><Y>")
    assert optimize_query(literals) == literals


def test_query_with_preset_bindings(kb):
    kb.assert_fact(RED)
    assert kb.query("<tl><colour><X>", bindings={"X": "red"}).bindings == [{"X": "red"}]
    assert not kb.query("<tl><colour><X>", bindings={"X": "amber"})


def _welsh(n):
    facts, couples = welsh_dataset(n, seed=3)
    return welsh_kb(facts), couples


def test_welsh_query_finds_the_couples():
    kb, couples = _welsh(20)
    plain = kb.query(WELSH_QUERY)
    fast = kb.query(WELSH_QUERY, optimize=True)
    expected = set(couples)
    assert {(b["X"], b["Y"]) for b in plain.bindings} == expected
    assert {(b["X"], b["Y"]) for b in fast.bindings} == expected
    assert plain.nodes == 21 ** 2 + 3 * 20 ** 2
    assert fast.nodes == 6 * 20 + 1


def test_explain():
    kb, _ = _welsh(10)
    frame = kb.explain(WELSH_QUERY)
    assert list(frame.columns) == ["plan", "position", "literal", "nodes"]
    assert len(frame) == 6
    optimized = frame[frame["plan"] == "optimized"]
    assert list(optimized["literal"]) == ["<welsh><X>", "<spouse><X>(<Y> /\\ !{Y})", "<welsh><Y>"]
    totals = frame.groupby("plan")["nodes"].sum()
    assert totals["optimized"] < totals["unoptimized"]


@pytest.mark.slow
def test_optimizer_on_a_thousand_people():
    kb, couples = _welsh(1000)
    plain = kb.query(WELSH_QUERY)
    fast = kb.query(WELSH_QUERY, optimize=True)
    assert sorted(map(str, plain.bindings)) == sorted(map(str, fast.bindings))
    assert len(fast.bindings) == len(couples)
    assert fast.nodes * 100 < plain.nodes


def test_move_schema(kb):
    kb.assert_fact("<alice><at>(<kitchen>T /\\ !{kitchen})")
    reports = kb.perform(move_schema(), ["alice", "kitchen", "hall"])
    assert reports[0].removed == ["alice/at/kitchen"]
    assert reports[0].added == ["alice/at/hall"]
    assert kb.query("<alice><at><X>").bindings == [{"X": "hall"}]


def test_move_schema_checks_preconditions(kb):
    kb.assert_fact("<alice><at>(<kitchen>T /\\ !{kitchen})")
    with pytest.raises(CathoristicError):
        kb.perform(move_schema(), {"A": "alice", "X": "hall", "Y": "kitchen"})
    with pytest.raises(CathoristicError):
        kb.perform(move_schema(), {"A": "alice"})


def test_replay_rebuilds_the_store(kb, tmp_path):
    kb.assert_fact(RED)
    kb.assert_fact(AMBER)
    kb.assert_fact("<tl><size>T")
    kb.retract_path("tl/size")
    kb.relabel("tl/colour")
    assert kb.log[0] == "assert " + RED
    again = KnowledgeBase.replay(kb.log)
    assert dumps_model(again.model) == dumps_model(kb.model)
    assert again.revision == kb.revision

    path = tmp_path / "kb" / "commands.log"
    kb.save_log(path)
    assert dumps_model(KnowledgeBase.replay_file(path).model) == dumps_model(kb.model)


def test_unknown_log_command(kb):
    with pytest.raises(CathoristicError):
        kb.apply("forget everything")


def test_from_model_and_files(tmp_path):
    m = make_model([("x", "a", "y")], {"x": "*", "y": ["b"]}, start="x")
    kb = KnowledgeBase.from_model(m)
    assert kb.model.transitions == frozenset([("n0", "a", "n1")])
    kb.assert_fact("<c>T")
    assert kb.model.step("n0", "c") == "n2"

    path = tmp_path / "kb.json"
    kb.save(path)
    assert dumps_model(KnowledgeBase.load(path).model) == dumps_model(kb.model)

    with pytest.raises(NotATreeError):
        KnowledgeBase.from_model(make_model([("s0", "a", "s0")], {"s0": "*"}))


def test_load_is_a_replayable_mutation(kb, tmp_path):
    other = KnowledgeBase()
    other.assert_fact("<c>T")
    path = tmp_path / "other.json"
    other.save(path)
    kb.assert_fact("<a>T")
    report = kb.restore(path)
    assert report.removed == ["a"] and report.added == ["c"]
    kb.assert_fact("<b>T")
    assert kb.log == ["assert <a>T", f"load {path}", "assert <b>T"]
    assert kb.revision == 3
    assert dumps_model(KnowledgeBase.replay(kb.log).model) == dumps_model(kb.model)


def test_compatible_facts_commute():
    rng = np.random.default_rng(12)
    checked = 0
    while checked < 150:
        facts = [random_formula(rng, actions=("a", "b"), depth=2) for _ in range(3)]
        joint = simpl(And(And(facts[0], facts[1]), facts[2]))
        if joint is BOT:
            continue
        for order in itertools.permutations(facts):
            kb = KnowledgeBase()
            reports = kb.assert_many(order)
            assert all(report.removed == [] for report in reports)
            assert equivalent(kb.model, joint)
        checked += 1
