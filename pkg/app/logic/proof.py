"""
The sequent calculus for cathoristic logic.

Judgements are single formulae on each side. The thirteen primitive rules are
listed in RULES; side data (the action and tantum sets) is read off the
sequents. derive builds a checkable derivation for every valid entailment by
going through the characteristic formula of simpl(f).
"""

import json
import logging
from dataclasses import dataclass

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from app.logic.semantics import satisfies
from app.logic.syntax import (
    BOTTOM,
    TOP,
    And,
    Bang,
    Bottom,
    May,
    Top,
    check_dialect,
    conjoin,
    fold,
    parse_formula,
    print_formula,
)
from app.models.lattice import char, char_at, glb, simpl
from app.models.model import BOT, SIGMA, CathoristicModel, CathoristicTS, label_contains
from app.utils.errors import CathoristicError, DerivationError, FormulaSyntaxError, ProofCheckError

logger = logging.getLogger(__name__)

RULES = {
    "Id": 0,
    "TopRight": 0,
    "BotLeft": 0,
    "Trans": 2,
    "AndLeft1": 1,
    "AndLeft2": 1,
    "AndRight": 2,
    "BotRight1": 0,
    "BotRight2": 0,
    "BangRight1": 1,
    "BangRight2": 2,
    "Normal": 1,
    "Det": 1,
}

SCHEMAS = {
    "Id": "phi |- phi",
    "TopRight": "phi |- T",
    "BotLeft": "F |- phi",
    "Trans": "phi |- psi, psi |- xi / phi |- xi",
    "AndLeft1": "phi |- psi / phi /\\ xi |- psi",
    "AndLeft2": "phi |- psi / xi /\\ phi |- psi",
    "AndRight": "phi |- psi, phi |- xi / phi |- psi /\\ xi",
    "BotRight1": "a not in A / !A /\\ <a>phi |- F",
    "BotRight2": "<a>F |- F",
    "BangRight1": "phi |- !A, A subset of A' / phi |- !A'",
    "BangRight2": "phi |- !A, phi |- !B / phi |- !(A & B)",
    "Normal": "phi |- psi / <a>phi |- <a>psi",
    "Det": "phi |- <a>psi /\\ <a>xi / phi |- <a>(psi /\\ xi)",
}


@dataclass(frozen=True)
class Sequent:
    lhs: object
    rhs: object

    def __str__(self):
        return f"{print_formula(self.lhs)} |- {print_formula(self.rhs)}"


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: Sequent
    premises: tuple = ()

    @property
    def size(self):
        count = 0
        stack = [self]
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(node.premises)
        return count

    @property
    def depth(self):
        deepest = 0
        stack = [(self, 1)]
        while stack:
            node, level = stack.pop()
            deepest = max(deepest, level)
            stack.extend((p, level + 1) for p in node.premises)
        return deepest

    def __str__(self):
        return to_sexp(self)


@dataclass(frozen=True)
class NotEntailed:
    """Result of derive when no derivation exists; simpl(f) is a countermodel."""

    countermodel: object

    def __bool__(self):
        return False


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    rule: str = None
    expected: str = None
    actual: str = None
    path: tuple = ()

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "derivation checks"
        where = "/".join(str(i) for i in self.path) or "root"
        return f"rule {self.rule} at {where}: expected {self.expected}, got {self.actual}"


def node(rule, lhs, rhs, *premises):
    return Derivation(rule, Sequent(lhs, rhs), tuple(premises))


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------

def _check_node(d):
    """None when d instantiates its rule, else a description of what is wrong."""
    rule = d.rule
    if rule not in RULES:
        return f"one of {', '.join(RULES)}"
    if len(d.premises) != RULES[rule]:
        return f"{RULES[rule]} premises"
    c = d.conclusion
    p = [q.conclusion for q in d.premises]

    if rule == "Id":
        ok = c.lhs == c.rhs
    elif rule == "TopRight":
        ok = isinstance(c.rhs, Top)
    elif rule == "BotLeft":
        ok = isinstance(c.lhs, Bottom)
    elif rule == "Trans":
        ok = p[0].lhs == c.lhs and p[0].rhs == p[1].lhs and p[1].rhs == c.rhs
    elif rule == "AndLeft1":
        ok = isinstance(c.lhs, And) and p[0].lhs == c.lhs.left and p[0].rhs == c.rhs
    elif rule == "AndLeft2":
        ok = isinstance(c.lhs, And) and p[0].lhs == c.lhs.right and p[0].rhs == c.rhs
    elif rule == "AndRight":
        ok = (
            isinstance(c.rhs, And)
            and p[0] == Sequent(c.lhs, c.rhs.left)
            and p[1] == Sequent(c.lhs, c.rhs.right)
        )
    elif rule == "BotRight1":
        ok = (
            isinstance(c.rhs, Bottom)
            and isinstance(c.lhs, And)
            and isinstance(c.lhs.left, Bang)
            and isinstance(c.lhs.right, May)
            and c.lhs.right.action not in c.lhs.left.actions
        )
    elif rule == "BotRight2":
        ok = isinstance(c.rhs, Bottom) and isinstance(c.lhs, May) and isinstance(c.lhs.body, Bottom)
    elif rule == "BangRight1":
        ok = (
            isinstance(c.rhs, Bang)
            and p[0].lhs == c.lhs
            and isinstance(p[0].rhs, Bang)
            and p[0].rhs.actions <= c.rhs.actions
        )
    elif rule == "BangRight2":
        ok = (
            isinstance(c.rhs, Bang)
            and p[0].lhs == c.lhs
            and p[1].lhs == c.lhs
            and isinstance(p[0].rhs, Bang)
            and isinstance(p[1].rhs, Bang)
            and p[0].rhs.actions & p[1].rhs.actions == c.rhs.actions
        )
    elif rule == "Normal":
        ok = (
            isinstance(c.lhs, May)
            and isinstance(c.rhs, May)
            and c.lhs.action == c.rhs.action
            and p[0] == Sequent(c.lhs.body, c.rhs.body)
        )
    else:  # Det
        ok = (
            isinstance(c.rhs, May)
            and isinstance(c.rhs.body, And)
            and p[0] == Sequent(c.lhs, And(May(c.rhs.action, c.rhs.body.left), May(c.rhs.action, c.rhs.body.right)))
        )
    return None if ok else SCHEMAS[rule]


def check_derivation(d, strict=False):
    """
    Check every node of a derivation against its rule schema.

    Args:
        d (Derivation): Derivation to check
        strict (bool): Raise ProofCheckError instead of returning a failing report

    Returns:
        CheckReport: Truthy when the derivation checks; otherwise names the first failing node
    """
    stack = [(d, ())]
    while stack:
        current, path = stack.pop()
        expected = _check_node(current)
        if expected is not None:
            report = CheckReport(False, current.rule, expected, str(current.conclusion), path)
            logger.debug(f"Derivation check failed: {report}")
            if strict:
                raise ProofCheckError(report)
            return report
        for i in reversed(range(len(current.premises))):
            stack.append((current.premises[i], path + (i,)))
    return CheckReport(True)


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------

def _trans(d1, d2):
    """Chain two derivations, dropping identity steps."""
    if d1.rule == "Id":
        return d2
    if d2.rule == "Id":
        return d1
    return node("Trans", d1.conclusion.lhs, d2.conclusion.rhs, d1, d2)


def _contains_conjunct(p, target):
    stack = [p]
    while stack:
        f = stack.pop()
        if f == target:
            return True
        if isinstance(f, And):
            stack.extend((f.left, f.right))
    return False


def project(p, target):
    """Derive p |- target for a conjunct target of p using the And-Left rules."""
    steps = []
    current = p
    while current != target:
        if not isinstance(current, And):
            raise DerivationError(f"{print_formula(target)} is not a conjunct of {print_formula(p)}")
        if _contains_conjunct(current.left, target):
            steps.append(("AndLeft1", current))
            current = current.left
        else:
            steps.append(("AndLeft2", current))
            current = current.right
    d = node("Id", target, target)
    for rule, lhs in reversed(steps):
        d = node(rule, lhs, target, d)
    return d


def _may_collect(p, action, children):
    """Derive p |- <action>conjoin(children) from the conjuncts <action>c of p."""
    d = project(p, May(action, children[-1]))
    for i in range(len(children) - 2, -1, -1):
        first = project(p, May(action, children[i]))
        pair = node("AndRight", p, And(first.conclusion.rhs, d.conclusion.rhs), first, d)
        d = node("Det", p, May(action, conjoin(children[i:])), pair)
    return d


def _children_formula(contexts, action):
    kids = [(m, m.step(w, action)) for m, w in contexts if m.step(w, action) is not None]
    return kids, [char_at(m, t) for m, t in kids]


def _bang_from_contexts(p, contexts, psi):
    finite = sorted({m.label(w) for m, w in contexts if m.label(w) is not SIGMA}, key=sorted)
    if not finite:
        raise DerivationError(f"no tantum in {print_formula(p)} bounds {print_formula(psi)}")
    d = project(p, Bang(finite[0]))
    acc = finite[0]
    for label in finite[1:]:
        acc = acc & label
        d = node("BangRight2", p, Bang(acc), d, project(p, Bang(label)))
    if acc != psi.actions:
        d = node("BangRight1", p, psi, d)
    return d


def _prove_from_contexts(p, contexts, psi):
    """
    Derive p |- psi where the conjuncts of p describe the states in contexts.

    Every (model, state) in contexts contributes char_at(model, state) to p, and the
    states merged together satisfy psi. Goals and pending rule applications share one
    explicit stack.
    """
    results = []
    stack = [("goal", p, contexts, psi)]
    while stack:
        item = stack.pop()
        if item[0] == "build":
            _, arity, make = item
            args = results[len(results) - arity:]
            del results[len(results) - arity:]
            results.append(make(*args))
            continue
        _, p, contexts, psi = item
        if isinstance(psi, Top):
            results.append(node("TopRight", p, TOP))
        elif isinstance(psi, And):
            stack.append(("build", 2, lambda left, right, p=p, psi=psi: node("AndRight", p, psi, left, right)))
            stack.append(("goal", p, contexts, psi.right))
            stack.append(("goal", p, contexts, psi.left))
        elif isinstance(psi, Bang):
            results.append(_bang_from_contexts(p, contexts, psi))
        elif isinstance(psi, May):
            kids, chars = _children_formula(contexts, psi.action)
            if not kids:
                raise DerivationError(f"no <{psi.action}> conjunct in {print_formula(p)}")
            q = conjoin(chars)
            collect = _may_collect(p, psi.action, chars)

            def lower(inner, collect=collect, q=q, psi=psi):
                return _trans(collect, node("Normal", May(psi.action, q), psi, inner))

            stack.append(("build", 1, lower))
            stack.append(("goal", q, kids, psi.body))
        else:
            raise DerivationError(f"cannot derive {print_formula(psi)}")
    return results[0]


def _local_conflict(contexts):
    for mi, wi in contexts:
        for b, child in mi.edges(wi):
            for mj, wj in contexts:
                label = mj.label(wj)
                if not label_contains(label, b):
                    return (mj, wj, label), (mi, b, child)
    return None


def _joint_actions(contexts):
    return sorted({a for m, w in contexts for a in m.out(w)})


def _consistent(contexts):
    pending = [contexts]
    while pending:
        current = pending.pop()
        if _local_conflict(current) is not None:
            return False
        for a in _joint_actions(current):
            kids = [(m, m.step(w, a)) for m, w in current if m.step(w, a) is not None]
            if len(kids) > 1:
                pending.append(kids)
    return True


def _refute_contexts(p, contexts):
    """Derive p |- F when the states in contexts cannot be merged."""
    descent = []
    while True:
        conflict = _local_conflict(contexts)
        if conflict is not None:
            break
        for a in _joint_actions(contexts):
            kids, chars = _children_formula(contexts, a)
            if len(kids) > 1 and not _consistent(kids):
                q = conjoin(chars)
                descent.append((p, a, chars, q))
                p, contexts = q, kids
                break
        else:
            raise DerivationError(f"contexts of {print_formula(p)} are consistent")

    (_, _, label), (mi, b, child) = conflict
    bang = Bang(label)
    may = May(b, char_at(mi, child))
    both = node("AndRight", p, And(bang, may), project(p, bang), project(p, may))
    d = _trans(both, node("BotRight1", And(bang, may), BOTTOM))
    for p, a, chars, q in reversed(descent):
        collect = _may_collect(p, a, chars)
        lowered = _trans(collect, node("Normal", May(a, q), May(a, BOTTOM), d))
        d = _trans(lowered, node("BotRight2", May(a, BOTTOM), BOTTOM))
    return d


def _prefixed(action, m):
    """simpl(<action>f) from m = simpl(f): an unconstrained root above m."""
    root = f"r{len(m.states)}"
    labels = dict(m.labels)
    labels[root] = SIGMA
    transitions = m.transitions | {(root, action, m.start)}
    return CathoristicModel(CathoristicTS(frozenset(labels), transitions, labels), root)


def _to_characteristic(f):
    """
    Derive f |- char(simpl(f)), or f |- F when f is unsatisfiable.

    Returns:
        tuple: (derivation, simpl(f)) with BOT for the unsatisfiable case
    """

    def combine(g, args):
        if isinstance(g, (Top, Bang)):
            return node("Id", g, g), simpl(g)
        if isinstance(g, Bottom):
            return node("Id", g, g), BOT
        if isinstance(g, May):
            d, m = args[0]
            lifted = node("Normal", g, May(g.action, d.conclusion.rhs), d)
            if m is BOT:
                return _trans(lifted, node("BotRight2", May(g.action, BOTTOM), BOTTOM)), BOT
            return lifted, _prefixed(g.action, m)
        if isinstance(g, And):
            (d1, m1), (d2, m2) = args
            if m1 is BOT:
                return node("AndLeft1", g, BOTTOM, d1), BOT
            if m2 is BOT:
                return node("AndLeft2", g, BOTTOM, d2), BOT
            k1, k2 = d1.conclusion.rhs, d2.conclusion.rhs
            both = node("AndRight", g, And(k1, k2), node("AndLeft1", g, k1, d1), node("AndLeft2", g, k2, d2))
            merged = glb(m1, m2)
            contexts = [(m1, m1.start), (m2, m2.start)]
            if merged is BOT:
                return _trans(both, _refute_contexts(And(k1, k2), contexts)), BOT
            return _trans(both, _prove_from_contexts(And(k1, k2), contexts, char(merged))), merged
        raise DerivationError(f"not a core formula: {g!r}")

    return fold(f, combine)


def derive(f, g):
    """
    Build a derivation of f |- g, or report that none exists.

    Args:
        f (Formula): Core premise
        g (Formula): Core conclusion

    Returns:
        Derivation or NotEntailed: A derivation passing check_derivation, or the countermodel simpl(f)
    """
    check_dialect(f, "core")
    check_dialect(g, "core")
    if f == g:
        return node("Id", f, g)
    to_char, m = _to_characteristic(f)
    if m is BOT:
        return _trans(to_char, node("BotLeft", BOTTOM, g))
    if not satisfies(m, g):
        logger.info(f"{print_formula(f)} does not entail {print_formula(g)}")
        return NotEntailed(simpl(f))
    k = to_char.conclusion.rhs
    return _trans(to_char, _prove_from_contexts(k, [(m, m.start)], g))


# ---------------------------------------------------------------------------
# Derived rules
# ---------------------------------------------------------------------------

def _split_conjunction(f, n=None):
    parts = []
    current = f
    while isinstance(current, And) and (n is None or len(parts) < n - 1):
        parts.append(current.left)
        current = current.right
    parts.append(current)
    if n is not None and len(parts) != n:
        raise DerivationError(f"{print_formula(f)} does not have {n} conjuncts")
    return parts


def _collect_modalities(action, parts):
    """Derive conjoin(<a>p for p in parts) |- <a>conjoin(parts) with Det."""
    lhs = conjoin(May(action, q) for q in parts)
    if len(parts) == 1:
        return node("Id", lhs, lhs)
    if len(parts) == 2:
        return node("Det", lhs, May(action, conjoin(parts)), node("Id", lhs, lhs))
    head = May(action, parts[0])
    rest = _collect_modalities(action, parts[1:])
    pair = node(
        "AndRight", lhs, And(head, rest.conclusion.rhs),
        node("AndLeft1", lhs, head, node("Id", head, head)),
        node("AndLeft2", lhs, rest.conclusion.rhs, rest),
    )
    return node("Det", lhs, May(action, conjoin(parts)), pair)


def derived_rule_normal_multi(premise, action, n=None):
    """
    From phi1 /\\ ... /\\ phin |- psi derive <a>phi1 /\\ ... /\\ <a>phin |- <a>psi.

    Args:
        premise (Derivation): Checked derivation with a right-nested conjunction on the left
        action (str): The modality a
        n (int): Number of conjuncts (default: the whole right spine)

    Returns:
        Derivation: Built from Det, Normal and Trans only
    """
    if not check_derivation(premise):
        raise DerivationError("the premise does not check")
    parts = _split_conjunction(premise.conclusion.lhs, n)
    lifted = node("Normal", May(action, premise.conclusion.lhs), May(action, premise.conclusion.rhs), premise)
    if len(parts) == 1:
        return lifted
    return node(
        "Trans",
        conjoin(May(action, q) for q in parts),
        lifted.conclusion.rhs,
        _collect_modalities(action, parts),
        lifted,
    )


def bang_left(premise, weaker):
    """
    From phi /\\ !A |- psi derive phi /\\ !A' |- psi for A' a subset of A.

    Args:
        premise (Derivation): Derivation whose left side is phi /\\ !A
        weaker (iterable): The set A'

    Returns:
        Derivation: Trans of a strengthening step and the premise
    """
    weaker = frozenset(weaker)
    lhs = premise.conclusion.lhs
    if not isinstance(lhs, And) or not isinstance(lhs.right, Bang):
        raise DerivationError("the premise must have the form phi /\\ !A |- psi")
    if not weaker <= lhs.right.actions:
        raise DerivationError("the new tantum must be a subset of the old one")
    if not check_derivation(premise):
        raise DerivationError("the premise does not check")
    phi, strong = lhs.left, lhs.right
    new_lhs = And(phi, Bang(weaker))
    keep = node("AndLeft1", new_lhs, phi, node("Id", phi, phi))
    tighten = node("BangRight1", new_lhs, strong, node("AndLeft2", new_lhs, Bang(weaker), node("Id", Bang(weaker), Bang(weaker))))
    strengthen = node("AndRight", new_lhs, lhs, keep, tighten)
    return node("Trans", new_lhs, premise.conclusion.rhs, strengthen, premise)


def example_derivation_top():
    """<a>!{b,c} /\\ <a>!{c,d} |- <a>!{c}, rule for rule."""
    bc, cd, c = Bang(frozenset("bc")), Bang(frozenset("cd")), Bang(frozenset("c"))
    lhs = And(May("a", bc), May("a", cd))
    inner = node(
        "BangRight2", And(bc, cd), c,
        node("AndLeft1", And(bc, cd), bc, node("Id", bc, bc)),
        node("AndLeft2", And(bc, cd), cd, node("Id", cd, cd)),
    )
    det = node("Det", lhs, May("a", And(bc, cd)), node("Id", lhs, lhs))
    normal = node("Normal", May("a", And(bc, cd)), May("a", c), inner)
    return node("Trans", lhs, May("a", c), det, normal)


def example_derivation_bottom():
    """<a>!{b} /\\ <a><c>T |- <d>T via the falsity rules."""
    b = Bang(frozenset("b"))
    ct = May("c", TOP)
    lhs = And(May("a", b), May("a", ct))
    clash = node("BotRight1", And(b, ct), BOTTOM)
    det = node("Det", lhs, May("a", And(b, ct)), node("Id", lhs, lhs))
    normal = node("Normal", May("a", And(b, ct)), May("a", BOTTOM), clash)
    to_may_bottom = node("Trans", lhs, May("a", BOTTOM), det, normal)
    to_bottom = node("Trans", lhs, BOTTOM, to_may_bottom, node("BotRight2", May("a", BOTTOM), BOTTOM))
    goal = May("d", TOP)
    return node("Trans", lhs, goal, to_bottom, node("BotLeft", BOTTOM, goal))


# ---------------------------------------------------------------------------
# S-expressions
# ---------------------------------------------------------------------------

SEXP_GRAMMAR = r"""
?start: derivation

derivation: "(" RULE ESCAPED_STRING derivation* ")"

RULE: /[A-Za-z][A-Za-z0-9]*/

%import common.ESCAPED_STRING
%import common.WS
%ignore WS
"""


def _parse_sequent(text):
    if text.count("|-") != 1:
        raise FormulaSyntaxError(f"a sequent needs exactly one |-: {text!r}")
    lhs, rhs = text.split("|-")
    return Sequent(parse_formula(lhs.strip()), parse_formula(rhs.strip()))


class _DerivationBuilder(Transformer):
    def derivation(self, items):
        rule, sequent, *premises = items
        return Derivation(str(rule), _parse_sequent(json.loads(sequent)), tuple(premises))


_sexp_parser = Lark(SEXP_GRAMMAR, parser="lalr", transformer=_DerivationBuilder())


def to_sexp(d):
    """Render a derivation as (Rule "lhs |- rhs" premise*)."""
    lines = []
    stack = [(d, 0, 0)]
    while stack:
        current, indent, closers = stack.pop()
        head = f"{'  ' * indent}({current.rule} {json.dumps(str(current.conclusion))}"
        if not current.premises:
            lines.append(head + ")" * (1 + closers))
            continue
        lines.append(head)
        last = len(current.premises) - 1
        for i in range(last, -1, -1):
            stack.append((current.premises[i], indent + 1, closers + 1 if i == last else 0))
    return "\n".join(lines)



def from_sexp(text):
    """
    Read a derivation written by to_sexp.

    Args:
        text (str): S-expression text

    Returns:
        Derivation: Parsed derivation (not yet checked)
    """
    try:
        return _sexp_parser.parse(text)
    except UnexpectedInput as e:
        raise FormulaSyntaxError("cannot parse derivation", e.line, e.column) from e
    except VisitError as e:
        if isinstance(e.orig_exc, CathoristicError):
            raise e.orig_exc
        raise FormulaSyntaxError(f"cannot parse derivation: {e.orig_exc}") from e
