"""
Entailment and incompatibility.

entails is the quadratic procedure: build simpl(f) and check g on it.
entails_neg handles ~ and \\/ by rewriting negation away relative to a finite
action set, splitting into disjuncts and checking every bounded extension.
"""

import itertools
import logging

from joblib import Parallel, delayed

from app.logic.semantics import eval_extended, holds_at, satisfies
from app.logic.syntax import (
    BOTTOM,
    TOP,
    And,
    Bang,
    Bottom,
    May,
    Neg,
    Or,
    Top,
    actions_of,
    check_dialect,
    disjoin,
    fold,
    formula_length,
    modal_depth,
)
from app.models.lattice import char, simpl
from app.models.model import BOT, SIGMA, CathoristicModel, CathoristicTS, bfs_order, is_tree
from app.utils import config
from app.utils.errors import CathoristicError, DialectError, NotATreeError

logger = logging.getLogger(__name__)


def entails(f, g):
    """
    Decide f |= g for core formulae.

    Args:
        f (Formula): Premise
        g (Formula): Conclusion

    Returns:
        bool: True iff every model of f satisfies g
    """
    check_dialect(f, "core")
    check_dialect(g, "core")
    m = simpl(f)
    if m is BOT:
        return True
    return satisfies(m, g)


def incompatible(f, g):
    """True iff no model satisfies both f and g."""
    check_dialect(f, "core")
    check_dialect(g, "core")
    return simpl(And(f, g)) is BOT


def incompatibility_set(f, candidates):
    """The members of candidates incompatible with f."""
    return [x for x in candidates if incompatible(f, x)]


def brandom_check(f, g, candidates):
    """Whether entailment coincides with inclusion of incompatibility sets over candidates."""
    entailed = entails(f, g)
    included = set(incompatibility_set(g, candidates)) <= set(incompatibility_set(f, candidates))
    return entailed == included


def fresh_action(used, base="z"):
    """First of z, z1, z2, ... not in used."""
    if base not in used:
        return base
    for i in itertools.count(1):
        name = f"{base}{i}"
        if name not in used:
            return name


def _first_failure(m, g):
    """The state and subformula at which g first fails on m, or None."""
    pending = [(m.start, g)]
    while pending:
        s, node = pending.pop()
        if isinstance(node, Top):
            continue
        if isinstance(node, Bottom):
            return s, node
        if isinstance(node, And):
            pending.append((s, node.right))
            pending.append((s, node.left))
        elif isinstance(node, May):
            t = m.step(s, node.action)
            if t is None:
                return s, node
            pending.append((t, node.body))
        elif isinstance(node, Bang):
            if not holds_at(m, s, node):
                return s, node
    return None


def incompatibility_witness(f, g):
    """
    A formula incompatible with g but compatible with f, when f does not entail g.

    The witness is char of a refinement of simpl(f): the label of the state where a
    modality of g fails is narrowed, or a transition escaping a tantum of g is added.

    Args:
        f (Formula): Premise
        g (Formula): Conclusion

    Returns:
        Formula or None: The witness x, or None when f entails g
    """
    if entails(f, g):
        return None
    m = simpl(f)
    state, node = _first_failure(m, g)
    labels = dict(m.labels)
    transitions = set(m.transitions)
    states = set(m.states)
    if isinstance(node, May):
        label = labels[state]
        labels[state] = m.out(state) if label is SIGMA else label - {node.action}
    elif isinstance(node, Bang):
        escaping = sorted(m.out(state) - node.actions)
        if not escaping:
            label = labels[state]
            if label is SIGMA:
                action = fresh_action(actions_of(f) | actions_of(g) | node.actions)
            else:
                action = sorted(label - node.actions)[0]
            child = fresh_action(states, base="w")
            states.add(child)
            labels[child] = SIGMA
            transitions.add((state, action, child))
    refined = CathoristicModel(CathoristicTS(frozenset(states), frozenset(transitions), labels), m.start)
    x = char(refined)
    logger.debug(f"Witness for {f} not entailing {g}: {x}")
    return x


def neg_eliminate(f, actions):
    """
    Push negation inward relative to a finite action set, innermost first.

    Args:
        f (Formula): Neg-dialect formula
        actions (iterable): The finite set S

    Returns:
        Formula: Equivalent-under-S formula without ~ (may contain \\/ and F)
    """
    s = frozenset(actions)

    def negate_node(node, args):
        if isinstance(node, Top):
            return BOTTOM
        if isinstance(node, Bottom):
            return TOP
        if isinstance(node, And):
            return Or(args[0], args[1])
        if isinstance(node, Or):
            return And(args[0], args[1])
        if isinstance(node, May):
            return Or(Bang(s - {node.action}), May(node.action, args[0]))
        if isinstance(node, Bang):
            return disjoin(May(a, TOP) for a in sorted(s - node.actions))
        raise DialectError(type(node).__name__, "neg")

    def combine(node, args):
        if isinstance(node, Neg):
            return fold(args[0], negate_node)
        if isinstance(node, And):
            return And(args[0], args[1])
        if isinstance(node, Or):
            return Or(args[0], args[1])
        if isinstance(node, May):
            return May(node.action, args[0])
        if isinstance(node, (Top, Bottom, Bang)):
            return node
        raise DialectError(type(node).__name__, "neg")

    return fold(f, combine)


def to_dnf(f):
    """
    Disjunctive normal form of a ~-free formula.

    Conjunction distributes over disjunction, and <a>(p \\/ q) splits into
    <a>p \\/ <a>q so that every disjunct is a core formula.

    Args:
        f (Formula): Formula without ~

    Returns:
        list: Core disjuncts, duplicates removed, in order of appearance
    """
    def combine(node, args):
        if isinstance(node, (Top, Bottom, Bang)):
            return [node]
        if isinstance(node, Or):
            return args[0] + args[1]
        if isinstance(node, And):
            return [And(x, y) for x in args[0] for y in args[1]]
        if isinstance(node, May):
            return [May(node.action, d) for d in args[0]]
        raise DialectError(type(node).__name__, "core")

    return list(dict.fromkeys(fold(f, combine)))


def _fresh_shapes(depth, bound, actions, memo):
    """All subtrees a fresh Sigma-labelled node at depth may grow, as nested action tuples."""
    if depth in memo:
        return memo[depth]
    if depth >= bound:
        shapes = [()]
    else:
        below = _fresh_shapes(depth + 1, bound, actions, memo)
        options = [[None] + below for _ in actions]
        shapes = [
            tuple((a, shape) for a, shape in zip(actions, choice) if shape is not None)
            for choice in itertools.product(*options)
        ]
    memo[depth] = shapes
    return shapes


def s_extensions(base, actions, bound):
    """
    Enumerate the extensions of a tree model by fresh subtrees over actions.

    Fresh children hang off any node on an action in S its label admits and that it
    does not already use; fresh states are Sigma-labelled; nothing grows below depth
    bound (the root has depth 0).

    Args:
        base (CathoristicModel): Tree model
        actions (iterable): The finite set S
        bound (int): Height bound

    Yields:
        CathoristicModel: Each extension once, base first
    """
    if not is_tree(base):
        raise NotATreeError("extensions are defined for tree models")
    acts = tuple(sorted(actions))
    order = bfs_order(base)
    depth = {base.start: 0}
    for s in order:
        for _, t in base.edges(s):
            depth[t] = depth[s] + 1

    memo = {}
    slots = []
    for s in order:
        if depth[s] + 1 > bound:
            continue
        label = base.label(s)
        used = base.out(s)
        for a in acts:
            if a not in used and (label is SIGMA or a in label):
                slots.append((s, a))

    per_slot = [[None] + _fresh_shapes(depth[s] + 1, bound, acts, memo) for s, _ in slots]
    for choice in itertools.product(*per_slot):
        labels = dict(base.labels)
        transitions = set(base.transitions)
        counter = itertools.count()

        def grow(parent, action, shape):
            while True:
                name = f"e{next(counter)}"
                if name not in base.states:
                    break
            labels[name] = SIGMA
            transitions.add((parent, action, name))
            for a, sub in shape:
                grow(name, a, sub)

        for (s, a), shape in zip(slots, choice):
            if shape is not None:
                grow(s, a, shape)
        yield CathoristicModel(CathoristicTS(frozenset(labels), frozenset(transitions), labels), base.start)


def height_bound(g, mode=None):
    mode = mode or config.height_bound_mode()
    return formula_length(g) if mode == "length" else modal_depth(g)


def _disjunct_entails(disjunct, g, actions, bound):
    m = simpl(disjunct)
    if m is BOT:
        return True
    count = 0
    for ext in s_extensions(m, actions, bound):
        count += 1
        if not eval_extended(ext, g):
            logger.debug(f"Disjunct {disjunct} fails on extension {count}")
            return False
    logger.debug(f"Disjunct {disjunct} passed {count} extensions")
    return True


def entails_neg(f, g, bound=None, n_jobs=None):
    """
    Decide entailment for the neg dialect.

    Args:
        f (Formula): Premise, may contain ~ and \\/
        g (Formula): Conclusion, may contain ~ and \\/
        bound (int): Extension height bound (default from CL_HEIGHT_BOUND)
        n_jobs (int): joblib workers for the disjunct checks (default CL_JOBS)

    Returns:
        bool: True iff every disjunct of the negation-free premise passes
    """
    check_dialect(f, "neg")
    check_dialect(g, "neg")
    used = actions_of(f) | actions_of(g)
    actions = used | {fresh_action(used)}
    disjuncts = to_dnf(neg_eliminate(f, actions))
    if bound is None:
        bound = height_bound(g)
    if bound < 0:
        raise CathoristicError("the height bound must be non-negative")
    n_jobs = n_jobs or config.n_jobs()
    logger.info(f"entails_neg: {len(disjuncts)} disjuncts over S={sorted(actions)}, bound {bound}")

    if n_jobs > 1 and len(disjuncts) > 1:
        results = Parallel(n_jobs=n_jobs)(
            delayed(_disjunct_entails)(d, g, actions, bound) for d in disjuncts
        )
        return all(results)
    return all(_disjunct_entails(d, g, actions, bound) for d in disjuncts)
