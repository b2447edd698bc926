"""
Satisfaction relations.

satisfies works on labelled (cathoristic) models, satisfies_pure on pure models
where the tantum is read off the out-set, eval_extended adds classical ~ and \\/,
and satisfies_quantified evaluates exists/forall over a closed alphabet.
"""

import logging

from app.logic.syntax import (
    And,
    Bang,
    Bottom,
    Exists,
    Forall,
    May,
    Neg,
    Or,
    Top,
    check_dialect,
    conjoin,
    disjoin,
    fold,
    ground,
)
from app.models.model import (
    BOT,
    SIGMA,
    CathoristicModel,
    CathoristicTS,
    PureModel,
    label_subset,
)
from app.utils.errors import CathoristicError, DialectError, NondeterministicInputError, OpenAlphabetError

logger = logging.getLogger(__name__)


def satisfies(m, f):
    """
    Decide m |= f for a core formula.

    Args:
        m (CathoristicModel): Model, or BOT which satisfies everything
        f (Formula): Core formula

    Returns:
        bool: Whether the start state satisfies f
    """
    if m is BOT:
        return True
    check_dialect(f, "core")
    return holds_at(m, m.start, f)


def holds_at(m, state, f):
    """Core satisfaction at an arbitrary state; f is assumed to be core."""
    # Core formulae are conjunctive, so each pending obligation must hold.
    pending = [(state, f)]
    while pending:
        s, node = pending.pop()
        if isinstance(node, Top):
            continue
        if isinstance(node, Bottom):
            return False
        if isinstance(node, And):
            pending.append((s, node.right))
            pending.append((s, node.left))
        elif isinstance(node, May):
            t = m.step(s, node.action)
            if t is None:
                return False
            pending.append((t, node.body))
        elif isinstance(node, Bang):
            if not label_subset(m.label(s), node.actions):
                return False
        else:
            raise DialectError(type(node).__name__, "core")
    return True


def _satisfying_states(states, f, bang_holds, successors):
    """Global check: the set of states satisfying each subformula, bottom-up."""
    everything = frozenset(states)

    def combine(node, args):
        if isinstance(node, Top):
            return everything
        if isinstance(node, Bottom):
            return frozenset()
        if isinstance(node, And):
            return args[0] & args[1]
        if isinstance(node, Or):
            return args[0] | args[1]
        if isinstance(node, Neg):
            return everything - args[0]
        if isinstance(node, May):
            body = args[0]
            return frozenset(s for s in everything if any(t in body for t in successors(s, node.action)))
        if isinstance(node, Bang):
            return frozenset(s for s in everything if bang_holds(s, node.actions))
        raise DialectError(type(node).__name__, "neg")

    return fold(f, combine)


def eval_extended(m, f):
    """
    Classical evaluation of a neg-dialect formula on a labelled model.

    Args:
        m (CathoristicModel): Model
        f (Formula): Formula that may contain ~ and \\/

    Returns:
        bool: Truth at the start state
    """
    if m is BOT:
        return True
    check_dialect(f, "neg")

    def successors(s, a):
        t = m.step(s, a)
        return () if t is None else (t,)

    def bang_holds(s, actions):
        return label_subset(m.label(s), actions)

    return m.start in _satisfying_states(m.states, f, bang_holds, successors)


def satisfies_pure(p, f, state=None):
    """
    Satisfaction on a pure model: !A holds when every outgoing action lies in A.

    Args:
        p (PureModel): Possibly non-deterministic pure model
        f (Formula): Core formula
        state (str): State to evaluate at (default: start)

    Returns:
        bool: Truth at the state
    """
    check_dialect(f, "core")

    def bang_holds(s, actions):
        return p.out(s) <= actions

    return (p.start if state is None else state) in _satisfying_states(p.states, f, bang_holds, p.targets)


def expand_quantifiers(f, env, alphabet):
    """Unfold exists/forall over a closed alphabet into a ground neg-dialect formula."""
    if not alphabet.is_closed:
        raise OpenAlphabetError("quantified satisfaction")
    actions = sorted(alphabet.actions)

    def expand(node, bindings):
        if isinstance(node, Exists):
            return disjoin(expand(node.body, {**bindings, node.var: a}) for a in actions)
        if isinstance(node, Forall):
            return conjoin(expand(node.body, {**bindings, node.var: a}) for a in actions)
        if isinstance(node, And):
            return And(expand(node.left, bindings), expand(node.right, bindings))
        if isinstance(node, Or):
            return Or(expand(node.left, bindings), expand(node.right, bindings))
        if isinstance(node, Neg):
            return Neg(expand(node.body, bindings))
        if isinstance(node, May):
            return ground(May(node.action, expand(node.body, bindings)), bindings)
        return ground(node, bindings)

    return expand(f, dict(env))


def satisfies_quantified(m, f, env, alphabet):
    """
    Evaluate a quantified formula; quantifiers range over the closed alphabet.

    Args:
        m (CathoristicModel): Model
        f (Formula): Quantified-dialect formula
        env (dict): Variable name -> action for the free variables
        alphabet (Alphabet): Closed alphabet

    Returns:
        bool: Truth at the start state
    """
    check_dialect(f, "quantified")
    grounded = expand_quantifiers(f, env, alphabet)
    logger.debug(f"Quantified formula expanded to {grounded}")
    return eval_extended(m, grounded)


def to_pure(m):
    """Forget the state labelling."""
    return PureModel(m.states, m.transitions, m.start)


def from_pure(p, mode="max"):
    """
    Label a deterministic pure model.

    Args:
        p (PureModel): Deterministic pure model
        mode (str): "max" labels every state SIGMA, "min" labels each state with its out-set

    Returns:
        CathoristicModel: Labelled model
    """
    if not p.is_deterministic:
        raise NondeterministicInputError("only deterministic pure models can be labelled")
    if mode == "max":
        labels = {s: SIGMA for s in p.states}
    elif mode == "min":
        labels = {s: p.out(s) for s in p.states}
    else:
        raise CathoristicError(f"mode must be max or min, got {mode}")
    return CathoristicModel(CathoristicTS(p.states, p.transitions, labels), p.start)
