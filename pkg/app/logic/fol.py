"""
First-order translations.

fol1 is the single-sorted translation over Arrow_a and Restrict_A using only the
variables x and y. fol2 is the two-sorted translation over Allowed and Arrow with
action constants. eval_fol evaluates either on a finite FolModel. translate_hml
maps core formulae into Hennessy-Milner logic over a closed alphabet.
"""

import logging
from dataclasses import dataclass, field

from app.logic.syntax import (
    TOP,
    And,
    Bang,
    Bottom,
    May,
    Neg,
    Top,
    actions_of,
    check_dialect,
    conjoin,
    subformulae,
)
from app.models.model import SIGMA, CathoristicTS, label_contains, label_subset
from app.utils import config
from app.utils.errors import (
    BottomUnsupportedError,
    CathoristicError,
    GuardsViolatedError,
    OpenAlphabetError,
    SortMismatchError,
)

logger = logging.getLogger(__name__)

STATE = "st"
ACTION = "act"


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    """An action constant of the two-sorted signature."""

    name: str

    def __str__(self):
        return self.name


class FolFormula:
    def __str__(self):
        return print_fol(self)


@dataclass(frozen=True)
class FTop(FolFormula):
    pass


@dataclass(frozen=True)
class FFalse(FolFormula):
    pass


@dataclass(frozen=True)
class FAnd(FolFormula):
    left: FolFormula
    right: FolFormula


@dataclass(frozen=True)
class FOr(FolFormula):
    left: FolFormula
    right: FolFormula


@dataclass(frozen=True)
class FNeg(FolFormula):
    body: FolFormula


@dataclass(frozen=True)
class FImplies(FolFormula):
    left: FolFormula
    right: FolFormula


@dataclass(frozen=True)
class FExists(FolFormula):
    var: str
    body: FolFormula
    sort: str = None


@dataclass(frozen=True)
class FForall(FolFormula):
    var: str
    body: FolFormula
    sort: str = None


@dataclass(frozen=True)
class Arrow1(FolFormula):
    """Arrow_a(src, dst) of the single-sorted signature."""

    action: str
    src: FVar
    dst: FVar


@dataclass(frozen=True)
class Restrict(FolFormula):
    actions: frozenset
    var: FVar


@dataclass(frozen=True)
class Allowed(FolFormula):
    state: FVar
    action: object


@dataclass(frozen=True)
class Arrow(FolFormula):
    src: FVar
    action: object
    dst: FVar


@dataclass(frozen=True)
class Eq(FolFormula):
    left: object
    right: object


F_TOP = FTop()
F_FALSE = FFalse()


def _disjoin(formulas):
    formulas = list(formulas)
    if not formulas:
        return F_FALSE
    result = formulas[-1]
    for f in reversed(formulas[:-1]):
        result = FOr(f, result)
    return result


def _binder(keyword, node):
    sort = f":{node.sort}" if node.sort else ""
    return f"{keyword} {node.var}{sort}. "


def print_fol(f):
    """Text form: exists/forall prefixes, infix /\\ \\/ -> and =, ~ for negation."""
    if isinstance(f, FTop):
        return "T"
    if isinstance(f, FFalse):
        return "F"
    if isinstance(f, FAnd):
        return f"({print_fol(f.left)} /\\ {print_fol(f.right)})"
    if isinstance(f, FOr):
        return f"({print_fol(f.left)} \\/ {print_fol(f.right)})"
    if isinstance(f, FImplies):
        return f"({print_fol(f.left)} -> {print_fol(f.right)})"
    if isinstance(f, FNeg):
        return f"~{print_fol(f.body)}"
    if isinstance(f, FExists):
        return _binder("exists", f) + print_fol(f.body)
    if isinstance(f, FForall):
        return _binder("forall", f) + print_fol(f.body)
    if isinstance(f, Arrow1):
        return f"Arrow_{f.action}({f.src},{f.dst})"
    if isinstance(f, Restrict):
        return "Restrict{" + ",".join(sorted(f.actions)) + f"}}({f.var})"
    if isinstance(f, Allowed):
        return f"Allowed({f.state},{f.action})"
    if isinstance(f, Arrow):
        return f"Arrow({f.src},{f.action},{f.dst})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    raise CathoristicError(f"not a first-order formula: {f!r}")


# ---------------------------------------------------------------------------
# Formula translations
# ---------------------------------------------------------------------------

def _other(side):
    if side not in ("x", "y"):
        raise CathoristicError(f"side must be x or y, got {side}")
    return "y" if side == "x" else "x"


def translate_fol1(f, side="x"):
    """
    Single-sorted translation; the free variable is side and modalities alternate x and y.

    Args:
        f (Formula): Core formula without F
        side (str): "x" or "y"

    Returns:
        FolFormula: The translation
    """
    check_dialect(f, "core")
    _other(side)
    return _fol1(f, side)


def _fol1(f, side):
    other = "y" if side == "x" else "x"
    if isinstance(f, Top):
        return F_TOP
    if isinstance(f, Bottom):
        raise BottomUnsupportedError()
    if isinstance(f, And):
        return FAnd(_fol1(f.left, side), _fol1(f.right, side))
    if isinstance(f, May):
        step = Arrow1(f.action, FVar(side), FVar(other))
        return FExists(other, FAnd(step, _fol1(f.body, other)))
    return Restrict(f.actions, FVar(side))


def _member(term, actions):
    return _disjoin(Eq(term, Const(a)) for a in sorted(actions))


def translate_fol2(f, side="x"):
    """
    Two-sorted translation over Allowed(state, action) and Arrow(state, action, state).

    !A becomes forall k:act. (Allowed(x,k) -> k = a1 \\/ ... \\/ k = an), F when A is empty.

    Args:
        f (Formula): Core formula without F
        side (str): "x" or "y"

    Returns:
        FolFormula: The translation
    """
    check_dialect(f, "core")
    _other(side)
    return _fol2(f, side)


def _fol2(f, side):
    other = "y" if side == "x" else "x"
    if isinstance(f, Top):
        return F_TOP
    if isinstance(f, Bottom):
        raise BottomUnsupportedError()
    if isinstance(f, And):
        return FAnd(_fol2(f.left, side), _fol2(f.right, side))
    if isinstance(f, May):
        step = Arrow(FVar(side), Const(f.action), FVar(other))
        return FExists(other, FAnd(step, _fol2(f.body, other)), STATE)
    k = FVar("k")
    return FForall("k", FImplies(Allowed(FVar(side), k), _member(k, f.actions)), ACTION)


def guards():
    """
    The admissibility and determinism sentences of the two-sorted theory.

    Returns:
        tuple: (admissibility, determinism)
    """
    x, y, z, k = FVar("x"), FVar("y"), FVar("z"), FVar("k")
    admissible = FForall("x", FForall("y", FForall(
        "k", FImplies(Arrow(x, k, y), Allowed(x, k)), ACTION), STATE), STATE)
    deterministic = FForall("x", FForall("y", FForall("z", FForall(
        "k", FImplies(FAnd(Arrow(x, k, y), Arrow(x, k, z)), Eq(y, z)), ACTION), STATE), STATE), STATE)
    return admissible, deterministic


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FolModel:
    """
    A finite first-order structure.

    Single-sorted models keep the state labels and decide Restrict_A on demand;
    two-sorted models carry an action universe and the Allowed table.
    """

    states: frozenset
    arrows: frozenset
    labels: dict = field(default=None, compare=False)
    actions: frozenset = None
    allowed: frozenset = frozenset()

    @property
    def two_sorted(self):
        return self.actions is not None

    def restrict(self, actions, state):
        return label_subset(self.labels[state], actions)


def translate_model(ts, target="fol1", alphabet=None):
    """
    The first-order structure a cathoristic transition system gives rise to.

    Args:
        ts (CathoristicTS or CathoristicModel): Transition system
        target (str): "fol1" or "fol2"
        alphabet (Alphabet): Closed alphabet for fol2 (default CL_ALPHABET)

    Returns:
        FolModel: The structure
    """
    if target == "fol1":
        return FolModel(frozenset(ts.states), frozenset(ts.transitions), dict(ts.labels))
    if target != "fol2":
        raise CathoristicError(f"target must be fol1 or fol2, got {target}")
    alphabet = alphabet or config.alphabet_from_env()
    if not alphabet.is_closed:
        raise OpenAlphabetError("the two-sorted translation")
    universe = set(alphabet.actions)
    universe.update(a for _, a, _ in ts.transitions)
    for label in ts.labels.values():
        if label is not SIGMA:
            universe.update(label)
    allowed = frozenset(
        (s, a) for s in ts.states for a in universe if label_contains(ts.labels[s], a)
    )
    logger.debug(f"Two-sorted structure over {len(universe)} actions, {len(allowed)} Allowed facts")
    return FolModel(frozenset(ts.states), frozenset(ts.transitions), dict(ts.labels), frozenset(universe), allowed)


def _value(term, env):
    if isinstance(term, Const):
        return ACTION, term.name
    if term.name not in env:
        raise CathoristicError(f"variable {term.name} is unbound")
    return env[term.name]


def _expect(term, env, sort):
    found, value = _value(term, env)
    if found != sort:
        raise SortMismatchError(f"{term} is a {found} term where a {sort} term is needed")
    return value


def eval_fol(m, f, env=None):
    """
    Tarskian evaluation on a finite structure.

    Args:
        m (FolModel): Structure
        f (FolFormula): Formula whose free variables env covers
        env (dict): Variable name -> state

    Returns:
        bool: Truth value
    """
    scope = {name: (STATE, value) for name, value in (env or {}).items()}
    return _eval(m, f, scope)


def _domain(m, sort):
    if sort == ACTION:
        if not m.two_sorted:
            raise SortMismatchError("a single-sorted structure has no action sort")
        return sorted(m.actions)
    return sorted(m.states)


def _eval(m, f, env):
    if isinstance(f, FTop):
        return True
    if isinstance(f, FFalse):
        return False
    if isinstance(f, FAnd):
        return _eval(m, f.left, env) and _eval(m, f.right, env)
    if isinstance(f, FOr):
        return _eval(m, f.left, env) or _eval(m, f.right, env)
    if isinstance(f, FImplies):
        return not _eval(m, f.left, env) or _eval(m, f.right, env)
    if isinstance(f, FNeg):
        return not _eval(m, f.body, env)
    if isinstance(f, FExists):
        sort = f.sort or STATE
        return any(_eval(m, f.body, {**env, f.var: (sort, v)}) for v in _domain(m, sort))
    if isinstance(f, FForall):
        sort = f.sort or STATE
        return all(_eval(m, f.body, {**env, f.var: (sort, v)}) for v in _domain(m, sort))
    if isinstance(f, Arrow1):
        src, dst = _expect(f.src, env, STATE), _expect(f.dst, env, STATE)
        return (src, f.action, dst) in m.arrows
    if isinstance(f, Restrict):
        return m.restrict(f.actions, _expect(f.var, env, STATE))
    if isinstance(f, Allowed):
        return (_expect(f.state, env, STATE), _expect(f.action, env, ACTION)) in m.allowed
    if isinstance(f, Arrow):
        src = _expect(f.src, env, STATE)
        action = _expect(f.action, env, ACTION)
        return (src, action, _expect(f.dst, env, STATE)) in m.arrows
    if isinstance(f, Eq):
        left, right = _value(f.left, env), _value(f.right, env)
        if left[0] != right[0]:
            raise SortMismatchError(f"cannot compare {f.left} with {f.right}")
        return left == right
    raise CathoristicError(f"not a first-order formula: {f!r}")


def extract_model(m, sigma):
    """
    Read a cathoristic transition system back out of a two-sorted structure.

    A state whose Allowed set is the whole action universe gets the label Sigma,
    otherwise its Allowed set. Actions outside sigma are then removed from
    transitions and labels.

    Args:
        m (FolModel): Two-sorted structure satisfying both guards
        sigma (Alphabet): Closed alphabet

    Returns:
        CathoristicTS: The extracted system (the caller chooses a start)
    """
    if not sigma.is_closed:
        raise OpenAlphabetError("model extraction")
    if not m.two_sorted:
        raise SortMismatchError("extraction needs a two-sorted structure")
    admissible, deterministic = guards()
    if not (eval_fol(m, admissible) and eval_fol(m, deterministic)):
        raise GuardsViolatedError("the structure is not admissible and deterministic")
    exotic = m.actions - sigma.actions
    labels = {}
    for s in m.states:
        allowed = frozenset(a for t, a in m.allowed if t == s)
        labels[s] = SIGMA if allowed == m.actions else allowed - exotic
    transitions = frozenset((s, a, t) for s, a, t in m.arrows if a not in exotic)
    if exotic:
        logger.info(f"Dropped actions outside the alphabet: {', '.join(sorted(exotic))}")
    return CathoristicTS(frozenset(m.states), transitions, labels)


# ---------------------------------------------------------------------------
# Hennessy-Milner logic
# ---------------------------------------------------------------------------

def _closed_actions(sigma):
    sigma = sigma or config.alphabet_from_env()
    if not sigma.is_closed:
        raise OpenAlphabetError("the Hennessy-Milner translation")
    return sigma.actions


def _hml(f, actions):
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, And):
        return And(_hml(f.left, actions), _hml(f.right, actions))
    if isinstance(f, May):
        return May(f.action, _hml(f.body, actions))
    return conjoin(Neg(May(a, TOP)) for a in sorted(actions - f.actions))


def determinism_constraint(formulas, sigma=None):
    """
    Conjunction of ~(<a>p /\\ <a>q /\\ ~<a>(p /\\ q)) over the subformula closure.

    Args:
        formulas (iterable): Core formulae
        sigma (Alphabet): Closed alphabet (default CL_ALPHABET)

    Returns:
        Formula: Neg-dialect sentence, T when the closure uses no action
    """
    actions = _closed_actions(sigma)
    closure = []
    for f in formulas:
        check_dialect(f, "core")
        for sub in subformulae(f):
            if sub not in closure:
                closure.append(sub)
    used = sorted(set().union(*(actions_of(f) for f in closure)) if closure else ())
    translated = [_hml(g, actions) for g in closure]
    clauses = []
    for a in used:
        for p in translated:
            for q in translated:
                clauses.append(Neg(conjoin([May(a, p), May(a, q), Neg(May(a, And(p, q)))])))
    return conjoin(clauses)


def translate_hml(f, sigma=None, constrain=False):
    """
    Translate a core formula into Hennessy-Milner logic.

    !A becomes the conjunction of ~<a>T over the actions of sigma outside A.

    Args:
        f (Formula): Core formula
        sigma (Alphabet): Closed alphabet (default CL_ALPHABET)
        constrain (bool): Conjoin the determinism constraint for f's subformulae

    Returns:
        Formula: Neg-dialect formula
    """
    check_dialect(f, "core")
    actions = _closed_actions(sigma)
    result = _hml(f, actions)
    if constrain:
        result = And(result, determinism_constraint([f], sigma))
    return result
