"""
Formulae of cathoristic logic and its two extensions.

The core language has T, F, conjunction, the modality <a> and the tantum !{...}.
The neg dialect adds ~ and \\/; the quantified dialect adds exists/forall over
uppercase variables that may stand wherever an action may.

Every traversal here runs on an explicit stack so that very deep formulae (long
modality chains) never hit the interpreter's recursion limit.
"""

import re
import logging
from dataclasses import dataclass

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from app.utils.errors import CathoristicError, DialectError, FormulaSyntaxError

logger = logging.getLogger(__name__)

ACTION_PATTERN = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
VARIABLE_PATTERN = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")

DIALECTS = ("core", "neg", "quantified")


def is_action_name(name):
    return isinstance(name, str) and bool(ACTION_PATTERN.match(name))


@dataclass(frozen=True)
class Alphabet:
    """Either the open (conceptually infinite) alphabet or a closed finite one."""

    actions: frozenset = None

    @classmethod
    def open(cls):
        return cls(None)

    @classmethod
    def closed(cls, actions):
        actions = frozenset(actions)
        if not actions:
            raise CathoristicError("a closed alphabet must contain at least one action")
        bad = sorted(a for a in actions if not is_action_name(a))
        if bad:
            raise CathoristicError(f"invalid action names in alphabet: {', '.join(bad)}")
        return cls(actions)

    @property
    def is_closed(self):
        return self.actions is not None

    def least_action(self, default="a0"):
        return min(self.actions) if self.is_closed else default

    def __str__(self):
        return "{" + ",".join(sorted(self.actions)) + "}" if self.is_closed else "*"


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    """A quantified variable standing in action position."""
    name: str

    def __str__(self):
        return self.name


class Formula:
    """Base class of every AST node; equality and hashing walk the tree on a stack."""

    __slots__ = ()

    def __str__(self):
        return print_formula(self)

    def __eq__(self, other):
        if not isinstance(other, Formula):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            x, y = stack.pop()
            if x is y:
                continue
            if type(x) is not type(y) or _atoms(x) != _atoms(y):
                return False
            stack.extend(zip(children(x), children(y)))
        return True

    def __hash__(self):
        return fold(self, lambda node, kids: hash((type(node).__name__, *_atoms(node), *kids)))


@dataclass(frozen=True, repr=False, eq=False)
class Top(Formula):
    def __repr__(self):
        return "Top()"


@dataclass(frozen=True, repr=False, eq=False)
class Bottom(Formula):
    def __repr__(self):
        return "Bottom()"


@dataclass(frozen=True, repr=False, eq=False)
class And(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"And({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False, eq=False)
class May(Formula):
    action: object  # str, or Var in quantified formulae
    body: Formula

    def __repr__(self):
        return f"May({self.action!s}, {self.body!r})"


@dataclass(frozen=True, repr=False, eq=False)
class Bang(Formula):
    actions: frozenset

    def __repr__(self):
        return "Bang{" + ",".join(sorted(str(a) for a in self.actions)) + "}"


@dataclass(frozen=True, repr=False, eq=False)
class Neg(Formula):
    body: Formula

    def __repr__(self):
        return f"Neg({self.body!r})"


@dataclass(frozen=True, repr=False, eq=False)
class Or(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"Or({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False, eq=False)
class Exists(Formula):
    var: str
    body: Formula

    def __repr__(self):
        return f"Exists({self.var}, {self.body!r})"


@dataclass(frozen=True, repr=False, eq=False)
class Forall(Formula):
    var: str
    body: Formula

    def __repr__(self):
        return f"Forall({self.var}, {self.body!r})"


TOP = Top()
BOTTOM = Bottom()


def bang(*actions):
    return Bang(frozenset(actions))


def _atoms(f):
    """The non-formula fields of a node."""
    if isinstance(f, May):
        return (f.action,)
    if isinstance(f, Bang):
        return (f.actions,)
    if isinstance(f, (Exists, Forall)):
        return (f.var,)
    return ()


def children(f):
    if isinstance(f, (And, Or)):
        return (f.left, f.right)
    if isinstance(f, (May, Neg, Exists, Forall)):
        return (f.body,)
    return ()


def conjoin(formulas):
    """Right-nested conjunction; the empty conjunction is T."""
    formulas = list(formulas)
    if not formulas:
        return TOP
    result = formulas[-1]
    for f in reversed(formulas[:-1]):
        result = And(f, result)
    return result


def disjoin(formulas):
    """Right-nested disjunction; the empty disjunction is F."""
    formulas = list(formulas)
    if not formulas:
        return BOTTOM
    result = formulas[-1]
    for f in reversed(formulas[:-1]):
        result = Or(f, result)
    return result


def conjuncts(f):
    """Flatten every nested And into its leaves, left to right."""
    out = []
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, And):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def fold(f, combine):
    """
    Evaluate a formula bottom-up without recursion.

    Args:
        f (Formula): Formula to fold
        combine (callable): combine(node, child_results) -> result

    Returns:
        object: Result for the root
    """
    stack = [(f, False)]
    results = []
    while stack:
        node, expanded = stack.pop()
        kids = children(node)
        if expanded or not kids:
            n = len(kids)
            args = results[-n:] if n else []
            if n:
                del results[-n:]
            results.append(combine(node, args))
        else:
            stack.append((node, True))
            for kid in reversed(kids):
                stack.append((kid, False))
    return results[0]


def walk(f):
    """Yield every node of f in pre-order."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

GRAMMAR = r"""
?start: formula

?formula: disj
        | "exists" VAR "." formula      -> exists
        | "forall" VAR "." formula      -> forall

?disj: conj
     | conj "\\/" disj                  -> or_

?conj: unary
     | unary "/\\" conj                 -> and_

?unary: "~" unary                       -> neg
      | "<" term ">" unary              -> may
      | atom

?atom: "T"                              -> top
     | "F"                              -> bottom
     | "!" "{" [terms] "}"              -> bang
     | "(" formula ")"

terms: term ("," term)*

?term: ACTION                           -> action
     | VAR                              -> var

ACTION: /[a-z][A-Za-z0-9_]*/
VAR: /[A-Z][A-Za-z0-9_]*/

%import common.WS
%ignore WS
"""


class _FormulaBuilder(Transformer):
    def top(self, _):
        return TOP

    def bottom(self, _):
        return BOTTOM

    def action(self, items):
        return str(items[0])

    def var(self, items):
        return Var(str(items[0]))

    def terms(self, items):
        return list(items)

    def bang(self, items):
        terms = items[0] if items and items[0] is not None else []
        return Bang(frozenset(terms))

    def may(self, items):
        return May(items[0], items[1])

    def neg(self, items):
        return Neg(items[0])

    def and_(self, items):
        return And(items[0], items[1])

    def or_(self, items):
        return Or(items[0], items[1])

    def exists(self, items):
        return Exists(str(items[0]), items[1])

    def forall(self, items):
        return Forall(str(items[0]), items[1])


# Building the AST during LALR reductions keeps parsing free of recursion.
_parser = Lark(GRAMMAR, parser="lalr", transformer=_FormulaBuilder(), maybe_placeholders=True)


def check_dialect(f, dialect):
    """
    Raise DialectError when f uses a construct outside the dialect.

    Args:
        f (Formula): Formula to check
        dialect (str): core, neg or quantified
    """
    if dialect not in DIALECTS:
        raise CathoristicError(f"unknown dialect {dialect}")
    for node in walk(f):
        if isinstance(node, Neg) and dialect != "neg":
            raise DialectError("~", dialect)
        if isinstance(node, Or) and dialect != "neg":
            raise DialectError("\\/", dialect)
        if isinstance(node, (Exists, Forall)) and dialect != "quantified":
            raise DialectError("exists" if isinstance(node, Exists) else "forall", dialect)
        if dialect != "quantified":
            if isinstance(node, May) and isinstance(node.action, Var):
                raise DialectError(f"variable {node.action}", dialect)
            if isinstance(node, Bang):
                for a in node.actions:
                    if isinstance(a, Var):
                        raise DialectError(f"variable {a}", dialect)


def parse_formula(text, dialect="core"):
    """
    Parse formula text in the given dialect.

    Args:
        text (str): Formula text, e.g. "<a>(<b>T /\\ !{b,c})"
        dialect (str): core, neg or quantified

    Returns:
        Formula: The parsed AST
    """
    try:
        f = _parser.parse(text)
    except UnexpectedInput as e:
        raise FormulaSyntaxError(f"cannot parse formula {text!r}", e.line, e.column) from e
    except VisitError as e:
        raise FormulaSyntaxError(f"cannot parse formula {text!r}: {e.orig_exc}") from e
    check_dialect(f, dialect)
    return f


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

# Binding levels: 0 quantifier, 1 disjunction, 2 conjunction, 3 prefix/atom.
def _level(f):
    if isinstance(f, (Exists, Forall)):
        return 0
    if isinstance(f, Or):
        return 1
    if isinstance(f, And):
        return 2
    return 3


def _term_text(t):
    return t.name if isinstance(t, Var) else t


def print_formula(f):
    """
    Render a formula in the concrete syntax; parse_formula inverts it.

    Args:
        f (Formula): Formula to print

    Returns:
        str: Canonical text
    """
    out = []
    stack = [(f, 0)]
    while stack:
        item, required = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        node = item
        if _level(node) < required:
            stack.append((")", 0))
            stack.append((node, 0))
            stack.append(("(", 0))
            continue
        if isinstance(node, Top):
            out.append("T")
        elif isinstance(node, Bottom):
            out.append("F")
        elif isinstance(node, Bang):
            out.append("!{" + ",".join(sorted(_term_text(a) for a in node.actions)) + "}")
        elif isinstance(node, May):
            out.append(f"<{_term_text(node.action)}>")
            stack.append((node.body, 3))
        elif isinstance(node, Neg):
            out.append("~")
            stack.append((node.body, 3))
        elif isinstance(node, And):
            stack.append((node.right, 2))
            stack.append((" /\\ ", 0))
            stack.append((node.left, 3))
        elif isinstance(node, Or):
            stack.append((node.right, 1))
            stack.append((" \\/ ", 0))
            stack.append((node.left, 2))
        elif isinstance(node, (Exists, Forall)):
            keyword = "exists" if isinstance(node, Exists) else "forall"
            out.append(f"{keyword} {node.var}. ")
            stack.append((node.body, 0))
        else:
            raise CathoristicError(f"not a formula: {node!r}")
    return "".join(out)


# ---------------------------------------------------------------------------
# Measures and helpers
# ---------------------------------------------------------------------------

def actions_of(f):
    """
    Collect the actions occurring in modalities and tantum sets.

    Args:
        f (Formula): Formula to inspect

    Returns:
        frozenset: Action names (variables excluded)
    """
    found = set()
    for node in walk(f):
        if isinstance(node, May) and not isinstance(node.action, Var):
            found.add(node.action)
        elif isinstance(node, Bang):
            found.update(a for a in node.actions if not isinstance(a, Var))
    return frozenset(found)


def modal_depth(f):
    deepest = 0
    stack = [(f, 0)]
    while stack:
        node, depth = stack.pop()
        if isinstance(node, May):
            depth += 1
            deepest = max(deepest, depth)
        for kid in children(node):
            stack.append((kid, depth))
    return deepest


def formula_length(f):
    return sum(1 for _ in walk(f))


def is_core(f):
    return not any(isinstance(n, (Neg, Or, Exists, Forall)) for n in walk(f))


def subformulae(f):
    """All subformulae of f, f included, in first-seen pre-order."""
    seen = {}
    for node in walk(f):
        seen.setdefault(node, None)
    return list(seen)


def desugar_bottom(f, action):
    """Replace every F by the abbreviation !{} /\\ <action>T."""
    replacement = And(Bang(frozenset()), May(action, TOP))

    def combine(node, args):
        if isinstance(node, Bottom):
            return replacement
        return _rebuild(node, args)

    return fold(f, combine)


def _rebuild(node, args):
    if isinstance(node, And):
        return And(args[0], args[1])
    if isinstance(node, Or):
        return Or(args[0], args[1])
    if isinstance(node, May):
        return May(node.action, args[0])
    if isinstance(node, Neg):
        return Neg(args[0])
    if isinstance(node, Exists):
        return Exists(node.var, args[0])
    if isinstance(node, Forall):
        return Forall(node.var, args[0])
    return node


def free_variables(f):
    """Free variables of a quantified formula."""
    free = set()
    stack = [(f, frozenset())]
    while stack:
        node, bound = stack.pop()
        if isinstance(node, (Exists, Forall)):
            stack.append((node.body, bound | {node.var}))
            continue
        if isinstance(node, May) and isinstance(node.action, Var) and node.action.name not in bound:
            free.add(node.action.name)
        if isinstance(node, Bang):
            free.update(a.name for a in node.actions if isinstance(a, Var) and a.name not in bound)
        for kid in children(node):
            stack.append((kid, bound))
    return frozenset(free)


def ground(f, env):
    """
    Substitute an environment into a quantifier-free formula with variables.

    Args:
        f (Formula): Formula whose variables all occur free
        env (dict): Variable name -> action

    Returns:
        Formula: Variable-free formula
    """
    def term(t):
        if isinstance(t, Var):
            if t.name not in env:
                raise CathoristicError(f"variable {t.name} is unbound")
            return env[t.name]
        return t

    def combine(node, args):
        if isinstance(node, (Exists, Forall)):
            raise CathoristicError("ground expects a quantifier-free formula")
        if isinstance(node, May):
            return May(term(node.action), args[0])
        if isinstance(node, Bang):
            return Bang(frozenset(term(a) for a in node.actions))
        return _rebuild(node, args)

    return fold(f, combine)
