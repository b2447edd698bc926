"""
A knowledge base whose world state is a single rooted tree model.

Facts are core formulae. Asserting walks simpl(fact) and the store in lockstep:
compatible labels are intersected, incompatible ones are replaced by the new label
and stored transitions it no longer admits are deleted with their subtrees.
Queries are conjunctions of path literals with action variables.
"""

import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd
from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from app.logic.syntax import Var, check_dialect, ground, parse_formula, print_formula
from app.models.lattice import simpl
from app.models.model import (
    BOT,
    SIGMA,
    CathoristicModel,
    CathoristicTS,
    canonical,
    is_tree,
    label_contains,
    label_meet,
    label_subset,
)
from app.utils.errors import (
    CathoristicError,
    FormulaSyntaxError,
    NotATreeError,
    PathNotFoundError,
    UnsatisfiableError,
)
from app.utils.load_data import load_model, save_model

logger = logging.getLogger(__name__)

ROOT = "n0"
WELSH_QUERY = "<welsh><X>, <welsh><Y>, <spouse><X>(<Y> /\\ !{Y})"


@dataclass(frozen=True)
class QueryLiteral:
    """
    A path from the root whose steps are actions or variables.

    With tantum set, the state the last step leaves from must have a label inside
    the singleton of the last step, as in <spouse><X>(<Y> /\\ !{Y}).
    """

    steps: tuple
    tantum: bool = False

    def __post_init__(self):
        if not self.steps:
            raise CathoristicError("a query literal needs at least one step")

    @property
    def variables(self):
        return list(dict.fromkeys(s.name for s in self.steps if isinstance(s, Var)))

    def __str__(self):
        text = [f"<{s.name if isinstance(s, Var) else s}>" for s in self.steps]
        if self.tantum:
            last = text.pop()
            return "".join(text) + f"({last} /\\ !{{{last[1:-1]}}})"
        return "".join(text)


@dataclass
class ChangeReport:
    removed: list = field(default_factory=list)
    added: list = field(default_factory=list)
    revision: int = 0


@dataclass
class QueryResult:
    bindings: list
    nodes: int
    per_literal: list = field(default_factory=list)

    def __bool__(self):
        return bool(self.bindings)


@dataclass(frozen=True)
class ActionSchema:
    """
    A parameterised update: preconditions are query literals, postconditions are
    formula templates whose variables are the parameters.
    """

    name: str
    parameters: tuple
    preconditions: tuple
    postconditions: tuple


LITERAL_GRAMMAR = r"""
?start: literals

literals: literal ("," literal)*

literal: step+ [tail]

tail: "T"                                                    -> plain_tail
    | "(" step "T"? "/\\" "!" "{" term "}" ")"               -> tantum_tail

step: "<" term ">"

?term: ACTION                                                -> action
     | VAR                                                   -> var

ACTION: /[a-z][A-Za-z0-9_]*/
VAR: /[A-Z][A-Za-z0-9_]*/

%import common.WS
%ignore WS
"""


class _LiteralBuilder(Transformer):
    def action(self, items):
        return str(items[0])

    def var(self, items):
        return Var(str(items[0]))

    def step(self, items):
        return items[0]

    def plain_tail(self, _):
        return None

    def tantum_tail(self, items):
        step, marker = items
        if step != marker:
            raise FormulaSyntaxError(f"the tantum must name the last step, got {marker}")
        return step

    def literal(self, items):
        *steps, last = items
        if last is None:
            return QueryLiteral(tuple(steps))
        return QueryLiteral(tuple(steps) + (last,), True)

    def literals(self, items):
        return list(items)


_literal_parser = Lark(LITERAL_GRAMMAR, parser="lalr", transformer=_LiteralBuilder(), maybe_placeholders=True)


def parse_query(text):
    """
    Parse comma-separated literals such as "<welsh><X>, <spouse><X>(<Y> /\\ !{Y})".

    Returns:
        list: QueryLiteral objects in the written order
    """
    try:
        return _literal_parser.parse(text)
    except UnexpectedInput as e:
        raise FormulaSyntaxError(f"cannot parse query {text!r}", e.line, e.column) from e
    except VisitError as e:
        if isinstance(e.orig_exc, CathoristicError):
            raise e.orig_exc
        raise FormulaSyntaxError(f"cannot parse query {text!r}: {e.orig_exc}") from e


def _is_functional(literal, bound):
    prefix = literal.steps[:-1]
    return literal.tantum and all(not isinstance(s, Var) or s.name in bound for s in prefix)


def optimize_query(literals, bound=()):
    """
    Reorder literals to shrink the search space.

    Repeatedly takes the literal with the fewest unbound variables, preferring one a
    tantum singleton makes functional; earlier literals win remaining ties.

    Args:
        literals (list): QueryLiteral objects
        bound (iterable): Variable names bound before the query runs

    Returns:
        list: The same literals in the new order
    """
    bound = set(bound)
    remaining = list(enumerate(literals))
    order = []
    while remaining:
        def key(item):
            index, lit = item
            unbound = sum(1 for v in lit.variables if v not in bound)
            return unbound, 0 if _is_functional(lit, bound) else 1, index

        best = min(remaining, key=key)
        remaining.remove(best)
        order.append(best[1])
        bound.update(best[1].variables)
    return order


def _path_parts(path):
    if isinstance(path, str):
        return [p for p in path.split("/") if p]
    return list(path)


class KnowledgeBase:
    """
    Single-writer store over a tree model rooted at n0.

    Queries read an immutable snapshot; every mutation bumps the revision and
    appends a command to the log.
    """

    def __init__(self):
        self._labels = {ROOT: SIGMA}
        self._children = {ROOT: {}}
        self._counter = itertools.count(1)
        self.revision = 0
        self.log = []

    # -- snapshots ---------------------------------------------------------

    @property
    def model(self):
        transitions = frozenset(
            (s, a, t) for s, kids in self._children.items() for a, t in kids.items()
        )
        labels = dict(self._labels)
        return CathoristicModel(CathoristicTS(frozenset(labels), transitions, labels), ROOT)

    @classmethod
    def from_model(cls, m):
        """Start a store from a tree model; states are renamed n0, n1, ... breadth-first."""
        if not is_tree(m):
            raise NotATreeError("a knowledge base must be a tree")
        m = canonical(m, prefix="n")
        kb = cls()
        kb._labels = dict(m.labels)
        kb._children = {s: dict(m.edges(s)) for s in m.states}
        kb._counter = itertools.count(len(m.states))
        return kb

    @classmethod
    def load(cls, path):
        return cls.from_model(load_model(path))

    def restore(self, path):
        """Replace the whole store by the tree in a model file, as a logged mutation."""
        fresh = KnowledgeBase.from_model(load_model(path))
        removed = sorted(self._children[ROOT])
        self._labels, self._children, self._counter = fresh._labels, fresh._children, fresh._counter
        report = ChangeReport(removed=removed, added=sorted(self._children[ROOT]))
        return self._commit(f"load {path}", report)

    def save(self, path):
        save_model(self.model, path)

    # -- mutation ----------------------------------------------------------

    def _new_node(self, label):
        node = f"n{next(self._counter)}"
        self._labels[node] = label
        self._children[node] = {}
        return node

    def _delete_subtree(self, node):
        stack = [node]
        while stack:
            current = stack.pop()
            stack.extend(self._children.pop(current).values())
            del self._labels[current]

    def _graft(self, m, state, parent, action):
        pending = [(state, parent, action)]
        while pending:
            s, p, a = pending.pop()
            node = self._new_node(m.label(s))
            self._children[p][a] = node
            for b, t in reversed(m.edges(s)):
                pending.append((t, node, b))

    def _commit(self, command, report):
        self.revision += 1
        report.revision = self.revision
        self.log.append(command)
        logger.info(f"KB r{self.revision}: {command} (removed {len(report.removed)}, added {len(report.added)})")
        return report

    def assert_fact(self, f):
        """
        Add a fact, overriding stored information it contradicts.

        Args:
            f (Formula or str): Core formula

        Returns:
            ChangeReport: Removed and added paths, slash-separated
        """
        if isinstance(f, str):
            f = parse_formula(f)
        check_dialect(f, "core")
        m = simpl(f)
        if m is BOT:
            raise UnsatisfiableError(f"cannot assert the unsatisfiable {print_formula(f)}")
        report = ChangeReport()
        pending = [(m.start, ROOT, ())]
        while pending:
            s, node, path = pending.pop()
            old, new = self._labels[node], m.label(s)
            meet = label_meet(old, new)
            needed = set(self._children[node]) | set(m.out(s))
            if all(label_contains(meet, a) for a in needed):
                self._labels[node] = meet
            else:
                self._labels[node] = new
                for a in sorted(self._children[node]):
                    if not label_contains(new, a):
                        self._delete_subtree(self._children[node].pop(a))
                        report.removed.append("/".join(path + (a,)))
            for a, t in m.edges(s):
                child = self._children[node].get(a)
                if child is None:
                    self._graft(m, t, node, a)
                    report.added.append("/".join(path + (a,)))
                else:
                    pending.append((t, child, path + (a,)))
        return self._commit(f"assert {print_formula(f)}", report)

    def assert_many(self, facts):
        return [self.assert_fact(f) for f in facts]

    def _locate(self, parts):
        node = ROOT
        for a in parts:
            child = self._children[node].get(a)
            if child is None:
                raise PathNotFoundError(parts)
            node = child
        return node

    def retract_path(self, path):
        """
        Remove the state at path with its subtree; labels elsewhere are kept.

        Args:
            path (list or str): Actions from the root, e.g. "tl/colour/red"

        Returns:
            ChangeReport: The removed path
        """
        parts = _path_parts(path)
        if not parts:
            raise CathoristicError("the root cannot be retracted")
        parent = self._locate(parts[:-1])
        if parts[-1] not in self._children[parent]:
            logger.info(f"Nothing to retract at {'/'.join(parts)}")
            raise PathNotFoundError(parts)
        self._delete_subtree(self._children[parent].pop(parts[-1]))
        return self._commit(f"retract {'/'.join(parts)}", ChangeReport(removed=["/".join(parts)]))

    def relabel(self, path):
        """Reset the label of the state at path to Sigma."""
        parts = _path_parts(path)
        node = self._locate(parts)
        self._labels[node] = SIGMA
        return self._commit(f"relabel {'/'.join(parts)}", ChangeReport())

    def perform(self, schema, arguments):
        """
        Run an action schema: check its preconditions, then assert its grounded postconditions.

        Args:
            schema (ActionSchema): The action
            arguments (dict or list): Parameter values, by name or in order

        Returns:
            list: ChangeReport per postcondition
        """
        if not isinstance(arguments, dict):
            arguments = dict(zip(schema.parameters, arguments))
        missing = [p for p in schema.parameters if p not in arguments]
        if missing:
            raise CathoristicError(f"{schema.name} needs values for {', '.join(missing)}")
        if not self.query(list(schema.preconditions), bindings=arguments):
            raise CathoristicError(f"preconditions of {schema.name} do not hold")
        logger.info(f"Performing {schema.name}({', '.join(arguments[p] for p in schema.parameters)})")
        return [self.assert_fact(ground(t, arguments)) for t in schema.postconditions]

    # -- queries -----------------------------------------------------------

    def query(self, literals, bindings=None, optimize=False):
        """
        All variable bindings under which every literal's path exists.

        Args:
            literals (list or str): QueryLiteral objects or query text
            bindings (dict): Variables bound in advance
            optimize (bool): Reorder the literals with optimize_query first

        Returns:
            QueryResult: Bindings in discovery order and the number of transition candidates tried
        """
        if isinstance(literals, str):
            literals = parse_query(literals)
        bindings = dict(bindings or {})
        if optimize:
            literals = optimize_query(literals, bindings)
        snapshot = self.model
        successors = snapshot.ts.successors
        counts = [0] * len(literals)
        results = []

        def walk(lit, index, env):
            pending = [(ROOT, None, 0, env)]
            while pending:
                node, parent, i, current = pending.pop()
                if i == len(lit.steps):
                    if lit.tantum and not label_subset(snapshot.label(parent), frozenset([_last_step(lit, current)])):
                        continue
                    yield current
                    continue
                step = lit.steps[i]
                kids = successors.get(node, {})
                if isinstance(step, Var) and step.name not in current:
                    for a in sorted(kids, reverse=True):
                        counts[index] += 1
                        pending.append((kids[a][0], node, i + 1, {**current, step.name: a}))
                    continue
                action = current[step.name] if isinstance(step, Var) else step
                counts[index] += 1
                if action in kids:
                    pending.append((kids[action][0], node, i + 1, current))

        def solve(index, env):
            if index == len(literals):
                results.append(env)
                return
            for extended in walk(literals[index], index, env):
                solve(index + 1, extended)

        solve(0, bindings)
        return QueryResult(results, sum(counts), counts)

    def explain(self, literals):
        """
        Node counts per literal for the written and the optimised order.

        Returns:
            DataFrame: Columns plan, position, literal, nodes
        """
        if isinstance(literals, str):
            literals = parse_query(literals)
        rows = []
        for plan, ordered in (("unoptimized", list(literals)), ("optimized", optimize_query(literals))):
            result = self.query(ordered)
            for position, (lit, nodes) in enumerate(zip(ordered, result.per_literal)):
                rows.append({"plan": plan, "position": position, "literal": str(lit), "nodes": nodes})
        return pd.DataFrame(rows, columns=["plan", "position", "literal", "nodes"])

    # -- persistence -------------------------------------------------------

    def apply(self, command):
        """Apply one command-log line."""
        verb, _, argument = command.strip().partition(" ")
        if verb == "assert":
            return self.assert_fact(parse_formula(argument))
        if verb == "retract":
            return self.retract_path(argument)
        if verb == "relabel":
            return self.relabel(argument)
        if verb == "load":
            return self.restore(argument)
        raise CathoristicError(f"unknown command {verb!r}")

    @classmethod
    def replay(cls, lines):
        kb = cls()
        for line in lines:
            if line.strip():
                kb.apply(line)
        return kb

    def save_log(self, path):
        try:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("".join(f"{c}\n" for c in self.log), encoding="utf-8")
        except Exception as e:
            logger.error(f"Error writing command log to {path}: {e}")
            raise

    @classmethod
    def replay_file(cls, path):
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except Exception as e:
            logger.error(f"Error reading command log {path}: {e}")
            raise
        return cls.replay(lines)


def _last_step(literal, env):
    step = literal.steps[-1]
    return env[step.name] if isinstance(step, Var) else step


def move_schema():
    """move(A, X, Y): A is at X and nowhere else, afterwards at Y and nowhere else."""
    return ActionSchema(
        name="move",
        parameters=("A", "X", "Y"),
        preconditions=tuple(parse_query("<A><at>(<X> /\\ !{X})")),
        postconditions=(parse_formula("<A><at>(<Y>T /\\ !{Y})", dialect="quantified"),),
    )


def welsh_kb(facts):
    kb = KnowledgeBase()
    kb.assert_many(facts)
    return kb
