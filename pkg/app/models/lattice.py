"""
The bounded lattice of models ordered by ⪯.

BOT is the least element and the single Sigma-labelled state is the greatest.
simpl(f) is the least upper bound of the models of f; glb merges models by
identifying states through a union-find; lub keeps what two models share.
"""

import logging
from collections import deque

import networkx as nx

from app.logic.syntax import TOP, And, Bang, Bottom, May, Top, conjoin, fold
from app.models.model import (
    BOT,
    SIGMA,
    CathoristicModel,
    CathoristicTS,
    label_contains,
    label_join,
    label_meet,
    reachable,
    to_networkx,
)
from app.utils.errors import DialectError, NotATreeError
from app.utils.union_find import DisjointSet

logger = logging.getLogger(__name__)

DEFAULT_BOTTOM_ACTION = "a0"


class _Inconsistent(Exception):
    pass


class MergeStore:
    """
    Mutable graph of integer node ids in which merges happen in place.

    Node labels live in `labels`, outgoing edges in `succ` (id -> {action: id}).
    Edge targets may name merged-away nodes; always read them through `find`.
    """

    def __init__(self):
        self.labels = {}
        self.succ = {}
        self.ids = DisjointSet()
        self._next = 0

    def new(self, label=SIGMA):
        node = self._next
        self._next += 1
        self.labels[node] = label
        self.succ[node] = {}
        self.ids.make_set(node)
        return node

    def find(self, node):
        return self.ids.find(node)

    def load(self, m):
        """Copy the reachable part of an acyclic model into the store; returns its root."""
        graph = to_networkx(m).subgraph(reachable(m))
        if not nx.is_directed_acyclic_graph(graph):
            raise NotATreeError("model has a cycle reachable from its start state")
        mapping = {}
        for s in sorted(graph.nodes):
            mapping[s] = self.new(m.label(s))
        for s in mapping:
            for a, t in m.edges(s):
                self.succ[mapping[s]][a] = mapping[t]
        return mapping[m.start]

    def merge(self, r1, r2):
        """
        Identify r1 with r2 and propagate through shared actions.

        Returns:
            int or None: The merged root, or None when an identified pair conflicts
        """
        pending = [(r1, r2)]
        while pending:
            x, y = pending.pop()
            x, y = self.find(x), self.find(y)
            if x == y:
                continue
            lx, ly = self.labels[x], self.labels[y]
            sx, sy = self.succ[x], self.succ[y]
            if any(not label_contains(ly, a) for a in sx) or any(not label_contains(lx, a) for a in sy):
                logger.debug(f"Merge conflict between nodes {x} and {y}")
                return None
            rep = self.ids.union(x, y)
            other = y if rep == x else x
            combined = self.succ[rep]
            for a, t in self.succ[other].items():
                if a in combined:
                    pending.append((combined[a], t))
                else:
                    combined[a] = t
            self.labels[rep] = label_meet(lx, ly)
            del self.succ[other]
            del self.labels[other]
        return self.find(r1)

    def extract(self, root):
        """Read the part reachable from root back as a model with states s0, s1, ..."""
        root = self.find(root)
        names = {root: "s0"}
        queue = deque([root])
        transitions = set()
        while queue:
            node = queue.popleft()
            for a in sorted(self.succ[node]):
                child = self.find(self.succ[node][a])
                if child not in names:
                    names[child] = f"s{len(names)}"
                    queue.append(child)
                transitions.add((names[node], a, names[child]))
        labels = {name: self.labels[node] for node, name in names.items()}
        ts = CathoristicTS(frozenset(labels), frozenset(transitions), labels)
        return CathoristicModel(ts, "s0")


def simpl(f):
    """
    The least upper bound of all models of a core formula.

    Args:
        f (Formula): Core formula (F allowed)

    Returns:
        CathoristicModel or BOT: A tree model, or BOT when f is unsatisfiable
    """
    store = MergeStore()

    def combine(node, args):
        if isinstance(node, Top):
            return store.new(SIGMA)
        if isinstance(node, Bottom):
            raise _Inconsistent()
        if isinstance(node, Bang):
            return store.new(frozenset(node.actions))
        if isinstance(node, May):
            root = store.new(SIGMA)
            store.succ[root][node.action] = args[0]
            return root
        if isinstance(node, And):
            merged = store.merge(args[0], args[1])
            if merged is None:
                raise _Inconsistent()
            return merged
        raise DialectError(type(node).__name__, "core")

    try:
        root = fold(f, combine)
    except _Inconsistent:
        return BOT
    return store.extract(root)


def glb(m1, m2):
    """
    Greatest lower bound of two lattice models.

    Args:
        m1 (CathoristicModel or BOT): Acyclic model
        m2 (CathoristicModel or BOT): Acyclic model

    Returns:
        CathoristicModel or BOT: The merged model, BOT when some identified pair conflicts
    """
    if m1 is BOT or m2 is BOT:
        return BOT
    store = MergeStore()
    root = store.merge(store.load(m1), store.load(m2))
    if root is None:
        return BOT
    return store.extract(root)


def model_incompatible(m1, m2):
    return glb(m1, m2) is BOT


def lub(m1, m2):
    """
    Least upper bound: the transitions both models share, with labels united.

    Args:
        m1 (CathoristicModel or BOT): First model
        m2 (CathoristicModel or BOT): Second model

    Returns:
        CathoristicModel or BOT: The joined model
    """
    if m1 is BOT:
        return m2
    if m2 is BOT:
        return m1
    start = (m1.start, m2.start)
    names = {start: "s0"}
    labels = {"s0": label_join(m1.label(m1.start), m2.label(m2.start))}
    transitions = set()
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        x, y = pair
        for a in sorted(m1.out(x) & m2.out(y)):
            child = (m1.step(x, a), m2.step(y, a))
            if child not in names:
                names[child] = f"s{len(names)}"
                labels[names[child]] = label_join(m1.label(child[0]), m2.label(child[1]))
                queue.append(child)
            transitions.add((names[pair], a, names[child]))
    return CathoristicModel(CathoristicTS(frozenset(labels), frozenset(transitions), labels), "s0")


def bottom_formula(alphabet=None):
    """The characteristic formula of BOT: <a>T /\\ !{} for the least available action."""
    action = alphabet.least_action(DEFAULT_BOTTOM_ACTION) if alphabet is not None else DEFAULT_BOTTOM_ACTION
    return And(May(action, TOP), Bang(frozenset()))


def char_at(m, state):
    """Characteristic formula of the submodel rooted at state; cycles are rejected."""
    graph = to_networkx(m).subgraph(reachable(m, state))
    if not nx.is_directed_acyclic_graph(graph):
        raise NotATreeError("characteristic formulae need an acyclic model")
    order = list(nx.topological_sort(graph))
    formulas = {}
    for s in reversed(order):
        parts = []
        label = m.label(s)
        if label is not SIGMA:
            parts.append(Bang(label))
        parts.extend(May(a, formulas[t]) for a, t in m.edges(s))
        formulas[s] = conjoin(parts)
    return formulas[state]


def char(m, alphabet=None):
    """
    Characteristic formula: satisfied exactly by the models ⪯ m.

    Args:
        m (CathoristicModel or BOT): Acyclic model
        alphabet (Alphabet): Supplies the action used for BOT (default a0)

    Returns:
        Formula: !label (when finite) conjoined with <a>char(child) per transition, by action
    """
    if m is BOT:
        return bottom_formula(alphabet)
    return char_at(m, m.start)
