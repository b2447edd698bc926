"""
Cathoristic transition systems, models and pure (label-free) models.

A state label is either a frozenset of actions or SIGMA, the whole alphabet.
"""

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import networkx as nx

from app.utils.errors import (
    Inadmissible,
    MissingLabel,
    ModelValidationError,
    Nondeterministic,
    UnknownStart,
    UnknownState,
)

logger = logging.getLogger(__name__)


class _AllActions:
    """The label Sigma: every action is permitted."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "SIGMA"

    def __str__(self):
        return "*"

    def __reduce__(self):
        return (_AllActions, ())


SIGMA = _AllActions()


class _BottomModel:
    """The least element of the lattice of models; satisfies every formula."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOT"

    def __str__(self):
        return "bottom"

    def __reduce__(self):
        return (_BottomModel, ())


BOT = _BottomModel()


def is_bottom(m):
    return m is BOT


def as_label(value):
    """Normalise "*", SIGMA or an iterable of actions into a label."""
    if value is SIGMA or value == "*":
        return SIGMA
    return frozenset(value)


def label_contains(label, action):
    return label is SIGMA or action in label


def label_subset(l1, l2):
    """l1 is contained in l2."""
    if l2 is SIGMA:
        return True
    if l1 is SIGMA:
        return False
    return l1 <= l2


def label_meet(l1, l2):
    if l1 is SIGMA:
        return l2
    if l2 is SIGMA:
        return l1
    return l1 & l2


def label_join(l1, l2):
    if l1 is SIGMA or l2 is SIGMA:
        return SIGMA
    return l1 | l2


def label_text(label):
    if label is SIGMA:
        return "*"
    return "{" + ",".join(sorted(label)) + "}"


def _successor_index(transitions):
    index = {}
    for s, a, t in transitions:
        index.setdefault(s, {}).setdefault(a, []).append(t)
    return {s: {a: tuple(sorted(ts)) for a, ts in by_action.items()} for s, by_action in index.items()}


@dataclass(frozen=True, eq=True)
class CathoristicTS:
    states: frozenset
    transitions: frozenset
    labels: dict

    __hash__ = None

    @cached_property
    def successors(self):
        return _successor_index(self.transitions)

    def out(self, state):
        return frozenset(self.successors.get(state, {}))

    def step(self, state, action):
        """The unique action-successor of state, or None."""
        targets = self.successors.get(state, {}).get(action)
        return targets[0] if targets else None

    def edges(self, state):
        """Outgoing (action, target) pairs sorted by action."""
        return sorted((a, ts[0]) for a, ts in self.successors.get(state, {}).items())

    def label(self, state):
        return self.labels[state]


@dataclass(frozen=True, eq=True)
class CathoristicModel:
    ts: CathoristicTS
    start: str

    __hash__ = None

    @property
    def states(self):
        return self.ts.states

    @property
    def transitions(self):
        return self.ts.transitions

    @property
    def labels(self):
        return self.ts.labels

    def label(self, state=None):
        return self.ts.labels[self.start if state is None else state]

    def out(self, state=None):
        return self.ts.out(self.start if state is None else state)

    def step(self, state, action):
        return self.ts.step(state, action)

    def edges(self, state=None):
        return self.ts.edges(self.start if state is None else state)

    def __str__(self):
        parts = [f"{s}:{label_text(self.labels[s])}" for s in sorted(self.states)]
        arrows = [f"{s}-{a}->{t}" for s, a, t in sorted(self.transitions)]
        return f"model(start={self.start}; " + " ".join(parts + arrows) + ")"


@dataclass(frozen=True, eq=True)
class PureModel:
    """A label-free transition system with a start state; may be non-deterministic."""

    states: frozenset
    transitions: frozenset
    start: str

    __hash__ = None

    @cached_property
    def successors(self):
        return _successor_index(self.transitions)

    def out(self, state=None):
        return frozenset(self.successors.get(self.start if state is None else state, {}))

    def targets(self, state, action):
        return self.successors.get(state, {}).get(action, ())

    def edges(self, state):
        return sorted((a, t) for a, ts in self.successors.get(state, {}).items() for t in ts)

    @property
    def is_deterministic(self):
        return all(len(ts) == 1 for by_action in self.successors.values() for ts in by_action.values())


def validate_model(states, transitions, labels, start):
    """
    Check the well-formedness conditions and build a model.

    Args:
        states (iterable): State ids
        transitions (iterable): (source, action, target) triples
        labels (dict): State id -> label ("*", SIGMA or an iterable of actions)
        start (str): Start state

    Returns:
        CathoristicModel: The validated model

    Raises:
        ModelValidationError: listing every violated condition
    """
    states = frozenset(states)
    transitions = frozenset(tuple(t) for t in transitions)
    violations = []

    if start not in states:
        violations.append(UnknownStart(start))

    norm_labels = {}
    for s in sorted(states):
        if s not in labels:
            violations.append(MissingLabel(s))
        else:
            norm_labels[s] = as_label(labels[s])

    seen = {}
    for s, a, t in sorted(transitions):
        for endpoint in (s, t):
            if endpoint not in states:
                violations.append(UnknownState(endpoint))
        if (s, a) in seen and seen[(s, a)] != t:
            violations.append(Nondeterministic(s, a))
        seen.setdefault((s, a), t)
        if s in norm_labels and not label_contains(norm_labels[s], a):
            violations.append(Inadmissible(s, a))

    if violations:
        unique = list(dict.fromkeys(violations))
        logger.debug(f"Model validation failed: {[str(v) for v in unique]}")
        raise ModelValidationError(unique)

    return CathoristicModel(CathoristicTS(states, transitions, norm_labels), start)


def make_model(transitions, labels, start="s0", states=None):
    """Validate a model, inferring the state set from transitions, labels and start."""
    if states is None:
        states = {start} | set(labels)
        for s, _, t in transitions:
            states.update((s, t))
    return validate_model(states, transitions, labels, start)


def make_pure(transitions, start="s0", states=None):
    transitions = frozenset(tuple(t) for t in transitions)
    if states is None:
        states = {start}
        for s, _, t in transitions:
            states.update((s, t))
    return PureModel(frozenset(states), transitions, start)


def to_networkx(m):
    """The underlying graph as a MultiDiGraph keyed by action."""
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(m.states)
    for s, a, t in m.transitions:
        graph.add_edge(s, t, key=a, action=a)
    return graph


def reachable(m, state=None):
    """States reachable from state (default: the start state), itself included."""
    root = m.start if state is None else state
    graph = to_networkx(m)
    return frozenset(nx.descendants(graph, root)) | {root}


def is_tree(m):
    """True when the part reachable from the start state is a tree rooted there."""
    graph = to_networkx(m).subgraph(reachable(m))
    if graph.number_of_nodes() == 1:
        return graph.number_of_edges() == 0
    return nx.is_arborescence(graph)


def out_actions(m, state=None):
    return m.out(state)


def restrict_states(m, keep):
    keep = frozenset(keep)
    transitions = frozenset((s, a, t) for s, a, t in m.transitions if s in keep and t in keep)
    if isinstance(m, PureModel):
        return PureModel(keep, transitions, m.start)
    labels = {s: m.labels[s] for s in keep}
    return CathoristicModel(CathoristicTS(keep, transitions, labels), m.start)


def rooted_at(m, state):
    """Re-root a model at state, dropping what is unreachable from it."""
    keep = reachable(m, state)
    if isinstance(m, PureModel):
        return restrict_states(PureModel(m.states, m.transitions, state), keep)
    return restrict_states(CathoristicModel(m.ts, state), keep)


def bfs_order(m):
    """Reachable states in breadth-first order, visiting edges by action."""
    order = [m.start]
    seen = {m.start}
    queue = deque([m.start])
    while queue:
        s = queue.popleft()
        for _, t in m.edges(s):
            if t not in seen:
                seen.add(t)
                order.append(t)
                queue.append(t)
    return order


def canonical(m, prefix="s"):
    """Rename reachable states s0, s1, ... in breadth-first order."""
    names = {s: f"{prefix}{i}" for i, s in enumerate(bfs_order(m))}
    transitions = frozenset((names[s], a, names[t]) for s, a, t in m.transitions if s in names and t in names)
    if isinstance(m, PureModel):
        return PureModel(frozenset(names.values()), transitions, names[m.start])
    labels = {names[s]: m.labels[s] for s in names}
    return CathoristicModel(CathoristicTS(frozenset(names.values()), transitions, labels), names[m.start])


def tree_unfold(m, depth):
    """
    Unfold a model into a tree of the paths of length at most depth.

    Args:
        m (CathoristicModel): Model to unfold (cycles allowed)
        depth (int): Maximum path length

    Returns:
        CathoristicModel: Tree rooted at s0 with labels copied from the unfolded states
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    labels = {"s0": m.label(m.start)}
    transitions = set()
    queue = deque([("s0", m.start, 0)])
    counter = 1
    while queue:
        node, original, level = queue.popleft()
        if level == depth:
            continue
        for a, t in m.edges(original):
            child = f"s{counter}"
            counter += 1
            labels[child] = m.label(t)
            transitions.add((node, a, child))
            queue.append((child, t, level + 1))
    return CathoristicModel(CathoristicTS(frozenset(labels), frozenset(transitions), labels), "s0")


def single_state(label=SIGMA, name="s0"):
    return CathoristicModel(CathoristicTS(frozenset([name]), frozenset(), {name: as_label(label)}), name)
