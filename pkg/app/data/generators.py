"""
Seeded generators for models, formulae and datasets.

Random draws use numpy's default_rng so every test and benchmark is reproducible.
"""

import itertools
import logging

import numpy as np

from app.logic.syntax import TOP, And, Bang, May, conjoin
from app.models.model import SIGMA, CathoristicModel, CathoristicTS, PureModel

logger = logging.getLogger(__name__)

DEFAULT_SEED = 42
SMALL_ACTIONS = ("a", "b")


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(DEFAULT_SEED if seed is None else seed)


def _subsets(actions):
    return [frozenset(c) for r in range(len(actions) + 1) for c in itertools.combinations(actions, r)]


# ---------------------------------------------------------------------------
# Random models and formulae
# ---------------------------------------------------------------------------

def random_tree_model(seed=None, actions=("a", "b", "c"), max_depth=3, branch_prob=0.5, sigma_prob=0.4):
    """
    Draw a random tree model.

    Args:
        seed (int or Generator): Seed or generator
        actions (tuple): Actions to draw from
        max_depth (int): Maximum depth of the tree
        branch_prob (float): Chance that an admitted action gets a child
        sigma_prob (float): Chance that a state is labelled Sigma

    Returns:
        CathoristicModel: Tree rooted at s0
    """
    rng = _rng(seed)
    labels = {}
    transitions = set()
    pending = [("s0", 0)]
    counter = itertools.count(1)
    while pending:
        state, depth = pending.pop()
        if rng.random() < sigma_prob:
            label = SIGMA
        else:
            label = frozenset(a for a in actions if rng.random() < 0.5)
        labels[state] = label
        if depth >= max_depth:
            continue
        for a in actions:
            if (label is SIGMA or a in label) and rng.random() < branch_prob:
                child = f"s{next(counter)}"
                transitions.add((state, a, child))
                pending.append((child, depth + 1))
    return CathoristicModel(CathoristicTS(frozenset(labels), frozenset(transitions), labels), "s0")


def random_formula(seed=None, actions=("a", "b", "c"), depth=3):
    """
    Draw a random core formula without F.

    Args:
        seed (int or Generator): Seed or generator
        actions (tuple): Actions to draw from
        depth (int): Maximum nesting of connectives

    Returns:
        Formula: Random formula
    """
    rng = _rng(seed)
    acts = list(actions)

    def draw(level):
        choice = rng.integers(0, 4) if level > 0 else rng.integers(0, 2)
        if choice == 0:
            return TOP
        if choice == 1:
            return Bang(frozenset(a for a in acts if rng.random() < 0.5))
        if choice == 2:
            return May(acts[rng.integers(0, len(acts))], draw(level - 1))
        return And(draw(level - 1), draw(level - 1))

    return draw(depth)


def random_pure_model(seed=None, actions=SMALL_ACTIONS, n_states=3, edge_prob=0.4):
    """Draw a possibly non-deterministic pure model on states s0..s{n-1}."""
    rng = _rng(seed)
    states = [f"s{i}" for i in range(n_states)]
    transitions = frozenset(
        (s, a, t) for s in states for a in actions for t in states if rng.random() < edge_prob
    )
    return PureModel(frozenset(states), transitions, "s0")


# ---------------------------------------------------------------------------
# Exhaustive families
# ---------------------------------------------------------------------------

def small_formula_family(actions=SMALL_ACTIONS):
    """
    The exhaustive family of small core formulae over actions.

    Atoms are T and the tantum of every subset. The family holds the atoms, one and
    two modalities over an atom, and every conjunction of two distinct formulae of
    modal depth at most one. All members have modal depth at most two.

    Returns:
        list: Formulae in a fixed order
    """
    atoms = [TOP] + [Bang(s) for s in _subsets(actions)]
    level1 = atoms + [May(a, p) for a in actions for p in atoms]
    level2 = [May(a, May(b, p)) for a in actions for b in actions for p in atoms]
    pairs = [And(p, q) for p, q in itertools.combinations(level1, 2)]
    family = list(dict.fromkeys(level1 + level2 + pairs))
    logger.debug(f"Small formula family over {actions}: {len(family)} formulae")
    return family


def _shapes(height, actions, labels):
    """Tree shapes as (label, ((action, shape), ...)) with every edge admitted by its label."""
    if height == 0:
        return [(label, ()) for label in labels]
    below = _shapes(height - 1, actions, labels)
    shapes = []
    for label in labels:
        admitted = [a for a in actions if label is SIGMA or a in label]
        options = [[None] + below for _ in admitted]
        for choice in itertools.product(*options):
            kids = tuple((a, sub) for a, sub in zip(admitted, choice) if sub is not None)
            shapes.append((label, kids))
    return shapes


def _materialise(shape):
    labels = {}
    transitions = set()
    counter = itertools.count()
    pending = [(f"s{next(counter)}", shape)]
    while pending:
        name, (label, kids) = pending.pop()
        labels[name] = label
        for a, sub in kids:
            child = f"s{next(counter)}"
            transitions.add((name, a, child))
            pending.append((child, sub))
    return CathoristicModel(CathoristicTS(frozenset(labels), frozenset(transitions), labels), "s0")


def oracle_models(actions=SMALL_ACTIONS, height=2):
    """
    Every tree model over actions of at most the given height.

    Labels range over the subsets of actions and Sigma. The family contains simpl(f)
    for every formula of modal depth at most height over these actions, so it decides
    entailment between such formulae exactly.

    Yields:
        CathoristicModel: Each tree once
    """
    labels = _subsets(actions) + [SIGMA]
    for shape in _shapes(height, actions, labels):
        yield _materialise(shape)


def pure_models(actions=SMALL_ACTIONS, max_states=3):
    """
    Every pure model on states s0..s{k-1} for k up to max_states, start s0.

    Yields:
        PureModel: Each transition set once per state count
    """
    for k in range(1, max_states + 1):
        states = [f"s{i}" for i in range(k)]
        candidates = [(s, a, t) for s in states for a in actions for t in states]
        for mask in range(1 << len(candidates)):
            transitions = frozenset(c for i, c in enumerate(candidates) if mask >> i & 1)
            yield PureModel(frozenset(states), transitions, "s0")


# ---------------------------------------------------------------------------
# Benchmarks and datasets
# ---------------------------------------------------------------------------

def chain_formula(n, actions=SMALL_ACTIONS):
    """
    A path of n modalities cycling through actions, each state bounded by !actions.

    Returns:
        Formula: !A /\\ <a>(!A /\\ <b>(... T))
    """
    bound = Bang(frozenset(actions))
    f = TOP
    for i in reversed(range(n)):
        f = And(bound, May(actions[i % len(actions)], f))
    return f


def chain_pair(n):
    """Premise and conclusion for the entailment benchmark: (c /\\ c, c) for the n-chain c."""
    c = chain_formula(n)
    return And(c, c), c


def welsh_dataset(n, seed=None):
    """
    Facts about n Welsh people married off in pairs.

    Args:
        n (int): Number of people (p0 .. p{n-1})
        seed (int or Generator): Seed for the pairing

    Returns:
        tuple: (facts, couples) where facts are core formulae and couples the (x, y) spouse pairs
    """
    rng = _rng(seed)
    people = [f"p{i}" for i in range(n)]
    order = list(rng.permutation(n))
    couples = []
    for i in range(0, n - 1, 2):
        x, y = people[order[i]], people[order[i + 1]]
        couples.extend([(x, y), (y, x)])
    facts = [May("welsh", May(p, TOP)) for p in people]
    facts.extend(
        May("spouse", May(x, conjoin([May(y, TOP), Bang(frozenset([y]))]))) for x, y in couples
    )
    logger.info(f"Welsh dataset: {n} people, {len(couples) // 2} couples")
    return facts, couples
