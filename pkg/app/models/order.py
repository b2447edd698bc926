"""
Simulation preorder, mutual simulation and bisimulation.

m1 ⪯ m2 reads "m1 is at least as informative as m2": m2 is simulated by m1, so every
formula true in m2 is true in m1.
"""

import logging
from dataclasses import dataclass

from app.logic.semantics import satisfies_pure
from app.logic.syntax import TOP, And, Bang, Bottom, May, Top, conjoin
from app.models.model import BOT, PureModel, label_subset, reachable
from app.utils.errors import BlockedIsSatisfiedError, CathoristicError, InseparableError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimulationWitness:
    relation: frozenset

    def __contains__(self, pair):
        return pair in self.relation

    def __len__(self):
        return len(self.relation)


def _targets(m, state, action):
    if isinstance(m, PureModel):
        return m.targets(state, action)
    t = m.step(state, action)
    return () if t is None else (t,)


def simulation_exists(source, target):
    """
    Greatest simulation from source to target, if it relates the start states.

    Labelled models additionally need λ_source(x) ⊇ λ_target(y) on every pair.

    Args:
        source (CathoristicModel or PureModel): Simulated model
        target (CathoristicModel or PureModel): Simulating model

    Returns:
        SimulationWitness or None: The relation, or None when the start pair drops out
    """
    labelled = not isinstance(source, PureModel) and not isinstance(target, PureModel)
    xs = sorted(reachable(source))
    ys = sorted(reachable(target))
    relation = {
        (x, y) for x in xs for y in ys
        if not labelled or label_subset(target.label(y), source.label(x))
    }
    changed = True
    while changed:
        changed = False
        for x, y in sorted(relation):
            for a, x2 in source.edges(x):
                if not any((x2, y2) in relation for y2 in _targets(target, y, a)):
                    relation.discard((x, y))
                    changed = True
                    break
    if (source.start, target.start) not in relation:
        return None
    return SimulationWitness(frozenset(relation))


def _simulated_lockstep(high, low):
    """Deterministic check that low simulates high from the start pair."""
    seen = set()
    pending = [(high.start, low.start)]
    while pending:
        pair = pending.pop()
        if pair in seen:
            continue
        seen.add(pair)
        h, l = pair
        if not label_subset(low.label(l), high.label(h)):
            return False
        for a, h2 in high.edges(h):
            l2 = low.step(l, a)
            if l2 is None:
                return False
            pending.append((h2, l2))
    return True


def preceq(m1, m2):
    """
    m1 ⪯ m2 on lattice models: m1 is BOT, or m2 is simulated by m1.

    Args:
        m1 (CathoristicModel or BOT): Lower candidate
        m2 (CathoristicModel or BOT): Upper candidate

    Returns:
        bool: Whether m1 ⪯ m2
    """
    if m1 is BOT:
        return True
    if m2 is BOT:
        return False
    return _simulated_lockstep(m2, m1)


def equivalent(m1, m2):
    return preceq(m1, m2) and preceq(m2, m1)


def _refinement_levels(p1, p2):
    """
    Stratified bisimulation approximants over the reachable pairs.

    Returns:
        tuple: (level, final) where level maps each non-bisimilar pair to the first
        approximant it drops out of and final is the greatest bisimulation
    """
    xs = sorted(reachable(p1))
    ys = sorted(reachable(p2))
    current = {(x, y) for x in xs for y in ys if p1.out(x) == p2.out(y)}
    level = {(x, y): 0 for x in xs for y in ys if (x, y) not in current}
    k = 0
    while True:
        k += 1
        refined = set()
        for x, y in current:
            forth = all(
                any((x2, y2) in current for y2 in p2.targets(y, a))
                for a, x2 in p1.edges(x)
            )
            back = forth and all(
                any((x2, y2) in current for x2 in p1.targets(x, a))
                for a, y2 in p2.edges(y)
            )
            if back:
                refined.add((x, y))
        if refined == current:
            return level, frozenset(current)
        for pair in current - refined:
            level[pair] = k
        current = refined


def bisimilar(p1, p2):
    """
    Bisimilarity of pure models, non-deterministic ones included.

    Args:
        p1 (PureModel): First model
        p2 (PureModel): Second model

    Returns:
        bool: Whether the start states are bisimilar
    """
    _, final = _refinement_levels(p1, p2)
    return (p1.start, p2.start) in final


def distinguishing_formula(p_true, blocked, state=None):
    """
    A formula true at a state but incompatible with a formula false there.

    Args:
        p_true (PureModel): Model containing the state
        blocked (Formula): Core formula false at the state
        state (str): State (default: start)

    Returns:
        Formula: g with p_true |= g; on deterministic models no pure model satisfies g and blocked
    """
    y = p_true.start if state is None else state
    if satisfies_pure(p_true, blocked, y):
        raise BlockedIsSatisfiedError(f"{blocked} holds at {y}; nothing to distinguish")
    return _neg(p_true, y, blocked)


def _neg(p, y, phi):
    if isinstance(phi, Top):
        raise CathoristicError("T holds everywhere and cannot be blocked")
    if isinstance(phi, Bottom):
        return TOP
    if isinstance(phi, And):
        left_ok = satisfies_pure(p, phi.left, y)
        right_ok = satisfies_pure(p, phi.right, y)
        if not left_ok and right_ok:
            return And(_neg(p, y, phi.left), phi.right)
        if left_ok and not right_ok:
            return And(phi.left, _neg(p, y, phi.right))
        return And(_neg(p, y, phi.left), _neg(p, y, phi.right))
    if isinstance(phi, Bang):
        extra = sorted(p.out(y) - phi.actions)
        return May(extra[0], TOP)
    if isinstance(phi, May):
        successors = sorted(p.targets(y, phi.action))
        if successors:
            return conjoin(May(phi.action, _neg(p, z, phi.body)) for z in successors)
        return Bang(p.out(y))
    raise CathoristicError(f"cannot negate {phi!r}")


def _covering_levels(p, q):
    """
    Stratified approximants of the out-set simulation from p into q.

    (x, y) survives when p.out(x) == q.out(y) and every a-successor of x survives with
    some a-successor of y. Surviving pairs are exactly those where y satisfies every
    core formula true at x.

    Returns:
        tuple: (level, final) where level maps each dropped pair to the round it dropped in
    """
    xs = sorted(reachable(p))
    ys = sorted(reachable(q))
    current = {(x, y) for x in xs for y in ys if p.out(x) == q.out(y)}
    level = {(x, y): 0 for x in xs for y in ys if (x, y) not in current}
    k = 0
    while True:
        k += 1
        refined = {
            (x, y) for x, y in current
            if all(any((x2, y2) in current for y2 in q.targets(y, a)) for a, x2 in p.edges(x))
        }
        if refined == current:
            return level, frozenset(current)
        for pair in current - refined:
            level[pair] = k
        current = refined


def core_equivalent(p1, p2):
    """
    Whether two pure models satisfy the same core formulae.

    Coincides with bisimilarity on deterministic models; on non-deterministic ones it is
    strictly coarser.
    """
    _, forth = _covering_levels(p1, p2)
    if (p1.start, p2.start) not in forth:
        return False
    _, back = _covering_levels(p2, p1)
    return (p2.start, p1.start) in back


def _separate(p, q, level, x, y):
    """Core formula true at x in p and false at y in q, for a dropped pair (x, y)."""
    memo = {}

    def build(x, y):
        if (x, y) in memo:
            return memo[(x, y)]
        out_p, out_q = p.out(x), q.out(y)
        if out_p != out_q:
            extra = sorted(out_p - out_q)
            result = May(extra[0], TOP) if extra else Bang(out_p)
        else:
            k = level[(x, y)]
            for a, x2 in p.edges(x):
                partners = sorted(q.targets(y, a))
                if all(level.get((x2, y2), k) < k for y2 in partners):
                    result = May(a, conjoin(build(x2, y2) for y2 in partners))
                    break
            else:
                raise CathoristicError(f"no separating move found for ({x}, {y})")
        memo[(x, y)] = result
        return result

    return build(x, y)


def separating_formula(p1, p2):
    """
    A core formula true in exactly one of two pure models.

    Always succeeds on non-bisimilar deterministic models. Non-deterministic models may
    disagree only on what holds at every a-successor, which no core formula can express;
    those pairs raise InseparableError.

    Args:
        p1 (PureModel): First model
        p2 (PureModel): Second model

    Returns:
        tuple: (formula, side) where side 1 means true in p1 and false in p2, side 2 the reverse
    """
    if bisimilar(p1, p2):
        raise CathoristicError("the models are bisimilar; no formula separates them")
    level, final = _covering_levels(p1, p2)
    if (p1.start, p2.start) not in final:
        return _separate(p1, p2, level, p1.start, p2.start), 1
    level, final = _covering_levels(p2, p1)
    if (p2.start, p1.start) not in final:
        return _separate(p2, p1, level, p2.start, p1.start), 2
    logger.info("Models are core-equivalent but not bisimilar")
    raise InseparableError("the models satisfy the same core formulae although they are not bisimilar")
