"""
Submodular maximization under matroid constraints.

Multi-agent problems are lifted to E = [k] x V and solved with the
single-agent greedy; results are unlifted and checked directly on the
tuple.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np

from .config import Settings, resolve
from .exceptions import CapExceededError, InfeasibleError, PreconditionError, StageError
from .lifting import LiftedGroundSet, lift_constraint, lift_family_L, lift_oracle
from .matroids import MatroidIntersection
from .models import MultiAgentSolution, SetTuple, coerce_tuple
from .oracles import MultivariateOracle, SubmodularOracle
from .utils import bits

logger = logging.getLogger(__name__)


@dataclass
class GreedyTrace:
    """Picks of a greedy run with their marginal values."""
    picks: List[Tuple[int, Fraction]] = field(default_factory=list)
    subset: int = 0
    value: Fraction = Fraction(0)
    p: int = 1

    @property
    def guarantee(self) -> Fraction:
        """Worst-case fraction of OPT for monotone f over a p-intersection."""
        return Fraction(1, self.p + 1)


def greedy_max(f: SubmodularOracle, constraint: Any) -> GreedyTrace:
    """
    Greedy over an independence system.

    Adds the feasible element with the largest marginal (smallest index on
    ties) until no feasible element has a nonnegative marginal.
    """
    if constraint.ground != f.ground:
        raise PreconditionError("constraint and oracle use different ground sets")
    p = constraint.p if isinstance(constraint, MatroidIntersection) else 1
    trace = GreedyTrace(subset=0, value=f.value(0), p=p)
    while True:
        best, best_gain = None, None
        for v in range(f.n):
            if trace.subset >> v & 1:
                continue
            candidate = trace.subset | 1 << v
            if not constraint.is_member(candidate):
                continue
            gain = f.value(candidate) - trace.value
            if best_gain is None or gain > best_gain:
                best, best_gain = v, gain
        if best is None or best_gain < 0:
            break
        trace.subset |= 1 << best
        trace.value += best_gain
        trace.picks.append((best, best_gain))
    logger.debug("greedy on %s picked %d elements, value %s", f.name, len(trace.picks), trace.value)
    return trace


def double_greedy(f: SubmodularOracle, randomized: bool = False, seed: int = 0) -> int:
    """
    Double greedy for unconstrained maximization of a nonnegative f.

    The deterministic pass gives a 1/3 approximation, the randomized pass
    1/2 in expectation.
    """
    rng = np.random.default_rng(seed) if randomized else None
    low, high = 0, f.ground.full
    for v in range(f.n):
        gain_add = f.value(low | 1 << v) - f.value(low)
        gain_drop = f.value(high & ~(1 << v)) - f.value(high)
        if rng is None:
            take = gain_add >= gain_drop
        else:
            a, b = max(gain_add, 0), max(gain_drop, 0)
            take = True if a + b == 0 else rng.random() < float(a / (a + b))
        if take:
            low |= 1 << v
        else:
            high &= ~(1 << v)
    return low


def _agent_costs(g: MultivariateOracle, masks: Sequence[int]) -> Optional[List[Fraction]]:
    if g.parts is None:
        return None
    return [part.value(mask) for part, mask in zip(g.parts, masks)]


def check_tuple(assignment: SetTuple, family: Any, agent_families: Optional[Sequence[Any]]) -> None:
    """
    Re-verify a multi-agent answer directly on the tuple.

    Raises:
        StageError: If it is not disjoint, its union is outside F, or an
            agent's set is outside its own family
    """
    if not assignment.is_disjoint:
        raise StageError("verify", "agent sets overlap")
    if not family.is_member(assignment.union):
        raise StageError("verify", "union of the agent sets is not feasible")
    for i, agent_family in enumerate(agent_families or []):
        if agent_family is not None and not agent_family.is_member(assignment[i]):
            raise StageError("verify", f"agent {i} violates its own constraint")


def ma_maximize(g: MultivariateOracle, family: Any, agent_families: Optional[Sequence[Any]] = None,
                settings: Optional[Settings] = None) -> MultiAgentSolution:
    """
    Multi-agent maximization by greedy on the lifted matroid intersection.

    With F = {V} the greedy runs over the matroid whose bases are {V}; the
    result must assign every element or InfeasibleError is raised.
    """
    lifted_ground = LiftedGroundSet(g.ground, g.k)
    constraint = lift_constraint(family, agent_families, g.k)
    trace = greedy_max(lift_oracle(g), constraint)
    assignment = lifted_ground.unlift(trace.subset)
    if not family.is_member(assignment.union):
        raise InfeasibleError("greedy could not reach a feasible allocation",
                              witness=assignment.union)
    check_tuple(assignment, family, agent_families)
    return MultiAgentSolution(assignment, g.value(assignment.masks),
                              _agent_costs(g, assignment.masks),
                              {"picks": [lifted_ground.element(e) for e, _ in trace.picks],
                               "guarantee": trace.guarantee, "p": trace.p})


def _removal_count(size: int, tau: int) -> int:
    return sum(comb(size, r) for r in range(min(tau, size) + 1))


def _robust_lifted(f: SubmodularOracle, mask: int, tau: int, settings: Settings) -> Fraction:
    elements = list(bits(mask))
    count = _removal_count(len(elements), tau)
    if count > settings.robust_cap:
        raise CapExceededError("robust_value", count, settings.robust_cap)
    best = f.value(mask)
    for r in range(1, min(tau, len(elements)) + 1):
        for removed in combinations(elements, r):
            rest = mask
            for e in removed:
                rest &= ~(1 << e)
            value = f.value(rest)
            if value < best:
                best = value
    return best


def robust_value(g: MultivariateOracle, assignment: Any, tau: int,
                 settings: Optional[Settings] = None) -> Fraction:
    """min of g(S_1 - A_1, ..., S_k - A_k) over removals with sum |A_i| <= tau."""
    settings = resolve(settings)
    if tau < 0:
        raise PreconditionError("tau must be nonnegative")
    lifted_ground = LiftedGroundSet(g.ground, g.k)
    mask = lifted_ground.lift(coerce_tuple(assignment, g.ground, g.k))
    return _robust_lifted(lift_oracle(g), mask, tau, settings)


def exhaustive_robust_solver(f: SubmodularOracle, family: Any, tau: int,
                             settings: Optional[Settings] = None) -> Optional[int]:
    """Best robust set among all members of ``family``; None if it has none."""
    settings = resolve(settings)
    if f.n > settings.multi_cap:
        raise CapExceededError("exhaustive_robust_solver", f.n, settings.multi_cap)
    best, best_value = None, None
    for mask in range(1 << f.n):
        if not family.is_member(mask):
            continue
        value = _robust_lifted(f, mask, tau, settings)
        if best_value is None or value > best_value:
            best, best_value = mask, value
    return best


RobustSolver = Callable[[SubmodularOracle, Any, int, Optional[Settings]], Optional[int]]


def robust_maximize(g: MultivariateOracle, family: Any, agent_families: Optional[Sequence[Any]],
                    tau: int, sa_robust_solver: Optional[RobustSolver] = None,
                    settings: Optional[Settings] = None) -> MultiAgentSolution:
    """
    Robust multi-agent maximization through the lifted single-agent problem.

    ``sa_robust_solver(f, L, tau, settings)`` receives the lifted oracle and
    feasible family and returns a lifted mask (or None when L is empty).
    """
    settings = resolve(settings)
    if not 0 <= tau <= g.n * g.k:
        raise PreconditionError(f"tau must lie in 0..{g.n * g.k}")
    lifted = lift_family_L(family, agent_families, g.k)
    f = lift_oracle(g)
    solver = sa_robust_solver or exhaustive_robust_solver
    mask = solver(f, lifted, tau, settings)
    if mask is None:
        raise InfeasibleError("the feasible family is empty")
    assignment = lifted.lifted_ground.unlift(mask)
    check_tuple(assignment, family, agent_families)
    value = _robust_lifted(f, mask, tau, settings)
    return MultiAgentSolution(assignment, g.value(assignment.masks),
                              _agent_costs(g, assignment.masks),
                              {"robust_value": value, "tau": tau})
