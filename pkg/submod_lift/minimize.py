"""
Submodular cost minimization over upward-closed families.

The covering LP min sum f_i^L(z_i) s.t. sum_i z_i in P*(F) is solved in
floating point, snapped to rationals and repaired so the returned point
is exactly feasible. Rounding procedures then turn it into an integral
multi-agent solution and check their approximation bounds on the spot.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm, log
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import linprog

from .blockers import BlockingFamily, Clutter, LiftedBlockingFamily
from .config import Settings, resolve
from .exceptions import (ArityMismatchError, BoundViolationError, CapExceededError,
                         DomainMismatchError, InfeasibleError, PreconditionError, StageError)
from .lifting import lift_oracle
from .models import GroundSet, MultiAgentSolution, SetTuple
from .oracles import SubmodularOracle, make_partition_cost, restrict, subtract_modular
from .sfm import cover_bound_holds, lovasz, lovasz_float, sfm_minimize, sfm_mv_ring
from .utils import bits, harmonic, mask_of, popcount, snap_fraction

logger = logging.getLogger(__name__)

sfm_ring_constrained_min = sfm_mv_ring


@dataclass
class CoveringLPSolution:
    """
    Fractional covering solution.

    ``columns`` maps (S, agent) to weights; the columns of agent i sum to
    ``agent_z[i]`` exactly and ``z`` is the sum over agents.
    """
    z: List[Fraction]
    agent_z: List[List[Fraction]]
    columns: Dict[Tuple[int, int], Fraction]
    objective: Fraction
    iterations: int = 0
    violation: float = 0.0
    converged: bool = True
    repair_scale: Fraction = Fraction(1)

    @property
    def k(self) -> int:
        return len(self.agent_z)

    def agent_columns(self, i: int) -> Dict[int, Fraction]:
        return {S: w for (S, agent), w in self.columns.items() if agent == i}

    def diagnostics(self) -> Dict[str, Any]:
        return {"iterations": self.iterations, "violation": self.violation,
                "converged": self.converged, "repair_scale": self.repair_scale}


def _check_agents(fs: Sequence[SubmodularOracle], family: BlockingFamily) -> None:
    if not fs:
        raise ArityMismatchError("need at least one agent oracle")
    for f in fs:
        if f.ground != family.ground:
            raise DomainMismatchError("oracle and blocking family use different ground sets")


def _kelley_polish(fs: Sequence[SubmodularOracle], family: BlockingFamily,
                   cuts: List[set], blockers: List[int], settings: Settings
                   ) -> Tuple[Optional[np.ndarray], int]:
    """
    Cutting-plane finish: min sum t_i with t_i >= w.z_i for the greedy
    vectors w collected so far and z(B) >= 1 for the blockers seen.
    """
    k, n = len(fs), family.ground.size
    width = k * n + k
    objective = np.concatenate([np.zeros(k * n), np.ones(k)])
    bounds = [(0.0, 1.0)] * (k * n) + [(None, None)] * k
    for iteration in range(1, settings.cutting_plane_max_iter + 1):
        rows, rhs = [], []
        for i in range(k):
            for vector in cuts[i]:
                row = np.zeros(width)
                row[i * n:(i + 1) * n] = vector
                row[k * n + i] = -1.0
                rows.append(row)
                rhs.append(0.0)
        for blocker in blockers:
            row = np.zeros(width)
            for i in range(k):
                for v in bits(blocker):
                    row[i * n + v] = -1.0
            rows.append(row)
            rhs.append(-1.0)
        result = linprog(objective, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds,
                         method="highs")
        if result.status != 0:
            logger.warning("cutting-plane LP failed (%s); keeping the subgradient point",
                           result.message)
            return None, iteration
        point = result.x[:k * n].reshape((k, n))
        heights = result.x[k * n:]
        added = False
        for i in range(k):
            value, gradient = lovasz_float(fs[i], point[i])
            if value > heights[i] + settings.tolerance * max(1.0, abs(value)):
                key = tuple(gradient)
                if key not in cuts[i]:
                    cuts[i].add(key)
                    added = True
        load, blocker = family.min_load(list(point.sum(axis=0)))
        if blocker is not None and load < 1 - settings.tolerance and blocker not in blockers:
            blockers.append(blocker)
            added = True
        if not added:
            logger.debug("cutting planes converged after %d rounds", iteration)
            return point, iteration
    logger.warning("cutting planes hit %d rounds", settings.cutting_plane_max_iter)
    return None, settings.cutting_plane_max_iter


def _solve_covering(fs: Sequence[SubmodularOracle], family: BlockingFamily,
                    settings: Settings) -> CoveringLPSolution:
    _check_agents(fs, family)
    k, n = len(fs), family.ground.size
    zero = [Fraction(0)] * n
    if family.min_load(zero)[1] is None:
        return CoveringLPSolution(zero, [list(zero) for _ in range(k)], {}, Fraction(0))

    # Projected subgradient on f^L plus a penalty for the most violated blocker.
    point = np.full((k, n), 1.0 / k)
    penalty = 1.0 + sum(float(f.value(f.ground.full)) for f in fs)
    step = max(sum(lovasz_float(f, point[i])[0] for i, f in enumerate(fs)), 1.0)
    cuts: List[set] = [set() for _ in range(k)]
    blockers: List[int] = []
    limit = settings.subgradient_iter_factor * n * n
    iterations = 0
    for t in range(1, limit + 1):
        iterations = t
        gradient = np.zeros((k, n))
        for i, f in enumerate(fs):
            _, gradient[i] = lovasz_float(f, point[i])
            cuts[i].add(tuple(gradient[i]))
        load, blocker = family.min_load(list(point.sum(axis=0)))
        if blocker is not None and load < 1:
            if blocker not in blockers:
                blockers.append(blocker)
            for v in bits(blocker):
                gradient[:, v] -= penalty
        norm = float(np.linalg.norm(gradient))
        if norm < settings.tolerance:
            break
        point = np.clip(point - (step / np.sqrt(t)) * gradient / norm, 0.0, 1.0)

    polished, rounds = _kelley_polish(fs, family, cuts, blockers, settings)
    converged = polished is not None
    if converged:
        point = polished

    # Snap to rationals and repair: scale by 1/min load, clip to the box.
    agent_z = [[min(Fraction(1), max(Fraction(0), snap_fraction(x, settings.rational_denominator)))
                for x in row] for row in point]
    aggregate = [sum((agent_z[i][v] for i in range(k)), Fraction(0)) for v in range(n)]
    load, blocker = family.min_load(aggregate)
    violation = float(max(Fraction(0), 1 - load)) if blocker is not None else 0.0
    scale = Fraction(1)
    while blocker is not None and load < 1:
        if blocker == 0:
            raise InfeasibleError("the empty set is a blocker; nothing is feasible")
        if load > 0:
            factor = 1 / load
            scale *= factor
            agent_z = [[min(Fraction(1), x * factor) for x in row] for row in agent_z]
        else:
            for v in bits(blocker):
                cheapest = min(range(k), key=lambda i: (fs[i].value(1 << v), i))
                agent_z[cheapest][v] = Fraction(1)
        aggregate = [sum((agent_z[i][v] for i in range(k)), Fraction(0)) for v in range(n)]
        load, blocker = family.min_load(aggregate)

    columns: Dict[Tuple[int, int], Fraction] = {}
    objective = Fraction(0)
    for i, f in enumerate(fs):
        evaluation = lovasz(f, agent_z[i])
        objective += evaluation.value
        for S, weight in evaluation.columns().items():
            columns[(S, i)] = weight
    logger.debug("covering LP: objective %s after %d subgradient steps and %d cut rounds",
                 objective, iterations, rounds)
    return CoveringLPSolution(aggregate, agent_z, columns, objective, iterations + rounds,
                              violation, converged, scale)


def solve_sa_lp(f: SubmodularOracle, family: BlockingFamily,
                settings: Optional[Settings] = None) -> CoveringLPSolution:
    """min f^L(z) over z in P*(F), exactly feasible after repair."""
    return _solve_covering([f], family, resolve(settings))


def solve_ma_lp(fs: Sequence[SubmodularOracle], family: BlockingFamily,
                settings: Optional[Settings] = None) -> CoveringLPSolution:
    """min sum_i f_i^L(z_i) with sum_i z_i in P*(F); columns are agent-indexed."""
    return _solve_covering(list(fs), family, resolve(settings))


@dataclass
class LPOracleResult:
    """Explicit-column LP optimum bracketed by exact primal and dual values."""
    value: Fraction
    lower: Fraction
    upper: Fraction
    primal: Dict[int, Fraction] = field(default_factory=dict)
    dual: Dict[int, Fraction] = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


def lp_exact_oracle(f: SubmodularOracle, clutter: Clutter,
                    settings: Optional[Settings] = None) -> LPOracleResult:
    """
    Solve min sum f(S) x(S) s.t. sum_S |S ∩ B| x(S) >= 1 for every blocker B.

    All 2^n - 1 columns are written out. The HiGHS primal and dual are
    snapped to rationals and repaired to exact feasibility, so ``lower``
    and ``upper`` are certified bounds on the optimum.
    """
    settings = resolve(settings)
    n = f.n
    if clutter.ground != f.ground:
        raise DomainMismatchError("clutter and oracle use different ground sets")
    if n > settings.lp_oracle_cap:
        raise CapExceededError("lp_exact_oracle", n, settings.lp_oracle_cap)
    members = list(clutter)
    if not members:
        return LPOracleResult(Fraction(0), Fraction(0), Fraction(0))
    if 0 in members:
        raise InfeasibleError("the empty set is a blocker; nothing is feasible")
    columns = list(range(1, 1 << n))
    costs = [f.value(S) for S in columns]
    cover = np.array([[popcount(S & B) for S in columns] for B in members], dtype=float)
    result = linprog(np.array([float(c) for c in costs]), A_ub=-cover,
                     b_ub=-np.ones(len(members)), bounds=(0, None), method="highs")
    if result.status != 0:
        raise InfeasibleError(f"explicit-column LP failed: {result.message}")

    primal = {S: snap_fraction(x, settings.rational_denominator)
              for S, x in zip(columns, result.x) if x > settings.tolerance}
    loads = [sum((x * popcount(S & B) for S, x in primal.items()), Fraction(0)) for B in members]
    least = min(loads)
    if least <= 0:
        # Fall back to the cheapest singleton on every blocker.
        primal = {}
        for B in members:
            v = min(bits(B), key=lambda u: (f.value(1 << u), u))
            primal[1 << v] = Fraction(1)
    elif least < 1:
        primal = {S: x / least for S, x in primal.items()}
    upper = sum((x * f.value(S) for S, x in primal.items()), Fraction(0))

    dual = {B: max(Fraction(0), snap_fraction(-y, settings.rational_denominator))
            for B, y in zip(members, result.ineqlin.marginals)}
    worst = None
    for S, cost in zip(columns, costs):
        used = sum((y * popcount(S & B) for B, y in dual.items()), Fraction(0))
        if used > 0:
            ratio = cost / used
            if worst is None or ratio < worst:
                worst = ratio
    if worst is not None and worst < 1:
        dual = {B: y * max(worst, Fraction(0)) for B, y in dual.items()}
    lower = sum(dual.values(), Fraction(0))
    value = upper if lower == upper else snap_fraction(result.fun, settings.rational_denominator)
    value = min(max(value, lower), upper)
    return LPOracleResult(value, lower, upper, primal, dual)


def _ln(n: int) -> float:
    return log(n) if n > 1 else 0.0


def _beta(family: BlockingFamily) -> int:
    if family.beta_bound is None:
        family.blockers()
    if family.beta_bound is None:
        raise PreconditionError("the blocking family has no beta bound")
    return family.beta_bound


def bounded_blocker_round(solution: CoveringLPSolution, family: BlockingFamily,
                          f: Optional[SubmodularOracle] = None,
                          settings: Optional[Settings] = None) -> int:
    """
    Threshold rounding Q = {v : z(v) >= 1/beta}.

    When ``f`` is given, f(Q) <= beta * objective is checked through the
    fractional cover of Q by beta times the LP columns.

    Raises:
        InfeasibleError: If Q is outside the family
        BoundViolationError: If the cost bound fails
    """
    beta = _beta(family)
    threshold = Fraction(1, beta)
    Q = mask_of(v for v, x in enumerate(solution.z) if x >= threshold)
    if not family.is_member(Q):
        raise InfeasibleError("threshold set is not in the family", witness=Q)
    if f is not None and Q:
        cover = {}
        for (S, _), weight in solution.columns.items():
            cover[S] = cover.get(S, Fraction(0)) + beta * weight
        if not cover_bound_holds(f, Q, cover):
            raise BoundViolationError(f"f(Q) = {f.value(Q)} exceeds {beta} x {solution.objective}")
    return Q


def _greedy_cover(target: int, candidates: Sequence[Tuple[int, int]],
                  costs: Dict[Tuple[int, int], Fraction]) -> List[Tuple[int, int, int]]:
    """
    Greedy weighted set cover of ``target``.

    Returns (piece, agent, picked set) triples where the pieces are the
    newly covered parts, so they are disjoint and partition ``target``.
    """
    uncovered = target
    picks = []
    while uncovered:
        best = None
        for S, i in candidates:
            gain = popcount(S & uncovered)
            if not gain:
                continue
            key = (costs[(S, i)] / gain, i, S)
            if best is None or key < best:
                best = key
        if best is None:
            raise InfeasibleError("candidate sets do not cover the target", witness=uncovered)
        _, i, S = best
        picks.append((S & uncovered, i, S))
        uncovered &= ~S
    return picks


def _disjointify(ground: GroundSet, masks: List[int]) -> SetTuple:
    """Keep each element only with the lowest-index agent holding it."""
    taken = 0
    result = []
    for mask in masks:
        result.append(mask & ~taken)
        taken |= mask
    return SetTuple(ground, tuple(result))


def _solution(fs: Sequence[SubmodularOracle], assignment: SetTuple, family: BlockingFamily,
              stage: str, trace: Dict[str, Any]) -> MultiAgentSolution:
    if not assignment.is_disjoint:
        raise StageError(stage, "agent sets overlap")
    if not family.is_member(assignment.union):
        raise StageError(stage, "union of the agent sets is not in the family")
    costs = [f.value(mask) for f, mask in zip(fs, assignment.masks)]
    return MultiAgentSolution(assignment, sum(costs, Fraction(0)), costs, trace)


def ma_bounded_blocker_round(solution: CoveringLPSolution, family: BlockingFamily,
                             fs: Sequence[SubmodularOracle],
                             settings: Optional[Settings] = None) -> MultiAgentSolution:
    """
    Multi-agent threshold rounding.

    Q is thresholded at 1/beta, covered greedily by the LP support pairs
    (S, i) at cost f_i(S), merged per agent and made disjoint. The total
    is checked against beta * H(|Q|) * objective; beta * ln n is reported
    alongside as ``ln_bound``.
    """
    _check_agents(fs, family)
    if solution.k != len(fs):
        raise ArityMismatchError(f"solution has {solution.k} agents for {len(fs)} oracles")
    ground = family.ground
    beta = _beta(family)
    Q = mask_of(v for v, x in enumerate(solution.z) if x >= Fraction(1, beta))
    if not family.is_member(Q):
        raise InfeasibleError("threshold set is not in the family", witness=Q)
    candidates = [(S, i) for (S, i), w in sorted(solution.columns.items(),
                                                 key=lambda item: (item[0][1], item[0][0]))
                  if w > 0 and S & Q]
    costs = {(S, i): fs[i].value(S) for S, i in candidates}
    picks = _greedy_cover(Q, candidates, costs)
    merged = [0] * len(fs)
    for _, i, S in picks:
        merged[i] |= S & Q
    assignment = _disjointify(ground, merged)
    bound = beta * harmonic(popcount(Q)) * solution.objective
    result = _solution(fs, assignment, family, "ma-bb-round",
                       {"Q": ground.labels_of(Q), "lp_objective": solution.objective,
                        "cover_cost": sum((costs[(S, i)] for _, i, S in picks), Fraction(0)),
                        "bound": bound, "factor": beta * harmonic(popcount(Q)),
                        "ln_bound": beta * _ln(ground.size)})
    if result.total > bound:
        raise BoundViolationError(f"cost {result.total} exceeds beta*H(|Q|)*LP = {bound}")
    return result


# ---------------------------------------------------------------------------
# Fracture / expand / return
# ---------------------------------------------------------------------------

Column = Tuple[int, int, Fraction]


def _merge(columns: Sequence[Column]) -> List[Column]:
    weights: Dict[Tuple[int, int], Fraction] = {}
    for S, i, w in columns:
        if S and w > 0:
            weights[(S, i)] = weights.get((S, i), Fraction(0)) + w
    return [(S, i, w) for (S, i), w in sorted(weights.items(), key=lambda item: (item[0][1],
                                                                                  item[0][0]))]


def _image(columns: Sequence[Column], n: int) -> List[Fraction]:
    z = [Fraction(0)] * n
    for S, _, w in columns:
        for v in bits(S):
            z[v] += w
    return z


def _cost(fs: Sequence[SubmodularOracle], columns: Sequence[Column]) -> Fraction:
    return sum((w * fs[i].value(S) for S, i, w in columns), Fraction(0))


def _require_feasible(stage: str, family: BlockingFamily, z: Sequence[Fraction]) -> None:
    load, blocker = family.min_load(z)
    if blocker is not None and load < 1:
        raise StageError(stage, f"blocker {family.ground.labels_of(blocker)} has load {load}")


def _bin_index(x: Fraction) -> int:
    """j with x in (2^-(j+1), 2^-j]; values of at least 1 go to bin 0."""
    j = 0
    while x <= Fraction(1, 2 ** (j + 1)):
        j += 1
    return j


def _truncate(columns: Sequence[Column], target: Sequence[Fraction]) -> List[Column]:
    """
    Cut columns back so each element is covered exactly target[v].

    Columns are consumed in order; the column crossing the target is split
    into a part keeping v and a part without it.
    """
    current = list(columns)
    for v, need in enumerate(target):
        if not need:
            continue
        covered = Fraction(0)
        updated = []
        for S, i, w in current:
            if not S >> v & 1:
                updated.append((S, i, w))
            elif covered >= need:
                updated.append((S & ~(1 << v), i, w))
            elif covered + w <= need:
                covered += w
                updated.append((S, i, w))
            else:
                keep = need - covered
                covered = need
                updated.append((S, i, keep))
                updated.append((S & ~(1 << v), i, w - keep))
        if covered != need:
            raise StageError("round-up", f"element {v} is covered {covered} < {need}")
        current = [column for column in updated if column[0]]
    return _merge(current)


@dataclass
class StageRecord:
    """Cost after a rounding stage and how it compares with the previous one."""
    stage: str
    cost: Fraction
    factor: Fraction
    bound: Fraction

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {"stage": self.stage, "cost": self.cost, "factor": self.factor,
                "bound": self.bound}


def _ratio(current: Fraction, previous: Fraction) -> Fraction:
    if previous == 0:
        return Fraction(1) if current == 0 else Fraction(10 ** 18)
    return current / previous


SARounder = Callable[[SubmodularOracle, BlockingFamily, CoveringLPSolution], int]


def fracture_expand_return(fs: Sequence[SubmodularOracle], family: BlockingFamily,
                           sa_rounder: Optional[SARounder] = None, alpha: Optional[Any] = None,
                           lp: Optional[CoveringLPSolution] = None,
                           settings: Optional[Settings] = None) -> MultiAgentSolution:
    """
    Round the multi-agent LP through a single-agent instance.

    Stages: drop elements with z <= 1/(2n) and double; round z up to
    powers of two by bins; split every column by bin; cover each bin
    greedily at scale 2^j; return to weights 2^-j; round the induced
    partition cost g with ``sa_rounder`` and hand each chosen piece to
    its agent. Every stage is checked for feasibility and against its
    cost factor.

    Args:
        fs: Monotone normalized agent costs
        family: Blocking family on V
        sa_rounder: ``(g, family, solution) -> Q``; defaults to threshold
            rounding, which needs a beta bound
        alpha: Approximation factor of a custom rounder, for the bound check
        lp: Precomputed multi-agent LP solution
    """
    settings = resolve(settings)
    _check_agents(fs, family)
    ground = family.ground
    n = ground.size
    if lp is None:
        lp = solve_ma_lp(fs, family, settings)
    if not lp.columns:
        if not family.is_member(0):
            raise InfeasibleError("the LP support is empty but the empty set is infeasible")
        return MultiAgentSolution(SetTuple.empty(ground, len(fs)), Fraction(0),
                                  [Fraction(0)] * len(fs), {"stages": [], "bound": Fraction(1), "ln_bound": 0.0})
    if sa_rounder is None:
        beta = _beta(family)
        alpha = Fraction(beta)

        def sa_rounder(g, fam, sol):
            return bounded_blocker_round(sol, fam, g, settings)
    elif alpha is None:
        raise PreconditionError("a custom single-agent rounder needs its factor alpha")
    alpha = Fraction(alpha)
    stages: List[StageRecord] = []

    def record(stage: str, cost: Fraction, previous: Fraction, bound: Fraction) -> None:
        factor = _ratio(cost, previous)
        stages.append(StageRecord(stage, cost, factor, bound))
        logger.debug("stage %s: cost %s (x%s, bound %s)", stage, cost, factor, bound)
        if factor > bound:
            raise BoundViolationError(f"stage {stage} grew the cost by {factor} > {bound}")

    columns = _merge([(S, i, w) for (S, i), w in lp.columns.items()])
    lp_cost = _cost(fs, columns)
    stages.append(StageRecord("lp", lp_cost, Fraction(1), Fraction(1)))

    small = mask_of(v for v, x in enumerate(lp.z) if x <= Fraction(1, 2 * n))
    columns = _merge([(S & ~small, i, 2 * w) for S, i, w in columns])
    doubled = _image(columns, n)
    _require_feasible("drop-and-double", family, doubled)
    cost = _cost(fs, columns)
    record("drop-and-double", cost, lp_cost, Fraction(2))

    bins = {v: _bin_index(x) for v, x in enumerate(doubled) if x > 0}
    target = [Fraction(1, 2 ** bins[v]) if v in bins else Fraction(0) for v in range(n)]
    columns = _truncate([(S, i, 2 * w) for S, i, w in columns], target)
    _require_feasible("round-up", family, _image(columns, n))
    previous, cost = cost, _cost(fs, columns)
    record("round-up", cost, previous, Fraction(2))

    zones = {}
    for v, j in bins.items():
        zones[j] = zones.get(j, 0) | 1 << v
    fractured = []
    for S, i, w in columns:
        for j, zone in sorted(zones.items()):
            if S & zone:
                fractured.append((S & zone, i, w, j))
    previous, cost = cost, sum((w * fs[i].value(S) for S, i, w, _ in fractured), Fraction(0))
    record("fracture", cost, previous, Fraction(len(zones)))

    pieces: List[Tuple[int, int, int]] = []
    for j, zone in sorted(zones.items()):
        candidates = list(dict.fromkeys((S, i) for S, i, _, bin_j in fractured if bin_j == j))
        costs = {(S, i): fs[i].value(S) for S, i in candidates}
        for piece, i, _ in _greedy_cover(zone, candidates, costs):
            pieces.append((piece, i, j))
    returned = [(U, i, Fraction(1, 2 ** j)) for U, i, j in pieces]
    if _image(returned, n) != target:
        raise StageError("return", "returned pieces do not reproduce the rounded point")
    _require_feasible("return", family, target)
    previous, cost = cost, _cost(fs, returned)
    widest = max((popcount(zone) for zone in zones.values()), default=0)
    record("cover-and-return", cost, previous, harmonic(widest) if widest else Fraction(1))

    piece_costs = [fs[i].value(U) for U, i, _ in pieces]
    g = make_partition_cost(ground, [U for U, _, _ in pieces], piece_costs)
    single = CoveringLPSolution(list(target), [list(target)],
                                {(U, 0): w for U, _, w in returned}, cost)
    Q = sa_rounder(g, family, single)
    if not family.is_member(Q):
        raise StageError("sa-round", "single-agent rounding returned an infeasible set")
    merged = [0] * len(fs)
    for U, i, _ in pieces:
        if U & Q:
            merged[i] |= U
    assignment = _disjointify(ground, merged)
    result = _solution(fs, assignment, family, "sa-round", {})
    record("sa-round", result.total, cost, alpha)

    product = Fraction(1)
    for stage in stages:
        product *= stage.bound
    if result.total > product * lp_cost:
        raise BoundViolationError(f"cost {result.total} exceeds {product} x LP {lp_cost}")
    result.trace = {"stages": [stage.to_dict() for stage in stages], "bound": product,
                    "ln_bound": 4 * (2 * n - 1).bit_length() * _ln(n) * float(alpha),
                    "lp_objective": lp.objective,
                    "bins": {j: ground.labels_of(zone) for j, zone in sorted(zones.items())}}
    return result


# ---------------------------------------------------------------------------
# Multivariate reduction
# ---------------------------------------------------------------------------

def exact_sa_solver(f: SubmodularOracle, family: Any, settings: Optional[Settings] = None) -> int:
    """Cheapest member of the family by enumeration (smallest mask on ties)."""
    settings = resolve(settings)
    if f.n > settings.brute_cap:
        raise CapExceededError("exact_sa_solver", f.n, settings.brute_cap)
    best, best_value = None, None
    for mask in range(1 << f.n):
        if family.is_member(mask):
            value = f.value(mask)
            if best_value is None or value < best_value:
                best, best_value = mask, value
    if best is None:
        raise InfeasibleError("the family has no members")
    return best


def bounded_blocker_sa_solver(f: SubmodularOracle, family: BlockingFamily,
                              settings: Optional[Settings] = None) -> int:
    """LP plus threshold rounding: a beta-approximation."""
    solution = solve_sa_lp(f, family, settings)
    return bounded_blocker_round(solution, family, f, settings)


SASolver = Callable[[SubmodularOracle, Any, Optional[Settings]], int]


def mv_reduce_k_alpha(g, family: BlockingFamily, sa_solver: Optional[SASolver] = None,
                      alpha: Any = 1, settings: Optional[Settings] = None) -> MultiAgentSolution:
    """
    Multivariate minimization via a fixed element-to-agent assignment.

    The lifted covering LP is solved on E; each element goes to the agent
    whose copy carries the most LP mass (lowest agent on ties). The
    resulting single-agent cost f'(S) = g(S split by that assignment) is
    minimized by ``sa_solver``; the answer is within k * alpha of OPT.
    """
    settings = resolve(settings)
    if g.ground != family.ground:
        raise DomainMismatchError("oracle and blocking family use different ground sets")
    n, k = g.n, g.k
    relaxation = solve_sa_lp(lift_oracle(g), LiftedBlockingFamily(family, k), settings)
    w = relaxation.z
    owner = [max(range(k), key=lambda i: (w[i * n + v], -i)) for v in range(n)]

    def split(mask: int) -> Tuple[int, ...]:
        masks = [0] * k
        for v in bits(mask):
            masks[owner[v]] |= 1 << v
        return tuple(masks)

    reduced = SubmodularOracle(g.ground, lambda mask: g.value(split(mask)), name=f"{g.name}-fixed",
                               normalized=g.normalized, nonnegative=g.nonnegative,
                               monotone=g.monotone)
    chosen = (sa_solver or exact_sa_solver)(reduced, family, settings)
    if not family.is_member(chosen):
        raise StageError("sa-solve", "single-agent solver returned an infeasible set")
    assignment = SetTuple(g.ground, split(chosen))
    costs = None if g.parts is None else [p.value(m) for p, m in zip(g.parts, assignment.masks)]
    factor = k * Fraction(alpha)
    return MultiAgentSolution(assignment, reduced.value(chosen), costs, {
        "lp_objective": relaxation.objective,
        "owners": {str(g.ground.labels[v]): owner[v] for v in range(n)},
        "factor": factor,
    })


# ---------------------------------------------------------------------------
# Multi-agent submodular cover with regions
# ---------------------------------------------------------------------------

def _check_regions(ground: GroundSet, regions: Sequence[int], k: int) -> None:
    if len(regions) != k:
        raise ArityMismatchError(f"expected {k} regions, got {len(regions)}")
    covered = 0
    for region in regions:
        covered |= ground.check(region)
    if covered != ground.full:
        missing = ground.full & ~covered
        raise InfeasibleError(f"elements {ground.labels_of(missing)} are in no agent's region",
                              witness=missing)


def _min_ratio_set(f: SubmodularOracle, region: int, uncovered: int,
                   settings: Settings) -> Tuple[int, Fraction]:
    """
    argmin over S ⊆ region meeting ``uncovered`` of f(S) / |S ∩ uncovered|.

    Bisection on theta with SFM on f(S) - theta |S ∩ U| brackets the
    optimum; a final Dinkelbach pass from the best bracket makes it exact.
    """
    local, index = restrict(f, region)
    useful = mask_of(p for p, v in enumerate(index) if uncovered >> v & 1)

    def ratio(mask: int) -> Fraction:
        return local.value(mask) / popcount(mask & useful)

    def min_shifted(theta: Fraction) -> Tuple[int, Fraction]:
        weights = [theta if useful >> p & 1 else Fraction(0) for p in range(local.n)]
        return sfm_minimize(subtract_modular(local, weights), settings)

    best_mask = local.ground.full
    best = ratio(best_mask)
    low, high = Fraction(0), best
    for _ in range(settings.msca_bisection_steps):
        if high - low <= high / 2 ** 20:
            break
        theta = (low + high) / 2
        mask, value = min_shifted(theta)
        if value < 0 and mask & useful:
            best_mask, best = mask, ratio(mask)
            high = best
        else:
            low = theta
    while True:
        mask, value = min_shifted(best)
        if value >= 0 or not mask & useful:
            break
        best_mask, best = mask, ratio(mask)
    original = 0
    for p in bits(best_mask):
        original |= 1 << index[p]
    return original, best


def msca_greedy(fs: Sequence[SubmodularOracle], regions: Sequence[int],
                settings: Optional[Settings] = None) -> MultiAgentSolution:
    """
    Greedy cover of V by agents restricted to their regions.

    Each round picks the agent and set S ⊆ V_i with the smallest cost per
    newly covered element; the result is within H(max |V_i|) of OPT.
    """
    settings = resolve(settings)
    if not fs:
        raise ArityMismatchError("need at least one agent oracle")
    ground = fs[0].ground
    _check_regions(ground, regions, len(fs))
    uncovered = ground.full
    owned = [0] * len(fs)
    rounds = []
    while uncovered:
        best = None
        for i, f in enumerate(fs):
            if not regions[i] & uncovered:
                continue
            S, ratio = _min_ratio_set(f, regions[i], uncovered, settings)
            if best is None or ratio < best[0]:
                best = (ratio, i, S)
        ratio, i, S = best
        owned[i] |= S & uncovered
        rounds.append({"agent": i, "set": ground.labels_of(S & uncovered), "ratio": ratio})
        uncovered &= ~S
    assignment = SetTuple(ground, tuple(owned))
    costs = [f.value(mask) for f, mask in zip(fs, owned)]
    widest = max(popcount(region) for region in regions)
    return MultiAgentSolution(assignment, sum(costs, Fraction(0)), costs,
                              {"rounds": rounds, "factor": harmonic(widest)})


def _hall_witness(flow: Dict[Any, Dict[Any, int]], regions: Sequence[int], n: int) -> int:
    """
    Element set X with sum of b_i over its neighbouring agents below |X|.

    Starting from an unmatched element, alternate between every agent that
    can take it and the elements those agents already hold. All agents
    reached are full under a maximum flow, so X outgrows their capacity.
    """
    start = next(v for v in range(n) if flow[("item", v)].get("sink", 0) == 0)
    found, agents, queue = 1 << start, set(), [start]
    while queue:
        v = queue.pop()
        for i, region in enumerate(regions):
            if i in agents or not region >> v & 1:
                continue
            agents.add(i)
            for u in bits(region):
                if flow[("agent", i)].get(("item", u), 0) > 0 and not found >> u & 1:
                    found |= 1 << u
                    queue.append(u)
    return found


def msca_bmatching(fs: Sequence[SubmodularOracle], regions: Sequence[int], caps: Sequence[int],
                   settings: Optional[Settings] = None) -> MultiAgentSolution:
    """
    Minimum-weight saturating b-matching with weights w(i, v) = f_i({v}).

    Solved as an integer min-cost flow source -> agents (cap b_i) ->
    elements of their regions -> sink. The answer is within max b_i of
    OPT; with every b_i = 1 it is exact.

    Raises:
        InfeasibleError: With a Hall-deficient element set as witness when
            no saturating matching exists
    """
    if not fs:
        raise ArityMismatchError("need at least one agent oracle")
    ground = fs[0].ground
    k, n = len(fs), ground.size
    if len(caps) != k:
        raise ArityMismatchError(f"expected {k} caps, got {len(caps)}")
    if any(b < 0 for b in caps):
        raise PreconditionError("caps must be nonnegative")
    _check_regions(ground, regions, k)
    weights = {(i, v): fs[i].value(1 << v) for i in range(k) for v in bits(regions[i])}
    scale = lcm(*(w.denominator for w in weights.values()))

    source, sink = "source", "sink"
    network = nx.DiGraph()
    for i in range(k):
        network.add_edge(source, ("agent", i), capacity=int(caps[i]), weight=0)
        for v in bits(regions[i]):
            network.add_edge(("agent", i), ("item", v), capacity=1,
                             weight=int(weights[(i, v)] * scale))
    for v in range(n):
        network.add_edge(("item", v), sink, capacity=1, weight=0)

    value, flow = nx.maximum_flow(network, source, sink)
    if value < n:
        raise InfeasibleError("no saturating b-matching exists",
                              witness=_hall_witness(flow, regions, n))

    flow = nx.max_flow_min_cost(network, source, sink)
    owned = [mask_of(v for v in bits(regions[i]) if flow[("agent", i)].get(("item", v), 0) > 0)
             for i in range(k)]
    assignment = SetTuple(ground, tuple(owned))
    costs = [f.value(mask) for f, mask in zip(fs, owned)]
    matching_weight = sum((weights[(i, v)] for i in range(k) for v in bits(owned[i])), Fraction(0))
    return MultiAgentSolution(assignment, sum(costs, Fraction(0)), costs,
                              {"matching_weight": matching_weight, "factor": max(caps)})
