"""
Algorithm dispatch, brute-force optima and re-verification.

``run`` solves one parsed instance with one algorithm and returns a
ReportRecord whose verdicts are recomputed from the returned solution.
``bench`` does the same over a corpus and summarises ratios per algorithm.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .blockers import BlockingFamily, CardinalityFamily, separate
from .config import Settings, resolve
from .exceptions import (BoundViolationError, CapExceededError, InfeasibleError,
                         PreconditionError, StageError)
from .lifting import LiftedGroundSet
from .matroids import Matroid, MatroidIntersection, PowerSetFamily
from .maximize import double_greedy, greedy_max, ma_maximize, robust_maximize, robust_value
from .minimize import (bounded_blocker_round, fracture_expand_return, ma_bounded_blocker_round,
                       msca_bmatching, msca_greedy, mv_reduce_k_alpha, solve_ma_lp, solve_sa_lp)
from .models import ReportRecord, SetTuple
from .oracles import MultivariateOracle
from .parser import Problem
from .sfm import RingFamily, sfm_mv_ring

logger = logging.getLogger(__name__)


@dataclass
class RunOptions:
    """Per-run switches from the command line."""
    brute: bool = True
    force_brute: bool = False
    timings: bool = False
    # Overrides the instance seed for randomized algorithms.
    seed: Optional[int] = None


@dataclass
class Outcome:
    """What a solver returned, before any re-verification."""
    assignment: Optional[SetTuple]
    objective: Optional[Fraction]
    bound: Optional[Fraction] = None
    lp_value: Optional[Fraction] = None
    stage_factors: List[Fraction] = field(default_factory=list)
    lp_certified: bool = False
    point: Optional[List[Fraction]] = None


Solver = Callable[[Problem, Settings], Outcome]


@dataclass(frozen=True)
class Algorithm:
    """A named solver with the problems it applies to."""
    id: str
    sense: str
    solve: Solver
    requirement: Callable[[Problem], Optional[str]]

    def accepts(self, problem: Problem) -> bool:
        return self.requirement(problem) is None


# ---------------------------------------------------------------------------
# Compatibility checks: each returns None or the reason for refusing
# ---------------------------------------------------------------------------

def _needs(task: Sequence[str], single: bool = False, decomposable: bool = False,
           blocking: bool = False, beta: bool = False, regions: bool = False, caps: bool = False,
           family: Optional[Tuple[type, ...]] = None, agent_families: bool = True):
    def requirement(problem: Problem) -> Optional[str]:
        if problem.task not in task:
            return f"task '{problem.task}' is not one of {', '.join(task)}"
        if single and problem.k != 1:
            return "needs a single agent"
        if decomposable and problem.oracle.parts is None:
            return "needs a decomposable objective"
        if blocking and not isinstance(problem.family, BlockingFamily):
            return "needs a blocking-family constraint"
        if beta and (not isinstance(problem.family, BlockingFamily)
                     or problem.family.beta_bound is None):
            return "needs a blocking family with a beta bound"
        if regions and problem.regions is None:
            return "needs agent regions"
        if caps and problem.caps is None:
            return "needs agent caps"
        if family is not None and not isinstance(problem.family, family):
            return f"constraint must be one of {', '.join(t.__name__ for t in family)}"
        if not agent_families and problem.agent_families is not None:
            return "does not take per-agent constraints"
        return None
    return requirement


def _msca_requirement(caps: bool):
    base = _needs(("min",), decomposable=True, regions=True, caps=caps,
                  family=(CardinalityFamily,), agent_families=False)

    def requirement(problem: Problem) -> Optional[str]:
        reason = base(problem)
        if reason is None and problem.family.m != problem.ground.size:
            return "needs the constraint F = {V}"
        return reason
    return requirement


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

def _single(problem: Problem, mask: int) -> SetTuple:
    return SetTuple(problem.ground, (mask,))


def _run_greedy(problem: Problem, settings: Settings) -> Outcome:
    f = problem.agent_oracles[0]
    trace = greedy_max(f, problem.family)
    bound = trace.guarantee if f.monotone and f.normalized else None
    return Outcome(_single(problem, trace.subset), trace.value, bound)


def _run_double_greedy(problem: Problem, settings: Settings) -> Outcome:
    f = problem.agent_oracles[0]
    mask = double_greedy(f)
    return Outcome(_single(problem, mask), f.value(mask),
                   Fraction(1, 3) if f.nonnegative else None)


def _run_double_greedy_rand(problem: Problem, settings: Settings) -> Outcome:
    f = problem.agent_oracles[0]
    mask = double_greedy(f, randomized=True, seed=problem.seed)
    # 1/2 holds only in expectation, so no per-run bound is claimed.
    return Outcome(_single(problem, mask), f.value(mask))


def _run_ma_greedy(problem: Problem, settings: Settings) -> Outcome:
    g = problem.oracle
    solution = ma_maximize(g, problem.family, problem.agent_families, settings)
    bound = solution.trace["guarantee"] if g.monotone and g.normalized else None
    return Outcome(solution.assignment, solution.total, bound)


def _run_robust(problem: Problem, settings: Settings) -> Outcome:
    solution = robust_maximize(problem.oracle, problem.family, problem.agent_families,
                               problem.tau, settings=settings)
    return Outcome(solution.assignment, solution.trace["robust_value"], Fraction(1))


def _run_bb_round(problem: Problem, settings: Settings) -> Outcome:
    f = problem.agent_oracles[0]
    lp = solve_sa_lp(f, problem.family, settings)
    Q = bounded_blocker_round(lp, problem.family, f, settings)
    return Outcome(_single(problem, Q), f.value(Q), Fraction(problem.family.beta_bound),
                   lp.objective, lp_certified=True)


def _run_ma_bb_round(problem: Problem, settings: Settings) -> Outcome:
    fs = problem.agent_oracles
    lp = solve_ma_lp(fs, problem.family, settings)
    solution = ma_bounded_blocker_round(lp, problem.family, fs, settings)
    return Outcome(solution.assignment, solution.total, solution.trace["factor"], lp.objective,
                   lp_certified=True)


def _run_fer(problem: Problem, settings: Settings) -> Outcome:
    fs = problem.agent_oracles
    lp = solve_ma_lp(fs, problem.family, settings)
    solution = fracture_expand_return(fs, problem.family, lp=lp, settings=settings)
    factors = [stage["factor"] for stage in solution.trace["stages"]]
    return Outcome(solution.assignment, solution.total, solution.trace["bound"], lp.objective,
                   factors, lp_certified=True)


def _run_mv_reduce(problem: Problem, settings: Settings) -> Outcome:
    solution = mv_reduce_k_alpha(problem.oracle, problem.family, settings=settings)
    return Outcome(solution.assignment, solution.total, solution.trace["factor"],
                   solution.trace["lp_objective"])


def _run_msca_greedy(problem: Problem, settings: Settings) -> Outcome:
    solution = msca_greedy(problem.agent_oracles, problem.regions, settings)
    return Outcome(solution.assignment, solution.total, solution.trace["factor"])


def _run_msca_bmatching(problem: Problem, settings: Settings) -> Outcome:
    solution = msca_bmatching(problem.agent_oracles, problem.regions, problem.caps, settings)
    return Outcome(solution.assignment, solution.total, Fraction(solution.trace["factor"]))


def _run_ring(problem: Problem, settings: Settings) -> Outcome:
    assignment, value = sfm_mv_ring(problem.oracle, problem.family, settings)
    return Outcome(assignment, value, Fraction(1))


def _run_lp(problem: Problem, settings: Settings) -> Outcome:
    lp = solve_ma_lp(problem.agent_oracles, problem.family, settings)
    return Outcome(None, lp.objective, None, lp.objective, point=lp.z)


ALGORITHMS: Dict[str, Algorithm] = {
    algorithm.id: algorithm for algorithm in (
        Algorithm("greedy", "max", _run_greedy,
                  _needs(("max",), single=True, decomposable=True, agent_families=False,
                         family=(PowerSetFamily, Matroid, MatroidIntersection))),
        Algorithm("double-greedy", "max", _run_double_greedy,
                  _needs(("max",), single=True, decomposable=True, agent_families=False,
                         family=(PowerSetFamily,))),
        Algorithm("double-greedy-rand", "max", _run_double_greedy_rand,
                  _needs(("max",), single=True, decomposable=True, agent_families=False,
                         family=(PowerSetFamily,))),
        Algorithm("ma-greedy", "max", _run_ma_greedy, _needs(("max",))),
        Algorithm("robust", "max", _run_robust, _needs(("robust",))),
        Algorithm("bb-round", "min", _run_bb_round,
                  _needs(("min",), single=True, decomposable=True, beta=True,
                         agent_families=False)),
        Algorithm("ma-bb-round", "min", _run_ma_bb_round,
                  _needs(("min",), decomposable=True, beta=True, agent_families=False)),
        Algorithm("fer", "min", _run_fer,
                  _needs(("min",), decomposable=True, beta=True, agent_families=False)),
        Algorithm("mv-reduce", "min", _run_mv_reduce,
                  _needs(("min",), blocking=True, agent_families=False)),
        Algorithm("msca-greedy", "min", _run_msca_greedy, _msca_requirement(caps=False)),
        Algorithm("msca-bmatching", "min", _run_msca_bmatching, _msca_requirement(caps=True)),
        Algorithm("ring", "min", _run_ring, _needs(("ring",), family=(RingFamily,))),
        Algorithm("lp", "min", _run_lp,
                  _needs(("lp", "min"), decomposable=True, blocking=True, agent_families=False)),
    )
}


def compatible_algorithms(problem: Problem) -> List[str]:
    return [name for name, algorithm in ALGORITHMS.items() if algorithm.accepts(problem)]


# ---------------------------------------------------------------------------
# Brute-force optima
# ---------------------------------------------------------------------------

def _placements(n: int, k: int, settings: Settings):
    """Every way to give each element to one agent or to nobody."""
    count = (k + 1) ** n
    if count > settings.robust_cap:
        raise CapExceededError("brute-force allocation", count, settings.robust_cap)
    for owners in product(range(k + 1), repeat=n):
        masks = [0] * k
        for v, owner in enumerate(owners):
            if owner < k:
                masks[owner] |= 1 << v
        yield tuple(masks)


def _fits(masks: Tuple[int, ...], agent_families: Optional[Sequence[Any]],
          regions: Optional[Sequence[int]]) -> bool:
    for i, mask in enumerate(masks):
        if agent_families is not None and not agent_families[i].is_member(mask):
            return False
        if regions is not None and mask & ~regions[i]:
            return False
    return True


def brute_min_allocation(g: MultivariateOracle, family: Any, regions: Optional[Sequence[int]] = None,
                         settings: Optional[Settings] = None) -> Tuple[SetTuple, Fraction]:
    """
    Cheapest disjoint tuple whose union is in the family.

    Raises:
        CapExceededError: If (k+1)^n exceeds ``robust_cap``
        InfeasibleError: If no tuple is feasible
    """
    settings = resolve(settings)
    best = None
    for masks in _placements(g.n, g.k, settings):
        union = 0
        for mask in masks:
            union |= mask
        if not family.is_member(union) or not _fits(masks, None, regions):
            continue
        value = g.value(masks)
        if best is None or value < best[1]:
            best = (masks, value)
    if best is None:
        raise InfeasibleError("no feasible allocation exists")
    return SetTuple(g.ground, best[0]), best[1]


def brute_max_allocation(g: MultivariateOracle, family: Any,
                         agent_families: Optional[Sequence[Any]] = None,
                         settings: Optional[Settings] = None) -> Tuple[SetTuple, Fraction]:
    """Best disjoint tuple with union in F and S_i in F_i."""
    settings = resolve(settings)
    best = None
    for masks in _placements(g.n, g.k, settings):
        union = 0
        for mask in masks:
            union |= mask
        if not family.is_member(union) or not _fits(masks, agent_families, None):
            continue
        value = g.value(masks)
        if best is None or value > best[1]:
            best = (masks, value)
    if best is None:
        raise InfeasibleError("no feasible allocation exists")
    return SetTuple(g.ground, best[0]), best[1]


def brute_robust_max(g: MultivariateOracle, family: Any, agent_families: Optional[Sequence[Any]],
                     tau: int, settings: Optional[Settings] = None) -> Tuple[SetTuple, Fraction]:
    """Feasible tuple with the largest worst-case value after tau removals."""
    settings = resolve(settings)
    best = None
    for masks in _placements(g.n, g.k, settings):
        union = 0
        for mask in masks:
            union |= mask
        if not family.is_member(union) or not _fits(masks, agent_families, None):
            continue
        value = robust_value(g, masks, tau, settings)
        if best is None or value > best[1]:
            best = (masks, value)
    if best is None:
        raise InfeasibleError("no feasible allocation exists")
    return SetTuple(g.ground, best[0]), best[1]


def brute_ring_min(g: MultivariateOracle, ring: RingFamily,
                   settings: Optional[Settings] = None) -> Tuple[SetTuple, Fraction]:
    """Scan every tuple (overlaps allowed) and keep the cheapest ring member."""
    settings = resolve(settings)
    lifted_ground = LiftedGroundSet(g.ground, g.k)
    count = 1 << lifted_ground.size
    if count > settings.robust_cap:
        raise CapExceededError("brute-force ring scan", count, settings.robust_cap)
    best = None
    for mask in range(count):
        if not ring.contains(mask):
            continue
        value = g.value(lifted_ground.split(mask))
        if best is None or value < best[1]:
            best = (mask, value)
    if best is None:
        raise InfeasibleError("ring family is empty")
    return lifted_ground.unlift(best[0]), best[1]


def brute_optimum(problem: Problem, settings: Optional[Settings] = None) -> Fraction:
    """Exhaustive optimum of the problem's task."""
    settings = resolve(settings)
    if problem.task == "ring":
        return brute_ring_min(problem.oracle, problem.family, settings)[1]
    if problem.task == "robust":
        return brute_robust_max(problem.oracle, problem.family, problem.agent_families,
                                problem.tau, settings)[1]
    if problem.task == "max":
        return brute_max_allocation(problem.oracle, problem.family, problem.agent_families,
                                    settings)[1]
    return brute_min_allocation(problem.oracle, problem.family, problem.regions, settings)[1]


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def _verify_feasible(problem: Problem, algorithm: Algorithm, outcome: Outcome) -> bool:
    assignment = outcome.assignment
    if assignment is None:
        if outcome.point is None:
            return False
        return separate(problem.family, outcome.point).feasible
    if problem.task == "ring":
        lifted_ground = LiftedGroundSet(problem.ground, problem.k)
        return problem.family.contains(lifted_ground.lift(assignment))
    if not assignment.is_disjoint or not problem.family.is_member(assignment.union):
        return False
    return _fits(assignment.masks, problem.agent_families,
                 problem.regions if algorithm.id.startswith("msca") else None)


def _verify_objective(problem: Problem, outcome: Outcome, settings: Settings) -> bool:
    if outcome.assignment is None:
        return True
    if problem.task == "robust":
        expected = robust_value(problem.oracle, outcome.assignment, problem.tau, settings)
    else:
        expected = problem.oracle.value(outcome.assignment.masks)
    return expected == outcome.objective


def _within(sense: str, value: Fraction, bound: Fraction, reference: Fraction) -> bool:
    if sense == "min":
        return value <= bound * reference
    return value >= bound * reference


def _ratio(value: Fraction, reference: Fraction) -> Optional[Fraction]:
    if reference == 0:
        return Fraction(1) if value == 0 else None
    return Fraction(value) / reference


def run(problem: Problem, algorithm_id: str, options: Optional[RunOptions] = None,
        settings: Optional[Settings] = None) -> ReportRecord:
    """
    Solve one instance with one algorithm and re-verify the answer.

    Args:
        problem: Parsed instance
        algorithm_id: Key of ``ALGORITHMS``
        options: Brute-force and timing switches
        settings: Caps and tolerances

    Returns:
        ReportRecord with independently recomputed verdicts

    Raises:
        PreconditionError: For an unknown or incompatible algorithm
    """
    options = options or RunOptions()
    settings = resolve(settings)
    if algorithm_id not in ALGORITHMS:
        raise PreconditionError(f"unknown algorithm '{algorithm_id}'; "
                                f"valid ids: {', '.join(ALGORITHMS)}")
    algorithm = ALGORITHMS[algorithm_id]
    reason = algorithm.requirement(problem)
    if reason is not None:
        valid = compatible_algorithms(problem)
        raise PreconditionError(f"algorithm '{algorithm_id}' does not fit this instance ({reason}); "
                                f"valid ids: {', '.join(valid) or 'none'}")

    if options.seed is not None:
        problem = replace(problem, seed=options.seed)
    started = time.perf_counter()
    outcome = algorithm.solve(problem, settings)
    elapsed = time.perf_counter() - started
    logger.debug("%s on %s: objective %s", algorithm_id, problem.name, outcome.objective)

    brute_opt = None
    if options.brute or options.force_brute:
        brute_settings = settings
        if options.force_brute:
            brute_settings = settings.with_overrides(robust_cap=10 ** 12, ring_cap=10 ** 12)
        try:
            brute_opt = brute_optimum(problem, brute_settings)
        except CapExceededError as e:
            logger.debug("skipping brute force for %s: %s", problem.name, e)

    verdicts = {
        "feasible": _verify_feasible(problem, algorithm, outcome),
        "objective": _verify_objective(problem, outcome, settings),
    }
    bound_ok = True
    if outcome.assignment is None:
        # The snapped point is feasible, so its value may sit just above the LP optimum.
        if brute_opt is not None:
            slack = Fraction(settings.lp_tolerance) * max(Fraction(1), abs(brute_opt))
            bound_ok = outcome.lp_value <= brute_opt + slack
    else:
        if outcome.bound is not None and brute_opt is not None:
            bound_ok = _within(algorithm.sense, outcome.objective, outcome.bound, brute_opt)
        if outcome.lp_certified and outcome.bound is not None and outcome.lp_value is not None:
            bound_ok = bound_ok and outcome.objective <= outcome.bound * outcome.lp_value
    verdicts["bound_ok"] = bound_ok

    return ReportRecord(
        digest=problem.digest,
        instance=problem.name,
        algorithm=algorithm_id,
        solution=None if outcome.assignment is None else outcome.assignment.to_dict()["agents"],
        objective=outcome.objective,
        lp_value=outcome.lp_value,
        stage_factors=outcome.stage_factors,
        bound=outcome.bound,
        brute_opt=brute_opt,
        ratio=None if brute_opt is None or outcome.objective is None
        else _ratio(outcome.objective, brute_opt),
        verdicts=verdicts,
        wall_time=elapsed if options.timings else None,
    )


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------

@dataclass
class SummaryRow:
    """Ratios of one algorithm across a corpus."""
    algorithm: str
    runs: int = 0
    ratios: List[Fraction] = field(default_factory=list)
    violations: int = 0

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        values = [float(r) for r in self.ratios]
        return {
            "algorithm": self.algorithm,
            "runs": self.runs,
            "mean_ratio": round(sum(values) / len(values), 6) if values else None,
            "max_ratio": round(max(values), 6) if values else None,
            "min_ratio": round(min(values), 6) if values else None,
            "violations": self.violations,
        }


@dataclass
class BenchResult:
    records: List[ReportRecord]
    summary: List[SummaryRow]

    @property
    def violations(self) -> List[ReportRecord]:
        return [record for record in self.records if not record.ok]


def _bench_one(problem: Problem, algorithm_id: str, options: RunOptions,
               settings: Settings) -> Optional[ReportRecord]:
    try:
        return run(problem, algorithm_id, options, settings)
    except (BoundViolationError, StageError) as e:
        logger.warning("%s on %s violated its bound: %s", algorithm_id, problem.name, e)
        return ReportRecord(problem.digest, problem.name, algorithm_id,
                            verdicts={"bound_ok": False})
    except (CapExceededError, InfeasibleError) as e:
        logger.warning("skipping %s on %s: %s", algorithm_id, problem.name, e)
        return None


def bench(problems: Sequence[Problem], algorithms: Optional[Sequence[str]] = None,
          options: Optional[RunOptions] = None, settings: Optional[Settings] = None,
          workers: int = 1) -> BenchResult:
    """
    Run every compatible algorithm on every problem.

    Records are ordered by (instance digest, algorithm id) whatever the
    number of workers.
    """
    options = options or RunOptions()
    settings = resolve(settings)
    names = list(algorithms) if algorithms else list(ALGORITHMS)
    for name in names:
        if name not in ALGORITHMS:
            raise PreconditionError(f"unknown algorithm '{name}'; valid ids: {', '.join(ALGORITHMS)}")
    jobs = [(problem, name) for problem in problems for name in names
            if ALGORITHMS[name].accepts(problem)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _bench_one(job[0], job[1], options, settings),
                                    jobs))
    else:
        results = [_bench_one(problem, name, options, settings) for problem, name in jobs]
    records = sorted((r for r in results if r is not None),
                     key=lambda r: (r.digest, r.algorithm))

    rows = {name: SummaryRow(name) for name in names}
    for record in records:
        row = rows[record.algorithm]
        row.runs += 1
        if record.ratio is not None:
            row.ratios.append(record.ratio)
        if not record.ok:
            row.violations += 1
    return BenchResult(records, [rows[name] for name in names])
