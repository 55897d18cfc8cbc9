"""
Set-function and tuple-function oracles.

A SubmodularOracle wraps an evaluator over bitmask subsets of a GroundSet;
a MultivariateOracle wraps an evaluator over k-tuples of bitmasks. Both
return exact Fractions and memoize behind a lock so one oracle can be
shared by worker threads.
"""
import logging
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import (Any, Callable, Dict, Hashable, Iterable, List, Mapping,
                    Optional, Sequence, Tuple)

import networkx as nx

from .config import Settings, resolve
from .exceptions import (ArityMismatchError, CapExceededError, DomainMismatchError,
                         PreconditionError)
from .models import GroundSet, SubsetLike, coerce_mask, coerce_tuple
from .utils import bits, full_mask, popcount, submasks, to_fraction

logger = logging.getLogger(__name__)


class SubmodularOracle:
    """
    Oracle for a set function f: 2^V -> Q.

    The flags are claims made by the constructor; ``validate_submodular``
    and ``validate_monotone`` check them.
    """

    def __init__(self, ground: GroundSet, evaluator: Callable[[int], Any], name: str = "oracle",
                 normalized: bool = False, nonnegative: bool = False, monotone: bool = False,
                 descriptor: Optional[Dict[str, Any]] = None):
        self.ground = ground
        self.name = name
        self.normalized = normalized
        self.nonnegative = nonnegative
        self.monotone = monotone
        self.descriptor = descriptor
        self._evaluator = evaluator
        self._memo: Dict[int, Fraction] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.ground.size

    def value(self, mask: int) -> Fraction:
        """f(S) for a bitmask S (memoized)."""
        with self._lock:
            cached = self._memo.get(mask)
        if cached is not None:
            return cached
        if mask < 0 or mask >> self.ground.size:
            raise DomainMismatchError(f"subset {mask:#x} is outside the oracle's ground set")
        result = to_fraction(self._evaluator(mask))
        with self._lock:
            return self._memo.setdefault(mask, result)

    def evaluate(self, subset: SubsetLike) -> Fraction:
        return self.value(coerce_mask(subset, self.ground))

    __call__ = evaluate

    def marginal(self, subset: SubsetLike, v: int) -> Fraction:
        """f(S+v) - f(S); ``v`` must not be in S."""
        mask = coerce_mask(subset, self.ground)
        if not 0 <= v < self.ground.size:
            raise DomainMismatchError(f"element {v} is outside the ground set")
        if mask >> v & 1:
            raise PreconditionError(f"element {self.ground.labels[v]} is already in the set")
        return self.value(mask | 1 << v) - self.value(mask)

    def flags(self) -> Dict[str, bool]:
        return {"normalized": self.normalized, "nonnegative": self.nonnegative,
                "monotone": self.monotone}

    def __repr__(self) -> str:
        return f"SubmodularOracle({self.name}, n={self.n})"


class MultivariateOracle:
    """Oracle for a tuple function g: (2^V)^k -> Q, defined on every tuple."""

    def __init__(self, ground: GroundSet, k: int, evaluator: Callable[[Tuple[int, ...]], Any],
                 name: str = "multivariate", normalized: bool = False, nonnegative: bool = False,
                 monotone: bool = False, descriptor: Optional[Dict[str, Any]] = None,
                 parts: Optional[Sequence[SubmodularOracle]] = None):
        if k < 1:
            raise ArityMismatchError("a multivariate oracle needs k >= 1")
        self.ground = ground
        self.k = k
        self.name = name
        self.normalized = normalized
        self.nonnegative = nonnegative
        self.monotone = monotone
        self.descriptor = descriptor
        # Per-agent oracles when g is a decomposable sum.
        self.parts = tuple(parts) if parts is not None else None
        self._evaluator = evaluator
        self._memo: Dict[Tuple[int, ...], Fraction] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.ground.size

    def value(self, masks: Sequence[int]) -> Fraction:
        key = tuple(masks)
        with self._lock:
            cached = self._memo.get(key)
        if cached is not None:
            return cached
        if len(key) != self.k:
            raise ArityMismatchError(f"expected a {self.k}-tuple, got {len(key)} components")
        for mask in key:
            if mask < 0 or mask >> self.ground.size:
                raise DomainMismatchError(f"subset {mask:#x} is outside the oracle's ground set")
        result = to_fraction(self._evaluator(key))
        with self._lock:
            return self._memo.setdefault(key, result)

    def evaluate(self, tuple_: Any) -> Fraction:
        return self.value(coerce_tuple(tuple_, self.ground, self.k).masks)

    __call__ = evaluate

    def flags(self) -> Dict[str, bool]:
        return {"normalized": self.normalized, "nonnegative": self.nonnegative,
                "monotone": self.monotone}

    def __repr__(self) -> str:
        return f"MultivariateOracle({self.name}, n={self.n}, k={self.k})"


def evaluate(oracle: SubmodularOracle, subset: SubsetLike) -> Fraction:
    return oracle.evaluate(subset)


def marginal(oracle: SubmodularOracle, subset: SubsetLike, v: int) -> Fraction:
    return oracle.marginal(subset, v)


def evaluate_tuple(oracle: MultivariateOracle, tuple_: Any) -> Fraction:
    return oracle.evaluate(tuple_)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def make_modular(ground: GroundSet, weights: Sequence[Any]) -> SubmodularOracle:
    """f(S) = sum of w(v) over v in S."""
    w = [to_fraction(x) for x in weights]
    if len(w) != ground.size:
        raise ArityMismatchError(f"expected {ground.size} weights, got {len(w)}")
    nonneg = all(x >= 0 for x in w)

    def evaluator(mask: int) -> Fraction:
        return sum((w[v] for v in bits(mask)), Fraction(0))

    return SubmodularOracle(ground, evaluator, name="modular", normalized=True,
                            nonnegative=nonneg, monotone=nonneg,
                            descriptor={"kind": "modular", "weights": w})


def make_coverage(ground: GroundSet, sets: Sequence[Iterable[Hashable]],
                  weights: Optional[Mapping[Hashable, Any]] = None) -> SubmodularOracle:
    """
    Weighted coverage: f(S) = weight of the union of the sets chosen by S.

    Args:
        ground: Ground set; element v picks ``sets[v]``
        sets: One collection of universe items per element
        weights: Optional item weights (default 1 each)
    """
    if len(sets) != ground.size:
        raise ArityMismatchError(f"expected {ground.size} sets, got {len(sets)}")
    covers = [frozenset(items) for items in sets]
    item_weights = {item: to_fraction(w) for item, w in (weights or {}).items()}
    if any(w < 0 for w in item_weights.values()):
        raise PreconditionError("coverage weights must be nonnegative")

    def evaluator(mask: int) -> Fraction:
        covered = set()
        for v in bits(mask):
            covered |= covers[v]
        return sum((item_weights.get(item, Fraction(1)) for item in covered), Fraction(0))

    return SubmodularOracle(ground, evaluator, name="coverage", normalized=True,
                            nonnegative=True, monotone=True,
                            descriptor={"kind": "coverage",
                                        "sets": [sorted(map(str, c)) for c in covers]})


def make_concave_of_cardinality(ground: GroundSet, table: Sequence[Any]) -> SubmodularOracle:
    """f(S) = table[|S|] for a concave table of n+1 values."""
    values = [to_fraction(x) for x in table]
    if len(values) != ground.size + 1:
        raise ArityMismatchError(f"expected {ground.size + 1} table values, got {len(values)}")
    steps = [values[i + 1] - values[i] for i in range(ground.size)]
    if any(steps[i + 1] > steps[i] for i in range(len(steps) - 1)):
        raise PreconditionError("cardinality table is not concave")

    def evaluator(mask: int) -> Fraction:
        return values[popcount(mask)]

    return SubmodularOracle(ground, evaluator, name="concave-cardinality",
                            normalized=values[0] == 0,
                            nonnegative=min(values) >= 0,
                            monotone=all(step >= 0 for step in steps),
                            descriptor={"kind": "concave-cardinality", "table": values})


def make_weighted_matroid_rank(matroid, weights: Sequence[Any]) -> SubmodularOracle:
    """f(S) = max weight of an independent subset of S (greedy by weight)."""
    ground = matroid.ground
    w = [to_fraction(x) for x in weights]
    if len(w) != ground.size:
        raise ArityMismatchError(f"expected {ground.size} weights, got {len(w)}")
    if any(x < 0 for x in w):
        raise PreconditionError("matroid rank weights must be nonnegative")
    order = sorted(range(ground.size), key=lambda v: (-w[v], v))

    def evaluator(mask: int) -> Fraction:
        chosen = 0
        total = Fraction(0)
        for v in order:
            if mask >> v & 1 and matroid.is_independent(chosen | 1 << v):
                chosen |= 1 << v
                total += w[v]
        return total

    return SubmodularOracle(ground, evaluator, name="matroid-rank", normalized=True,
                            nonnegative=True, monotone=True,
                            descriptor={"kind": "matroid-rank", "weights": w})


def make_cut_function(graph: nx.Graph, weight: str = "weight") -> SubmodularOracle:
    """
    Cut function of an undirected graph over its nodes.

    Edge weights default to 1; self-loops never cross a cut.
    """
    nodes = list(graph.nodes())
    ground = GroundSet.from_labels(nodes)
    weighted = nx.Graph() if not graph.is_multigraph() else nx.MultiGraph()
    weighted.add_nodes_from(nodes)
    for u, v, data in graph.edges(data=True):
        weighted.add_edge(u, v, weight=to_fraction(data.get(weight, 1)))
    if any(data["weight"] < 0 for _, _, data in weighted.edges(data=True)):
        raise PreconditionError("cut weights must be nonnegative")

    def evaluator(mask: int) -> Fraction:
        inside = [nodes[v] for v in bits(mask)]
        if not inside or len(inside) == len(nodes):
            return Fraction(0)
        return to_fraction(nx.cut_size(weighted, inside, weight="weight"))

    return SubmodularOracle(ground, evaluator, name="cut", normalized=True,
                            nonnegative=True, monotone=False,
                            descriptor={"kind": "cut"})


def make_table(ground: GroundSet, values: Sequence[Any], name: str = "table") -> SubmodularOracle:
    """Explicit value table indexed by bitmask; flags are read off the table."""
    table = [to_fraction(x) for x in values]
    if len(table) != 1 << ground.size:
        raise ArityMismatchError(f"expected {1 << ground.size} table values, got {len(table)}")
    monotone = all(table[mask | 1 << v] >= table[mask]
                   for mask in range(len(table)) for v in range(ground.size))
    return SubmodularOracle(ground, table.__getitem__, name=name,
                            normalized=table[0] == 0, nonnegative=min(table) >= 0,
                            monotone=monotone, descriptor={"kind": "table", "values": table})


def make_goel_allocation() -> SubmodularOracle:
    """
    Cheapest way to get tasks A, B, C done by two contractors.

    Each contractor charges 1 per single task. Contractor one also offers
    {A,B} for 1 and {A,B,C} for 2; contractor two offers {A,C} for 1 and
    {A,B,C} for 2. The resulting cost is monotone but not submodular.
    """
    ground = GroundSet(("A", "B", "C"))
    offers = [
        [({"A"}, 1), ({"B"}, 1), ({"C"}, 1), ({"A", "B"}, 1), ({"A", "B", "C"}, 2)],
        [({"A"}, 1), ({"B"}, 1), ({"C"}, 1), ({"A", "C"}, 1), ({"A", "B", "C"}, 2)],
    ]
    oracle = make_allocation_cost(ground, offers)
    oracle.name = "goel"
    oracle.descriptor = {"kind": "goel"}
    return oracle


def make_allocation_cost(ground: GroundSet,
                         offers: Sequence[Sequence[Tuple[Iterable[Any], Any]]]) -> SubmodularOracle:
    """
    c(S) = min over assignments of S to agents of the agents' prices.

    An agent's price for a bundle is the cheapest collection of its offers
    covering the bundle. Assignments are enumerated exhaustively.
    """
    n = ground.size
    prices = []
    for agent_offers in offers:
        packs = [(ground.mask(labels), to_fraction(price)) for labels, price in agent_offers]
        cover: List[Optional[Fraction]] = [None] * (1 << n)
        cover[0] = Fraction(0)
        for mask in range(1, 1 << n):
            best = None
            for pack, price in packs:
                if pack & mask and cover[mask & ~pack] is not None:
                    candidate = price + cover[mask & ~pack]
                    if best is None or candidate < best:
                        best = candidate
            cover[mask] = best
        prices.append(cover)

    coverable = 0
    for cover in prices:
        for v in range(n):
            if cover[1 << v] is not None:
                coverable |= 1 << v
    if coverable != ground.full:
        missing = ground.labels_of(ground.full & ~coverable)
        raise PreconditionError(f"no agent offers tasks {missing}")

    def evaluator(mask: int) -> Fraction:
        # acc[S'] = cheapest split of S' among the agents seen so far.
        acc = {sub: prices[0][sub] for sub in submasks(mask)}
        for cover in prices[1:]:
            merged = {}
            for sub in submasks(mask):
                options = [acc[part] + cover[sub & ~part] for part in submasks(sub)
                           if acc[part] is not None and cover[sub & ~part] is not None]
                merged[sub] = min(options) if options else None
            acc = merged
        return acc[mask]

    return SubmodularOracle(ground, evaluator, name="allocation", normalized=True,
                            nonnegative=True, monotone=True,
                            descriptor={"kind": "allocation"})


def make_partition_cost(ground: GroundSet, parts: Sequence[int],
                        costs: Sequence[Any]) -> SubmodularOracle:
    """
    g(S) = sum of c(U) over the disjoint parts U that meet S.

    Parts must be pairwise disjoint; elements outside every part are free.
    """
    if len(parts) != len(costs):
        raise ArityMismatchError("one cost per part is required")
    seen = 0
    for part in parts:
        ground.check(part)
        if part & seen:
            raise PreconditionError("parts of a partition cost must be disjoint")
        seen |= part
    c = [to_fraction(x) for x in costs]
    nonneg = all(x >= 0 for x in c)

    def evaluator(mask: int) -> Fraction:
        return sum((cost for part, cost in zip(parts, c) if part & mask), Fraction(0))

    return SubmodularOracle(ground, evaluator, name="partition-cost", normalized=True,
                            nonnegative=nonneg, monotone=nonneg,
                            descriptor={"kind": "partition-cost"})


def subtract_modular(oracle: SubmodularOracle, weights: Sequence[Any]) -> SubmodularOracle:
    """h(S) = f(S) - w(S); submodularity is preserved."""
    w = [to_fraction(x) for x in weights]
    if len(w) != oracle.n:
        raise ArityMismatchError(f"expected {oracle.n} weights, got {len(w)}")

    def evaluator(mask: int) -> Fraction:
        return oracle.value(mask) - sum((w[v] for v in bits(mask)), Fraction(0))

    return SubmodularOracle(oracle.ground, evaluator, name=f"{oracle.name}-shifted",
                            normalized=oracle.normalized)


def restrict(oracle: SubmodularOracle, region: int) -> Tuple[SubmodularOracle, List[int]]:
    """
    Restriction of f to the subsets of ``region``.

    Returns:
        The restricted oracle on a relabelled ground set and the list
        mapping its element positions back to the original indices.
    """
    oracle.ground.check(region)
    index = list(bits(region))
    if not index:
        raise PreconditionError("cannot restrict to an empty region")
    ground = GroundSet(tuple(oracle.ground.labels[v] for v in index))

    def evaluator(mask: int) -> Fraction:
        original = 0
        for position in bits(mask):
            original |= 1 << index[position]
        return oracle.value(original)

    restricted = SubmodularOracle(ground, evaluator, name=f"{oracle.name}-restricted",
                                  normalized=oracle.normalized,
                                  nonnegative=oracle.nonnegative, monotone=oracle.monotone)
    return restricted, index


def make_decomposable(fs: Sequence[SubmodularOracle]) -> MultivariateOracle:
    """g(S_1..S_k) = sum of f_i(S_i); flags are ANDed."""
    if not fs:
        raise ArityMismatchError("need at least one component oracle")
    ground = fs[0].ground
    for f in fs[1:]:
        if f.ground != ground:
            raise DomainMismatchError("component oracles use different ground sets")

    def evaluator(masks: Tuple[int, ...]) -> Fraction:
        return sum((f.value(mask) for f, mask in zip(fs, masks)), Fraction(0))

    return MultivariateOracle(ground, len(fs), evaluator, name="decomposable",
                              normalized=all(f.normalized for f in fs),
                              nonnegative=all(f.nonnegative for f in fs),
                              monotone=all(f.monotone for f in fs),
                              descriptor={"kind": "decomposable",
                                          "parts": [f.descriptor for f in fs]},
                              parts=fs)


@dataclass(frozen=True)
class QuadraticMatrix:
    """k x k rational matrix for z^T A z penalties."""
    rows: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(x) for x in row) for row in self.rows)
        if not rows or any(len(row) != len(rows) for row in rows):
            raise ArityMismatchError("quadratic matrix must be square and non-empty")
        object.__setattr__(self, "rows", rows)

    @property
    def k(self) -> int:
        return len(self.rows)

    def is_multisubmodular(self) -> bool:
        """a_ij + a_ji <= 0 for every i, j (diagonal included)."""
        return all(self.rows[i][j] + self.rows[j][i] <= 0
                   for i in range(self.k) for j in range(self.k))

    def negated(self) -> "QuadraticMatrix":
        return QuadraticMatrix(tuple(tuple(-x for x in row) for row in self.rows))


def make_quadratic(ground: GroundSet, matrix: Any,
                   weights: Optional[Sequence[Any]] = None) -> MultivariateOracle:
    """
    g(S_1..S_k) = z^T A z with z_i the weight of S_i.

    Multi-submodular exactly when a_ij + a_ji <= 0 for all i, j.
    """
    A = matrix if isinstance(matrix, QuadraticMatrix) else QuadraticMatrix(matrix)
    w = [Fraction(1)] * ground.size if weights is None else [to_fraction(x) for x in weights]
    if len(w) != ground.size:
        raise ArityMismatchError(f"expected {ground.size} weights, got {len(w)}")
    k = A.k

    def evaluator(masks: Tuple[int, ...]) -> Fraction:
        z = [sum((w[v] for v in bits(mask)), Fraction(0)) for mask in masks]
        return sum((A.rows[i][j] * z[i] * z[j] for i in range(k) for j in range(k)
                    if z[i] and z[j]), Fraction(0))

    return MultivariateOracle(ground, k, evaluator, name="quadratic", normalized=True,
                              descriptor={"kind": "quadratic",
                                          "matrix": [list(row) for row in A.rows]})


def make_mv_sum(*oracles: MultivariateOracle) -> MultivariateOracle:
    """Pointwise sum of multivariate oracles on one ground set and arity."""
    if not oracles:
        raise ArityMismatchError("need at least one oracle to sum")
    ground, k = oracles[0].ground, oracles[0].k
    for g in oracles[1:]:
        if g.ground != ground:
            raise DomainMismatchError("summands use different ground sets")
        if g.k != k:
            raise ArityMismatchError("summands have different arities")

    def evaluator(masks: Tuple[int, ...]) -> Fraction:
        return sum((g.value(masks) for g in oracles), Fraction(0))

    return MultivariateOracle(ground, k, evaluator, name="+".join(g.name for g in oracles),
                              normalized=all(g.normalized for g in oracles),
                              nonnegative=all(g.nonnegative for g in oracles),
                              monotone=all(g.monotone for g in oracles))


def negate(oracle: MultivariateOracle) -> MultivariateOracle:
    """-g; only the normalized flag survives."""
    def evaluator(masks: Tuple[int, ...]) -> Fraction:
        return -oracle.value(masks)

    return MultivariateOracle(oracle.ground, oracle.k, evaluator, name=f"-{oracle.name}",
                              normalized=oracle.normalized)


def make_sensor_objective(coverages: Sequence[SubmodularOracle], redundancy: Any,
                          weights: Optional[Sequence[Any]] = None) -> MultivariateOracle:
    """
    Sensor placement benefit: sum of f_i(S_i) minus z^T M z.

    ``redundancy`` must satisfy m_ij + m_ji >= 0 so that the penalty
    keeps the objective multi-submodular.
    """
    benefit = make_decomposable(coverages)
    M = redundancy if isinstance(redundancy, QuadraticMatrix) else QuadraticMatrix(redundancy)
    if M.k != benefit.k:
        raise ArityMismatchError(f"redundancy matrix is {M.k}x{M.k} for {benefit.k} agents")
    if not M.negated().is_multisubmodular():
        raise PreconditionError("redundancy matrix needs m_ij + m_ji >= 0")
    penalty = make_quadratic(benefit.ground, M, weights)
    objective = make_mv_sum(benefit, negate(penalty))
    objective.name = "sensor"
    objective.descriptor = {"kind": "sensor", "parts": benefit.descriptor["parts"],
                            "matrix": [list(row) for row in M.rows]}
    return objective


# ---------------------------------------------------------------------------
# Validators
# ---------------------------------------------------------------------------

@dataclass
class ValidationResult:
    """Outcome of a brute-force property check."""
    holds: bool
    property: str
    witness: Optional[Tuple] = None
    detail: Dict[str, Any] = field(default_factory=dict)
    witnesses: List[Tuple] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {"property": self.property, "holds": self.holds, **self.detail}


def _check_cap(what: str, requested: int, cap: int) -> None:
    if requested > cap:
        raise CapExceededError(what, requested, cap)


def _diminishing_returns(n: int, value: Callable[[int], Fraction], collect: bool):
    """Yield (S, T, v, gain_S, gain_T) for each local violation S, T = S+u."""
    for S in range(1 << n):
        f_S = value(S)
        for v in range(n):
            if S >> v & 1:
                continue
            gain_S = value(S | 1 << v) - f_S
            for u in range(n):
                if u == v or S >> u & 1:
                    continue
                T = S | 1 << u
                gain_T = value(T | 1 << v) - value(T)
                if gain_S < gain_T:
                    yield S, T, v, gain_S, gain_T
                    if not collect:
                        return


def validate_submodular(oracle: SubmodularOracle, settings: Optional[Settings] = None,
                        collect: bool = False) -> ValidationResult:
    """
    Exhaustive diminishing-returns check.

    It is enough to compare S with T = S+u for single elements u; any
    violation for S ⊆ T implies one of that local form. The first witness
    in (S, v, u) order is reported as (S, T, v).
    """
    settings = resolve(settings)
    _check_cap("validate_submodular", oracle.n, settings.brute_cap)
    result = ValidationResult(True, "submodular")
    for S, T, v, gain_S, gain_T in _diminishing_returns(oracle.n, oracle.value, collect):
        if result.holds:
            result.holds = False
            result.witness = (S, T, v)
            result.detail = {
                "witness": {"S": oracle.ground.labels_of(S), "T": oracle.ground.labels_of(T),
                            "v": oracle.ground.labels[v]},
                "marginals": [gain_S, gain_T],
            }
        result.witnesses.append((S, T, v))
    logger.debug("validate_submodular(%s): holds=%s", oracle.name, result.holds)
    return result


def validate_monotone(oracle: SubmodularOracle,
                      settings: Optional[Settings] = None) -> ValidationResult:
    """Check f(S+v) >= f(S) for every S and v outside S."""
    settings = resolve(settings)
    _check_cap("validate_monotone", oracle.n, settings.brute_cap)
    for S in range(1 << oracle.n):
        for v in range(oracle.n):
            if not S >> v & 1 and oracle.value(S | 1 << v) < oracle.value(S):
                return ValidationResult(False, "monotone", (S, v), {
                    "witness": {"S": oracle.ground.labels_of(S), "v": oracle.ground.labels[v]}})
    return ValidationResult(True, "monotone")


def split_lifted(mask: int, n: int, k: int) -> Tuple[int, ...]:
    """Agent-major split of a mask over k*n positions into k masks."""
    block = full_mask(n)
    return tuple((mask >> (i * n)) & block for i in range(k))


def unlift_element(e: int, n: int) -> Tuple[int, int]:
    """Lifted position e = i*n + v as the agent-element pair (i, v)."""
    return divmod(e, n)


def _labelled_pair(pair: Tuple[int, int], ground: GroundSet) -> Tuple[int, str]:
    return pair[0], ground.labels[pair[1]]


def validate_multisubmodular(oracle: MultivariateOracle, settings: Optional[Settings] = None,
                             method: str = "marginal") -> ValidationResult:
    """
    Check multi-submodularity of a tuple function.

    ``method="marginal"`` compares the gain of adding (i,v) before and after
    adding (j,u) over all tuples; ``method="lattice"`` checks
    g(T) + g(T') >= g(T ∪ T') + g(T ∩ T') componentwise over all pairs.
    The two are equivalent.
    """
    settings = resolve(settings)
    n, k = oracle.n, oracle.k
    size = n * k

    def lifted_value(mask: int) -> Fraction:
        return oracle.value(split_lifted(mask, n, k))

    if method == "marginal":
        _check_cap("validate_multisubmodular", size, settings.multi_cap)
        for S, T, e, gain_S, gain_T in _diminishing_returns(size, lifted_value, False):
            first = unlift_element(e, n)
            second = unlift_element((T & ~S).bit_length() - 1, n)
            base = split_lifted(S, n, k)
            return ValidationResult(False, "multisubmodular", (base, first, second), {
                "witness": {"tuple": [oracle.ground.labels_of(m) for m in base],
                            "first": _labelled_pair(first, oracle.ground),
                            "second": _labelled_pair(second, oracle.ground)},
                "marginals": [gain_S, gain_T],
            })
        return ValidationResult(True, "multisubmodular")
    if method == "lattice":
        _check_cap("validate_multisubmodular(lattice)", size, settings.lattice_cap)
        for a in range(1 << size):
            g_a = lifted_value(a)
            for b in range(a + 1, 1 << size):
                if g_a + lifted_value(b) < lifted_value(a | b) + lifted_value(a & b):
                    pair = (split_lifted(a, n, k), split_lifted(b, n, k))
                    return ValidationResult(False, "multisubmodular", pair, {
                        "witness": {"first": [oracle.ground.labels_of(m) for m in pair[0]],
                                    "second": [oracle.ground.labels_of(m) for m in pair[1]]}})
        return ValidationResult(True, "multisubmodular")
    raise PreconditionError(f"unknown validation method: {method}")


def validate_multimonotone(oracle: MultivariateOracle,
                           settings: Optional[Settings] = None) -> ValidationResult:
    """Check that adding any (i,v) to any tuple never decreases g."""
    settings = resolve(settings)
    n, k = oracle.n, oracle.k
    _check_cap("validate_multimonotone", n * k, settings.multi_cap)
    for S in range(1 << (n * k)):
        base = oracle.value(split_lifted(S, n, k))
        for e in range(n * k):
            if not S >> e & 1 and oracle.value(split_lifted(S | 1 << e, n, k)) < base:
                added = unlift_element(e, n)
                return ValidationResult(False, "monotone", (split_lifted(S, n, k), added), {
                    "witness": {"tuple": [oracle.ground.labels_of(m)
                                          for m in split_lifted(S, n, k)],
                                "added": _labelled_pair(added, oracle.ground)}})
    return ValidationResult(True, "monotone")
