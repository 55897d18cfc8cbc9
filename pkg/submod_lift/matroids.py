"""
Matroid independence oracles and set-family wrappers.

Every family exposes ``is_member(mask)``; matroids additionally expose
``is_independent`` and ``rank``.
"""
import logging
import threading
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.utils import UnionFind

from .config import Settings, resolve
from .exceptions import (ArityMismatchError, CapExceededError, DomainMismatchError,
                         PreconditionError, UnsupportedOperationError)
from .models import GroundSet, SubsetLike, coerce_mask
from .oracles import ValidationResult
from .utils import bits, edge_label, graph_edges, popcount

logger = logging.getLogger(__name__)


class Matroid:
    """Matroid given by an independence predicate over bitmasks."""

    def __init__(self, ground: GroundSet, independence: Callable[[int], bool],
                 name: str = "matroid", descriptor: Optional[Dict[str, Any]] = None):
        self.ground = ground
        self.name = name
        self.descriptor = descriptor
        self._independence = independence
        self._memo: Dict[int, bool] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.ground.size

    def is_independent(self, mask: int) -> bool:
        with self._lock:
            cached = self._memo.get(mask)
        if cached is not None:
            return cached
        self.ground.check(mask)
        result = bool(self._independence(mask))
        with self._lock:
            self._memo[mask] = result
        return result

    is_member = is_independent

    def max_independent(self, mask: Optional[int] = None) -> int:
        """A maximal independent subset of ``mask`` built by augmentation."""
        mask = self.ground.full if mask is None else mask
        chosen = 0
        for v in bits(mask):
            if self.is_independent(chosen | 1 << v):
                chosen |= 1 << v
        return chosen

    def rank(self, mask: Optional[int] = None) -> int:
        return popcount(self.max_independent(mask))

    def __repr__(self) -> str:
        return f"Matroid({self.name}, n={self.n})"


class MatroidIntersection:
    """Sets independent in every one of p matroids on a common ground set."""

    def __init__(self, matroids: Sequence[Matroid], name: str = "intersection"):
        if not matroids:
            raise ArityMismatchError("a matroid intersection needs at least one matroid")
        ground = matroids[0].ground
        for matroid in matroids[1:]:
            if matroid.ground != ground:
                raise DomainMismatchError("matroids in an intersection use different ground sets")
        self.ground = ground
        self.matroids = tuple(matroids)
        self.name = name

    @property
    def p(self) -> int:
        return len(self.matroids)

    def is_independent(self, mask: int) -> bool:
        return all(matroid.is_independent(mask) for matroid in self.matroids)

    is_member = is_independent

    def rank(self, mask: Optional[int] = None) -> int:
        raise UnsupportedOperationError("rank of a matroid intersection is not provided")


class BasesFamily:
    """Bases of a matroid: independent sets of full rank."""

    def __init__(self, matroid: Matroid):
        self.matroid = matroid
        self.ground = matroid.ground
        self.full_rank = matroid.rank()

    def is_member(self, mask: int) -> bool:
        return popcount(mask) == self.full_rank and self.matroid.is_independent(mask)


class PowerSetFamily:
    """F = 2^V."""

    def __init__(self, ground: GroundSet):
        self.ground = ground

    def is_member(self, mask: int) -> bool:
        self.ground.check(mask)
        return True


class FullSetFamily:
    """F = {V}."""

    def __init__(self, ground: GroundSet):
        self.ground = ground

    def is_member(self, mask: int) -> bool:
        return self.ground.check(mask) == self.ground.full


class MembershipFamily:
    """Arbitrary family given only by a membership predicate."""

    def __init__(self, ground: GroundSet, predicate: Callable[[int], bool], name: str = "family"):
        self.ground = ground
        self.name = name
        self._predicate = predicate

    def is_member(self, mask: int) -> bool:
        return bool(self._predicate(self.ground.check(mask)))


def independent(matroid, subset: SubsetLike) -> bool:
    return matroid.is_independent(coerce_mask(subset, matroid.ground))


def rank(matroid, subset: SubsetLike) -> int:
    return matroid.rank(coerce_mask(subset, matroid.ground))


def is_base(family: BasesFamily, subset: SubsetLike) -> bool:
    return family.is_member(coerce_mask(subset, family.ground))


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def make_free(ground: GroundSet) -> Matroid:
    return Matroid(ground, lambda mask: True, name="free", descriptor={"kind": "free"})


def make_uniform(ground: GroundSet, b: int) -> Matroid:
    """Sets of size at most ``b``."""
    if b < 0:
        raise PreconditionError("uniform matroid capacity must be nonnegative")
    return Matroid(ground, lambda mask: popcount(mask) <= b, name=f"uniform({b})",
                   descriptor={"kind": "uniform", "b": b})


def make_partition(ground: GroundSet, parts: Sequence[int], caps: Sequence[int]) -> Matroid:
    """
    Partition matroid: at most caps[j] elements from parts[j].

    Raises:
        PreconditionError: If the parts overlap, miss elements or a cap
            is negative
    """
    if len(parts) != len(caps):
        raise ArityMismatchError("one cap per part is required")
    covered = 0
    for part in parts:
        ground.check(part)
        if part & covered:
            raise PreconditionError("partition parts overlap")
        covered |= part
    if covered != ground.full:
        raise PreconditionError(
            f"partition parts miss elements {ground.labels_of(ground.full & ~covered)}")
    if any(cap < 0 for cap in caps):
        raise PreconditionError("partition caps must be nonnegative")
    parts, caps = tuple(parts), tuple(caps)

    def independence(mask: int) -> bool:
        return all(popcount(mask & part) <= cap for part, cap in zip(parts, caps))

    return Matroid(ground, independence, name="partition",
                   descriptor={"kind": "partition", "parts": [ground.labels_of(p) for p in parts],
                               "caps": list(caps)})


def make_laminar(ground: GroundSet, family: Sequence[int], caps: Sequence[int]) -> Matroid:
    """
    Laminar matroid: at most caps[j] elements from each family[j].

    Raises:
        PreconditionError: If two sets cross
    """
    if len(family) != len(caps):
        raise ArityMismatchError("one cap per laminar set is required")
    for a in family:
        ground.check(a)
    for x in range(len(family)):
        for y in range(x + 1, len(family)):
            common = family[x] & family[y]
            if common and common != family[x] and common != family[y]:
                raise PreconditionError(
                    f"sets {ground.labels_of(family[x])} and {ground.labels_of(family[y])} cross")
    if any(cap < 0 for cap in caps):
        raise PreconditionError("laminar caps must be nonnegative")
    family, caps = tuple(family), tuple(caps)

    def independence(mask: int) -> bool:
        return all(popcount(mask & member) <= cap for member, cap in zip(family, caps))

    return Matroid(ground, independence, name="laminar",
                   descriptor={"kind": "laminar", "sets": [ground.labels_of(a) for a in family],
                               "caps": list(caps)})


def make_region(ground: GroundSet, region: int, b: Optional[int] = None) -> Matroid:
    """Subsets of ``region`` with at most ``b`` elements (no bound if omitted)."""
    ground.check(region)
    limit = popcount(region) if b is None else b

    def independence(mask: int) -> bool:
        return not mask & ~region and popcount(mask) <= limit

    return Matroid(ground, independence, name="region",
                   descriptor={"kind": "region", "region": ground.labels_of(region), "b": b})


def graphic_ground(graph: nx.Graph) -> Tuple[GroundSet, List[Tuple[Any, Any]]]:
    """Edge ground set of a graph and the edge list it indexes."""
    edges = graph_edges(graph)
    if not edges:
        raise PreconditionError("graph has no edges")
    seen: set = set()
    labels = tuple(edge_label(u, v, position, seen) for position, (u, v) in enumerate(edges))
    return GroundSet(labels), edges


def make_graphic(graph: nx.Graph, ground: Optional[GroundSet] = None) -> Matroid:
    """
    Graphic matroid over the edges of a (multi)graph: forests are independent.

    Self-loops are dependent; parallel edges form a circuit.
    """
    default_ground, edges = graphic_ground(graph)
    if ground is None:
        ground = default_ground
    elif ground.size != len(edges):
        raise ArityMismatchError(f"ground set has {ground.size} elements for {len(edges)} edges")

    def independence(mask: int) -> bool:
        forest = UnionFind()
        for e in bits(mask):
            u, v = edges[e]
            if forest[u] == forest[v]:
                return False
            forest.union(u, v)
        return True

    matroid = Matroid(ground, independence, name="graphic", descriptor={"kind": "graphic"})
    matroid.edges = edges
    return matroid


def make_union(ground: GroundSet, pieces: Sequence[Tuple[Matroid, Sequence[int]]]) -> Matroid:
    """
    Direct sum of matroids placed on disjoint pieces of ``ground``.

    Args:
        ground: Combined ground set
        pieces: (matroid, positions) pairs; positions[j] is where element j
            of the matroid sits in ``ground``

    Raises:
        PreconditionError: If pieces overlap or do not cover ``ground``
    """
    layout = []
    covered = 0
    for matroid, positions in pieces:
        if len(positions) != matroid.n:
            raise ArityMismatchError(
                f"piece lists {len(positions)} positions for a matroid on {matroid.n} elements")
        piece_mask = 0
        for position in positions:
            piece_mask |= 1 << position
        ground.check(piece_mask)
        if piece_mask & covered:
            raise PreconditionError("union pieces overlap")
        covered |= piece_mask
        layout.append((matroid, tuple(positions)))
    if covered != ground.full:
        raise PreconditionError("union pieces do not cover the combined ground set")

    def independence(mask: int) -> bool:
        for matroid, positions in layout:
            local = 0
            for j, position in enumerate(positions):
                if mask >> position & 1:
                    local |= 1 << j
            if not matroid.is_independent(local):
                return False
        return True

    return Matroid(ground, independence, name="union", descriptor={"kind": "union"})


# ---------------------------------------------------------------------------
# Axiom checks
# ---------------------------------------------------------------------------

def verify_matroid_axioms(matroid: Matroid, settings: Optional[Settings] = None) -> ValidationResult:
    """
    Exhaustively verify the matroid axioms.

    Checks run in order: the empty set is independent, the exchange
    property, then heredity. The first failing axiom is reported with a
    witness of independent sets.
    """
    settings = resolve(settings)
    n = matroid.n
    if n > settings.brute_cap:
        raise CapExceededError("verify_matroid_axioms", n, settings.brute_cap)
    size = 1 << n
    indep = [matroid.is_independent(mask) for mask in range(size)]
    labels = matroid.ground.labels_of
    if not indep[0]:
        return ValidationResult(False, "matroid", ("empty", 0), {"axiom": "empty"})

    # best[X]: size of a largest independent subset of X, found at arg[X].
    best = [0] * size
    arg = [0] * size
    for mask in range(size):
        if indep[mask]:
            best[mask], arg[mask] = popcount(mask), mask
            continue
        for v in bits(mask):
            sub = mask & ~(1 << v)
            if best[sub] > best[mask]:
                best[mask], arg[mask] = best[sub], arg[sub]

    full = size - 1
    for I in range(size):
        if not indep[I]:
            continue
        extendable = 0
        for v in range(n):
            if not I >> v & 1 and indep[I | 1 << v]:
                extendable |= 1 << v
        blocked = full & ~extendable
        if best[blocked] > popcount(I):
            J = arg[blocked]
            logger.debug("exchange fails for I=%s, J=%s", labels(I), labels(J))
            return ValidationResult(False, "matroid", ("exchange", I, J), {
                "axiom": "exchange", "witness": {"I": labels(I), "J": labels(J)}})

    for I in range(size):
        if not indep[I]:
            continue
        for v in bits(I):
            if not indep[I & ~(1 << v)]:
                return ValidationResult(False, "matroid", ("hereditary", I, I & ~(1 << v)), {
                    "axiom": "hereditary",
                    "witness": {"I": labels(I), "subset": labels(I & ~(1 << v))}})
    return ValidationResult(True, "matroid")
