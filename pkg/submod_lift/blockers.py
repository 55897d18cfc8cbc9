"""
Clutters, blockers and separation over the covering polyhedron.

An upward-closed family F is described by its blocker B(F): S is in F
exactly when S meets every member of B(F). The covering polyhedron
P*(F) = {z >= 0 : z(B) >= 1 for all B in B(F)} is accessed through
``min_load``, which returns the smallest blocker load and a blocker
attaining it.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Any, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from .config import Settings, resolve
from .exceptions import ArityMismatchError, CapExceededError, PreconditionError
from .lifting import LiftedGroundSet
from .matroids import graphic_ground
from .models import GroundSet, SubsetLike, coerce_mask
from .oracles import ValidationResult
from .utils import bits, mask_of, popcount

logger = logging.getLogger(__name__)


class Clutter:
    """Antichain of subsets, kept in first-seen order."""

    def __init__(self, ground: GroundSet, members: Iterable[int]):
        self.ground = ground
        unique: List[int] = []
        seen = set()
        for mask in members:
            ground.check(mask)
            if mask not in seen:
                seen.add(mask)
                unique.append(mask)
        for a, b in combinations(unique, 2):
            if a & b == a or a & b == b:
                raise PreconditionError(
                    f"clutter members {ground.labels_of(a)} and {ground.labels_of(b)} are nested")
        self.members = tuple(unique)

    @classmethod
    def from_sets(cls, ground: GroundSet, sets: Iterable[int]) -> "Clutter":
        """Keep the inclusion-minimal sets, dropping duplicates."""
        candidates = list(dict.fromkeys(ground.check(mask) for mask in sets))
        minimal = [a for a in candidates
                   if not any(b != a and b & a == b for b in candidates)]
        return cls(ground, minimal)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, mask: int) -> bool:
        return mask in set(self.members)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Clutter):
            return NotImplemented
        return self.ground == other.ground and set(self.members) == set(other.members)

    def __hash__(self) -> int:
        return hash((self.ground, frozenset(self.members)))

    @property
    def max_size(self) -> int:
        return max((popcount(mask) for mask in self.members), default=0)

    def is_transversal(self, mask: int) -> bool:
        return all(mask & member for member in self.members)

    def contains_member(self, mask: int) -> bool:
        return any(not member & ~mask for member in self.members)

    def to_labels(self) -> List[List[str]]:
        return [self.ground.labels_of(mask) for mask in self.members]

    def __repr__(self) -> str:
        return f"Clutter({self.to_labels()})"


def compute_blocker(clutter: Clutter, settings: Optional[Settings] = None) -> Clutter:
    """
    Minimal transversals of a clutter, by enumeration.

    The blocker of the empty clutter is {∅}; the blocker of {∅} is empty.
    """
    settings = resolve(settings)
    n = clutter.ground.size
    if n > settings.brute_cap:
        raise CapExceededError("compute_blocker", n, settings.brute_cap)
    minimal = []
    for mask in range(1 << n):
        if not clutter.is_transversal(mask):
            continue
        if all(not clutter.is_transversal(mask & ~(1 << v)) for v in bits(mask)):
            minimal.append(mask)
    logger.debug("blocker of %d sets has %d minimal transversals", len(clutter), len(minimal))
    return Clutter(clutter.ground, minimal)


def minimal_members(ground: GroundSet, is_member, settings: Optional[Settings] = None) -> Clutter:
    """Inclusion-minimal members of an upward-closed family given by membership."""
    settings = resolve(settings)
    if ground.size > settings.brute_cap:
        raise CapExceededError("minimal_members", ground.size, settings.brute_cap)
    members = [mask for mask in range(1 << ground.size)
               if is_member(mask) and not any(is_member(mask & ~(1 << v)) for v in bits(mask))]
    return Clutter(ground, members)


def verify_lehman(clutter: Clutter, settings: Optional[Settings] = None) -> bool:
    """B(B(C)) == C."""
    return compute_blocker(compute_blocker(clutter, settings), settings) == clutter


def upward_closure_membership(clutter: Clutter, subset: SubsetLike) -> bool:
    return clutter.contains_member(coerce_mask(subset, clutter.ground))


@dataclass
class SeparationResult:
    """Verdict for a point z against P*(F)."""
    feasible: bool
    load: Optional[Any] = None
    violated: Optional[int] = None

    def __bool__(self) -> bool:
        return self.feasible


class BlockingFamily:
    """
    Upward-closed family described through its blocker.

    Subclasses provide ``blockers()`` and may override ``min_load`` with a
    faster separation routine.
    """
    kind = "blocking"

    def __init__(self, ground: GroundSet, beta_bound: Optional[int] = None):
        self.ground = ground
        self.beta_bound = beta_bound

    def blockers(self) -> Clutter:
        raise NotImplementedError

    def scan_order(self) -> Sequence[int]:
        return self.blockers().members

    def is_member(self, mask: int) -> bool:
        self.ground.check(mask)
        return all(mask & blocker for blocker in self.scan_order())

    def min_load(self, z: Sequence[Any]) -> Tuple[Optional[Any], Optional[int]]:
        """
        Smallest z(B) over blockers and the first blocker attaining it.

        Returns (None, None) when the family has no blockers.
        """
        best_load, best_blocker = None, None
        for blocker in self.scan_order():
            load = sum((z[v] for v in bits(blocker)), 0)
            if best_load is None or load < best_load:
                best_load, best_blocker = load, blocker
        return best_load, best_blocker

    def separate(self, z: Sequence[Any]) -> SeparationResult:
        load, blocker = self.min_load(z)
        if blocker is None or load >= 1:
            return SeparationResult(True, load)
        return SeparationResult(False, load, blocker)

    def describe(self) -> str:
        return f"{self.kind}(n={self.ground.size}, beta={self.beta_bound})"


class ExplicitBlockingFamily(BlockingFamily):
    """Family given by an explicit blocker clutter."""
    kind = "clutter"

    def __init__(self, clutter: Clutter, beta_bound: Optional[int] = None):
        super().__init__(clutter.ground, clutter.max_size if beta_bound is None else beta_bound)
        self.clutter = clutter

    def blockers(self) -> Clutter:
        return self.clutter


class VertexCoverFamily(BlockingFamily):
    """Vertex covers of a graph; the blockers are its edges."""
    kind = "vertex-cover"

    def __init__(self, graph: nx.Graph):
        ground = GroundSet.from_labels(graph.nodes())
        super().__init__(ground, 2)
        nodes = list(graph.nodes())
        position = {node: i for i, node in enumerate(nodes)}
        order = [1 << position[u] | 1 << position[v] for u, v in graph.edges()]
        self.graph = graph
        self.clutter = Clutter.from_sets(ground, order)
        self._order = [mask for mask in dict.fromkeys(order) if mask in self.clutter]

    def blockers(self) -> Clutter:
        return self.clutter

    def scan_order(self) -> Sequence[int]:
        return self._order


class EdgeCoverFamily(BlockingFamily):
    """Edge sets touching every vertex; the blockers are the vertex stars."""
    kind = "edge-cover"

    def __init__(self, graph: nx.Graph):
        ground, edges = graphic_ground(graph)
        stars = []
        for node in graph.nodes():
            stars.append(mask_of(e for e, (u, v) in enumerate(edges) if node in (u, v)))
        super().__init__(ground, max(popcount(star) for star in stars))
        self.graph = graph
        self.edges = edges
        self.clutter = Clutter.from_sets(ground, stars)
        self._order = [mask for mask in dict.fromkeys(stars) if mask in self.clutter]

    def blockers(self) -> Clutter:
        return self.clutter

    def scan_order(self) -> Sequence[int]:
        return self._order


class HittingSetFamily(ExplicitBlockingFamily):
    """Sets hitting every hyperedge."""
    kind = "hitting-set"

    def __init__(self, ground: GroundSet, hyperedges: Iterable[int]):
        super().__init__(Clutter.from_sets(ground, hyperedges))


class CardinalityFamily(BlockingFamily):
    """
    {S : |S| >= m}; the blockers are all (n-m+1)-sets.

    ``CardinalityFamily(ground, n)`` is the family {V}.
    """
    kind = "cardinality"

    def __init__(self, ground: GroundSet, m: int):
        if not 0 <= m <= ground.size:
            raise PreconditionError(f"cardinality bound {m} is outside 0..{ground.size}")
        self.m = m
        self.width = ground.size - m + 1
        super().__init__(ground, self.width if m > 0 else None)

    def is_member(self, mask: int) -> bool:
        return popcount(self.ground.check(mask)) >= self.m

    def blockers(self) -> Clutter:
        if self.m == 0:
            return Clutter(self.ground, [])
        return Clutter(self.ground, [mask_of(c) for c in
                                     combinations(range(self.ground.size), self.width)])

    def min_load(self, z: Sequence[Any]) -> Tuple[Optional[Any], Optional[int]]:
        if self.m == 0:
            return None, None
        smallest = sorted(range(self.ground.size), key=lambda v: (z[v], v))[:self.width]
        return sum((z[v] for v in smallest), 0), mask_of(smallest)


class StPathFamily(BlockingFamily):
    """
    Edge sets containing an s-t path; the blockers are the minimal s-t cuts.

    Separation finds a minimum cut with capacities z, scaled to integers
    when z is rational so the verdict is exact.
    """
    kind = "st-path"

    def __init__(self, graph: nx.Graph, s: Any, t: Any, settings: Optional[Settings] = None):
        ground, edges = graphic_ground(graph)
        super().__init__(ground, None)
        if s not in graph or t not in graph:
            raise PreconditionError("terminals must be nodes of the graph")
        self.graph = graph
        self.edges = edges
        self.nodes = list(graph.nodes())
        self.s, self.t = s, t
        self._settings = resolve(settings)
        self._clutter: Optional[Clutter] = None

    def _connected(self, mask: int) -> bool:
        sub = nx.MultiGraph()
        sub.add_nodes_from(self.nodes)
        sub.add_edges_from(self.edges[e] for e in bits(mask))
        return nx.has_path(sub, self.s, self.t)

    def is_member(self, mask: int) -> bool:
        return self._connected(self.ground.check(mask))

    def blockers(self) -> Clutter:
        if self._clutter is None:
            if self.s == self.t:
                self._clutter = Clutter(self.ground, [])
            else:
                multi = nx.MultiGraph()
                multi.add_nodes_from(self.nodes)
                for e, (u, v) in enumerate(self.edges):
                    multi.add_edge(u, v, key=e)
                paths = [mask_of(key for _, _, key in path)
                         for path in nx.all_simple_edge_paths(multi, self.s, self.t)]
                self._clutter = compute_blocker(Clutter.from_sets(self.ground, paths),
                                                self._settings)
            if self.beta_bound is None:
                self.beta_bound = self._clutter.max_size
        return self._clutter

    def min_load(self, z: Sequence[Any]) -> Tuple[Optional[Any], Optional[int]]:
        if self.s == self.t:
            return None, None
        exact = all(isinstance(x, (int, Fraction)) for x in z)
        scale = 1
        if exact:
            scale = lcm(*(Fraction(x).denominator for x in z)) if z else 1
        flow = nx.DiGraph()
        flow.add_nodes_from(self.nodes)
        for e, (u, v) in enumerate(self.edges):
            if u == v:
                continue
            capacity = int(Fraction(z[e]) * scale) if exact else float(z[e])
            for a, b in ((u, v), (v, u)):
                if flow.has_edge(a, b):
                    flow[a][b]["capacity"] += capacity
                else:
                    flow.add_edge(a, b, capacity=capacity)
        _, (source_side, _) = nx.minimum_cut(flow, self.s, self.t)
        cut = mask_of(e for e, (u, v) in enumerate(self.edges)
                      if (u in source_side) != (v in source_side))
        for e in list(bits(cut)):
            if not self._connected(self.ground.full & ~(cut & ~(1 << e))):
                cut &= ~(1 << e)
        return sum((z[e] for e in bits(cut)), 0), cut


class LiftedBlockingFamily(BlockingFamily):
    """
    Upward closure of H on E for a blocking family F on V.

    Its blockers are the sets of all agent copies of a blocker of F, so
    separation projects w to z(v) = sum over agents of w(i, v).
    """
    kind = "lifted"

    def __init__(self, base: BlockingFamily, k: int):
        self.base = base
        self.lifted_ground = LiftedGroundSet(base.ground, k)
        beta = None if base.beta_bound is None else base.beta_bound * k
        super().__init__(self.lifted_ground.ground, beta)

    def project(self, w: Sequence[Any]) -> List[Any]:
        if len(w) != self.lifted_ground.size:
            raise ArityMismatchError(f"point has {len(w)} entries for {self.lifted_ground.size}")
        n = self.lifted_ground.n
        return [sum((w[i * n + v] for i in range(self.lifted_ground.k)), 0) for v in range(n)]

    def is_member(self, mask: int) -> bool:
        return self.base.is_member(self.lifted_ground.cov(self.ground.check(mask)))

    def blockers(self) -> Clutter:
        return Clutter(self.ground, [self.lifted_ground.delta_of(B)
                                     for B in self.base.blockers()])

    def min_load(self, w: Sequence[Any]) -> Tuple[Optional[Any], Optional[int]]:
        load, blocker = self.base.min_load(self.project(w))
        if blocker is None:
            return None, None
        return load, self.lifted_ground.delta_of(blocker)


def pruned_network_family(graph: nx.Graph, tau: int) -> ExplicitBlockingFamily:
    """
    Edge sets meeting every sub-star of size tau+1.

    Its members are the complements of networks in which no vertex lost
    more than tau edges.
    """
    if tau < 0:
        raise PreconditionError("tau must be nonnegative")
    ground, edges = graphic_ground(graph)
    members = []
    for node in graph.nodes():
        star = [e for e, (u, v) in enumerate(edges) if node in (u, v)]
        members.extend(mask_of(c) for c in combinations(star, tau + 1))
    family = ExplicitBlockingFamily(Clutter.from_sets(ground, members), tau + 1)
    family.kind = "pruned-network"
    return family


def lift_separation(family: BlockingFamily, k: int) -> LiftedBlockingFamily:
    return LiftedBlockingFamily(family, k)


def separate(family: BlockingFamily, z: Sequence[Any]) -> SeparationResult:
    """Check z against P*(F); a violated blocker is returned when z is outside."""
    if len(z) != family.ground.size:
        raise ArityMismatchError(f"point has {len(z)} entries for {family.ground.size} elements")
    if any(x < 0 for x in z):
        raise PreconditionError("fractional points must be nonnegative")
    return family.separate(z)


def prune_to_minimal(subset: SubsetLike, family: BlockingFamily) -> int:
    """
    Drop elements in ascending order while the set stays in the family.

    One pass suffices: the family is upward closed, so an element that
    cannot be removed now cannot be removed after later removals either.
    """
    mask = coerce_mask(subset, family.ground)
    if not family.is_member(mask):
        raise PreconditionError("set to prune is not in the family")
    for v in list(bits(mask)):
        if family.is_member(mask & ~(1 << v)):
            mask &= ~(1 << v)
    return mask


def verify_blocker(family: BlockingFamily, settings: Optional[Settings] = None) -> ValidationResult:
    """Recompute B(F) from membership and check it and the beta bound."""
    expected = compute_blocker(minimal_members(family.ground, family.is_member, settings), settings)
    actual = family.blockers()
    if expected != actual:
        return ValidationResult(False, "blocker", None,
                                {"expected": expected.to_labels(), "actual": actual.to_labels()})
    if family.beta_bound is not None and expected.max_size > family.beta_bound:
        return ValidationResult(False, "blocker", None,
                                {"beta_bound": family.beta_bound, "max_size": expected.max_size})
    return ValidationResult(True, "blocker", None, {"beta": expected.max_size})
