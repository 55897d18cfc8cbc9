"""
Lifting multi-agent problems to single-agent problems.

Agent i taking element v becomes the lifted element (i, v) of
E = [k] x V, stored at index i*n + v. A k-tuple of subsets of V maps to
one subset of E and back; tuple functions become set functions and
constraints on (S_1, ..., S_k) become families on E.
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Callable, List, Optional, Sequence, Tuple

import networkx as nx

from .exceptions import ArityMismatchError, DomainMismatchError, InvalidRingError, PreconditionError
from .matroids import (BasesFamily, FullSetFamily, Matroid, MatroidIntersection,
                       PowerSetFamily, make_free, make_partition, make_union)
from .models import GroundSet, SetTuple, coerce_mask, coerce_tuple
from .oracles import MultivariateOracle, SubmodularOracle, split_lifted
from .sfm import RingFamily
from .utils import bits, full_mask, graph_edges, popcount

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LiftedGroundSet:
    """E = [k] x V with (i, v) at index i*n + v."""
    base: GroundSet
    k: int
    ground: GroundSet = field(init=False, compare=False)

    def __post_init__(self):
        if self.k < 1:
            raise ArityMismatchError("lifting needs k >= 1")
        labels = tuple(f"{i}:{label}" for i in range(self.k) for label in self.base.labels)
        object.__setattr__(self, "ground", GroundSet(labels))

    @property
    def n(self) -> int:
        return self.base.size

    @property
    def size(self) -> int:
        return self.k * self.base.size

    def index(self, i: int, v: int) -> int:
        if not (0 <= i < self.k and 0 <= v < self.n):
            raise DomainMismatchError(f"({i}, {v}) is outside [k] x V")
        return i * self.n + v

    def element(self, e: int) -> Tuple[int, int]:
        """(agent, base element) of a lifted index."""
        return divmod(e, self.n)

    def lift(self, tuple_: Any) -> int:
        """pi(S_1..S_k): the lifted subset."""
        masks = coerce_tuple(tuple_, self.base, self.k).masks
        result = 0
        for i, mask in enumerate(masks):
            result |= mask << (i * self.n)
        return result

    def unlift(self, mask: Any) -> SetTuple:
        return SetTuple(self.base, self.split(coerce_mask(mask, self.ground)))

    def split(self, mask: int) -> Tuple[int, ...]:
        return split_lifted(mask, self.n, self.k)

    def cov(self, mask: int) -> int:
        """Base elements touched by any agent."""
        result = 0
        for part in self.split(mask):
            result |= part
        return result

    def is_disjoint(self, mask: int) -> bool:
        return popcount(self.cov(mask)) == popcount(mask)

    def delta(self, v: int) -> int:
        """The k lifted copies (i, v) of a base element."""
        return sum(1 << (i * self.n + v) for i in range(self.k))

    def delta_of(self, mask: int) -> int:
        result = 0
        for v in bits(mask):
            result |= self.delta(v)
        return result

    def agent_block(self, i: int) -> int:
        return full_mask(self.n) << (i * self.n)

    def positions(self, i: int) -> List[int]:
        return [i * self.n + v for v in range(self.n)]


def lift(lifted_ground: LiftedGroundSet, tuple_: Any) -> int:
    return lifted_ground.lift(tuple_)


def unlift(lifted_ground: LiftedGroundSet, mask: Any) -> SetTuple:
    return lifted_ground.unlift(mask)


class LiftedOracle(SubmodularOracle):
    """f(S) = g(unlift(S)) on the lifted ground set."""

    def __init__(self, g: MultivariateOracle):
        self.underlying = g
        self.lifted_ground = LiftedGroundSet(g.ground, g.k)
        n, k = g.n, g.k
        super().__init__(self.lifted_ground.ground,
                         lambda mask: g.value(split_lifted(mask, n, k)),
                         name=f"lifted-{g.name}", normalized=g.normalized,
                         nonnegative=g.nonnegative, monotone=g.monotone)


def lift_oracle(g: MultivariateOracle) -> LiftedOracle:
    return LiftedOracle(g)


class LiftedFamily:
    """
    Membership oracle on E, optionally backed by a matroid-like structure.

    ``kind`` is one of H, Hprime or L; ``tag`` names the structure that
    applied (None when only membership is available).
    """

    def __init__(self, lifted_ground: LiftedGroundSet, membership: Callable[[int], bool],
                 kind: str, structure: Any = None, tag: Optional[str] = None):
        self.lifted_ground = lifted_ground
        self.ground = lifted_ground.ground
        self.kind = kind
        self.structure = structure
        self.tag = tag
        self._membership = membership

    def is_member(self, mask: int) -> bool:
        return bool(self._membership(self.ground.check(mask)))

    def contains_tuple(self, tuple_: Any) -> bool:
        return self.is_member(self.lifted_ground.lift(tuple_))


def _lift_matroid(matroid: Matroid, lifted_ground: LiftedGroundSet) -> Matroid:
    """Components pairwise disjoint and their union independent in M."""
    if matroid.ground != lifted_ground.base:
        raise DomainMismatchError("matroid is not on the base ground set")

    def independence(mask: int) -> bool:
        union = lifted_ground.cov(mask)
        return popcount(union) == popcount(mask) and matroid.is_independent(union)

    return Matroid(lifted_ground.ground, independence, name=f"lifted-{matroid.name}")


def assignment_matroid(lifted_ground: LiftedGroundSet) -> Matroid:
    """Partition matroid on E with parts delta(v) and caps 1."""
    parts = [lifted_ground.delta(v) for v in range(lifted_ground.n)]
    return make_partition(lifted_ground.ground, parts, [1] * len(parts))


def lift_family_H(family: Any, k: int) -> LiftedFamily:
    """
    H = {S ⊆ E : components disjoint and their union in F}.

    Matroids, intersections, bases, 2^V and {V} keep their structure on
    E; any other family falls back to membership only.
    """
    lifted_ground = LiftedGroundSet(family.ground, k)

    def membership(mask: int) -> bool:
        return lifted_ground.is_disjoint(mask) and family.is_member(lifted_ground.cov(mask))

    if isinstance(family, Matroid):
        structure = _lift_matroid(family, lifted_ground)
        return LiftedFamily(lifted_ground, structure.is_independent, "H", structure, "matroid")
    if isinstance(family, MatroidIntersection):
        structure = MatroidIntersection([_lift_matroid(m, lifted_ground) for m in family.matroids])
        return LiftedFamily(lifted_ground, structure.is_independent, "H", structure,
                            "p-intersection")
    if isinstance(family, BasesFamily):
        structure = BasesFamily(_lift_matroid(family.matroid, lifted_ground))
        return LiftedFamily(lifted_ground, structure.is_member, "H", structure, "bases")
    if isinstance(family, PowerSetFamily):
        structure = assignment_matroid(lifted_ground)
        return LiftedFamily(lifted_ground, structure.is_independent, "H", structure, "free")
    if isinstance(family, FullSetFamily):
        structure = BasesFamily(assignment_matroid(lifted_ground))
        return LiftedFamily(lifted_ground, structure.is_member, "H", structure, "full")
    logger.debug("lifting %s by membership only", type(family).__name__)
    return LiftedFamily(lifted_ground, membership, "H")


def _as_matroid(family: Any, ground: GroundSet) -> Optional[Matroid]:
    if family is None or isinstance(family, PowerSetFamily):
        return make_free(ground)
    if isinstance(family, Matroid):
        return family
    return None


def lift_family_Hprime(families: Sequence[Any]) -> LiftedFamily:
    """
    H' = {S ⊆ E : S_i in F_i for each agent i}.

    All-matroid input gives the direct sum over the agent blocks; all-ring
    input gives a ring family on E with the implications copied into each
    block.
    """
    if not families:
        raise ArityMismatchError("need one agent constraint per agent")
    base = next((F.ground for F in families if F is not None), None)
    if base is None:
        raise PreconditionError("at least one agent constraint must name its ground set")
    for F in families:
        if F is not None and F.ground != base:
            raise DomainMismatchError("agent constraints use different ground sets")
    lifted_ground = LiftedGroundSet(base, len(families))

    def membership(mask: int) -> bool:
        return all(F is None or F.is_member(part)
                   for F, part in zip(families, lifted_ground.split(mask)))

    matroids = [_as_matroid(F, base) for F in families]
    if all(m is not None for m in matroids):
        structure = make_union(lifted_ground.ground,
                               [(m, lifted_ground.positions(i)) for i, m in enumerate(matroids)])
        return LiftedFamily(lifted_ground, structure.is_independent, "Hprime", structure, "union")
    if all(isinstance(F, RingFamily) for F in families):
        n = lifted_ground.n
        implications = [(i * n + u, i * n + w)
                        for i, F in enumerate(families) for u, w in F.implications]
        lower = lifted_ground.lift([F.lower for F in families])
        upper = lifted_ground.lift([F.upper for F in families])
        structure = RingFamily(lifted_ground.ground, implications, lower, upper)
        return LiftedFamily(lifted_ground, structure.contains, "Hprime", structure, "ring")
    return LiftedFamily(lifted_ground, membership, "Hprime")


def lift_family_L(family: Any, agent_families: Optional[Sequence[Any]], k: int) -> LiftedFamily:
    """L = H ∧ H': the lifted feasible region of a multi-agent problem."""
    H = lift_family_H(family, k)
    if agent_families is None:
        return LiftedFamily(H.lifted_ground, H.is_member, "L", H.structure, H.tag)
    if len(agent_families) != k:
        raise ArityMismatchError(f"expected {k} agent constraints, got {len(agent_families)}")
    Hprime = lift_family_Hprime(agent_families)
    if Hprime.lifted_ground.base != H.lifted_ground.base:
        raise DomainMismatchError("agent constraints are not on the constraint's ground set")
    return LiftedFamily(H.lifted_ground, lambda mask: H.is_member(mask) and Hprime.is_member(mask),
                        "L")


def lift_constraint(family: Any, agent_families: Optional[Sequence[Any]],
                    k: int) -> MatroidIntersection:
    """
    Matroid intersection on E for a multi-agent matroid problem.

    The lifted copies of F's matroids come first, then the union of the
    agents' matroids. When every agent is unconstrained the lifted copies
    are returned alone, or the one-agent-per-element partition matroid
    when F is 2^V or {V}.

    Args:
        family: Matroid, MatroidIntersection, BasesFamily, PowerSetFamily
            or FullSetFamily on V; bases and {V} contribute their
            underlying matroid, membership of a base is checked by callers
        agent_families: One matroid (or None / PowerSetFamily) per agent
        k: Number of agents
    """
    lifted_ground = LiftedGroundSet(family.ground, k)
    if isinstance(family, MatroidIntersection):
        lifted = [_lift_matroid(m, lifted_ground) for m in family.matroids]
    elif isinstance(family, Matroid):
        lifted = [_lift_matroid(family, lifted_ground)]
    elif isinstance(family, BasesFamily):
        lifted = [_lift_matroid(family.matroid, lifted_ground)]
    elif isinstance(family, (PowerSetFamily, FullSetFamily)):
        lifted = []
    else:
        raise PreconditionError(f"{type(family).__name__} is not a matroid constraint")

    agent_families = list(agent_families) if agent_families is not None else [None] * k
    if len(agent_families) != k:
        raise ArityMismatchError(f"expected {k} agent constraints, got {len(agent_families)}")
    if all(F is None or isinstance(F, PowerSetFamily) for F in agent_families):
        # Lifted copies of F already keep the agent sets disjoint.
        if lifted:
            return MatroidIntersection(lifted, name="lifted-constraint")
        extra = assignment_matroid(lifted_ground)
    else:
        matroids = [_as_matroid(F, family.ground) for F in agent_families]
        if any(m is None for m in matroids):
            raise PreconditionError("every agent constraint must be a matroid")
        extra = make_union(lifted_ground.ground,
                           [(m, lifted_ground.positions(i)) for i, m in enumerate(matroids)])
        if not lifted:
            lifted = [assignment_matroid(lifted_ground)]
    return MatroidIntersection(lifted + [extra], name="lifted-constraint")


def lift_mv_ring(ring: RingFamily, lifted_ground: LiftedGroundSet,
                 sample: int = 64) -> RingFamily:
    """
    Accept a ring of tuples given over E after checking closure.

    Up to ``sample`` members are combined pairwise; any union or
    intersection falling outside raises InvalidRingError.
    """
    if ring.ground != lifted_ground.ground:
        raise DomainMismatchError("ring family is not over the lifted ground set")
    members = []
    for mask in ring.members():
        members.append(mask)
        if len(members) >= sample:
            break
    for a, b in combinations(members, 2):
        if not ring.contains(a | b) or not ring.contains(a & b):
            raise InvalidRingError("ring family is not closed under union and intersection")
    return ring


# ---------------------------------------------------------------------------
# Graph copies
# ---------------------------------------------------------------------------

STRUCTURES = ("forest", "matching", "spanning-tree", "perfect-matching", "st-path",
              "contains-st-path")


def _edge_graph(nodes: Sequence[Any], edges: Sequence[Tuple[Any, Any]], mask: int) -> nx.MultiGraph:
    graph = nx.MultiGraph()
    graph.add_nodes_from(nodes)
    for e in bits(mask):
        u, v = edges[e]
        graph.add_edge(u, v)
    return graph


def has_structure(nodes: Sequence[Any], edges: Sequence[Tuple[Any, Any]], mask: int,
                  structure: str, s: Any = None, t: Any = None) -> bool:
    """
    Whether the chosen edges form the named structure.

    "st-path" means the edges are exactly one simple s-t path;
    "contains-st-path" only asks for s and t to be connected.
    """
    graph = _edge_graph(nodes, edges, mask)
    if structure == "forest":
        return nx.is_forest(graph)
    if structure == "spanning-tree":
        return nx.is_tree(graph)
    if structure in ("matching", "perfect-matching"):
        if any(u == v for u, v in graph.edges()):
            return False
        limit_ok = all(degree <= 1 for _, degree in graph.degree())
        if structure == "matching":
            return limit_ok
        return limit_ok and all(degree == 1 for _, degree in graph.degree())
    if structure == "contains-st-path":
        return nx.has_path(graph, s, t)
    if structure == "st-path":
        if s == t:
            return mask == 0
        if not mask:
            return False
        touched = graph.subgraph([node for node, degree in graph.degree() if degree > 0])
        degrees = dict(touched.degree())
        if degrees.get(s) != 1 or degrees.get(t) != 1:
            return False
        if any(degree != 2 for node, degree in degrees.items() if node not in (s, t)):
            return False
        return nx.is_tree(touched)
    raise PreconditionError(f"unknown graph structure: {structure}")


@dataclass
class CopiedGraph:
    """
    k parallel copies of every edge, keyed (edge id, copy index).

    Copy edges are indexed agent-major, so the lifted mask of an edge tuple
    selects the same edges on the copy.
    """
    original: nx.Graph
    k: int
    multigraph: nx.MultiGraph
    edges: List[Tuple[Any, Any]]
    copies: List[Tuple[Any, Any, Tuple[int, int]]]

    @property
    def nodes(self) -> List[Any]:
        return list(self.original.nodes())

    def copy_edge(self, e: int) -> Tuple[Any, Any, Tuple[int, int]]:
        return self.copies[e]

    def copy_feasible(self, mask: int, structure: str, s: Any = None, t: Any = None) -> bool:
        pairs = [(u, v) for u, v, _ in self.copies]
        return has_structure(self.nodes, pairs, mask, structure, s, t)

    def tuple_feasible(self, masks: Sequence[int], structure: str, s: Any = None,
                       t: Any = None) -> bool:
        """Disjoint tuple whose union has the structure on the original graph."""
        union = 0
        for mask in masks:
            if mask & union:
                return False
            union |= mask
        return has_structure(self.nodes, self.edges, union, structure, s, t)


def copy_graph(graph: nx.Graph, k: int) -> CopiedGraph:
    if k < 1:
        raise ArityMismatchError("need k >= 1 copies")
    edges = graph_edges(graph)
    multigraph = nx.MultiGraph()
    multigraph.add_nodes_from(graph.nodes())
    copies = []
    for i in range(k):
        for edge_id, (u, v) in enumerate(edges):
            key = (edge_id, i)
            multigraph.add_edge(u, v, key=key)
            copies.append((u, v, key))
    return CopiedGraph(graph, k, multigraph, edges, copies)
