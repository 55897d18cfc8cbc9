"""
Data models for ground sets, subsets and set tuples.

Subsets are bitmasks over a GroundSet: bit ``v`` set means element ``v``
is in the subset. Operations accept either a ``Subset`` or a bare int.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .exceptions import ArityMismatchError, DomainMismatchError, PreconditionError
from .utils import bits, canonical_json, full_mask, jsonable_number, popcount


@dataclass(frozen=True)
class GroundSet:
    """Finite ground set V = {0..n-1} with display labels."""
    labels: Tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise PreconditionError("ground set must have at least one element")
        if len(set(self.labels)) != len(self.labels):
            raise PreconditionError("ground set labels must be unique")

    @classmethod
    def of_size(cls, n: int) -> "GroundSet":
        return cls(tuple(str(i) for i in range(n)))

    @classmethod
    def from_labels(cls, labels: Iterable[Any]) -> "GroundSet":
        return cls(tuple(str(label) for label in labels))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full(self) -> int:
        return full_mask(len(self.labels))

    def index(self, label: Any) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise DomainMismatchError(f"unknown element label: {label!r}") from None

    def mask(self, labels: Iterable[Any]) -> int:
        """Bitmask of the given labels."""
        result = 0
        for label in labels:
            result |= 1 << self.index(label)
        return result

    def labels_of(self, mask: int) -> List[str]:
        return [self.labels[v] for v in bits(mask)]

    def check(self, mask: int) -> int:
        """Validate that a bitmask only uses elements of this ground set."""
        if mask < 0 or mask & ~self.full:
            raise DomainMismatchError(
                f"subset {mask:#x} has elements outside a ground set of size {self.size}")
        return mask

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class Subset:
    """A subset of a specific ground set."""
    ground: GroundSet
    mask: int = 0

    def __post_init__(self):
        self.ground.check(self.mask)

    @classmethod
    def of(cls, ground: GroundSet, labels: Iterable[Any]) -> "Subset":
        return cls(ground, ground.mask(labels))

    def __contains__(self, v: int) -> bool:
        return bool(self.mask >> v & 1)

    def __len__(self) -> int:
        return popcount(self.mask)

    def __iter__(self):
        return bits(self.mask)

    def union(self, other: "Subset") -> "Subset":
        return Subset(self.ground, self.mask | coerce_mask(other, self.ground))

    def intersection(self, other: "Subset") -> "Subset":
        return Subset(self.ground, self.mask & coerce_mask(other, self.ground))

    def labels(self) -> List[str]:
        return self.ground.labels_of(self.mask)


SubsetLike = Union[Subset, int]


def coerce_mask(subset: SubsetLike, ground: GroundSet) -> int:
    """
    Bitmask of a subset after checking it belongs to ``ground``.

    Raises:
        DomainMismatchError: If the subset is on another ground set or
            uses bits beyond it
    """
    if isinstance(subset, Subset):
        if subset.ground != ground:
            raise DomainMismatchError("subset belongs to a different ground set")
        return subset.mask
    if isinstance(subset, bool) or not isinstance(subset, int):
        raise DomainMismatchError(f"not a subset: {subset!r}")
    return ground.check(subset)


@dataclass(frozen=True)
class SetTuple:
    """Ordered k-tuple (S_1, ..., S_k) of subsets of one ground set."""
    ground: GroundSet
    masks: Tuple[int, ...]

    def __post_init__(self):
        if not self.masks:
            raise ArityMismatchError("a set tuple needs at least one component")
        object.__setattr__(self, "masks", tuple(self.masks))
        for mask in self.masks:
            self.ground.check(mask)

    @classmethod
    def empty(cls, ground: GroundSet, k: int) -> "SetTuple":
        return cls(ground, (0,) * k)

    @classmethod
    def from_labels(cls, ground: GroundSet, groups: Sequence[Iterable[Any]]) -> "SetTuple":
        return cls(ground, tuple(ground.mask(group) for group in groups))

    @property
    def k(self) -> int:
        return len(self.masks)

    def __getitem__(self, i: int) -> int:
        return self.masks[i]

    def __iter__(self):
        return iter(self.masks)

    @property
    def union(self) -> int:
        result = 0
        for mask in self.masks:
            result |= mask
        return result

    @property
    def is_disjoint(self) -> bool:
        return popcount(self.union) == sum(popcount(mask) for mask in self.masks)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "agents": [self.ground.labels_of(mask) for mask in self.masks],
        }


def coerce_tuple(value: Union[SetTuple, Sequence[int]], ground: GroundSet, k: int) -> SetTuple:
    """Validate a tuple (or a plain sequence of masks) against ground and arity."""
    if isinstance(value, SetTuple):
        if value.ground != ground:
            raise DomainMismatchError("set tuple belongs to a different ground set")
        result = value
    else:
        result = SetTuple(ground, tuple(coerce_mask(m, ground) for m in value))
    if result.k != k:
        raise ArityMismatchError(f"expected a {k}-tuple, got {result.k} components")
    return result


@dataclass
class MultiAgentSolution:
    """k pairwise-disjoint subsets with per-agent and total cost."""
    assignment: SetTuple
    total: Any
    costs: Optional[List[Any]] = None
    trace: Dict[str, Any] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.assignment.k

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "agents": self.assignment.to_dict()["agents"],
            "total": jsonable_number(self.total),
            "costs": None if self.costs is None else [jsonable_number(c) for c in self.costs],
        }


@dataclass
class ReportRecord:
    """
    Outcome of running one algorithm on one instance.

    Verdicts come from independent re-checks of the returned solution,
    never from what the solver itself reports.
    """
    digest: str
    instance: str
    algorithm: str
    solution: Optional[List[List[str]]] = None
    objective: Any = None
    lp_value: Any = None
    stage_factors: List[Any] = field(default_factory=list)
    bound: Any = None
    brute_opt: Any = None
    ratio: Any = None
    verdicts: Dict[str, bool] = field(default_factory=dict)
    wall_time: Optional[float] = None

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        result = {
            "digest": self.digest,
            "instance": self.instance,
            "algorithm": self.algorithm,
            "solution": self.solution,
            "objective": jsonable_number(self.objective),
            "lp_value": jsonable_number(self.lp_value),
            "stage_factors": [jsonable_number(x) for x in self.stage_factors],
            "bound": jsonable_number(self.bound),
            "brute_opt": jsonable_number(self.brute_opt),
            "ratio": jsonable_number(self.ratio),
            "verdicts": dict(self.verdicts),
        }
        if self.wall_time is not None:
            result["wall_time"] = round(self.wall_time, 6)
        return result

    def to_json(self) -> str:
        return canonical_json(self.to_dict())
