"""
Lovász extension and submodular function minimization.

Minimizers are exact: the min-norm-point engine iterates in floating point
and then re-evaluates candidate level sets of its final point with the
oracle, so reported values are always oracle values.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import Settings, resolve
from .exceptions import (ArityMismatchError, CapExceededError, ConvergenceError,
                         DomainMismatchError, InfeasibleError, InvalidRingError,
                         PreconditionError)
from .models import GroundSet, SetTuple, SubsetLike, coerce_mask
from .oracles import MultivariateOracle, SubmodularOracle, subtract_modular
from .utils import bits, popcount, submasks, to_fraction

logger = logging.getLogger(__name__)


@dataclass
class LovaszEvaluation:
    """f^L(z) with the chain of level sets that produced it."""
    value: Fraction
    levels: List[Tuple[int, Fraction]] = field(default_factory=list)

    def columns(self) -> Dict[int, Fraction]:
        """Non-empty levels as a column map S -> weight."""
        return {mask: weight for mask, weight in self.levels if mask}


def _box_point(z: Sequence[Any], n: int) -> List[Fraction]:
    values = [to_fraction(x) for x in z]
    if len(values) != n:
        raise ArityMismatchError(f"point has {len(values)} entries for {n} elements")
    for v, x in enumerate(values):
        if x < 0 or x > 1:
            raise PreconditionError(f"entry {v} = {x} is outside [0, 1]")
    return values


def lovasz(f: SubmodularOracle, z: Sequence[Any]) -> LovaszEvaluation:
    """
    Exact Lovász extension of f at z in [0,1]^V.

    Levels are the sets {v : z_v >= t} for the distinct positive values t
    of z in decreasing order, weighted by the gap to the next value. The
    empty set carries the remaining weight 1 - max(z) and only shows up
    when f(∅) is nonzero.
    """
    values = _box_point(z, f.n)
    distinct = sorted({x for x in values if x > 0}, reverse=True)
    levels = []
    total = Fraction(0)
    for position, threshold in enumerate(distinct):
        following = distinct[position + 1] if position + 1 < len(distinct) else Fraction(0)
        level = 0
        for v, x in enumerate(values):
            if x >= threshold:
                level |= 1 << v
        weight = threshold - following
        levels.append((level, weight))
        total += weight * f.value(level)
    rest = 1 - (distinct[0] if distinct else Fraction(0))
    empty_value = f.value(0)
    if empty_value != 0 and rest > 0:
        levels.append((0, rest))
        total += rest * empty_value
    return LovaszEvaluation(total, levels)


def lovasz_float(f: SubmodularOracle, z: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Floating-point f^L(z) and a subgradient (the greedy vertex of B(f)).

    Assumes f is normalized.
    """
    order = np.argsort(-z, kind="mergesort")
    gradient = np.empty(len(z), dtype=float)
    mask = 0
    previous = 0.0
    for v in order:
        mask |= 1 << int(v)
        current = float(f.value(mask))
        gradient[v] = current - previous
        previous = current
    return float(np.dot(gradient, z)), gradient


def level_set_decomposition(f: SubmodularOracle, z: Sequence[Any]) -> Dict[int, Fraction]:
    """
    Column map x over the level-set chain of z.

    Sum of x(S) * chi^S equals z exactly, and sum of x(S) * f(S) equals
    f^L(z) when f is normalized.
    """
    return lovasz(f, z).columns()


def cover_bound_holds(f: SubmodularOracle, Z: SubsetLike, columns: Mapping[int, Any]) -> bool:
    """
    Evaluate f(Z) <= sum x(S) f(S) for a fractional cover of Z.

    Raises:
        PreconditionError: If the columns do not cover every element of Z
            with total weight at least 1
    """
    target = coerce_mask(Z, f.ground)
    weights = {coerce_mask(S, f.ground): to_fraction(x) for S, x in columns.items()}
    for v in bits(target):
        if sum((x for S, x in weights.items() if S >> v & 1), Fraction(0)) < 1:
            raise PreconditionError(f"element {f.ground.labels[v]} is not fractionally covered")
    return f.value(target) <= sum((x * f.value(S) for S, x in weights.items()), Fraction(0))


# ---------------------------------------------------------------------------
# Unconstrained minimization
# ---------------------------------------------------------------------------

def sfm_brute(f: SubmodularOracle, settings: Optional[Settings] = None) -> Tuple[int, Fraction]:
    """Exact minimizer by enumeration; ties go to the smallest bitmask."""
    settings = resolve(settings)
    if f.n > settings.sfm_brute_cap:
        raise CapExceededError("sfm_brute", f.n, settings.sfm_brute_cap)
    best_mask, best_value = 0, f.value(0)
    for mask in range(1, 1 << f.n):
        value = f.value(mask)
        if value < best_value:
            best_mask, best_value = mask, value
    return best_mask, best_value


def _greedy_vertex(w: np.ndarray, h) -> np.ndarray:
    """Vertex of the base polytope minimizing <x, w>."""
    order = np.argsort(w, kind="mergesort")
    x = np.empty(len(w), dtype=float)
    mask = 0
    previous = 0.0
    for v in order:
        mask |= 1 << int(v)
        current = h(mask)
        x[v] = current - previous
        previous = current
    return x


def _affine_minimiser(S: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Min-norm point of the affine hull of the rows of S and its coefficients."""
    m = S.shape[0]
    gram = S @ S.T
    system = np.zeros((m + 1, m + 1))
    system[0, 1:] = 1.0
    system[1:, 0] = 1.0
    system[1:, 1:] = gram
    rhs = np.zeros(m + 1)
    rhs[0] = 1.0
    solution = np.linalg.lstsq(system, rhs, rcond=None)[0]
    coefficients = solution[1:]
    return coefficients, S.T @ coefficients


def sfm_min_norm(f: SubmodularOracle, settings: Optional[Settings] = None) -> Tuple[int, Fraction]:
    """
    Minimize f with the Fujishige-Wolfe minimum-norm-point algorithm.

    The float iteration locates the min-norm point x of the base polytope;
    every prefix of V sorted by x is then evaluated exactly and the best
    one (smallest bitmask on ties) is returned.

    Raises:
        ConvergenceError: If the major cycle hits ``min_norm_max_iter``
    """
    settings = resolve(settings)
    n = f.n
    offset = f.value(0)
    tol = settings.tolerance

    def h(mask: int) -> float:
        return float(f.value(mask) - offset)

    x = _greedy_vertex(np.zeros(n), h)
    S = x.reshape((1, n))
    a = np.array([1.0])
    converged = False
    for iteration in range(settings.min_norm_max_iter):
        q = _greedy_vertex(x, h)
        if np.any(np.all(np.abs(S - q) < tol * 100, axis=1)):
            converged = True
            break
        scale = max(float(np.dot(q, q)), float(np.max(np.einsum("ij,ij->i", S, S))))
        if np.dot(x, q) >= np.dot(x, x) - tol * 0.01 * scale:
            converged = True
            break
        S = np.vstack((S, q))
        a = np.append(a, 0.0)
        for _ in range(S.shape[0] + 1):
            b, y = _affine_minimiser(S)
            if np.all(b >= -tol):
                a, x = b, y
                break
            shrinking = np.nonzero(a - b > tol * 10)[0]
            if not len(shrinking):
                a, x = b, y
                break
            theta = float(np.min(a[shrinking] / (a - b)[shrinking]))
            a = theta * b + (1 - theta) * a
            keep = a > tol * 10
            S, a = S[keep], a[keep]
            x = S.T @ a
    if not converged:
        bound = offset + to_fraction(float(np.minimum(x, 0).sum()))
        raise ConvergenceError(
            f"min-norm point did not converge in {settings.min_norm_max_iter} iterations",
            best_bound=bound)
    logger.debug("min-norm point for %s converged after %d major cycles", f.name, iteration + 1)

    order = np.argsort(x, kind="mergesort")
    best_mask, best_value = 0, f.value(0)
    mask = 0
    for v in order:
        mask |= 1 << int(v)
        value = f.value(mask)
        if value < best_value or (value == best_value and mask < best_mask):
            best_mask, best_value = mask, value
    return best_mask, best_value


def sfm_minimize(f: SubmodularOracle, settings: Optional[Settings] = None) -> Tuple[int, Fraction]:
    """Brute force under ``brute_cap``, min-norm point above it."""
    settings = resolve(settings)
    if f.n <= settings.brute_cap:
        return sfm_brute(f, settings)
    return sfm_min_norm(f, settings)


# ---------------------------------------------------------------------------
# Ring families
# ---------------------------------------------------------------------------

class RingFamily:
    """
    Sets S with L ⊆ S ⊆ U that are closed under implications u -> w.

    Such families are closed under union and intersection.
    """

    def __init__(self, ground: GroundSet, implications: Sequence[Tuple[int, int]] = (),
                 lower: int = 0, upper: Optional[int] = None):
        self.ground = ground
        self.lower = ground.check(lower)
        self.upper = ground.full if upper is None else ground.check(upper)
        for u, w in implications:
            if not (0 <= u < ground.size and 0 <= w < ground.size):
                raise DomainMismatchError(f"implication {u}->{w} leaves the ground set")
        self.implications = tuple((int(u), int(w)) for u, w in implications)
        if self.lower & ~self.upper:
            raise InvalidRingError(
                f"forced elements {ground.labels_of(self.lower & ~self.upper)} are not allowed")
        if not self.is_closed(self.lower):
            raise InvalidRingError("forced-in set is not closed under the implications")

    def is_closed(self, mask: int) -> bool:
        return all(not mask >> u & 1 or mask >> w & 1 for u, w in self.implications)

    def contains(self, mask: int) -> bool:
        return (not self.lower & ~mask and not mask & ~self.upper and self.is_closed(mask))

    is_member = contains

    @property
    def candidate_count(self) -> int:
        return 1 << popcount(self.upper & ~self.lower)

    def members(self) -> Iterator[int]:
        """Members in ascending bitmask order."""
        free = self.upper & ~self.lower
        for extra in submasks(free):
            mask = self.lower | extra
            if self.is_closed(mask):
                yield mask


def sfm_ring(f: SubmodularOracle, ring: RingFamily,
             settings: Optional[Settings] = None) -> Tuple[int, Fraction]:
    """
    Exact minimum of f over a ring family by enumeration.

    Raises:
        CapExceededError: If the ring has more than ``ring_cap`` candidates
        InfeasibleError: If the ring is empty
    """
    settings = resolve(settings)
    if ring.ground != f.ground:
        raise DomainMismatchError("ring family and oracle use different ground sets")
    if ring.candidate_count > settings.ring_cap:
        raise CapExceededError("sfm_ring", ring.candidate_count, settings.ring_cap)
    best = None
    for mask in ring.members():
        value = f.value(mask)
        if best is None or value < best[1]:
            best = (mask, value)
    if best is None:
        raise InfeasibleError("ring family is empty")
    return best


def sfm_mv_ring(g: MultivariateOracle, ring: RingFamily,
                settings: Optional[Settings] = None) -> Tuple[SetTuple, Fraction]:
    """Minimize a multi-submodular g over a ring of tuples given on the lifted space."""
    from .lifting import LiftedGroundSet, lift_oracle

    lifted_ground = LiftedGroundSet(g.ground, g.k)
    if ring.ground != lifted_ground.ground:
        raise DomainMismatchError("ring family is not over the lifted ground set")
    mask, value = sfm_ring(lift_oracle(g), ring, settings)
    return lifted_ground.unlift(mask), value


# ---------------------------------------------------------------------------
# Dual feasibility
# ---------------------------------------------------------------------------

@dataclass
class DualCheck:
    """Result of checking y against the dual packing constraints."""
    feasible: bool
    slack: Fraction
    violated: Optional[int] = None

    def __bool__(self) -> bool:
        return self.feasible


def blocker_load(n: int, y: Mapping[int, Any]) -> List[Fraction]:
    """z_y(v) = sum of y_B over blockers B containing v."""
    load = [Fraction(0)] * n
    for blocker, weight in y.items():
        weight = to_fraction(weight)
        if weight < 0:
            raise PreconditionError("dual weights must be nonnegative")
        for v in bits(blocker):
            load[v] += weight
    return load


def dual_feasible(f: SubmodularOracle, y: Mapping[int, Any], clutter=None,
                  settings: Optional[Settings] = None) -> DualCheck:
    """
    Check f(S) >= z_y(S) for every S, where z_y sums the blocker weights.

    ``y`` maps blocker bitmasks to weights; when ``clutter`` is given every
    key must be one of its members.
    """
    if clutter is not None:
        unknown = [B for B in y if B not in clutter]
        if unknown:
            raise PreconditionError(f"{len(unknown)} dual weights are not on blocker members")
    shifted = subtract_modular(f, blocker_load(f.n, y))
    mask, value = sfm_minimize(shifted, settings)
    if value >= 0:
        return DualCheck(True, value)
    return DualCheck(False, value, mask)
