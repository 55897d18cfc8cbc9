"""
Utility functions for subsets, rationals and graphs.
"""
import hashlib
import json
from fractions import Fraction
from typing import Any, Iterator, List, Sequence, Tuple, Union

import networkx as nx

Number = Union[int, float, Fraction]


def popcount(mask: int) -> int:
    """Number of elements in a bitmask subset."""
    return bin(mask).count("1")


def bits(mask: int) -> Iterator[int]:
    """Yield the element indices of a bitmask in ascending order."""
    index = 0
    while mask:
        if mask & 1:
            yield index
        mask >>= 1
        index += 1


def mask_of(indices) -> int:
    """Build a bitmask from an iterable of element indices."""
    mask = 0
    for index in indices:
        mask |= 1 << index
    return mask


def full_mask(n: int) -> int:
    return (1 << n) - 1


def submasks(mask: int) -> Iterator[int]:
    """Yield every submask of ``mask`` in ascending numeric order."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = ((sub | ~mask) + 1) & mask


def to_fraction(value: Any) -> Fraction:
    """
    Convert a number or a "p/q" string to an exact Fraction.

    Floats are converted exactly (binary expansion), use
    :func:`snap_fraction` to get a short rational instead.

    Args:
        value: int, Fraction, float or rational string

    Returns:
        Fraction equal to the input

    Raises:
        ValueError: If the value cannot be read as a rational
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational")
        return Fraction(text)
    raise ValueError(f"not a rational: {value!r}")


def snap_fraction(value: float, max_denominator: int) -> Fraction:
    """Closest rational with a bounded denominator."""
    return Fraction(float(value)).limit_denominator(max_denominator)


def format_fraction(value: Fraction) -> str:
    """Render a Fraction as "p" or "p/q"."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def harmonic(m: int) -> Fraction:
    """H(m) = 1 + 1/2 + ... + 1/m, with H(0) = 0."""
    return sum((Fraction(1, i) for i in range(1, m + 1)), Fraction(0))


def graph_edges(graph: nx.Graph) -> List[Tuple[Any, Any]]:
    """
    Edge list of a graph in insertion order.

    Multigraph edges keep their parallel copies; the key is dropped
    because positions in this list are the edge identities.
    """
    if graph.is_multigraph():
        return [(u, v) for u, v, _ in graph.edges(keys=True)]
    return list(graph.edges())


def edge_label(u: Any, v: Any, position: int, seen: set) -> str:
    """Readable unique label for an edge."""
    label = f"{u}-{v}"
    if label in seen:
        label = f"{label}#{position}"
    seen.add(label)
    return label


def canonical_json(payload: Any) -> str:
    """Serialize with sorted keys and no whitespace."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_jsonable)


def digest(payload: Any) -> str:
    """sha256 hex digest of the canonical serialization."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def jsonable_number(value: Number) -> Union[int, str, float]:
    """Numbers for reports: ints stay ints, Fractions become "p/q"."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return value.numerator
        return format_fraction(value)
    return value


def rationals(values: Sequence[Any]) -> List[Fraction]:
    return [to_fraction(v) for v in values]
