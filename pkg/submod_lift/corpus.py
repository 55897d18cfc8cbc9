"""
Benchmark corpus generators.

Every generator returns instance descriptors (plain dicts in the instance
file format) drawn from ``numpy.random.default_rng(seed)``, so the same
seed always yields the same corpus.
"""
import logging
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from .config import Settings, resolve
from .exceptions import CapExceededError, PreconditionError
from .matroids import graphic_ground
from .parser import FORMAT_VERSION, InstanceFileParser
from .utils import format_fraction

logger = logging.getLogger(__name__)

Descriptor = Dict[str, Any]


def _labels(n: int) -> List[str]:
    return [f"v{i}" for i in range(n)]


def _edge_labels(nodes: List[str], edges: List[List[str]]) -> List[str]:
    """Labels the parser will give the edges of this graph."""
    graph = nx.MultiGraph()
    graph.add_nodes_from(nodes)
    graph.add_edges_from((u, v) for u, v in edges)
    return list(graphic_ground(graph)[0].labels)


def _random_graph(rng: np.random.Generator, n: int, p: float = 0.5,
                  connected: bool = False) -> List[List[str]]:
    """Edges of G(n, p); a random spanning path is added when ``connected``."""
    nodes = _labels(n)
    edges = set()
    if connected:
        order = [int(x) for x in rng.permutation(n)]
        for a, b in zip(order, order[1:]):
            edges.add((min(a, b), max(a, b)))
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                edges.add((a, b))
    if not edges:
        edges.add((0, 1))
    return [[nodes[a], nodes[b]] for a, b in sorted(edges)]


def _coverage(rng: np.random.Generator, n: int, universe: int = 6) -> Descriptor:
    sets = []
    for _ in range(n):
        size = int(rng.integers(1, 4))
        sets.append(sorted(int(x) for x in rng.choice(universe, size=size, replace=False)))
    weights = {str(item): int(rng.integers(1, 5)) for item in range(universe)}
    return {"kind": "coverage", "sets": [[str(x) for x in items] for items in sets],
            "weights": weights}


def _concave(rng: np.random.Generator, n: int) -> Descriptor:
    steps = sorted((int(x) for x in rng.integers(0, 6, size=n)), reverse=True)
    table = [0]
    for step in steps:
        table.append(table[-1] + step)
    return {"kind": "concave-cardinality", "table": table}


def _modular(rng: np.random.Generator, n: int) -> Descriptor:
    return {"kind": "modular", "weights": [int(x) for x in rng.integers(1, 10, size=n)]}


def _monotone_oracle(rng: np.random.Generator, n: int) -> Descriptor:
    """Random normalized monotone submodular cost."""
    choice = int(rng.integers(0, 3))
    if choice == 0:
        return _coverage(rng, n)
    if choice == 1:
        return _concave(rng, n)
    return _modular(rng, n)


def _agents(rng: np.random.Generator, n: int, k: int) -> Descriptor:
    return {"kind": "decomposable", "parts": [_monotone_oracle(rng, n) for _ in range(k)]}


def _instance(name: str, labels: List[str], k: int, oracle: Descriptor, constraint: Descriptor,
              task: Descriptor, seed: int, **extra: Any) -> Descriptor:
    record = {"version": FORMAT_VERSION, "name": name, "labels": labels, "agents": k,
              "oracle": oracle, "constraint": constraint, "task": task, "seed": seed}
    record.update({key: value for key, value in extra.items() if value is not None})
    return record


def _vertex_cover(rng, n, k, index, seed):
    labels = _labels(n)
    edges = _random_graph(rng, n)
    return _instance(f"vertex-cover-{index}", labels, k, _agents(rng, n, k),
                     {"kind": "vertex-cover", "edges": edges}, {"kind": "min"}, seed)


def _edge_cover(rng, n, k, index, seed):
    nodes = _labels(n)
    edges = _random_graph(rng, n, p=0.3, connected=True)
    labels = _edge_labels(nodes, edges)
    m = len(labels)
    return _instance(f"edge-cover-{index}", labels, k, _agents(rng, m, k),
                     {"kind": "edge-cover", "nodes": nodes, "edges": edges}, {"kind": "min"},
                     seed)


def _welfare(rng, n, k, index, seed):
    labels = _labels(n)
    oracle = {"kind": "decomposable", "parts": [_coverage(rng, n) for _ in range(k)]}
    if rng.random() < 0.5:
        constraint = {"kind": "free"}
    else:
        constraint = {"kind": "uniform", "b": int(rng.integers(1, n + 1))}
    return _instance(f"welfare-{index}", labels, k, oracle, constraint, {"kind": "max"}, seed)


def _sensor(rng, n, k, index, seed):
    """Coverage benefit minus a redundancy penalty with m_ij + m_ji >= 0."""
    labels = _labels(n)
    matrix = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            matrix[i][j] = Fraction(int(rng.integers(0, 3)), 4)
    oracle = {"kind": "sensor", "parts": [_coverage(rng, n) for _ in range(k)],
              "matrix": [[format_fraction(x) for x in row] for row in matrix]}
    regions = _regions(rng, n, k)
    agent_constraints = [{"kind": "region", "region": [labels[v] for v in region],
                          "b": max(1, len(region) // 2)} for region in regions]
    return _instance(f"sensor-{index}", labels, k, oracle, {"kind": "free"}, {"kind": "max"},
                     seed, agent_constraints=agent_constraints)


def _recommendation(rng, n, k, index, seed):
    """Each agent picks from genres through a partition or laminar matroid."""
    labels = _labels(n)
    genres = [int(x) for x in rng.integers(0, 2, size=n)]
    parts = [[labels[v] for v in range(n) if genres[v] == g] for g in (0, 1)]
    parts = [part for part in parts if part]
    agent_constraints = []
    for _ in range(k):
        if rng.random() < 0.5:
            agent_constraints.append({"kind": "partition", "parts": parts,
                                      "caps": [1] * len(parts)})
        else:
            outer = [labels] if len(parts) > 1 else []
            agent_constraints.append({"kind": "laminar", "sets": parts + outer,
                                      "caps": [1] * len(parts) + [max(1, n // 2)] * len(outer)})
    oracle = {"kind": "decomposable", "parts": [_monotone_oracle(rng, n) for _ in range(k)]}
    constraint = {"kind": "uniform", "b": max(1, n // 2)}
    return _instance(f"recommendation-{index}", labels, k, oracle, constraint, {"kind": "max"},
                     seed, agent_constraints=agent_constraints)


def _pruned_network(rng, n, k, index, seed, tau: int = 1):
    nodes = _labels(n)
    edges = _random_graph(rng, n, p=0.5, connected=True)
    labels = _edge_labels(nodes, edges)
    return _instance(f"pruned-network-{index}", labels, k, _agents(rng, len(labels), k),
                     {"kind": "pruned-network", "nodes": nodes, "edges": edges, "tau": tau},
                     {"kind": "min"}, seed)


def _regions(rng: np.random.Generator, n: int, k: int) -> List[List[int]]:
    """k regions covering V: each element gets a home agent plus random extras."""
    regions = [set() for _ in range(k)]
    for v in range(n):
        regions[int(rng.integers(0, k))].add(v)
        for i in range(k):
            if rng.random() < 0.3:
                regions[i].add(v)
    for i in range(k):
        if not regions[i]:
            regions[i].add(int(rng.integers(0, n)))
    return [sorted(region) for region in regions]


def _msca(rng, n, k, index, seed):
    labels = _labels(n)
    regions = _regions(rng, n, k)
    return _instance(f"msca-{index}", labels, k, _agents(rng, n, k), {"kind": "full"},
                     {"kind": "min"}, seed,
                     regions=[[labels[v] for v in region] for region in regions],
                     caps=[len(region) for region in regions])


GENERATORS: Dict[str, Callable[..., Descriptor]] = {
    "vertex-cover": _vertex_cover,
    "edge-cover": _edge_cover,
    "welfare": _welfare,
    "sensor-quadratic": _sensor,
    "recommendation": _recommendation,
    "pruned-network": _pruned_network,
    "msca": _msca,
}


def generate_corpus(family: str, n: int = 6, k: int = 2, count: int = 10, seed: int = 0,
                    settings: Optional[Settings] = None) -> List[Descriptor]:
    """
    Generate ``count`` instances of one benchmark family.

    Args:
        family: One of ``GENERATORS``
        n: Number of elements (nodes for graph families)
        k: Number of agents
        count: Number of instances
        seed: Seed for ``numpy.random.default_rng``

    Returns:
        Instance descriptors in the instance file format

    Raises:
        PreconditionError: For an unknown family or bad sizes
        CapExceededError: If n exceeds the brute-force cap
    """
    settings = resolve(settings)
    if family not in GENERATORS:
        raise PreconditionError(f"unknown corpus family '{family}'; "
                                f"expected one of {', '.join(GENERATORS)}")
    if n < 2 or k < 1 or count < 0:
        raise PreconditionError("corpus needs n >= 2, k >= 1 and count >= 0")
    if n > settings.brute_cap:
        raise CapExceededError("generate_corpus", n, settings.brute_cap)
    rng = np.random.default_rng(seed)
    records = [GENERATORS[family](rng, n, k, index, seed) for index in range(count)]
    logger.debug("generated %d %s instances (n=%d, k=%d, seed=%d)", count, family, n, k, seed)
    return records


def write_corpus(path: str, records: List[Descriptor]) -> Tuple[str, int]:
    InstanceFileParser.write_file(path, records)
    return path, len(records)
