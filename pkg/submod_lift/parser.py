"""
Instance file parser.

Instance files hold one JSON object per line (``#`` lines are comments).
Each object describes a ground set, a multivariate or decomposable
oracle, a constraint family and a task; see ``InstanceParser`` for the
recognised kinds.
"""
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import networkx as nx

from .blockers import (CardinalityFamily, Clutter, EdgeCoverFamily, ExplicitBlockingFamily,
                       HittingSetFamily, StPathFamily, VertexCoverFamily, pruned_network_family)
from .config import Settings, resolve
from .exceptions import InstanceParseError, SubmodError
from .lifting import LiftedGroundSet
from .matroids import (BasesFamily, FullSetFamily, Matroid, MatroidIntersection, PowerSetFamily,
                       make_graphic, make_laminar, make_partition, make_region,
                       make_uniform)
from .models import GroundSet
from .oracles import (MultivariateOracle, SubmodularOracle, make_concave_of_cardinality,
                      make_coverage, make_cut_function, make_decomposable, make_goel_allocation,
                      make_modular, make_quadratic, make_sensor_objective, make_table,
                      make_weighted_matroid_rank)
from .sfm import RingFamily
from .utils import canonical_json, digest, mask_of, to_fraction

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"
TASKS = ("min", "max", "robust", "lp", "ring")
ORACLE_KINDS = ("modular", "coverage", "concave-cardinality", "matroid-rank", "cut", "goel",
                "table", "decomposable", "quadratic", "sensor")
FAMILY_KINDS = ("free", "full", "uniform", "partition", "laminar", "graphic", "region", "bases",
                "intersection", "vertex-cover", "edge-cover", "hitting-set", "cardinality",
                "st-path", "clutter", "pruned-network", "ring")
MINIMIZATION_TASKS = ("min", "lp")


@dataclass
class Problem:
    """A parsed instance: constructed oracles and families plus its descriptor."""
    name: str
    ground: GroundSet
    k: int
    oracle: MultivariateOracle
    family: Any
    task: str
    agent_families: Optional[List[Any]] = None
    regions: Optional[List[int]] = None
    caps: Optional[List[int]] = None
    tau: int = 0
    seed: int = 0
    descriptor: Dict[str, Any] = field(default_factory=dict)
    line: Optional[int] = None

    @property
    def digest(self) -> str:
        return digest(self.descriptor)

    @property
    def agent_oracles(self) -> Optional[List[SubmodularOracle]]:
        """Per-agent oracles when the objective is decomposable."""
        return None if self.oracle.parts is None else list(self.oracle.parts)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "name": self.name,
            "digest": self.digest,
            "labels": list(self.ground.labels),
            "agents": self.k,
            "task": self.task,
            "family": getattr(self.family, "kind", type(self.family).__name__),
        }


class _Context:
    """Line number and field path for error messages."""

    def __init__(self, line: Optional[int], path: str = ""):
        self.line = line
        self.path = path

    def at(self, key: Any) -> "_Context":
        if isinstance(key, int):
            return _Context(self.line, f"{self.path}[{key}]")
        return _Context(self.line, f"{self.path}.{key}" if self.path else str(key))

    def error(self, message: str) -> InstanceParseError:
        return InstanceParseError(message, line=self.line, field=self.path or None)


class InstanceParser:
    """Parser for single instance records."""

    @staticmethod
    def serialize(descriptor: Dict[str, Any]) -> str:
        """Canonical one-line JSON (sorted keys) for an instance descriptor."""
        return canonical_json(descriptor)

    @staticmethod
    def parse_line(text: str, line: Optional[int] = None,
                   settings: Optional[Settings] = None) -> Problem:
        """
        Parse one JSON instance record.

        Args:
            text: JSON object text
            line: Line number used in error messages
            settings: Caps handed to families that need them

        Returns:
            Problem with constructed oracle and families

        Raises:
            InstanceParseError: For malformed JSON, unknown kinds, bad
                numbers or arity mismatches
        """
        ctx = _Context(line)
        try:
            record = json.loads(text)
        except json.JSONDecodeError as e:
            raise ctx.error(f"invalid JSON: {e.msg}") from e
        if not isinstance(record, dict):
            raise ctx.error("instance record must be a JSON object")
        return InstanceParser.parse_record(record, line, settings)

    @staticmethod
    def parse_record(record: Dict[str, Any], line: Optional[int] = None,
                     settings: Optional[Settings] = None) -> Problem:
        """Build a Problem from an already decoded instance object."""
        ctx = _Context(line)
        settings = resolve(settings)
        try:
            return _build_problem(record, ctx, settings)
        except InstanceParseError:
            raise
        except SubmodError as e:
            raise ctx.error(str(e)) from e
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            raise ctx.error(f"malformed instance: {e}") from e


class InstanceFileParser:
    """Parser for instance files holding one record per line."""

    @staticmethod
    def read_text(filepath: str) -> str:
        try:
            with open(filepath, "r", encoding="utf-8") as f:
                return f.read()
        except UnicodeDecodeError:
            with open(filepath, "r", encoding="latin-1") as f:
                return f.read()
        except IOError as e:
            raise FileNotFoundError(f"Could not read file {filepath}: {e}")

    @staticmethod
    def split_records(content: str) -> List[Tuple[int, str]]:
        """Non-empty, non-comment lines with their 1-based line numbers."""
        records = []
        for number, raw in enumerate(content.splitlines(), start=1):
            text = raw.strip()
            if text and not text.startswith("#"):
                records.append((number, text))
        return records

    @staticmethod
    def parse_file(filepath: str, settings: Optional[Settings] = None) -> List[Problem]:
        """
        Parse every instance in a file.

        Raises:
            FileNotFoundError: If the file cannot be read
            InstanceParseError: On the first malformed record
        """
        content = InstanceFileParser.read_text(filepath)
        problems = [InstanceParser.parse_line(text, number, settings)
                    for number, text in InstanceFileParser.split_records(content)]
        logger.debug("parsed %d instances from %s", len(problems), filepath)
        return problems

    @staticmethod
    def write_file(filepath: str, descriptors: Sequence[Dict[str, Any]]) -> None:
        with open(filepath, "w", encoding="utf-8") as f:
            for descriptor in descriptors:
                f.write(InstanceParser.serialize(descriptor) + "\n")


def parse_instance(path: str, settings: Optional[Settings] = None) -> List[Problem]:
    return InstanceFileParser.parse_file(path, settings)


# ---------------------------------------------------------------------------
# Field readers
# ---------------------------------------------------------------------------

def _require(obj: Dict[str, Any], key: str, ctx: _Context) -> Any:
    if not isinstance(obj, dict):
        raise ctx.error("expected a JSON object")
    if key not in obj:
        raise ctx.at(key).error(f"missing field '{key}'")
    return obj[key]


def _list(value: Any, ctx: _Context) -> List[Any]:
    if not isinstance(value, list):
        raise ctx.error("expected a list")
    return value


def _int(value: Any, ctx: _Context, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ctx.error(f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ctx.error(f"expected an integer >= {minimum}, got {value}")
    return value


def _number(value: Any, ctx: _Context) -> Fraction:
    try:
        return to_fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ctx.error(f"malformed number: {value!r}") from None


def _numbers(value: Any, ctx: _Context) -> List[Fraction]:
    return [_number(x, ctx.at(i)) for i, x in enumerate(_list(value, ctx))]


def _element(ref: Any, ground: GroundSet, ctx: _Context) -> int:
    """An element given by its label (string) or index (integer)."""
    if isinstance(ref, str):
        if ref not in ground.labels:
            raise ctx.error(f"unknown element label: {ref!r}")
        return ground.labels.index(ref)
    v = _int(ref, ctx, 0)
    if v >= ground.size:
        raise ctx.error(f"element index {v} is outside 0..{ground.size - 1}")
    return v


def _mask(refs: Any, ground: GroundSet, ctx: _Context) -> int:
    return mask_of(_element(ref, ground, ctx.at(i)) for i, ref in enumerate(_list(refs, ctx)))


def _masks(value: Any, ground: GroundSet, ctx: _Context) -> List[int]:
    return [_mask(refs, ground, ctx.at(i)) for i, refs in enumerate(_list(value, ctx))]


def _graph(obj: Dict[str, Any], ctx: _Context, nodes: Optional[Sequence[Any]] = None) -> nx.MultiGraph:
    """Multigraph from ``edges`` ([u, v] or [u, v, weight]) over optional ``nodes``."""
    graph = nx.MultiGraph()
    if nodes is not None:
        graph.add_nodes_from(str(node) for node in nodes)
    elif "nodes" in obj:
        graph.add_nodes_from(str(node) for node in _list(obj["nodes"], ctx.at("nodes")))
    for i, edge in enumerate(_list(_require(obj, "edges", ctx), ctx.at("edges"))):
        where = ctx.at("edges").at(i)
        if not isinstance(edge, list) or len(edge) not in (2, 3):
            raise where.error("edge must be [u, v] or [u, v, weight]")
        u, v = str(edge[0]), str(edge[1])
        if nodes is not None and (u not in graph or v not in graph):
            raise where.error(f"edge {u}-{v} uses an unknown node")
        weight = _number(edge[2], where.at(2)) if len(edge) == 3 else Fraction(1)
        graph.add_edge(u, v, weight=weight)
    return graph


def _same_ground(expected: GroundSet, actual: GroundSet, ctx: _Context) -> None:
    if expected != actual:
        raise ctx.error(f"labels {list(expected.labels)} do not match the induced ground set "
                        f"{list(actual.labels)}")


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def _kind(obj: Any, ctx: _Context, known: Sequence[str]) -> str:
    kind = _require(obj, "kind", ctx)
    if kind not in known:
        raise ctx.at("kind").error(f"unknown kind '{kind}'")
    return kind


def _univariate(obj: Dict[str, Any], ground: GroundSet, ctx: _Context,
                settings: Settings) -> SubmodularOracle:
    kind = _kind(obj, ctx, ORACLE_KINDS)
    if kind == "modular":
        return make_modular(ground, _numbers(_require(obj, "weights", ctx), ctx.at("weights")))
    if kind == "coverage":
        sets = [list(items) for items in _list(_require(obj, "sets", ctx), ctx.at("sets"))]
        weights = obj.get("weights")
        if weights is not None:
            if not isinstance(weights, dict):
                raise ctx.at("weights").error("coverage weights must map items to numbers")
            weights = {item: _number(w, ctx.at("weights").at(item)) for item, w in weights.items()}
        return make_coverage(ground, sets, weights)
    if kind == "concave-cardinality":
        return make_concave_of_cardinality(ground, _numbers(_require(obj, "table", ctx),
                                                            ctx.at("table")))
    if kind == "matroid-rank":
        matroid = _family(_require(obj, "matroid", ctx), ground, ctx.at("matroid"), "max", 1,
                          settings)
        if not isinstance(matroid, Matroid):
            raise ctx.at("matroid").error("matroid-rank needs a matroid family")
        return make_weighted_matroid_rank(matroid, _numbers(_require(obj, "weights", ctx),
                                                            ctx.at("weights")))
    if kind == "cut":
        graph = _graph(obj, ctx, nodes=ground.labels)
        return make_cut_function(graph)
    if kind == "goel":
        oracle = make_goel_allocation()
        _same_ground(ground, oracle.ground, ctx)
        return oracle
    if kind == "table":
        return make_table(ground, _numbers(_require(obj, "values", ctx), ctx.at("values")))
    raise ctx.at("kind").error(f"'{kind}' is a multivariate oracle kind")


def _oracle(obj: Dict[str, Any], ground: GroundSet, k: int, ctx: _Context,
            settings: Settings) -> MultivariateOracle:
    kind = _kind(obj, ctx, ORACLE_KINDS)
    if kind in ("decomposable", "sensor"):
        parts_ctx = ctx.at("parts")
        parts = [_univariate(part, ground, parts_ctx.at(i), settings)
                 for i, part in enumerate(_list(_require(obj, "parts", ctx), parts_ctx))]
        if len(parts) != k:
            raise parts_ctx.error(f"expected {k} agent oracles, got {len(parts)}")
        if kind == "decomposable":
            return make_decomposable(parts)
        weights = obj.get("weights")
        return make_sensor_objective(parts, _matrix(_require(obj, "matrix", ctx), ctx.at("matrix")),
                                     None if weights is None else _numbers(weights,
                                                                           ctx.at("weights")))
    if kind == "quadratic":
        weights = obj.get("weights")
        oracle = make_quadratic(ground, _matrix(_require(obj, "matrix", ctx), ctx.at("matrix")),
                                None if weights is None else _numbers(weights, ctx.at("weights")))
        if oracle.k != k:
            raise ctx.at("matrix").error(f"matrix is {oracle.k}x{oracle.k} for {k} agents")
        return oracle
    # A univariate oracle is shared by every agent.
    shared = _univariate(obj, ground, ctx, settings)
    return make_decomposable([shared] * k)


def _matrix(value: Any, ctx: _Context) -> List[List[Fraction]]:
    return [_numbers(row, ctx.at(i)) for i, row in enumerate(_list(value, ctx))]


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

def _family(obj: Dict[str, Any], ground: GroundSet, ctx: _Context, task: str, k: int,
            settings: Settings) -> Any:
    kind = _kind(obj, ctx, FAMILY_KINDS)
    minimizing = task in MINIMIZATION_TASKS
    if kind == "free":
        return CardinalityFamily(ground, 0) if minimizing else PowerSetFamily(ground)
    if kind == "full":
        return CardinalityFamily(ground, ground.size) if minimizing else FullSetFamily(ground)
    if kind == "uniform":
        return make_uniform(ground, _int(_require(obj, "b", ctx), ctx.at("b"), 0))
    if kind == "partition":
        parts = _masks(_require(obj, "parts", ctx), ground, ctx.at("parts"))
        caps = [_int(c, ctx.at("caps").at(i)) for i, c in
                enumerate(_list(_require(obj, "caps", ctx), ctx.at("caps")))]
        return make_partition(ground, parts, caps)
    if kind == "laminar":
        sets = _masks(_require(obj, "sets", ctx), ground, ctx.at("sets"))
        caps = [_int(c, ctx.at("caps").at(i)) for i, c in
                enumerate(_list(_require(obj, "caps", ctx), ctx.at("caps")))]
        return make_laminar(ground, sets, caps)
    if kind == "graphic":
        return make_graphic(_graph(obj, ctx), ground)
    if kind == "region":
        region = _mask(_require(obj, "region", ctx), ground, ctx.at("region"))
        b = obj.get("b")
        return make_region(ground, region, None if b is None else _int(b, ctx.at("b"), 0))
    if kind == "bases":
        matroid = _family(_require(obj, "matroid", ctx), ground, ctx.at("matroid"), "max", k,
                          settings)
        if not isinstance(matroid, Matroid):
            raise ctx.at("matroid").error("bases needs a matroid family")
        return BasesFamily(matroid)
    if kind == "intersection":
        members = []
        for i, item in enumerate(_list(_require(obj, "matroids", ctx), ctx.at("matroids"))):
            matroid = _family(item, ground, ctx.at("matroids").at(i), "max", k, settings)
            if not isinstance(matroid, Matroid):
                raise ctx.at("matroids").at(i).error("intersection members must be matroids")
            members.append(matroid)
        return MatroidIntersection(members)
    if kind == "vertex-cover":
        family = VertexCoverFamily(nx.Graph(_graph(obj, ctx, nodes=ground.labels)))
    elif kind == "edge-cover":
        family = EdgeCoverFamily(_graph(obj, ctx))
    elif kind == "hitting-set":
        family = HittingSetFamily(ground, _masks(_require(obj, "sets", ctx), ground,
                                                 ctx.at("sets")))
    elif kind == "cardinality":
        family = CardinalityFamily(ground, _int(_require(obj, "m", ctx), ctx.at("m"), 0))
    elif kind == "st-path":
        family = StPathFamily(_graph(obj, ctx), str(_require(obj, "s", ctx)),
                              str(_require(obj, "t", ctx)), settings)
    elif kind == "clutter":
        blockers = _masks(_require(obj, "blockers", ctx), ground, ctx.at("blockers"))
        family = ExplicitBlockingFamily(Clutter.from_sets(ground, blockers))
    elif kind == "pruned-network":
        family = pruned_network_family(_graph(obj, ctx),
                                       _int(_require(obj, "tau", ctx), ctx.at("tau"), 0))
    else:
        return _ring(obj, ground, ctx, k)
    _same_ground(ground, family.ground, ctx)
    return family


def _lifted_element(ref: Any, lifted: LiftedGroundSet, ctx: _Context) -> int:
    if not isinstance(ref, list) or len(ref) != 2:
        raise ctx.error("lifted element must be [agent, element]")
    agent = _int(ref[0], ctx.at(0), 0)
    if agent >= lifted.k:
        raise ctx.at(0).error(f"agent {agent} is outside 0..{lifted.k - 1}")
    return lifted.index(agent, _element(ref[1], lifted.base, ctx.at(1)))


def _ring(obj: Dict[str, Any], ground: GroundSet, ctx: _Context, k: int) -> RingFamily:
    """Ring family over the lifted ground set; elements are [agent, element] pairs."""
    lifted = LiftedGroundSet(ground, k)

    def lifted_mask(key: str) -> Optional[int]:
        if obj.get(key) is None:
            return None
        where = ctx.at(key)
        return mask_of(_lifted_element(ref, lifted, where.at(i))
                       for i, ref in enumerate(_list(obj[key], where)))

    implications = []
    for i, pair in enumerate(_list(obj.get("implications", []), ctx.at("implications"))):
        where = ctx.at("implications").at(i)
        if not isinstance(pair, list) or len(pair) != 2:
            raise where.error("implication must be [from, to]")
        implications.append((_lifted_element(pair[0], lifted, where.at(0)),
                             _lifted_element(pair[1], lifted, where.at(1))))
    return RingFamily(lifted.ground, implications, lifted_mask("lower") or 0,
                      lifted_mask("upper"))


# ---------------------------------------------------------------------------
# Problem assembly
# ---------------------------------------------------------------------------

def _build_problem(record: Dict[str, Any], ctx: _Context, settings: Settings) -> Problem:
    version = str(record.get("version", FORMAT_VERSION))
    if version != FORMAT_VERSION:
        raise ctx.at("version").error(f"unsupported format version '{version}'")
    labels = _list(_require(record, "labels", ctx), ctx.at("labels"))
    if not labels:
        raise ctx.at("labels").error("ground set must have at least one element")
    if len(set(map(str, labels))) != len(labels):
        raise ctx.at("labels").error("labels must be unique")
    ground = GroundSet.from_labels(labels)
    k = _int(record.get("agents", 1), ctx.at("agents"), 1)

    task_obj = _require(record, "task", ctx)
    task_ctx = ctx.at("task")
    task = _require(task_obj, "kind", task_ctx)
    if task not in TASKS:
        raise task_ctx.at("kind").error(f"unknown task '{task}'")
    tau = _int(task_obj.get("tau", 0), task_ctx.at("tau"), 0)
    if task == "robust" and tau > ground.size * k:
        raise task_ctx.at("tau").error(f"tau {tau} exceeds n*k = {ground.size * k}")

    oracle = _oracle(_require(record, "oracle", ctx), ground, k, ctx.at("oracle"), settings)
    family = _family(_require(record, "constraint", ctx), ground, ctx.at("constraint"), task, k,
                     settings)
    if task == "ring" and not isinstance(family, RingFamily):
        raise ctx.at("constraint").error("ring tasks need a ring constraint")

    agent_families = None
    if record.get("agent_constraints") is not None:
        where = ctx.at("agent_constraints")
        items = _list(record["agent_constraints"], where)
        if len(items) != k:
            raise where.error(f"expected {k} agent constraints, got {len(items)}")
        agent_families = [_family(item, ground, where.at(i), "max", k, settings)
                          for i, item in enumerate(items)]

    regions = None
    if record.get("regions") is not None:
        regions = _masks(record["regions"], ground, ctx.at("regions"))
        if len(regions) != k:
            raise ctx.at("regions").error(f"expected {k} regions, got {len(regions)}")
    caps = None
    if record.get("caps") is not None:
        caps = [_int(c, ctx.at("caps").at(i), 0)
                for i, c in enumerate(_list(record["caps"], ctx.at("caps")))]
        if len(caps) != k:
            raise ctx.at("caps").error(f"expected {k} caps, got {len(caps)}")

    return Problem(
        name=str(record.get("name", "")),
        ground=ground,
        k=k,
        oracle=oracle,
        family=family,
        task=task,
        agent_families=agent_families,
        regions=regions,
        caps=caps,
        tau=tau,
        seed=_int(record.get("seed", 0), ctx.at("seed")),
        descriptor=record,
        line=ctx.line,
    )
