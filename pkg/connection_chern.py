"""Compatible connections, Chern-label compatibility and symplectic-class transport.

A connection assigns to every oriented edge e = (p, q) a bijection
nabla_e: star(p) -> star(q) with nabla of the reversed edge equal to the
inverse, and e itself sent to its reversal. It is compatible with the axial
function when alpha(nabla_e e') - alpha(e') is a rational multiple of alpha_e
(an integer multiple in strict mode). Under 3-independence the compatible
connection is unique.

Edge geometry attaches to each edge a positive rational length a_e and an
integer Chern label c_e in a user-declared model of H^2(F; Z); reversal keeps
the length and negates the label. Crossing an edge updates the symplectic
class by [omega_F'] = [omega_F] + a_e * c_e.
"""

import logging
import random
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from exact_algebra import LinearForm, parse_rational, render_rational
from gkm_errors import (
    AmbiguousMatch,
    BrokenPath,
    InvalidGeometry,
    MissingChernData,
    NoMatch,
    NotThreeIndependent,
)
from gkm_graph import GkmGraph, OrientedEdge, independence_degree

logger = logging.getLogger(__name__)

# Least recently used entries are evicted past CONNECTION_CACHE_SIZE.
CONNECTION_CACHE_SIZE = 128
_connection_cache: "OrderedDict[Tuple[str, bool], Connection]" = OrderedDict()
_cache_lock = threading.Lock()


# ============================================================================
# DATA MODELS
# ============================================================================

@dataclass(frozen=True)
class Connection:
    """nabla_e for every oriented edge e, as a map star(i(e)) -> star(t(e))."""
    maps: Dict[OrientedEdge, Dict[OrientedEdge, OrientedEdge]]
    strict: bool = False

    def transport(self, edge: OrientedEdge, other: OrientedEdge) -> OrientedEdge:
        return self.maps[edge][other]

    def to_dict(self) -> Dict:
        return {
            "strict": self.strict,
            "edges": [
                {
                    "edge": edge.label,
                    "map": [{"from": a.label, "to": b.label} for a, b in mapping.items()],
                }
                for edge, mapping in self.maps.items()
            ],
        }


@dataclass(frozen=True)
class OmegaClass:
    """Rational vector representing [omega_F] in the H^2 model."""
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))

    @classmethod
    def zero(cls, dimension: int) -> "OmegaClass":
        return cls((Fraction(0),) * dimension)

    @classmethod
    def parse(cls, text: str) -> "OmegaClass":
        return cls(tuple(parse_rational(part) for part in text.split(",") if part.strip()))

    @property
    def dimension(self) -> int:
        return len(self.values)

    @property
    def is_zero(self) -> bool:
        return not any(self.values)

    def __add__(self, other: "OmegaClass") -> "OmegaClass":
        if other.dimension != self.dimension:
            raise InvalidGeometry(f"class dimensions differ: {self.dimension} vs {other.dimension}")
        return OmegaClass(tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "OmegaClass") -> "OmegaClass":
        return self + OmegaClass(tuple(-v for v in other.values))

    def render(self) -> str:
        return ",".join(render_rational(v) for v in self.values)


@dataclass(frozen=True)
class EdgeGeometry:
    """Per-edge length a_e and Chern label c_e, stored for the edge's stored orientation.

    Entries may be None when the interchange file omits them; operations that
    need them raise MissingChernData.
    """
    chern_rank: int
    lengths: Tuple[Optional[Fraction], ...]
    cherns: Tuple[Optional[Tuple[int, ...]], ...]

    def __post_init__(self):
        if self.chern_rank < 0:
            raise InvalidGeometry(f"chern_rank must be non-negative, got {self.chern_rank}")
        if len(self.lengths) != len(self.cherns):
            raise InvalidGeometry("lengths and chern labels cover different edge counts")
        for index, length in enumerate(self.lengths):
            if length is not None and length <= 0:
                raise InvalidGeometry(f"edge {index} has non-positive length {render_rational(length)}")
        for index, chern in enumerate(self.cherns):
            if chern is not None and len(chern) != self.chern_rank:
                raise InvalidGeometry(
                    f"edge {index} chern label has length {len(chern)}, declared chern_rank is {self.chern_rank}"
                )

    @classmethod
    def from_records(
        cls,
        graph: GkmGraph,
        lengths: Mapping[int, object],
        cherns: Mapping[int, Sequence[int]],
        chern_rank: Optional[int] = None,
    ) -> "EdgeGeometry":
        """Build from per-edge-index data; lengths accept "p/q" strings, ints or Fractions."""
        if chern_rank is None:
            chern_rank = len(next(iter(cherns.values()))) if cherns else 0
        return cls(
            chern_rank,
            tuple(parse_rational(lengths[e.index]) if lengths.get(e.index) is not None else None for e in graph.edges),
            tuple(tuple(int(c) for c in cherns[e.index]) if cherns.get(e.index) is not None else None
                  for e in graph.edges),
        )

    @classmethod
    def untwisted(cls, graph: GkmGraph, chern_rank: int, length: Fraction = Fraction(1)) -> "EdgeGeometry":
        """Every edge gets the same length and the zero Chern label."""
        return cls(
            chern_rank,
            tuple(Fraction(length) for _ in graph.edges),
            tuple((0,) * chern_rank for _ in graph.edges),
        )

    def with_chern(self, index: int, chern: Sequence[int]) -> "EdgeGeometry":
        cherns = list(self.cherns)
        cherns[index] = tuple(int(c) for c in chern)
        return EdgeGeometry(self.chern_rank, self.lengths, tuple(cherns))

    @property
    def is_complete(self) -> bool:
        return all(a is not None for a in self.lengths) and self.has_cherns

    @property
    def has_cherns(self) -> bool:
        return all(c is not None for c in self.cherns)

    def length(self, edge: OrientedEdge) -> Fraction:
        value = self.lengths[edge.index]
        if value is None:
            raise MissingChernData(f"edge {edge.label} has no length")
        return value

    def chern(self, edge: OrientedEdge) -> Tuple[int, ...]:
        value = self.cherns[edge.index]
        if value is None:
            raise MissingChernData(f"edge {edge.label} has no chern label")
        return value if edge.forward else tuple(-c for c in value)


@dataclass
class ChernViolation:
    """c(nabla_e e_i) != c(e_i) for a non-traversed edge e_i, or a broken reversal sign."""
    traversed: OrientedEdge
    edge: OrientedEdge
    image: OrientedEdge
    edge_chern: Tuple[int, ...]
    image_chern: Tuple[int, ...]


@dataclass
class ChernReport:
    violations: List[ChernViolation] = field(default_factory=list)

    @property
    def is_compatible(self) -> bool:
        return not self.violations

    def flagged_edges(self) -> List[int]:
        """Indices of traversed edges with at least one violation."""
        return sorted({v.traversed.index for v in self.violations})

    def to_dict(self) -> Dict:
        return {
            "compatible": self.is_compatible,
            "violations": [
                {
                    "traversed": v.traversed.label,
                    "edge": v.edge.label,
                    "image": v.image.label,
                    "edge_chern": list(v.edge_chern),
                    "image_chern": list(v.image_chern),
                }
                for v in self.violations
            ],
        }


# ============================================================================
# CONNECTION
# ============================================================================

def _congruent(difference: LinearForm, alpha: LinearForm, strict: bool) -> bool:
    ratio = alpha.ratio_to(difference)
    if ratio is None:
        return False
    return ratio.denominator == 1 if strict else True


def _match_edge(
    graph: GkmGraph,
    edge: OrientedEdge,
    strict: bool,
    rng: Optional[random.Random],
) -> Dict[OrientedEdge, OrientedEdge]:
    reverse = edge.reversed()
    candidates = [c for c in graph.star(edge.target) if c != reverse]
    mapping = {edge: reverse}
    for other in graph.star(edge.source):
        if other == edge:
            continue
        order = list(candidates)
        if rng is not None:
            rng.shuffle(order)
        matches = [c for c in order if _congruent(c.weight - other.weight, edge.weight, strict)]
        if len(matches) > 1:
            raise AmbiguousMatch(
                f"along {edge.label}, {other.label} is congruent to {len(matches)} edges at "
                f"{edge.target!r}: {sorted(m.label for m in matches)}",
                edge=edge, partner=other,
            )
        if not matches:
            raise NoMatch(f"along {edge.label}, no edge at {edge.target!r} matches {other.label}", edge=edge, partner=other)
        mapping[other] = matches[0]
    if len(set(mapping.values())) != len(mapping):
        raise NoMatch(f"along {edge.label}, the matching is not injective", edge=edge)
    return mapping


def compute_connection(graph: GkmGraph, strict: bool = False, scan_seed: Optional[int] = None) -> Connection:
    """The compatible connection, unique when every star is 3-independent.

    Stars that are only 2-independent are still attempted, and ambiguity is
    reported as AmbiguousMatch. `scan_seed` shuffles the candidate scan order
    and bypasses the cache.
    """
    key = (graph.content_hash(), strict)
    if scan_seed is None:
        with _cache_lock:
            cached = _connection_cache.get(key)
            if cached is not None:
                _connection_cache.move_to_end(key)
        if cached is not None:
            return cached

    for v in graph.vertices:
        star = graph.star(v)
        degree = independence_degree(star)
        if degree < min(2, star.size):
            raise NotThreeIndependent(f"star at {v!r} is not pairwise independent (degree {degree})", vertex=v)
        if degree < min(3, star.size):
            logger.warning(f"star at {v!r} is only {degree}-independent; a compatible connection need not be unique")

    rng = random.Random(scan_seed) if scan_seed is not None else None
    maps = {edge: _match_edge(graph, edge, strict, rng) for edge in graph.oriented_edges()}

    for edge, mapping in maps.items():
        inverse = maps[edge.reversed()]
        for source, image in mapping.items():
            if inverse.get(image) != source:
                raise NoMatch(f"inverse property fails along {edge.label} at {source.label}", edge=edge, partner=source)

    connection = Connection(maps, strict)
    if scan_seed is None:
        with _cache_lock:
            _connection_cache[key] = connection
            while len(_connection_cache) > CONNECTION_CACHE_SIZE:
                _connection_cache.popitem(last=False)
    logger.info(f"connection computed on {len(maps)} oriented edges")
    return connection


def clear_connection_cache() -> None:
    """Drop every cached connection; long-lived callers may also lower CONNECTION_CACHE_SIZE."""
    with _cache_lock:
        _connection_cache.clear()


def connection_holonomy(graph: GkmGraph, connection: Connection, cycle: Sequence[OrientedEdge]) -> Dict[OrientedEdge, OrientedEdge]:
    """Permutation of star(base) obtained by composing nabla around a closed path."""
    _check_chain(cycle, closed=True)
    base = cycle[0].source
    holonomy = {}
    for start in graph.star(base):
        current = start
        for edge in cycle:
            current = connection.transport(edge, current)
        holonomy[start] = current
    return holonomy


# ============================================================================
# CHERN LABELS AND TRANSPORT
# ============================================================================

def check_chern_compat(graph: GkmGraph, connection: Connection, geometry: EdgeGeometry) -> ChernReport:
    """Check c(nabla_e e_i) = c(e_i) for non-traversed e_i, and c(reversed e) = -c(e)."""
    if not geometry.has_cherns:
        missing = [i for i, c in enumerate(geometry.cherns) if c is None]
        raise MissingChernData(f"chern labels missing on edges {missing}")
    report = ChernReport()
    for edge in graph.oriented_edges():
        reverse = edge.reversed()
        if geometry.chern(reverse) != tuple(-c for c in geometry.chern(edge)):
            report.violations.append(ChernViolation(edge, edge, reverse, geometry.chern(edge), geometry.chern(reverse)))
        for other in graph.star(edge.source):
            if other == edge:
                continue
            image = connection.transport(edge, other)
            if geometry.chern(image) != geometry.chern(other):
                report.violations.append(
                    ChernViolation(edge, other, image, geometry.chern(other), geometry.chern(image))
                )
    return report


def _check_chain(path: Sequence[OrientedEdge], closed: bool = False) -> None:
    for before, after in zip(path, path[1:]):
        if before.target != after.source:
            raise BrokenPath(f"{before.label} ends at {before.target!r} but {after.label} starts at {after.source!r}")
    if closed:
        if not path:
            raise BrokenPath("a cycle needs at least one edge")
        if path[-1].target != path[0].source:
            raise BrokenPath(f"path from {path[0].source!r} ends at {path[-1].target!r}; not closed")


def path_from_vertices(graph: GkmGraph, vertices: Sequence[str]) -> List[OrientedEdge]:
    """Oriented edges through consecutive vertices; each step must be a unique edge."""
    path = []
    for source, target in zip(vertices, vertices[1:]):
        if source not in graph.vertices or target not in graph.vertices:
            raise BrokenPath(f"unknown vertex in step {source!r} -> {target!r}")
        step = graph.edges_between(source, target)
        if not step:
            raise BrokenPath(f"no edge between {source!r} and {target!r}")
        if len(step) > 1:
            raise BrokenPath(f"{len(step)} parallel edges between {source!r} and {target!r}; step is ambiguous")
        path.append(step[0])
    return path


def transport_omega(
    graph: GkmGraph,
    geometry: EdgeGeometry,
    path: Sequence[OrientedEdge],
    omega: OmegaClass,
) -> List[OmegaClass]:
    """Symplectic class at each vertex along the path, starting with omega."""
    _check_chain(path)
    if omega.dimension != geometry.chern_rank:
        raise InvalidGeometry(f"class has dimension {omega.dimension}, chern_rank is {geometry.chern_rank}")
    classes = [omega]
    for edge in path:
        length = geometry.length(edge)
        shift = OmegaClass(tuple(length * c for c in geometry.chern(edge)))
        classes.append(classes[-1] + shift)
    return classes


def cycle_defect(graph: GkmGraph, geometry: EdgeGeometry, cycle: Sequence[OrientedEdge]) -> OmegaClass:
    """Net change of the transported class around a closed path."""
    _check_chain(cycle, closed=True)
    start = OmegaClass.zero(geometry.chern_rank)
    return transport_omega(graph, geometry, cycle, start)[-1] - start


def fundamental_cycles(graph: GkmGraph) -> List[List[OrientedEdge]]:
    """One closed path per non-tree edge of a BFS spanning tree rooted at the first vertex."""
    root = graph.vertices[0]
    multigraph = graph.to_networkx()
    parent: Dict[str, OrientedEdge] = {}
    tree_edges = set()
    for u, v in nx.bfs_edges(multigraph, root):
        index = min(multigraph[u][v])
        step = graph.oriented(index, graph.edges[index].source == u)
        parent[v] = step
        tree_edges.add(index)

    def path_from_root(vertex: str) -> List[OrientedEdge]:
        steps = []
        while vertex != root:
            step = parent[vertex]
            steps.append(step)
            vertex = step.source
        return list(reversed(steps))

    cycles = []
    for edge in graph.edges:
        if edge.index in tree_edges:
            continue
        closing = graph.oriented(edge.index)
        back = [step.reversed() for step in reversed(path_from_root(closing.target))]
        cycles.append(path_from_root(closing.source) + [closing] + back)
    return cycles
