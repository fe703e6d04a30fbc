"""Labeled-graph model of a torus action: vertices, oriented edges, axial function.

A GkmGraph stores every unoriented edge once, together with the weight for its
stored orientation. Reversing an edge negates the weight, so the reversal axiom
(alpha of the reversed edge = -alpha_e) holds by construction and never needs
to be validated.

Validation covers the remaining axioms:
- regularity (every vertex has the same valence d)
- connectivity
- nonzero axial values and pairwise independence at each vertex star
- the weight-multiset form of the third axiom: for an edge e = (p, q), the
  weights at p and at q agree as multisets once restricted to ker(alpha_e)

Morse data (index sigma_p, Betti numbers) is computed from a generic direction xi.
"""

import hashlib
import json
import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import networkx as nx

from exact_algebra import LinearForm, rank_of_forms, restrict_mod_form
from gkm_errors import MalformedGraph, NonGenericDirection, Unreachable

logger = logging.getLogger(__name__)

WeightLike = Union[LinearForm, Sequence[int]]

_GENERIC_ATTEMPTS = 64
_GENERIC_INITIAL_BOUND = 2


# ============================================================================
# DATA MODELS
# ============================================================================

@dataclass(frozen=True)
class Edge:
    """Unoriented edge, stored with the weight of its source -> target orientation."""
    index: int
    source: str
    target: str
    weight: LinearForm


@dataclass(frozen=True)
class OrientedEdge:
    """An edge viewed in one orientation; weight already matches that orientation."""
    index: int
    source: str
    target: str
    weight: LinearForm
    forward: bool = True

    def reversed(self) -> "OrientedEdge":
        return OrientedEdge(self.index, self.target, self.source, -self.weight, not self.forward)

    @property
    def label(self) -> str:
        return f"{self.source}->{self.target}#{self.index}"

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class VertexStar:
    """Outgoing oriented edges at a vertex, sorted by (target, edge index)."""
    vertex: str
    edges: Tuple[OrientedEdge, ...]

    @property
    def weights(self) -> List[LinearForm]:
        return [e.weight for e in self.edges]

    @property
    def size(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)


@dataclass(frozen=True)
class GenericDirection:
    """Integer vector xi with alpha_e(xi) != 0 on every edge it was checked against."""
    xi: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(int(x) for x in self.xi))

    def negated(self) -> "GenericDirection":
        return GenericDirection(tuple(-x for x in self.xi))


@dataclass(frozen=True)
class BettiVector:
    """beta_i = number of vertices of Morse index i, for i = 0..d."""
    values: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, index: int) -> int:
        return self.values[index]

    @property
    def total(self) -> int:
        return sum(self.values)

    def reversed(self) -> "BettiVector":
        return BettiVector(tuple(reversed(self.values)))

    def render(self) -> str:
        return ",".join(str(v) for v in self.values)


@dataclass(frozen=True)
class Violation:
    """One failed axiom check."""
    axiom: str
    location: str
    message: str


@dataclass
class ValidationReport:
    """Axiom violations found by validate(); empty means valid."""
    violations: List[Violation] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def by_axiom(self, axiom: str) -> List[Violation]:
        return [v for v in self.violations if v.axiom == axiom]

    def to_dict(self) -> Dict:
        return {
            "valid": self.is_valid,
            "violations": [
                {"axiom": v.axiom, "location": v.location, "message": v.message}
                for v in self.violations
            ],
        }


def _as_form(weight: WeightLike) -> LinearForm:
    return weight if isinstance(weight, LinearForm) else LinearForm(tuple(weight))


# ============================================================================
# GRAPH
# ============================================================================

@dataclass(frozen=True)
class GkmGraph:
    """Regular graph with an axial function, immutable after construction.

    Vertex identifiers are opaque strings kept in lexicographic order. Edge
    indices follow the order in which edges were supplied.
    """
    rank: int
    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    _stars: Dict[str, VertexStar] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise MalformedGraph(f"rank must be a positive integer, got {self.rank!r}")
        vertices = tuple(sorted(str(v) for v in self.vertices))
        if not vertices:
            raise MalformedGraph("graph has no vertices")
        if len(set(vertices)) != len(vertices):
            duplicates = sorted(v for v, n in Counter(vertices).items() if n > 1)
            raise MalformedGraph(f"duplicate vertex identifiers: {duplicates}")
        object.__setattr__(self, "vertices", vertices)

        known = set(vertices)
        outgoing: Dict[str, List[OrientedEdge]] = {v: [] for v in vertices}
        for position, edge in enumerate(self.edges):
            if edge.index != position:
                raise MalformedGraph(f"edge {edge.index} stored at position {position}")
            for endpoint in (edge.source, edge.target):
                if endpoint not in known:
                    raise MalformedGraph(f"edge {edge.index} has dangling endpoint {endpoint!r}")
            if edge.source == edge.target:
                raise MalformedGraph(f"edge {edge.index} is a self-loop at {edge.source!r}")
            if edge.weight.rank != self.rank:
                raise MalformedGraph(
                    f"edge {edge.index} weight has length {edge.weight.rank}, graph rank is {self.rank}"
                )
            forward = OrientedEdge(edge.index, edge.source, edge.target, edge.weight, True)
            outgoing[edge.source].append(forward)
            outgoing[edge.target].append(forward.reversed())

        stars = {}
        for v in vertices:
            ordered = tuple(sorted(outgoing[v], key=lambda e: (e.target, e.index)))
            stars[v] = VertexStar(v, ordered)
            # parallel edges must carry non-proportional weights
            by_target: Dict[str, List[OrientedEdge]] = {}
            for e in ordered:
                by_target.setdefault(e.target, []).append(e)
            for target, parallel in by_target.items():
                for a, b in combinations(parallel, 2):
                    if a.weight.is_proportional(b.weight):
                        raise MalformedGraph(
                            f"parallel edges {a.index} and {b.index} between {v!r} and {target!r} "
                            f"have proportional weights"
                        )
        object.__setattr__(self, "_stars", stars)

    @classmethod
    def from_edge_list(
        cls,
        rank: int,
        vertices: Iterable[str],
        edges: Iterable[Tuple[str, str, WeightLike]],
    ) -> "GkmGraph":
        """Build from (source, target, weight) triples; weight is alpha for source -> target."""
        records = tuple(
            Edge(i, str(source), str(target), _as_form(weight))
            for i, (source, target, weight) in enumerate(edges)
        )
        return cls(rank, tuple(vertices), records)

    # ===== QUERIES =====

    def star(self, vertex: str) -> VertexStar:
        try:
            return self._stars[vertex]
        except KeyError:
            raise KeyError(f"unknown vertex {vertex!r}") from None

    def degree(self, vertex: str) -> int:
        return self.star(vertex).size

    @property
    def valence(self) -> int:
        """Valence d: the largest vertex degree (all equal on a valid graph)."""
        return max(self.degree(v) for v in self.vertices)

    def oriented_edges(self) -> List[OrientedEdge]:
        """Every edge in both orientations, grouped by source vertex."""
        return [e for v in self.vertices for e in self.star(v)]

    def oriented(self, index: int, forward: bool = True) -> OrientedEdge:
        edge = self.edges[index]
        view = OrientedEdge(edge.index, edge.source, edge.target, edge.weight, True)
        return view if forward else view.reversed()

    def edges_between(self, source: str, target: str) -> List[OrientedEdge]:
        return [e for e in self.star(source) if e.target == target]

    def with_weight(self, index: int, weight: WeightLike) -> "GkmGraph":
        """Copy with one stored weight replaced."""
        edges = tuple(
            Edge(e.index, e.source, e.target, _as_form(weight)) if e.index == index else e
            for e in self.edges
        )
        return GkmGraph(self.rank, self.vertices, edges)

    def to_networkx(self) -> nx.MultiGraph:
        """Underlying multigraph; edge keys are edge indices."""
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.vertices)
        for e in self.edges:
            graph.add_edge(e.source, e.target, key=e.index, weight=e.weight.coefficients)
        return graph

    def content_hash(self) -> str:
        """Stable digest of rank, vertices and weighted edges."""
        payload = json.dumps(
            {
                "rank": self.rank,
                "vertices": list(self.vertices),
                "edges": [[e.source, e.target, list(e.weight.coefficients)] for e in self.edges],
            },
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ============================================================================
# VALIDATION
# ============================================================================

def _restricted_multiset(star: VertexStar, alpha: LinearForm) -> Counter:
    return Counter(tuple(restrict_mod_form(w.as_polynomial(), alpha).to_vector()) for w in star.weights)


def _render_multiset(star: VertexStar, alpha: LinearForm) -> str:
    rendered = sorted(restrict_mod_form(w.as_polynomial(), alpha).render() for w in star.weights)
    return "{" + ", ".join(rendered) + "}"


def validate(graph: GkmGraph) -> ValidationReport:
    """Check the action axioms; the report lists each violation with its location.

    Structural problems (dangling endpoints, rank mismatch, self-loops) are
    rejected earlier, when the GkmGraph is constructed.
    """
    report = ValidationReport()

    degrees = Counter(graph.degree(v) for v in graph.vertices)
    expected = min(degrees, key=lambda d: (-degrees[d], d))
    for v in graph.vertices:
        if graph.degree(v) != expected:
            report.violations.append(Violation(
                "regularity", v, f"vertex {v!r} has {graph.degree(v)} edges, expected {expected}",
            ))

    if not nx.is_connected(graph.to_networkx()):
        components = nx.number_connected_components(graph.to_networkx())
        report.violations.append(Violation(
            "connectivity", "graph", f"graph has {components} connected components",
        ))

    for e in graph.edges:
        if e.weight.is_zero:
            report.violations.append(Violation(
                "nonzero-weight", f"{e.source}->{e.target}#{e.index}", "axial value is the zero form",
            ))

    for v in graph.vertices:
        star = graph.star(v)
        for a, b in combinations(star.edges, 2):
            if a.weight.is_proportional(b.weight):
                report.violations.append(Violation(
                    "pairwise-independence", v,
                    f"weights of {a.label} and {b.label} are proportional ({a.weight.render()}, {b.weight.render()})",
                ))

    for e in graph.edges:
        if e.weight.is_zero:
            continue
        source_star = graph.star(e.source)
        target_star = graph.star(e.target)
        if _restricted_multiset(source_star, e.weight) != _restricted_multiset(target_star, e.weight):
            report.violations.append(Violation(
                "A3", f"{e.source}->{e.target}#{e.index}",
                f"weights restricted to ker({e.weight.render()}) differ: "
                f"{_render_multiset(source_star, e.weight)} at {e.source!r} vs "
                f"{_render_multiset(target_star, e.weight)} at {e.target!r}",
            ))

    if report.violations:
        logger.info(f"validation found {len(report.violations)} violation(s)")
    return report


def independence_degree(star: VertexStar) -> int:
    """Largest k such that every k-subset of the star's weights is linearly independent.

    Bounded by min(d, n). Returns 0 only when some weight is the zero form.
    """
    weights = star.weights
    if not weights or any(w.is_zero for w in weights):
        return 0
    limit = min(len(weights), weights[0].rank)
    for k in range(2, limit + 1):
        if any(rank_of_forms(subset) < k for subset in combinations(weights, k)):
            return k - 1
    return limit


def is_three_independent(star: VertexStar) -> bool:
    """3-independence, read as min(3, d) when the star has fewer than three edges."""
    return independence_degree(star) >= min(3, star.size)


def is_gkm(graph: GkmGraph) -> bool:
    """Pairwise independence of the weights at every vertex."""
    return all(independence_degree(graph.star(v)) >= min(2, graph.degree(v)) for v in graph.vertices)


# ============================================================================
# MORSE DATA
# ============================================================================

def check_generic(graph: GkmGraph, direction: GenericDirection) -> None:
    """Raise NonGenericDirection if some axial value vanishes on xi."""
    if len(direction.xi) != graph.rank:
        raise NonGenericDirection(f"direction has length {len(direction.xi)}, graph rank is {graph.rank}")
    for e in graph.edges:
        if e.weight.evaluate(direction.xi) == 0:
            raise NonGenericDirection(
                f"alpha of edge {e.source}->{e.target}#{e.index} vanishes on xi={direction.xi}", edge=e,
            )


def pick_generic(graph: GkmGraph, seed: int = 0) -> GenericDirection:
    """Deterministic pseudorandom xi with alpha_e(xi) != 0 for every edge.

    Entries are drawn from [-B, B]; B doubles after each failed attempt.
    """
    rng = random.Random(seed)
    bound = _GENERIC_INITIAL_BOUND
    for attempt in range(_GENERIC_ATTEMPTS):
        xi = tuple(rng.randint(-bound, bound) for _ in range(graph.rank))
        if all(e.weight.evaluate(xi) != 0 for e in graph.edges):
            logger.debug(f"generic direction {xi} found after {attempt + 1} attempt(s)")
            return GenericDirection(xi)
        bound *= 2
    raise Unreachable(f"no generic direction after {_GENERIC_ATTEMPTS} attempts; zero weights should be rejected first")


def morse_index(graph: GkmGraph, direction: GenericDirection, vertex: str) -> int:
    """sigma_p: number of outgoing edges at p with alpha_e(xi) < 0."""
    check_generic(graph, direction)
    return sum(1 for e in graph.star(vertex) if e.weight.evaluate(direction.xi) < 0)


def betti(graph: GkmGraph, direction: GenericDirection) -> BettiVector:
    """beta_i = number of vertices with sigma_p = i, for i = 0..d."""
    check_generic(graph, direction)
    counts = [0] * (graph.valence + 1)
    for v in graph.vertices:
        sigma = sum(1 for e in graph.star(v) if e.weight.evaluate(direction.xi) < 0)
        counts[sigma] += 1
    return BettiVector(tuple(counts))


def betti_matches_manifold(betti_vector: BettiVector, even_betti: Sequence[int]) -> bool:
    """Compare beta_i(graph) with the known beta_{2i} of the manifold, entry for entry."""
    return list(betti_vector.values) == list(even_betti)
