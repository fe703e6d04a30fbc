"""Deterministic generators for the standard example families.

- projective n: complete graph on n+1 vertices in rank n+1, weight x_j - x_i from p_i to p_j
- grassmannian (n, k): Johnson graph J(n, k), weight x_l - x_j from S to S - {j} + {l}
- toric product: graph product of projective factors, weights in the direct-sum lattice
- bundle: the graph of the fiber family, paired with Poincare data of the fixed
  component and edge geometry (untwisted, or a supplied Chern twist)

Projective spaces are built in rank n+1; the action is not effective, but the
weights stay symmetric and integral.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from cohomology_solver import FiberData
from connection_chern import EdgeGeometry
from exact_algebra import LinearForm, parse_rational
from gkm_errors import InvalidGeometry, InvalidParams
from gkm_graph import GkmGraph

logger = logging.getLogger(__name__)

FAMILIES = ("projective", "grassmannian", "toric-product", "bundle")
_ALIASES = {"toric": "toric-product", "cp": "projective", "johnson": "grassmannian"}

EdgeKey = Tuple[str, str]


def _difference(rank: int, plus: int, minus: int) -> LinearForm:
    """x_plus - x_minus with 1-based indices."""
    coefficients = [0] * rank
    coefficients[plus - 1] += 1
    coefficients[minus - 1] -= 1
    return LinearForm(tuple(coefficients))


# ============================================================================
# FAMILIES
# ============================================================================

def build_projective(n: int) -> GkmGraph:
    """The n-simplex: vertices p1..p(n+1), valence n."""
    if n < 1:
        raise InvalidParams(f"projective space needs n >= 1, got {n}")
    vertices = [f"p{i}" for i in range(1, n + 2)]
    edges = [
        (f"p{i}", f"p{j}", _difference(n + 1, j, i))
        for i, j in combinations(range(1, n + 2), 2)
    ]
    return GkmGraph.from_edge_list(n + 1, vertices, edges)


def subset_label(subset: Sequence[int]) -> str:
    return "{" + ",".join(str(i) for i in subset) + "}"


def build_grassmannian(n: int, k: int) -> GkmGraph:
    """Johnson graph J(n, k) on k-subsets of {1..n}; valence k(n-k)."""
    if not 1 <= k <= n - 1:
        raise InvalidParams(f"grassmannian needs 1 <= k <= n-1, got n={n}, k={k}")
    subsets = list(combinations(range(1, n + 1), k))
    edges = []
    for subset in subsets:
        members = set(subset)
        for j in subset:
            for l in range(1, n + 1):
                if l in members:
                    continue
                neighbour = tuple(sorted((members - {j}) | {l}))
                if subset < neighbour:
                    edges.append((subset_label(subset), subset_label(neighbour), _difference(n, l, j)))
    return GkmGraph.from_edge_list(n, [subset_label(s) for s in subsets], edges)


def build_toric_product(factors: Sequence[int]) -> GkmGraph:
    """Product of projective factors; all-ones factors give the cube graph."""
    factors = list(factors)
    if not factors or any(f < 1 for f in factors):
        raise InvalidParams(f"toric product needs a non-empty list of positive integers, got {factors}")
    pieces = [build_projective(f) for f in factors]
    offsets = [sum(p.rank for p in pieces[:i]) for i in range(len(pieces))]
    rank = sum(p.rank for p in pieces)

    def label(choice: Sequence[str]) -> str:
        return "|".join(choice)

    vertices = [label(choice) for choice in product(*(p.vertices for p in pieces))]
    edges = []
    for i, piece in enumerate(pieces):
        others = [p.vertices for j, p in enumerate(pieces) if j != i]
        for edge in piece.edges:
            weight = [0] * rank
            weight[offsets[i]:offsets[i] + piece.rank] = edge.weight.coefficients
            for rest in product(*others):
                source = list(rest[:i]) + [edge.source] + list(rest[i:])
                target = list(rest[:i]) + [edge.target] + list(rest[i:])
                edges.append((label(source), label(target), tuple(weight)))
    return GkmGraph.from_edge_list(rank, vertices, edges)


# ============================================================================
# SPECS
# ============================================================================

@dataclass(frozen=True)
class BuilderSpec:
    """A family name with its integer parameters; bundles wrap an inner spec."""
    family: str
    params: Tuple[int, ...] = ()
    inner: Optional["BuilderSpec"] = None

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        if family not in FAMILIES:
            raise InvalidParams(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", tuple(int(p) for p in self.params))
        if family == "bundle" and self.inner is None:
            raise InvalidParams("a bundle spec needs an inner family")

    @classmethod
    def parse(cls, text: str) -> "BuilderSpec":
        """Parse "projective:2", "grassmannian:4,2", "toric:1,1,1" or "bundle:projective:1"."""
        family, _, rest = text.strip().partition(":")
        family = _ALIASES.get(family, family)
        if family == "bundle":
            if not rest:
                raise InvalidParams("bundle spec needs an inner family, e.g. bundle:projective:1")
            return cls("bundle", (), cls.parse(rest))
        try:
            params = tuple(int(p) for p in rest.split(",") if p.strip())
        except ValueError:
            raise InvalidParams(f"builder parameters must be integers: {text!r}") from None
        return cls(family, params)

    def render(self) -> str:
        if self.family == "bundle":
            return f"bundle:{self.inner.render()}"
        return f"{self.family}:{','.join(str(p) for p in self.params)}"

    def build(self) -> GkmGraph:
        if self.family == "bundle":
            return self.inner.build()
        if self.family == "projective":
            if len(self.params) != 1:
                raise InvalidParams(f"projective takes one parameter, got {self.params}")
            return build_projective(self.params[0])
        if self.family == "grassmannian":
            if len(self.params) != 2:
                raise InvalidParams(f"grassmannian takes two parameters (n, k), got {self.params}")
            return build_grassmannian(*self.params)
        return build_toric_product(self.params)


# ============================================================================
# BUNDLES
# ============================================================================

def _edge_lookup(graph: GkmGraph) -> Dict[EdgeKey, Tuple[int, bool]]:
    lookup: Dict[EdgeKey, Tuple[int, bool]] = {}
    for e in graph.edges:
        for key, forward in (((e.source, e.target), True), ((e.target, e.source), False)):
            if key in lookup:
                raise InvalidParams(f"parallel edges between {key[0]!r} and {key[1]!r}; name edges by index instead")
            lookup[key] = (e.index, forward)
    return lookup


def _orient_twist(graph: GkmGraph, twist: Mapping[EdgeKey, Sequence[int]]) -> Dict[int, Tuple[int, ...]]:
    """Chern labels per stored edge; labels given on reversed edges are negated."""
    lookup = _edge_lookup(graph)
    labels: Dict[int, Tuple[int, ...]] = {}
    for key, chern in twist.items():
        if tuple(key) not in lookup:
            raise InvalidGeometry(f"twist names a non-edge {key[0]!r} -> {key[1]!r}")
        index, forward = lookup[tuple(key)]
        stored = tuple(int(c) for c in chern) if forward else tuple(-int(c) for c in chern)
        if index in labels and labels[index] != stored:
            raise InvalidGeometry(
                f"twist on edge {key[0]!r}-{key[1]!r} breaks c(reversed e) = -c(e): "
                f"{list(labels[index])} vs {list(stored)}"
            )
        labels[index] = stored
    return labels


def _orient_lengths(graph: GkmGraph, lengths: Mapping[EdgeKey, object]) -> Dict[int, Fraction]:
    lookup = _edge_lookup(graph)
    values: Dict[int, Fraction] = {}
    for key, length in lengths.items():
        if tuple(key) not in lookup:
            raise InvalidGeometry(f"length given for non-edge {key[0]!r} -> {key[1]!r}")
        index, _ = lookup[tuple(key)]
        value = parse_rational(length)
        if index in values and values[index] != value:
            raise InvalidGeometry(f"edge {key[0]!r}-{key[1]!r} has two different lengths")
        values[index] = value
    return values


def build_bundle_example(
    base: BuilderSpec,
    fiber_poincare: FiberData,
    twist: Optional[Mapping[EdgeKey, Sequence[int]]] = None,
    lengths: Optional[Mapping[EdgeKey, object]] = None,
    chern_rank: Optional[int] = None,
) -> Tuple[GkmGraph, FiberData, EdgeGeometry]:
    """Graph of a bundle whose fixed components are copies of F.

    The bundle's graph is the graph of the GKM fiber family named by `base`.
    `fiber_poincare` is H(F) of the fixed component. Without a twist every edge
    gets length 1 and the zero Chern label (an untwisted product); with a twist
    the supplied labels are checked for the reversal sign rule and dimension,
    and edges not named get the zero label.
    """
    graph = base.build()
    if chern_rank is None:
        if twist:
            chern_rank = len(next(iter(twist.values())))
        else:
            chern_rank = fiber_poincare.second_betti
    labels = _orient_twist(graph, twist or {})
    edge_lengths = _orient_lengths(graph, lengths or {})
    geometry = EdgeGeometry(
        chern_rank,
        tuple(edge_lengths.get(e.index, Fraction(1)) for e in graph.edges),
        tuple(labels.get(e.index, (0,) * chern_rank) for e in graph.edges),
    )
    logger.info(f"bundle over {base.render()}: fiber {fiber_poincare.render()}, chern_rank {chern_rank}")
    return graph, fiber_poincare, geometry


def corpus_specs() -> List[BuilderSpec]:
    """The standard builder corpus used for batch runs."""
    return [BuilderSpec.parse(text) for text in (
        "projective:1", "projective:2", "projective:3",
        "grassmannian:4,2", "grassmannian:3,2",
        "toric:1,1", "toric:1,1,1",
    )]
