"""Graded dimensions and bases of the graph equivariant cohomology H(Gamma, alpha).

An element of degree k is a map f: V -> S(t*)^k such that for every edge
e = (p, q) the difference f_p - f_q is divisible by alpha_e. Divisibility is
encoded as the vanishing of the restriction of f_p - f_q to ker(alpha_e), which
gives graded_dim(n-1, k) linear constraints per edge and no auxiliary quotient
unknowns.

Degree bookkeeping: solve() is graded by polynomial degree k and reports the
cohomology degree 2k alongside; the non-isolated solver works in real degree so
that odd Betti numbers of the fixed component can be carried.

Unknown layout for one degree k: column = vertex_position * graded_dim(n, k) +
monomial_position, with vertices in lexicographic order and monomials in the
global graded-lex order.
"""

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from exact_algebra import (
    HomogPolynomial,
    LinearForm,
    RationalMatrix,
    graded_dim,
    kernel_dim,
    monomial_index,
    monomials,
    normalize_leading,
    restrict_mod_form,
    restrict_monomial,
)
from gkm_errors import InsufficientDepth, InvalidFiber, InvalidGraph, Unreachable
from gkm_graph import BettiVector, Edge, GkmGraph, betti, pick_generic, validate

logger = logging.getLogger(__name__)

Constraint = Tuple[str, str, LinearForm]


# ============================================================================
# DATA MODELS
# ============================================================================

@dataclass(frozen=True)
class GraphClass:
    """A map V -> S(t*)^k; an element of H(Gamma, alpha) when it passes the edge check."""
    degree: int
    values: Dict[str, HomogPolynomial]

    def __getitem__(self, vertex: str) -> HomogPolynomial:
        return self.values[vertex]

    def render(self) -> Dict[str, str]:
        return {v: self.values[v].render() for v in sorted(self.values)}


@dataclass
class CohomologySolution:
    """dims[k] = dim H^{2k}(Gamma, alpha); bases[k] spans the degree-k solutions."""
    rank: int
    vertices: Tuple[str, ...]
    max_degree: int
    dims: List[int]
    bases: List[List[GraphClass]]

    def cohomology_degree(self, k: int) -> int:
        return 2 * k

    def to_dict(self, include_bases: bool = False) -> Dict:
        payload = {
            "rank": self.rank,
            "max_degree": self.max_degree,
            "dims": [{"k": k, "degree": 2 * k, "dim": d} for k, d in enumerate(self.dims)],
        }
        if include_bases:
            payload["bases"] = [[element.render() for element in level] for level in self.bases]
        return payload


@dataclass(frozen=True)
class FiberData:
    """Poincare numbers b_j = dim H^j(F), j = 0..top degree, of a fixed component F."""
    poincare: Tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(b) for b in self.poincare)
        if not values:
            raise InvalidFiber("fiber Poincare list is empty")
        if any(b < 0 for b in values):
            raise InvalidFiber(f"fiber Betti numbers must be non-negative: {values}")
        if values[0] < 1:
            raise InvalidFiber(f"b_0 must be at least 1, got {values[0]}")
        object.__setattr__(self, "poincare", values)

    @classmethod
    def point(cls) -> "FiberData":
        return cls((1,))

    @classmethod
    def parse(cls, text: str) -> "FiberData":
        """Parse a comma-separated list such as "1,0,1"."""
        try:
            return cls(tuple(int(part) for part in text.split(",") if part.strip()))
        except ValueError as e:
            raise InvalidFiber(f"cannot parse fiber Poincare list {text!r}: {e}") from None

    @property
    def top_degree(self) -> int:
        return len(self.poincare) - 1

    @property
    def half_dimension(self) -> int:
        """m, with top degree 2m for the manifolds the theory is about."""
        return self.top_degree // 2

    @property
    def second_betti(self) -> int:
        return self.poincare[2] if len(self.poincare) > 2 else 0

    def render(self) -> str:
        return ",".join(str(b) for b in self.poincare)


@dataclass
class NonIsolatedSolution:
    """dims[D] = dim of the real-degree-D part of H(Gamma, F).

    blocks[D] lists (j, k, copies): b_j independent copies of the degree-k
    system contribute to real degree D = j + 2k.
    """
    max_real_degree: int
    dims: List[int]
    blocks: List[List[Tuple[int, int, int]]] = field(default_factory=list)


@dataclass(frozen=True)
class MorseRow:
    k: int
    cohomology_degree: int
    solver_dim: int
    formula_bound: int

    @property
    def equal(self) -> bool:
        return self.solver_dim == self.formula_bound

    @property
    def within_bound(self) -> bool:
        return self.solver_dim <= self.formula_bound


@dataclass
class MorseReport:
    """Solver dimensions against the graph Morse bound, degree by degree."""
    betti: BettiVector
    rows: List[MorseRow]

    @property
    def inequality_holds(self) -> bool:
        return all(row.within_bound for row in self.rows)

    @property
    def all_equal(self) -> bool:
        return all(row.equal for row in self.rows)


# ============================================================================
# CONSTRAINT ASSEMBLY
# ============================================================================

def _constraint_rows(
    vertices: Sequence[str],
    constraints: Iterable[Constraint],
    n: int,
    k: int,
    column_offset: int = 0,
) -> List[Dict[int, object]]:
    """Sparse rows stating restrict(f_p - f_q, alpha) = 0 for each (p, q, alpha)."""
    block = graded_dim(n, k)
    position = {v: i for i, v in enumerate(vertices)}
    target_index = monomial_index(n - 1, k)
    rows: List[Dict[int, object]] = []
    for p, q, alpha in constraints:
        edge_rows: List[Dict[int, object]] = [dict() for _ in range(len(target_index))]
        p_base = column_offset + position[p] * block
        q_base = column_offset + position[q] * block
        for t, exps in enumerate(monomials(n, k)):
            for image_exps, coef in restrict_monomial(exps, alpha).coefficients.items():
                row = edge_rows[target_index[image_exps]]
                row[p_base + t] = row.get(p_base + t, 0) + coef
                row[q_base + t] = row.get(q_base + t, 0) - coef
        rows.extend(edge_rows)
    return rows


def constraint_matrix(
    vertices: Sequence[str],
    constraints: Sequence[Constraint],
    n: int,
    k: int,
) -> RationalMatrix:
    """Linear system whose kernel is the degree-k solution space for the given constraint edges."""
    columns = len(vertices) * graded_dim(n, k)
    return RationalMatrix.from_sparse_rows(columns, _constraint_rows(vertices, constraints, n, k))


def _edge_constraints(graph: GkmGraph) -> List[Constraint]:
    return [(e.source, e.target, e.weight) for e in graph.edges]


def compatibility_matrix(graph: GkmGraph, k: int) -> RationalMatrix:
    return constraint_matrix(graph.vertices, _edge_constraints(graph), graph.rank, k)


def _require_valid(graph: GkmGraph) -> None:
    report = validate(graph)
    if not report.is_valid:
        first = report.violations[0]
        raise InvalidGraph(
            f"graph fails validation ({len(report.violations)} violation(s)); first: {first.axiom} at {first.location}",
            report=report,
        )


def _vector_to_class(graph: GkmGraph, k: int, vector: Sequence) -> GraphClass:
    block = graded_dim(graph.rank, k)
    values = {
        v: HomogPolynomial.from_vector(graph.rank, k, vector[i * block:(i + 1) * block])
        for i, v in enumerate(graph.vertices)
    }
    return GraphClass(k, values)


def _solve_degree(graph: GkmGraph, k: int) -> Tuple[int, List[GraphClass]]:
    matrix = compatibility_matrix(graph, k)
    dim, basis = kernel_dim(matrix)
    logger.info(f"degree {k}: {matrix.rows}x{matrix.cols} system, kernel dim {dim}")
    return dim, [_vector_to_class(graph, k, normalize_leading(vector)) for vector in basis]


# ============================================================================
# SOLVERS
# ============================================================================

def solve(graph: GkmGraph, k_max: int) -> CohomologySolution:
    """Dimensions and bases of H^{2k}(Gamma, alpha) for k = 0..k_max."""
    if k_max < 0:
        raise ValueError(f"k_max must be non-negative, got {k_max}")
    _require_valid(graph)
    results = [_solve_degree(graph, k) for k in range(k_max + 1)]
    return CohomologySolution(
        rank=graph.rank,
        vertices=graph.vertices,
        max_degree=k_max,
        dims=[dim for dim, _ in results],
        bases=[basis for _, basis in results],
    )


async def solve_async(graph: GkmGraph, k_max: int) -> CohomologySolution:
    """Same as solve(), with the per-degree systems solved concurrently."""
    if k_max < 0:
        raise ValueError(f"k_max must be non-negative, got {k_max}")
    _require_valid(graph)
    tasks = [asyncio.to_thread(_solve_degree, graph, k) for k in range(k_max + 1)]
    results = await asyncio.gather(*tasks)
    return CohomologySolution(
        rank=graph.rank,
        vertices=graph.vertices,
        max_degree=k_max,
        dims=[dim for dim, _ in results],
        bases=[basis for _, basis in results],
    )


def formula_dims(betti_vector: Sequence[int], n: int, k_max: int) -> List[int]:
    """sum_i beta_i * dim S(t*)^{k-i}, for k = 0..k_max."""
    betti_values = list(betti_vector)
    return [
        sum(b * graded_dim(n, k - i) for i, b in enumerate(betti_values) if i <= k)
        for k in range(k_max + 1)
    ]


def morse_check(graph: GkmGraph, k_max: int, seed: int = 0, solution: Optional[CohomologySolution] = None) -> MorseReport:
    """Compare solver dimensions with the graph Morse bound for k = 0..k_max.

    The bound always holds; equality at every degree is what a GKM manifold gives.
    """
    if solution is None or solution.max_degree < k_max:
        solution = solve(graph, k_max)
    betti_vector = betti(graph, pick_generic(graph, seed))
    bounds = formula_dims(betti_vector, graph.rank, k_max)
    rows = [MorseRow(k, 2 * k, solution.dims[k], bounds[k]) for k in range(k_max + 1)]
    report = MorseReport(betti_vector, rows)
    if not report.inequality_holds:
        bad = [row.k for row in rows if not row.within_bound]
        logger.error(f"Morse inequality violated at degrees {bad}")
    return report


def _fiber_blocks(fiber: FiberData, real_degree: int) -> List[Tuple[int, int, int]]:
    return [
        (j, (real_degree - j) // 2, b)
        for j, b in enumerate(fiber.poincare)
        if b and j <= real_degree and (real_degree - j) % 2 == 0
    ]


def solve_nonisolated(graph: GkmGraph, fiber: FiberData, max_real_degree: int) -> NonIsolatedSolution:
    """Direct solve of H(Gamma, F) by real degree.

    Each H(F) generator of degree j carries its own copy of the compatibility
    system in polynomial degree (D - j) / 2; all copies are stacked into one
    block-diagonal system per real degree D and solved together.
    """
    if max_real_degree < 0:
        raise ValueError(f"max_real_degree must be non-negative, got {max_real_degree}")
    if not isinstance(fiber, FiberData):
        raise InvalidFiber(f"expected FiberData, got {type(fiber).__name__}")
    _require_valid(graph)
    constraints = _edge_constraints(graph)
    dims: List[int] = []
    blocks: List[List[Tuple[int, int, int]]] = []
    for real_degree in range(max_real_degree + 1):
        degree_blocks = _fiber_blocks(fiber, real_degree)
        rows: List[Dict[int, object]] = []
        offset = 0
        for j, k, copies in degree_blocks:
            width = len(graph.vertices) * graded_dim(graph.rank, k)
            for _ in range(copies):
                rows.extend(_constraint_rows(graph.vertices, constraints, graph.rank, k, column_offset=offset))
                offset += width
        matrix = RationalMatrix.from_sparse_rows(offset, rows)
        dim, _ = kernel_dim(matrix)
        logger.info(f"real degree {real_degree}: {len(degree_blocks)} block type(s), {matrix.rows}x{matrix.cols}, dim {dim}")
        dims.append(dim)
        blocks.append(degree_blocks)
    return NonIsolatedSolution(max_real_degree, dims, blocks)


def convolve_with_fiber(dims_by_k: Sequence[int], fiber: FiberData, max_real_degree: int) -> List[int]:
    """dim^D = sum_j b_j * dims[(D - j) / 2] over j with D - j even and non-negative."""
    needed = max(
        ((real_degree - j) // 2
         for real_degree in range(max_real_degree + 1)
         for j, b in enumerate(fiber.poincare)
         if b and j <= real_degree and (real_degree - j) % 2 == 0),
        default=-1,
    )
    if needed >= len(dims_by_k):
        raise InsufficientDepth(
            f"real degree {max_real_degree} needs polynomial degree {needed}, only {len(dims_by_k) - 1} available"
        )
    return [
        sum(b * dims_by_k[k] for _, k, b in _fiber_blocks(fiber, real_degree))
        for real_degree in range(max_real_degree + 1)
    ]


def tensor_dims(solution: CohomologySolution, fiber: FiberData, max_real_degree: int) -> List[int]:
    """Graded dims of H(Gamma, alpha) tensor H(F), by real degree."""
    return convolve_with_fiber(solution.dims, fiber, max_real_degree)


def formula_nonisolated_dims(betti_vector: Sequence[int], n: int, fiber: FiberData, max_real_degree: int) -> List[int]:
    """Morse-formula dimensions convolved with H(F): the count expected for a GKM manifold."""
    return convolve_with_fiber(formula_dims(betti_vector, n, max_real_degree // 2), fiber, max_real_degree)


# ============================================================================
# RING STRUCTURE
# ============================================================================

def compatibility_residual(graph: GkmGraph, element: GraphClass) -> List[Edge]:
    """Edges on which restrict(f_p - f_q, alpha_e) is not the zero polynomial."""
    failing = []
    for e in graph.edges:
        difference = element[e.source] - element[e.target]
        if not restrict_mod_form(difference, e.weight).is_zero:
            failing.append(e)
    return failing


def unit_class(graph: GkmGraph) -> GraphClass:
    return GraphClass(0, {v: HomogPolynomial.constant(graph.rank) for v in graph.vertices})


def ring_product(graph: GkmGraph, f: GraphClass, g: GraphClass) -> GraphClass:
    """Pointwise product (f*g)_p = f_p * g_p, checked against every edge."""
    for name, factor in (("first", f), ("second", g)):
        if set(factor.values) != set(graph.vertices):
            raise ValueError(f"{name} factor is not defined on the graph's vertices")
        if compatibility_residual(graph, factor):
            raise ValueError(f"{name} factor does not satisfy the edge divisibility condition")
    product = GraphClass(f.degree + g.degree, {v: f[v] * g[v] for v in graph.vertices})
    failing = compatibility_residual(graph, product)
    if failing:
        raise Unreachable(f"product of compatible classes fails on {len(failing)} edge(s)")
    return product
