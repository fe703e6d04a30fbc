"""Unit tests for cohomology_solver.py (graph cohomology dimensions, bases, ring product).

Run:
    pytest tests/test_cohomology_solver.py -v
"""

import random

import pytest

from builders import BuilderSpec, build_grassmannian, build_projective, corpus_specs
from cohomology_solver import (
    FiberData,
    GraphClass,
    compatibility_residual,
    constraint_matrix,
    convolve_with_fiber,
    formula_dims,
    formula_nonisolated_dims,
    morse_check,
    ring_product,
    solve,
    solve_async,
    solve_nonisolated,
    tensor_dims,
    unit_class,
)
from exact_algebra import HomogPolynomial, LinearForm, kernel_dim, rank_of_forms
from gkm_errors import InsufficientDepth, InvalidFiber, InvalidGraph
from gkm_graph import GkmGraph, validate


def transformed(graph: GkmGraph, matrix) -> GkmGraph:
    """Apply an integer matrix to every weight (covector times matrix)."""
    n = graph.rank
    edges = [
        (e.source, e.target, [sum(e.weight[i] * matrix[i][j] for i in range(n)) for j in range(n)])
        for e in graph.edges
    ]
    return GkmGraph.from_edge_list(n, graph.vertices, edges)


class TestSolve:
    """solve() on known graphs."""

    def test_line_in_rank_one(self, line):
        """Test solve on a single edge."""
        assert solve(line, 3).dims == [1, 2, 2, 2]

    def test_projective_plane(self, cp2):
        """Test solve dimensions on the projective plane."""
        solution = solve(cp2, 3)
        assert solution.dims == [1, 4, 10, 19]
        assert solution.dims[1] == 4

    def test_degree_zero_is_constants(self, j42):
        """Test degree zero holds only constants."""
        solution = solve(j42, 0)
        assert solution.dims == [1]
        (constant,) = solution.bases[0]
        assert all(constant[v] == HomogPolynomial.constant(4) for v in j42.vertices)

    def test_basis_elements_pass_edge_check(self, j42):
        """Test basis elements satisfy every edge condition."""
        solution = solve(j42, 2)
        for level in solution.bases:
            for element in level:
                assert compatibility_residual(j42, element) == []

    def test_basis_is_normalized(self, cp2):
        """Test basis vectors have leading coefficient 1."""
        solution = solve(cp2, 2)
        for level in solution.bases:
            for element in level:
                leading = next(
                    c for v in cp2.vertices for c in element[v].to_vector() if c
                )
                assert leading == 1

    def test_invalid_graph_refused(self, cp2):
        """Test solve refuses an invalid graph."""
        with pytest.raises(InvalidGraph) as info:
            solve(cp2.with_weight(0, (-1, 2, 0)), 1)
        assert not info.value.report.is_valid

    def test_negative_degree_refused(self, cp2):
        """Test a negative degree is refused."""
        with pytest.raises(ValueError):
            solve(cp2, -1)

    def test_to_dict(self, cp2):
        """Test the solution payload."""
        payload = solve(cp2, 1).to_dict(include_bases=True)
        assert payload["dims"][1] == {"k": 1, "degree": 2, "dim": 4}
        assert payload["bases"][0] == [{"p1": "1", "p2": "1", "p3": "1"}]

    @pytest.mark.asyncio
    async def test_async_matches_sequential(self, j42):
        """Test solve_async matches solve."""
        concurrent = await solve_async(j42, 2)
        sequential = solve(j42, 2)
        assert concurrent.dims == sequential.dims
        assert [[b.render() for b in level] for level in concurrent.bases] == \
            [[b.render() for b in level] for level in sequential.bases]


class TestFormula:
    """formula_dims and morse_check."""

    def test_examples(self):
        """Test formula_dims on small cases."""
        assert formula_dims([1, 1], 1, 4) == [1, 2, 2, 2, 2]
        assert formula_dims([1, 1, 1], 3, 2)[2] == 10
        assert formula_dims([1], 5, 0) == [1]

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_equality_on_projective_spaces(self, n):
        """Test solver equals formula on projective spaces."""
        report = morse_check(build_projective(n), 4)
        assert report.all_equal
        assert report.inequality_holds
        assert [row.cohomology_degree for row in report.rows] == [0, 2, 4, 6, 8]

    def test_equality_on_grassmannian(self, j42):
        """Test solver equals formula on J(4,2) up to k = 4."""
        report = morse_check(j42, 4)
        assert report.betti.values == (1, 1, 2, 1, 1)
        assert report.all_equal
        assert len(report.rows) == 5

    @pytest.mark.slow
    @pytest.mark.parametrize("spec", corpus_specs(), ids=lambda spec: spec.render())
    def test_equality_on_builder_corpus(self, spec):
        """Test solver equals formula on every corpus graph up to k = 4."""
        report = morse_check(spec.build(), 4)
        assert report.all_equal
        assert [row.solver_dim for row in report.rows] == [row.formula_bound for row in report.rows]

    def test_toric_square_dims(self):
        """Test solver and formula dimensions on CP1 x CP1."""
        report = morse_check(BuilderSpec.parse("toric:1,1").build(), 4)
        assert [(row.solver_dim, row.formula_bound) for row in report.rows] == [
            (1, 1), (6, 6), (19, 19), (44, 44), (85, 85),
        ]

    def test_reuses_supplied_solution(self, cp2):
        """Test morse_check reuses a given solution."""
        solution = solve(cp2, 2)
        report = morse_check(cp2, 2, solution=solution)
        assert [row.solver_dim for row in report.rows] == solution.dims

    @pytest.mark.slow
    def test_inequality_under_random_weight_maps(self):
        """Test the Morse bound under random weight maps."""
        rng = random.Random(7)
        bases = [build_projective(1), build_projective(2), build_grassmannian(3, 2)]
        checked = 0
        attempts = 0
        while checked < 50 and attempts < 500:
            attempts += 1
            graph = rng.choice(bases)
            n = graph.rank
            matrix = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
            candidate = transformed(graph, matrix)
            if not validate(candidate).is_valid:
                continue
            report = morse_check(candidate, 2, seed=checked)
            assert report.inequality_holds
            invertible = rank_of_forms([LinearForm(tuple(row)) for row in matrix]) == n
            if invertible:
                assert report.all_equal
            checked += 1
        assert checked == 50


class TestMonotonicity:
    """Adding a constraint edge never increases the solution space."""

    def test_adding_edges(self, j42):
        """Test adding constraint edges never grows the kernel."""
        constraints = [(e.source, e.target, e.weight) for e in j42.edges]
        for k in range(3):
            previous = None
            for count in range(len(constraints) + 1):
                dim, _ = kernel_dim(constraint_matrix(j42.vertices, constraints[:count], j42.rank, k))
                if previous is not None:
                    assert dim <= previous
                previous = dim
            assert previous == solve(j42, k).dims[k]


class TestFiber:
    """FiberData, convolution and the non-isolated solver."""

    def test_fiber_validation(self):
        """Test FiberData parsing and checks."""
        assert FiberData.parse("1,0,1").poincare == (1, 0, 1)
        assert FiberData((1, 0, 1)).second_betti == 1
        assert FiberData((1, 0, 1)).half_dimension == 1
        with pytest.raises(InvalidFiber):
            FiberData((0, 1))
        with pytest.raises(InvalidFiber):
            FiberData((1, -1))
        with pytest.raises(InvalidFiber):
            FiberData.parse("1,x")

    def test_convolution_examples(self):
        """Test convolution with fiber Poincare lists."""
        assert convolve_with_fiber([1, 2, 2], FiberData((1, 0, 1)), 4) == [1, 0, 3, 0, 4]
        assert convolve_with_fiber([1, 1], FiberData((1, 2, 1)), 3) == [1, 2, 2, 2]
        assert convolve_with_fiber([1, 2, 3], FiberData.point(), 4) == [1, 0, 2, 0, 3]

    def test_convolution_needs_depth(self):
        """Test convolution beyond the solved range."""
        with pytest.raises(InsufficientDepth):
            convolve_with_fiber([1, 2], FiberData((1, 0, 1)), 4)

    def test_point_fiber_reduces_to_solve(self, cp2):
        """Test a point fiber reproduces solve."""
        direct = solve_nonisolated(cp2, FiberData.point(), 6)
        assert direct.dims == [1, 0, 4, 0, 10, 0, 19]

    def test_two_copies_double(self, line):
        """Test two point components double the dimensions."""
        direct = solve_nonisolated(line, FiberData((2,)), 4)
        assert direct.dims == [2, 0, 4, 0, 4]

    def test_blocks_recorded(self, cp2):
        """Test the per-degree block decomposition."""
        direct = solve_nonisolated(cp2, FiberData((1, 0, 1)), 2)
        assert direct.blocks[2] == [(0, 1, 1), (2, 0, 1)]

    def test_rejects_raw_list(self, cp2):
        """Test a raw list is refused as fiber data."""
        with pytest.raises(InvalidFiber):
            solve_nonisolated(cp2, [1, 0, 1], 2)

    @pytest.mark.slow
    @pytest.mark.parametrize("graph_name", ["cp1", "cp2", "j42"])
    @pytest.mark.parametrize("poincare", [(1,), (1, 0, 1), (1, 2, 1)])
    def test_direct_solve_matches_tensor_product(self, graph_name, poincare):
        """Test direct non-isolated solve equals the tensor product."""
        graph = {
            "cp1": lambda: build_projective(1),
            "cp2": lambda: build_projective(2),
            "j42": lambda: build_grassmannian(4, 2),
        }[graph_name]()
        fiber = FiberData(poincare)
        direct = solve_nonisolated(graph, fiber, 8)
        assert direct.dims == tensor_dims(solve(graph, 4), fiber, 8)

    def test_formula_side_on_projective_plane(self, cp2):
        """Test non-isolated dimensions against the formula."""
        fiber = FiberData((1, 0, 1))
        report = morse_check(cp2, 3)
        expected = formula_nonisolated_dims(report.betti, cp2.rank, fiber, 6)
        assert solve_nonisolated(cp2, fiber, 6).dims == expected


class TestRingStructure:
    """unit_class, compatibility_residual and ring_product."""

    def test_unit(self, cp2):
        """Test the unit class is a multiplicative identity."""
        solution = solve(cp2, 1)
        for element in solution.bases[1]:
            product = ring_product(cp2, unit_class(cp2), element)
            assert product.render() == element.render()

    def test_residual_flags_bad_map(self, cp2):
        """Test the residual names failing edges."""
        x1 = HomogPolynomial.monomial((1, 0, 0))
        zero = HomogPolynomial.zero(3, 1)
        bad = GraphClass(1, {"p1": x1, "p2": zero, "p3": zero})
        failing = compatibility_residual(cp2, bad)
        assert {e.index for e in failing} == {0, 1}
        with pytest.raises(ValueError):
            ring_product(cp2, bad, unit_class(cp2))

    def test_line_products(self, line):
        """Test products on a single edge stay compatible."""
        solution = solve(line, 1)
        for f in solution.bases[1]:
            for g in solution.bases[1]:
                product = ring_product(line, f, g)
                assert product.degree == 2
                assert compatibility_residual(line, product) == []

    @pytest.mark.slow
    @pytest.mark.parametrize("builder", [lambda: build_projective(2), lambda: build_grassmannian(4, 2)])
    def test_closure_up_to_degree_four(self, builder):
        """Test products of basis classes up to degree 4."""
        graph = builder()
        solution = solve(graph, 3)
        for a in range(1, 4):
            for b in range(a, 5 - a):
                for f in solution.bases[a]:
                    for g in solution.bases[b]:
                        product = ring_product(graph, f, g)
                        assert product.degree == a + b
