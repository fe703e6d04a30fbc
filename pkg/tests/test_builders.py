"""Unit tests for builders.py (example families and bundle data).

Run:
    pytest tests/test_builders.py -v
"""

from fractions import Fraction

import pytest

from builders import (
    BuilderSpec,
    build_bundle_example,
    build_grassmannian,
    build_projective,
    build_toric_product,
    corpus_specs,
    subset_label,
)
from cohomology_solver import FiberData
from exact_algebra import LinearForm
from gkm_errors import InvalidGeometry, InvalidParams
from gkm_graph import is_three_independent, validate
from graph_handler import GraphDataHandler


class TestFamilies:
    """Projective, Grassmannian and toric product graphs."""

    def test_projective(self):
        """Test projective space vertices, edges and weights."""
        graph = build_projective(2)
        assert graph.rank == 3
        assert graph.vertices == ("p1", "p2", "p3")
        assert [(e.source, e.target) for e in graph.edges] == [("p1", "p2"), ("p1", "p3"), ("p2", "p3")]
        assert graph.edges[0].weight == LinearForm.of(-1, 1, 0)
        assert graph.valence == 2

    def test_projective_rejects_small_n(self):
        """Test projective builder rejects n < 1."""
        with pytest.raises(InvalidParams):
            build_projective(0)

    def test_grassmannian(self):
        """Test Grassmannian J(4,2) size, valence and subset labels."""
        graph = build_grassmannian(4, 2)
        assert len(graph.vertices) == 6
        assert len(graph.edges) == 12
        assert graph.valence == 4
        assert graph.edges_between("{1,2}", "{2,3}")[0].weight == LinearForm.of(-1, 0, 1, 0)
        assert subset_label((1, 3)) == "{1,3}"

    def test_grassmannian_rejects_bad_k(self):
        """Test Grassmannian builder rejects k outside 1..n-1."""
        with pytest.raises(InvalidParams):
            build_grassmannian(4, 0)
        with pytest.raises(InvalidParams):
            build_grassmannian(4, 4)

    def test_toric_product(self):
        """Test toric products of projective lines."""
        square = build_toric_product([1, 1])
        assert square.rank == 4
        assert len(square.vertices) == 4
        assert square.valence == 2
        cube = build_toric_product([1, 1, 1])
        assert len(cube.vertices) == 8
        assert cube.valence == 3
        assert "p1|p2|p1" in cube.vertices

    def test_single_factor_keeps_names(self):
        """Test a one-factor toric product matches the projective space."""
        assert build_toric_product([2]).vertices == build_projective(2).vertices

    def test_toric_rejects_bad_factors(self):
        """Test toric builder rejects empty or zero factors."""
        with pytest.raises(InvalidParams):
            build_toric_product([])
        with pytest.raises(InvalidParams):
            build_toric_product([1, 0])

    @pytest.mark.parametrize("spec", corpus_specs(), ids=lambda s: s.render())
    def test_corpus_is_valid_and_three_independent(self, spec):
        """Test every corpus graph validates and is 3-independent."""
        graph = spec.build()
        assert validate(graph).is_valid
        assert all(is_three_independent(graph.star(v)) for v in graph.vertices)


class TestBuilderSpec:
    """Parsing builder strings."""

    def test_parse(self):
        """Test parsing of family, parameter and bundle strings."""
        assert BuilderSpec.parse("projective:2") == BuilderSpec("projective", (2,))
        assert BuilderSpec.parse("grassmannian:4,2").params == (4, 2)
        assert BuilderSpec.parse("toric:1,1,1").family == "toric-product"
        bundle = BuilderSpec.parse("bundle:projective:1")
        assert bundle.family == "bundle"
        assert bundle.inner == BuilderSpec("projective", (1,))
        assert bundle.render() == "bundle:projective:1"

    def test_build_dispatch(self):
        """Test BuilderSpec.build dispatches on family."""
        assert BuilderSpec.parse("projective:3").build().rank == 4
        assert BuilderSpec.parse("bundle:grassmannian:4,2").build() == build_grassmannian(4, 2)

    @pytest.mark.parametrize("text", ["sphere:2", "projective:x", "projective:1,2", "grassmannian:4", "bundle"])
    def test_rejects(self, text):
        """Test malformed builder strings raise InvalidParams."""
        with pytest.raises(InvalidParams):
            BuilderSpec.parse(text).build()


class TestBundles:
    """build_bundle_example geometry."""

    def test_untwisted(self):
        """Test untwisted bundle geometry has unit lengths and zero labels."""
        graph, fiber, geometry = build_bundle_example(BuilderSpec.parse("projective:2"), FiberData((1, 0, 1)))
        assert graph == build_projective(2)
        assert fiber.poincare == (1, 0, 1)
        assert geometry.chern_rank == 1
        assert geometry.lengths == (Fraction(1),) * 3
        assert geometry.cherns == ((0,),) * 3

    def test_point_fiber_has_empty_labels(self):
        """Test a point fiber gives chern rank zero."""
        _, _, geometry = build_bundle_example(BuilderSpec.parse("projective:1"), FiberData.point())
        assert geometry.chern_rank == 0
        assert geometry.cherns == ((),)

    def test_twist_and_lengths(self):
        """Test twists on reversed edges are negated and lengths applied."""
        _, _, geometry = build_bundle_example(
            BuilderSpec.parse("projective:2"), FiberData((1, 0, 1)),
            twist={("p3", "p1"): (2,)},
            lengths={("p1", "p2"): "1/2"},
        )
        assert geometry.cherns == ((0,), (-2,), (0,))
        assert geometry.lengths == (Fraction(1, 2), Fraction(1), Fraction(1))

    def test_twist_on_non_edge(self):
        """Test a twist naming a non-edge is refused."""
        with pytest.raises(InvalidGeometry):
            build_bundle_example(BuilderSpec.parse("grassmannian:4,2"), FiberData((1, 0, 1)),
                                 twist={("{1,2}", "{3,4}"): (1,)})

    def test_deterministic_output(self):
        """Test bundle dumps are identical across builds."""
        handler = GraphDataHandler()
        first = handler.dump_json(*self._bundle())
        second = handler.dump_json(*self._bundle())
        assert first == second

    @staticmethod
    def _bundle():
        graph, fiber, geometry = build_bundle_example(BuilderSpec.parse("toric:1,1"), FiberData((1, 0, 1)))
        return graph, geometry, fiber
