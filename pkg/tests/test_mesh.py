import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from vem2d.mesh import Mesh, validate

TWO_SQUARES = dict(
    nodes=[(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)],
    elements=[[0, 1, 4, 3], [1, 2, 5, 4]],
)


@pytest.fixture
def two_squares():
    return Mesh(**TWO_SQUARES)


class TestValidate:
    def test_two_squares(self, two_squares):
        report = validate(two_squares)
        assert report.ok, str(report)
        assert report.n_interior_edges == 1
        assert report.n_boundary_edges == 6

    def test_reversed_element(self):
        mesh = Mesh(TWO_SQUARES["nodes"], [[0, 1, 4, 3], [4, 5, 2, 1]])
        report = validate(mesh)
        assert "orientation" in report.kinds()
        assert any(v.element == 1 for v in report.violations if v.kind == "orientation")

    def test_edge_shared_by_three(self):
        nodes = [(0, 0), (1, 0), (0.5, 1), (0.5, -1), (0.5, 2)]
        mesh = Mesh(nodes, [[0, 1, 2], [1, 0, 3], [0, 1, 4]])
        assert "conformity" in validate(mesh).kinds()

    def test_hanging_node(self):
        # right square is split in two, its midpoint (2, ...) sits inside the left square's edge
        nodes = [(0, 0), (1, 0), (1, 0.5), (1, 1), (0, 1), (2, 0), (2, 0.5), (2, 1)]
        mesh = Mesh(nodes, [[0, 1, 3, 4], [1, 5, 6, 2], [2, 6, 7, 3]])
        report = validate(mesh)
        assert "conformity" in report.kinds()
        assert "hanging" in str(report)

    def test_unknown_node(self):
        mesh = Mesh([(0, 0), (1, 0), (0, 1)], [[0, 1, 5]])
        assert "reference" in validate(mesh).kinds()

    def test_duplicate_and_orphan_nodes(self):
        mesh = Mesh([(0, 0), (1, 0), (0, 1), (0, 0), (5, 5)], [[0, 1, 2]])
        kinds = validate(mesh).kinds()
        assert {"duplicate", "orphan"} <= kinds

    def test_self_intersecting(self):
        mesh = Mesh([(0, 0), (2, 0), (2, 2), (1, -1), (0, 2)], [[0, 1, 2, 3, 4]])
        assert "simplicity" in validate(mesh).kinds()
        assert "simplicity" not in validate(mesh, check_simple=False).kinds()

    def test_empty(self):
        assert "empty" in validate(Mesh(np.zeros((0, 2)), [])).kinds()

    def test_report_uses_one_based_ids(self):
        mesh = Mesh([(0, 0), (1, 0), (0, 1)], [[0, 2, 1]])
        assert "element 1" in str(validate(mesh))


class TestAccessors:
    def test_dofs_interleaved(self, two_squares):
        assert_array_equal(two_squares.element_dofs(1), [2, 3, 4, 5, 10, 11, 8, 9])

    def test_areas_and_box(self, two_squares):
        assert_allclose(two_squares.element_areas(), [1, 1])
        lo, hi = two_squares.bounding_box()
        assert_allclose(lo, (0, 0))
        assert_allclose(hi, (2, 1))
        assert two_squares.diameter() == pytest.approx(np.sqrt(5))

    def test_boundary_edges_follow_element_orientation(self, two_squares):
        edges = two_squares.boundary_edges()
        assert len(edges) == 6
        assert (0, 1) in edges and (1, 0) not in edges

    def test_queries(self, two_squares):
        assert_array_equal(two_squares.nodes_where(lambda x, y: x == 0), [0, 3])
        assert two_squares.nearest_node((1.9, 0.8)) == 5
