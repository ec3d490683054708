import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from vem2d.benchmarks import cantilever_mesh, cantilever_problem
from vem2d.material import PlaneMode
from vem2d.problem import ProblemFormatError, format_problem, parse_problem, read_problem, write_problem

EXAMPLE = """\
# vem2d problem v1
material E=1000 nu=0.3 mode=plane_stress thickness=1
nodes 5
1 0.0 0.0
2 3.0 0.0
3 3.0 2.0
4 1.5 4.0
5 0.0 4.0
elements 1
1 1 2 3 4 5
nodeset support 1 5
dirichlet support ux=0 uy=0      # per-set; per-node overrides allowed
dirichlet 5 ux=0
load 2 fx=40 fy=0
load 3 fx=80
load 4 fx=40 fy=0
"""


def _pentagon_text_with_free_y5():
    # per-node line written before the set line still overrides it
    return EXAMPLE.replace("dirichlet support ux=0 uy=0      # per-set; per-node overrides allowed\ndirichlet 5 ux=0\n",
                           "dirichlet 5 uy=0.5\ndirichlet support ux=0 uy=0\n")


class TestParse:
    def test_example(self):
        p = parse_problem(EXAMPLE)
        assert p.mesh.n_nodes == 5 and p.mesh.n_elements == 1
        assert p.material.plane_mode is PlaneMode.PLANE_STRESS
        assert p.thickness == 1.0
        assert_array_equal(p.mesh.elements[0], [0, 1, 2, 3, 4])
        assert p.loads.dirichlet == {0: 0.0, 1: 0.0, 8: 0.0, 9: 0.0}
        assert p.loads.point_loads == [(1, 40.0, 0.0), (2, 80.0, 0.0), (3, 40.0, 0.0)]

    def test_node_overrides_set(self):
        p = parse_problem(_pentagon_text_with_free_y5())
        assert p.loads.dirichlet[9] == 0.5

    def test_full_precision(self):
        p = parse_problem(EXAMPLE.replace("1.5 4.0", "0.10000000000000001 4.0"))
        assert p.mesh.nodes[3, 0] == 0.1

    @pytest.mark.parametrize(
        "old, new, match",
        [
            ("# vem2d problem v1\n", "", "header"),
            ("mode=plane_stress", "mode=plane_stress color=red", "unknown key"),
            ("nodeset support", "nodegroup support", "unknown keyword"),
            ("5 0.0 4.0\n", "7 0.0 4.0\n", "node line"),
            ("load 3 fx=80", "load 9 fx=80", "unknown node"),
            ("load 3 fx=80", "load rim fx=80", "unknown node set"),
            ("nu=0.3", "nu=0.5", "line 2"),
            ("E=1000", "E=abc", "number"),
            ("load 3 fx=80", "load 1 fx=80", "both loaded and constrained"),
            ("dirichlet 5 ux=0", "dirichlet 5 ux=0 ux=1", "duplicate"),
        ],
    )
    def test_strict(self, old, new, match):
        with pytest.raises(ProblemFormatError, match=match):
            parse_problem(EXAMPLE.replace(old, new))

    def test_section_ends_early(self):
        with pytest.raises(ProblemFormatError):
            parse_problem(EXAMPLE.split("elements")[0] + "elements 2\n1 1 2 3 4 5\n")


class TestRoundTrip:
    def test_example(self, tmp_path):
        p = parse_problem(EXAMPLE)
        write_problem(p, tmp_path / "p.txt")
        q = read_problem(tmp_path / "p.txt")
        assert_array_equal(q.mesh.nodes, p.mesh.nodes)
        assert q.loads.dirichlet == p.loads.dirichlet
        assert q.loads.point_loads == p.loads.point_loads
        assert format_problem(q) == format_problem(p)

    def test_generated_mesh_bit_exact(self):
        p = cantilever_problem(cantilever_mesh(40, seed=1, lloyd_iters=2))
        q = parse_problem(format_problem(p))
        assert np.array_equal(q.mesh.nodes, p.mesh.nodes)
        assert all(np.array_equal(a, b) for a, b in zip(q.mesh.elements, p.mesh.elements))
        assert q.loads.point_loads == p.loads.point_loads

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.floats(-1e9, 1e9), st.floats(-1e9, 1e9)), min_size=1, max_size=5))
    def test_loads_round_trip(self, forces):
        p = parse_problem(EXAMPLE)
        p.loads.point_loads = [(1, fx, fy) for fx, fy in forces]
        q = parse_problem(format_problem(p))
        assert_allclose(np.array(q.loads.point_loads), np.array(p.loads.point_loads), rtol=0, atol=0)
