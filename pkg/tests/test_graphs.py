import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from arbogas.graphs import (FourierMode, build_complete, build_torus,
                            fourier_multiplier, graph_to_text, is_connected,
                            laplacian, make_graph, parse_graph_text,
                            percolation_parameter, torus_coords, torus_modes,
                            torus_vertex)


def test_build_complete_triangle():
    g = build_complete(3, 3)
    assert g.n_edges == 3
    assert all(beta == 1 for (_, _, beta) in g.edges)
    assert g.vertex_weights == (0, 0, 0)


def test_build_complete_edge_and_k4():
    g2 = build_complete(2, 1)
    assert g2.edges == ((0, 1, Fraction(1, 2)),)
    g4 = build_complete(4, 4)
    assert g4.n_edges == 6
    assert all(beta == 1 for (_, _, beta) in g4.edges)


def test_build_complete_rejects_small_n():
    with pytest.raises(ValueError):
        build_complete(1, 1.0)


def test_build_torus_counts():
    g = build_torus(3, 2, 1.0)
    assert g.n_vertices == 9
    assert g.n_edges == 18
    g1 = build_torus(4, 1, 2.0)
    assert g1.n_vertices == 4
    assert g1.n_edges == 4
    assert all(beta == 2.0 for (_, _, beta) in g1.edges)


def test_build_torus_l2_merges_parallel_edges():
    g = build_torus(2, 2, 1.0)
    assert g.n_vertices == 4
    assert g.n_edges == 4
    assert all(beta == 2.0 for (_, _, beta) in g.edges)
    assert all(m == 2 for m in g.edge_multiplicity)


def test_build_torus_rejects_small_side():
    with pytest.raises(ValueError):
        build_torus(1, 2, 1.0)


def test_torus_coordinates_roundtrip():
    g = build_torus(4, 3, 1.0)
    for v in (0, 5, 63, 17):
        assert torus_vertex(g, torus_coords(g, v)) == v


def test_laplacian_triangle():
    g = build_complete(3, 3)
    lap = laplacian(g)
    assert np.allclose(np.diag(lap), 2.0)
    assert np.allclose(lap - np.diag(np.diag(lap)), -1 + np.eye(3))


def test_laplacian_single_edge_and_cycle():
    g = make_graph(2, [(0, 1, 0.7)])
    assert np.allclose(laplacian(g), [[0.7, -0.7], [-0.7, 0.7]])
    g4 = build_torus(4, 1, 1.0)
    lap = laplacian(g4)
    expect = np.array([[2, -1, 0, -1], [-1, 2, -1, 0],
                       [0, -1, 2, -1], [-1, 0, -1, 2]], dtype=float)
    assert np.allclose(lap, expect)


def test_laplacian_psd_with_constant_kernel():
    g = build_torus(3, 2, 0.8)
    lap = laplacian(g)
    assert np.allclose(lap.sum(axis=1), 0.0)
    eig = np.linalg.eigvalsh(lap)
    assert eig[0] > -1e-12
    assert np.sum(np.abs(eig) < 1e-9) == 1   # connected: constants only


def test_percolation_parameter_values():
    assert percolation_parameter(0) == 0
    assert percolation_parameter(1) == 0.5
    assert percolation_parameter(3) == 0.75


@given(st.fractions(min_value=0, max_value=10**6),
       st.fractions(min_value=Fraction(1, 10**9), max_value=10**6))
def test_percolation_parameter_monotone(beta, delta):
    assert percolation_parameter(beta + delta) > percolation_parameter(beta)
    assert percolation_parameter(beta) < 1


def test_fourier_multiplier_values():
    g2 = build_torus(4, 2, 1.0)
    assert fourier_multiplier(g2, FourierMode((0.0, 0.0))) == 0.0
    assert fourier_multiplier(g2, FourierMode((math.pi, math.pi))) == pytest.approx(8.0)
    g1 = build_torus(4, 1, 1.0)
    assert fourier_multiplier(g1, FourierMode((math.pi,))) == pytest.approx(4.0)


def test_fourier_multiplier_nonnegative_all_modes():
    g = build_torus(5, 2, 1.3)
    vals = [fourier_multiplier(g, mode) for mode in torus_modes(g)]
    assert min(vals) >= 0.0
    assert sum(1 for v in vals if v < 1e-12) == 1    # only p = 0


def test_fourier_multiplier_rejects_plain_graph():
    g = build_complete(3, 1.0)
    with pytest.raises(ValueError):
        fourier_multiplier(g, FourierMode((0.0,)))


def test_graph_validation():
    with pytest.raises(ValueError):
        make_graph(3, [(0, 0, 1.0)])
    with pytest.raises(ValueError):
        make_graph(3, [(0, 1, 1.0), (1, 0, 2.0)])   # duplicate pair
    with pytest.raises(ValueError):
        make_graph(3, [(0, 1, -1.0)])


def test_is_connected():
    assert is_connected(build_torus(3, 2, 1.0))
    g = make_graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    assert not is_connected(g)


def test_graph_text_roundtrip():
    g = make_graph(3, [(0, 1, 0.5), (1, 2, 2.0)], h=[0.0, 1.0, 0.0])
    g2 = parse_graph_text(graph_to_text(g))
    assert g2.n_vertices == 3
    assert g2.edges == g.edges
    assert g2.vertex_weights == g.vertex_weights


def test_graph_text_rejects_duplicates():
    text = "2 2\n0 1 1.0\n1 0 2.0\n"
    with pytest.raises(ValueError):
        parse_graph_text(text)
