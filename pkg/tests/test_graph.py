import io

import numpy as np
import pytest

from netemd.errors import DomainError, ParseError
from netemd.graph import Graph, density, load_edge_list, reciprocity, write_edge_list

from conftest import random_graph


def test_load_undirected_path():
    g = load_edge_list("0 1\n1 2", directed=False)
    assert (g.node_count, g.edge_count) == (3, 2)


def test_load_directed_pair_is_reciprocal():
    g = load_edge_list("a b\nb a", directed=True)
    assert (g.node_count, g.edge_count) == (2, 2)
    assert reciprocity(g) == 1.0
    assert g.labels == ("a", "b")


def test_duplicates_and_loops_dropped():
    g = load_edge_list("0 1\n0 1\n1 1", directed=True)
    assert (g.node_count, g.edge_count) == (2, 1)
    assert g.dropped == {"self_loops": 1, "duplicates": 1}


def test_undirected_pairs_unified():
    g = load_edge_list("0 1\n1 0\n", directed=False)
    assert g.edge_count == 1
    assert g.edges.tolist() == [[0, 1]]


def test_comments_and_blank_lines():
    g = load_edge_list("# header\n\nx y\n# mid\ny z\n", directed=False)
    assert g.node_count == 3
    assert g.labels == ("x", "y", "z")


def test_malformed_line_reports_line_number():
    with pytest.raises(ParseError) as err:
        load_edge_list("0 1\n1 2 3\n", directed=False)
    assert err.value.line_number == 2
    assert "line 2" in str(err.value)


def test_empty_input_gives_empty_graph():
    g = load_edge_list("", directed=True)
    assert g.node_count == 0 and g.edge_count == 0


def test_first_appearance_order():
    g = load_edge_list("7 3\n3 9\n", directed=True)
    assert g.labels == ("7", "3", "9")
    assert g.edges.tolist() == [[0, 1], [1, 2]]


@pytest.mark.parametrize("edges,expected", [
    ([(0, 1), (1, 0)], 1.0),
    ([(0, 1), (1, 2), (2, 0)], 0.0),
    ([(0, 1), (1, 0), (1, 2)], 2 / 3),
])
def test_reciprocity(edges, expected):
    g = Graph.from_edges(3, edges, directed=True)
    assert reciprocity(g) == pytest.approx(expected, abs=1e-15)


def test_reciprocity_errors():
    with pytest.raises(DomainError):
        reciprocity(Graph.from_edges(2, [(0, 1)], directed=False))
    with pytest.raises(DomainError):
        reciprocity(Graph.from_edges(2, [], directed=True))


def test_density(triangle, path3, cycle3):
    assert density(triangle) == 1.0
    assert density(path3) == pytest.approx(2 / 3)
    assert density(cycle3) == 0.5
    with pytest.raises(DomainError):
        density(Graph.from_edges(1, [], directed=False))


@pytest.mark.parametrize("directed", [False, True])
def test_degree_sums(directed):
    g = random_graph(30, 0.2, directed, seed=4)
    if directed:
        assert g.out_degree().sum() == g.in_degree().sum() == g.edge_count
    else:
        assert g.degree().sum() == 2 * g.edge_count


@pytest.mark.parametrize("directed", [False, True])
def test_adjacency_round_trip(directed):
    g = random_graph(25, 0.15, directed, seed=8)
    rebuilt = {(u, int(v)) for u in range(g.node_count) for v in g.out_neighbors(u)}
    expected = g.edge_set() if directed else g.edge_set() | {(v, u) for u, v in g.edge_set()}
    assert rebuilt == expected
    for u in range(g.node_count):
        for v in g.neighbors(u):
            assert u in g.neighbors(v)


@pytest.mark.parametrize("directed", [False, True])
def test_serialization_idempotent(directed):
    g = random_graph(20, 0.2, directed, seed=2).with_isolated(3)
    buf = io.StringIO()
    write_edge_list(g, buf)
    h = load_edge_list(buf.getvalue(), directed)
    assert h.node_count == g.node_count
    assert np.array_equal(h.edges, g.edges)
    buf2 = io.StringIO()
    write_edge_list(h, buf2)
    assert buf2.getvalue() == buf.getvalue()


def test_graph_arrays_are_read_only(triangle):
    with pytest.raises(ValueError):
        triangle.edges[0, 0] = 2
