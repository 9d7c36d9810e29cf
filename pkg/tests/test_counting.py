import numpy as np
import pytest

from netemd.atlas import build_atlas
from netemd.counting import (EmpiricalDistribution, brute_force_count, count_orbits,
                             orbit_histogram)
from netemd.errors import CapabilityError, DomainError
from netemd.graph import Graph

from conftest import random_graph


def test_triangle(triangle):
    f = count_orbits(triangle, build_atlas(False, 3)).counts
    assert f.tolist() == [[2, 0, 0, 1]] * 3


def test_path(path3):
    f = count_orbits(path3, build_atlas(False, 3)).counts
    assert f.tolist() == [[1, 1, 0, 0], [2, 0, 1, 0], [1, 1, 0, 0]]


def test_directed_cycle(cycle3):
    atlas = build_atlas(True, 3)
    f = count_orbits(cycle3, atlas).counts
    assert np.all(f[:, :3] == [1, 1, 0])
    orbit = f[0, 3:].nonzero()[0]
    assert len(orbit) == 1 and np.all(f[:, 3 + orbit[0]] == 1)
    assert f.sum(axis=1).tolist() == [3, 3, 3]


def test_triangle_at_size4_has_15_columns(triangle):
    assert count_orbits(triangle, build_atlas(False, 4)).counts.shape == (3, 15)


def test_empty_graph_all_zero():
    g = Graph.from_edges(3, [], directed=False)
    assert not brute_force_count(g, build_atlas(False, 4)).counts.any()
    assert not count_orbits(g, build_atlas(False, 4)).counts.any()


@pytest.mark.parametrize("directed,size", [(False, 3), (False, 4), (False, 5), (True, 3), (True, 4)])
def test_matches_brute_force(directed, size):
    atlas = build_atlas(directed, size)
    for seed in range(4):
        g = random_graph(12, 0.3, directed, seed)
        assert np.array_equal(count_orbits(g, atlas).counts, brute_force_count(g, atlas).counts)


def test_brute_force_size_guard():
    with pytest.raises(CapabilityError):
        brute_force_count(Graph.from_edges(33, [], directed=False), build_atlas(False, 3))


def test_directedness_mismatch(triangle):
    with pytest.raises(DomainError):
        count_orbits(triangle, build_atlas(True, 3))


def test_orbit0_is_degree():
    g = random_graph(40, 0.15, False, 3)
    f = count_orbits(g, build_atlas(False, 4)).counts
    assert np.array_equal(f[:, 0], g.degree())
    assert f[:, 0].sum() == 2 * g.edge_count


def test_directed_size2_column_sums():
    g = random_graph(40, 0.1, True, 5)
    f = count_orbits(g, build_atlas(True, 3)).counts
    e = g.edge_set()
    recip_pairs = sum(1 for u, v in e if (v, u) in e) // 2
    single = g.edge_count - 2 * recip_pairs
    assert f[:, 0].sum() == f[:, 1].sum() == single
    assert f[:, 2].sum() == 2 * recip_pairs


@pytest.mark.parametrize("directed,size", [(False, 4), (True, 4)])
def test_column_sums_are_match_count_times_multiplicity(directed, size):
    atlas = build_atlas(directed, size)
    g = random_graph(14, 0.3, directed, 11)
    f = count_orbits(g, atlas).counts
    sums = f.sum(axis=0)
    for gid in range(atlas.graphlet_count):
        orbits = atlas.graphlet_orbits(gid)
        matches = sums[orbits] // atlas.orbit_multiplicity[orbits]
        assert np.all(matches == matches[0])
        assert np.all(sums[orbits] == matches[0] * atlas.orbit_multiplicity[orbits])


def test_relabeling_permutes_rows():
    atlas = build_atlas(True, 4)
    g = random_graph(20, 0.2, True, 9)
    perm = np.random.default_rng(0).permutation(20)
    f = count_orbits(g, atlas).counts
    h = count_orbits(g.relabel(perm), atlas).counts
    assert np.array_equal(h[perm], f)


def test_isolated_node_adds_zero_row():
    atlas = build_atlas(False, 4)
    g = random_graph(15, 0.3, False, 1)
    f = count_orbits(g, atlas).counts
    h = count_orbits(g.with_isolated(1), atlas).counts
    assert np.array_equal(h[:-1], f) and not h[-1].any()


@pytest.mark.parametrize("directed", [False, True])
def test_worker_count_does_not_change_result(directed):
    atlas = build_atlas(directed, 4)
    g = random_graph(60, 0.1, directed, 2)
    a = count_orbits(g, atlas, workers=1).counts
    for w in (2, 8):
        assert np.array_equal(count_orbits(g, atlas, workers=w).counts, a)


def test_histograms(triangle, path3):
    atlas = build_atlas(False, 3)
    h = orbit_histogram(count_orbits(triangle, atlas), 0)
    assert h.support.tolist() == [2.0] and h.weights.tolist() == [1.0]
    h = orbit_histogram(count_orbits(path3, atlas), 0)
    assert h.support.tolist() == [1.0, 2.0]
    assert h.weights == pytest.approx([2 / 3, 1 / 3])
    f = count_orbits(random_graph(30, 0.2, False, 0), build_atlas(False, 4))
    for o in range(15):
        assert abs(orbit_histogram(f, o).weights.sum() - 1) <= 1e-12


def test_empirical_distribution_validation():
    with pytest.raises(DomainError):
        EmpiricalDistribution([1.0, 0.0], [0.5, 0.5])
    with pytest.raises(DomainError):
        EmpiricalDistribution([0.0, 1.0], [0.5, 0.6])
    with pytest.raises(DomainError):
        EmpiricalDistribution([], [])
    d = EmpiricalDistribution.from_weights({0: 1, 2: 1})
    assert d.mean == 1.0 and d.variance == 1.0
