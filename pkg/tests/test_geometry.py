import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slabperc.geometry import (
    Block,
    FiniteGraph,
    PairKind,
    PlanarRect,
    SlabVertex,
    classify_pair,
    decode,
    encode,
    graph_union,
    induced_rect_graph,
    union_pathology_edges,
)

from conftest import small_rect

R = PlanarRect.from_bounds


def test_block_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        Block(3, 2)


@pytest.mark.parametrize(
    "q, r, kind",
    [
        (R(2, 3, 0, 9), R(0, 9, 4, 5), PairKind.V2H),
        (R(0, 9, 4, 5), R(2, 3, 0, 9), PairKind.H2V),
        (R(0, 3, 0, 3), R(0, 3, 0, 3), PairKind.OTHER),
        (R(0, 1, 0, 1), R(5, 6, 5, 6), PairKind.DISJOINT),
    ],
)
def test_classify_pair_examples(q, r, kind):
    assert classify_pair(q, r) is kind


@pytest.mark.parametrize(
    "rect, nv, ne",
    [(R(0, 1, 0, 1), 4, 4), (R(0, 2, 0, 0), 3, 2), (R(0, 0, 0, 0), 1, 0), (R(0, 4, 0, 2), 15, 22)],
)
def test_induced_rect_graph_counts(rect, nv, ne):
    g = induced_rect_graph(rect)
    assert (g.n_vertices, g.n_edges) == (nv, ne)
    g.check()


def test_union_adds_no_edges_between_parts():
    v1 = induced_rect_graph(R(0, 0, 0, 1))
    v2 = induced_rect_graph(R(1, 1, 0, 1))
    h1 = induced_rect_graph(R(0, 1, 0, 0))
    u = graph_union([v1, v2, h1])
    assert not u.has_edge((0, 1, 1), (1, 1, 1))
    assert u.has_edge((0, 0, 1), (1, 0, 1))
    # with the top edge gone every path from V1 to V2 runs through H1's edge
    keep = ~np.all(np.isin(u.edges, encode(np.array([0, 1]), np.array([0, 0]))), axis=1)
    n, lab = u.components(keep)
    assert n == 2
    pathology = union_pathology_edges([v1, v2, h1])
    assert [tuple(map(int, decode(pathology[0, k])[:2])) for k in range(2)] == [(0, 1), (1, 1)]


def test_union_idempotent_and_disjoint_components():
    g = induced_rect_graph(R(0, 3, 0, 2))
    assert graph_union([g, g]).same_as(g)
    two = graph_union([induced_rect_graph(R(0, 1, 0, 1)), induced_rect_graph(R(5, 6, 0, 1))])
    assert two.n_components() == 2


def test_encode_decode_roundtrip_negative_coordinates():
    x = np.array([-5, 0, 7, -(2**20)])
    y = np.array([3, -1, 0, 2**20])
    layer = np.array([0, 1, 1, 0])
    assert all(np.array_equal(a, b) for a, b in zip(decode(encode(x, y, layer)), (x, y, layer)))


def test_from_vertices_rejects_dangling_edges():
    with pytest.raises(ValueError):
        FiniteGraph.from_vertices([SlabVertex(0, 0, 1)], [((0, 0, 1), (1, 0, 1))]).check()


@given(small_rect(), small_rect())
def test_classify_pair_is_mirror_symmetric(q, r):
    a, b = classify_pair(q, r), classify_pair(r, q)
    assert (a is PairKind.V2H) == (b is PairKind.H2V)
    assert (a is PairKind.DISJOINT) == (b is PairKind.DISJOINT)


@given(st.lists(small_rect(max_side=4), min_size=1, max_size=4), st.randoms(use_true_random=False))
def test_graph_union_is_a_set_union(rects, rnd):
    parts = [induced_rect_graph(r) for r in rects]
    u = graph_union(parts)
    shuffled = parts[:]
    rnd.shuffle(shuffled)
    assert graph_union(shuffled).same_as(u)
    assert graph_union([graph_union(parts[:1]), graph_union(parts[1:])]).same_as(u) if len(parts) > 1 else True
    assert u.edge_set() == set().union(*(p.edge_set() for p in parts))
    u.check()


@given(st.lists(small_rect(max_side=4), min_size=1, max_size=4))
def test_pathology_edges_are_unowned_adjacencies(rects):
    parts = [induced_rect_graph(r) for r in rects]
    bad = union_pathology_edges(parts)
    owned = set().union(*(p.edge_set() for p in parts))
    for a, b in bad:
        xa, ya, _ = decode(np.array([a]))
        xb, yb, _ = decode(np.array([b]))
        assert abs(int(xa[0] - xb[0])) + abs(int(ya[0] - yb[0])) == 1
        pair = frozenset({SlabVertex(int(xa[0]), int(ya[0]), 1), SlabVertex(int(xb[0]), int(yb[0]), 1)})
        assert pair not in owned
        assert not any(r.contains_point(int(xa[0]), int(ya[0])) and r.contains_point(int(xb[0]), int(yb[0])) for r in rects)
