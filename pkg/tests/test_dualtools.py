import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slabperc.dualtools import (
    boundary_arm_count,
    dual_cluster_sets,
    dual_of_config,
    separation_witness,
    spanning_clusters,
    touches,
    witness_valid,
)
from slabperc.geometry import PlanarRect, decode, induced_rect_graph
from slabperc.percolation import BondConfig, label_clusters, sample_config

R = PlanarRect.from_bounds


def _columns_open(w, h, cols):
    """Only the vertical edges of the listed columns are open."""
    g = induced_rect_graph(R(0, w - 1, 0, h - 1))
    ax, ay, _ = decode(g.edges[:, 0])
    bx, by, _ = decode(g.edges[:, 1])
    return BondConfig(g, (ax == bx) & np.isin(ax, cols), 0.5)


def test_all_open_has_no_open_duals():
    g = induced_rect_graph(R(0, 4, 0, 3))
    dc = dual_of_config(BondConfig(g, np.ones(g.n_edges, bool), 1.0))
    assert dc.n_open == 0 and dc.n_pairs == g.n_edges


def test_single_open_edge():
    g = induced_rect_graph(R(0, 3, 0, 3))
    mask = np.zeros(g.n_edges, bool)
    mask[5] = True
    dc = dual_of_config(BondConfig(g, mask, 0.5))
    assert dc.n_open == g.n_edges - 1 and not dc.open[5]


def test_crossing_pairs():
    g = induced_rect_graph(R(0, 1, 0, 1))
    dc = dual_of_config(BondConfig(g, np.ones(g.n_edges, bool), 1.0))
    pairs = {}
    for e, (a, b) in enumerate(g.edges):
        (xa, ya), (xb, yb) = [tuple(int(t[0]) for t in decode(np.array([k]))[:2]) for k in (a, b)]
        pairs[((xa, ya), (xb, yb))] = (tuple(dc.u[e]), tuple(dc.v[e]))
    assert pairs[((0, 0), (1, 0))] == ((0, -1), (0, 0))
    assert pairs[((0, 0), (0, 1))] == ((-1, 0), (0, 0))


@given(st.integers(1, 12), st.integers(1, 12), st.floats(0, 1), st.integers(0, 10_000))
def test_conservation_and_involution(w, h, p, seed):
    g = induced_rect_graph(R(0, w - 1, 0, h - 1))
    if g.n_edges == 0:
        return
    c = sample_config(g, p, seed)
    dc = dual_of_config(c)
    assert c.n_open + dc.n_open == g.n_edges
    back = dual_of_config(dc)
    assert np.array_equal(back.open, c.open)


def test_slab_input_rejected():
    g = induced_rect_graph(R(0, 2, 0, 2), 0)
    from slabperc.geometry import graph_union

    slab = graph_union([g, induced_rect_graph(R(0, 2, 0, 2), 1)])
    with pytest.raises(ValueError):
        dual_of_config(BondConfig(slab, np.ones(slab.n_edges, bool), 1.0))


def test_touching_relation():
    assert touches({(0, 0)}, {(0, 0, 1)})
    assert touches({(-1, -1)}, {(0, 0, 1)})
    assert not touches({(3, 3)}, {(0, 0, 1)})
    assert not touches({(0, 0)}, set())


def test_dual_clusters_cover_vertices():
    c = _columns_open(3, 5, [0, 2])
    sets = dual_cluster_sets(dual_of_config(c))
    assert sum(len(s) for s in sets) == 4 * 6


def test_hand_built_witness():
    c = _columns_open(3, 5, [0, 2])
    C1, C2 = spanning_clusters(c, "V")
    w = separation_witness(C1, C2, c)
    assert w is not None and witness_valid(w, C1, C2, c)
    # the witness runs down the dual column between the two open columns
    xs = {v[0] for v in w.vertices}
    assert xs == {0}
    assert sorted(v[1] for v in w.vertices) == list(range(-1, 5))
    assert not w.closed


def test_single_spanning_cluster_has_no_pair():
    g = induced_rect_graph(R(0, 5, 0, 5))
    c = BondConfig(g, np.ones(g.n_edges, bool), 1.0)
    spans = spanning_clusters(c)
    assert len(spans) == 1
    with pytest.raises(ValueError):
        separation_witness(spans[0], spans[0], c)


def test_witness_requires_clusters():
    c = _columns_open(3, 5, [0, 2])
    with pytest.raises(ValueError):
        separation_witness({(0, 0, 1)}, {(2, 0, 1)}, c)


@given(st.integers(2, 14), st.integers(2, 14), st.floats(0.3, 0.7), st.integers(0, 10_000))
def test_witnesses_between_any_clusters(w, h, p, seed):
    g = induced_rect_graph(R(0, w - 1, 0, h - 1))
    c = sample_config(g, p, seed)
    clusters = label_clusters(c).clusters()
    if len(clusters) < 2:
        return
    a, b = clusters[0], clusters[-1]
    wit = separation_witness(a, b, c)
    assert wit is not None
    assert witness_valid(wit, a, b, c)
    dc = dual_of_config(c)
    assert dc.open[wit.crossed].all()
    # consecutive witness edges share an endpoint
    for (p1, q1), (p2, q2) in zip(wit.edges, wit.edges[1:]):
        assert q1 == p2


def test_boundary_arms():
    box = R(0, 4, 0, 4)
    assert boundary_arm_count({(x, 2) for x in range(5)}, box) == 2
    assert boundary_arm_count({(2, 2)}, box) == 0
    assert boundary_arm_count(set(map(tuple, box.points().tolist())), box) == 1
