import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from slabperc.experiments import build_instance
from slabperc.geometry import Block, Orientation, PlanarRect, decode, induced_rect_graph
from slabperc.gridgen import ParamSeed, build_catalog
from slabperc.planner import desk_plan
from slabperc.slicing import (
    SlabAssembly,
    Slice,
    assemble_phi,
    balanced_cut,
    cut_rect,
    fold_slice,
    full_chain_component_count,
    overlap_audit,
    slice_intersection_pairs,
)
from slabperc.tree import RectTree

V, H = Orientation.VERTICAL, Orientation.HORIZONTAL
R = PlanarRect.from_bounds


@pytest.mark.parametrize("n, m, sizes", [(7, 3, [2, 2, 3]), (6, 3, [2, 2, 2]), (5, 1, [5])])
def test_balanced_cut_sizes(n, m, sizes):
    parts = balanced_cut(Block(10, 10 + n - 1), m, seed=1)
    assert sorted(b.length for b in parts) == sizes
    assert parts[0].lo == 10 and parts[-1].hi == 10 + n - 1
    assert all(a.hi + 1 == b.lo for a, b in zip(parts, parts[1:]))


def test_balanced_cut_too_many_pieces():
    with pytest.raises(ValueError):
        balanced_cut(Block(0, 2), 4)


def test_balanced_cut_uniform_over_orderings():
    # 7 into 3: the long block sits in one of three positions
    counts = np.zeros(3, int)
    for s in range(3000):
        sizes = [b.length for b in balanced_cut(Block(0, 6), 3, seed=s)]
        counts[sizes.index(3)] += 1
    assert stats.chisquare(counts).pvalue > 0.01


@given(st.integers(1, 60), st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_balanced_cut_partitions(n, m, seed):
    if m > n:
        return
    parts = balanced_cut(Block(0, n - 1), m, seed)
    lens = [b.length for b in parts]
    assert sum(lens) == n and max(lens) - min(lens) <= 1 and len(parts) == m


def test_cut_rect_examples():
    halves = cut_rect(R(0, 5, 0, 99, V), 2, seed=0)
    assert [s.rect for s in halves] == [R(0, 2, 0, 99, V), R(3, 5, 0, 99, V)]
    whole = cut_rect(R(0, 99, 0, 5, H), 1, seed=0)
    assert [s.rect for s in whole] == [R(0, 99, 0, 5, H)]
    with pytest.raises(ValueError, match="below 3"):
        cut_rect(R(0, 99, 0, 5, H), 3, seed=0)


@given(st.integers(3, 30), st.integers(3, 30), st.integers(1, 5), st.booleans(), st.integers(0, 999))
def test_cut_rect_partitions_rect(w, h, m, vertical, seed):
    r = R(0, w - 1, 0, h - 1, V if vertical else H)
    across = w if vertical else h
    if across // m < 3 and m > 1:
        return
    slices = cut_rect(r, m, seed)
    pts = np.concatenate([s.rect.points() for s in slices])
    assert len(pts) == r.size and len(np.unique(pts, axis=0)) == r.size
    for s in slices:
        assert s.rect.v == r.v if vertical else s.rect.h == r.h


def test_fold_example():
    S = Slice(R(0, 2, 0, 11, V), 0, 0)
    nxt = R(0, 20, 4, 7, H)
    f = fold_slice(S, nxt, Slice(R(0, 20, 5, 6, H), 1, 0))
    rows = lambda pts: sorted({y for _, y in pts})  # noqa: E731
    zero_rows = sorted({int(y) for y in np.nonzero(~f.indicator)[1]})
    assert zero_rows == [4, 7]
    assert rows(f.top_points()) == [3, 5, 6, 8]
    assert rows(f.bottom_points()) == [4, 7]
    assert f.graph.n_components() == 1
    for x in range(3):
        path = [(x, 3, 1), (x, 3, 0), (x, 4, 0), (x, 5, 0), (x, 5, 1)]
        assert all(f.graph.has_edge(a, b) for a, b in zip(path, path[1:]))


def test_fold_without_overlap_is_lift():
    S = Slice(R(0, 2, 0, 11, V), 0, 0)
    f = fold_slice(S, R(50, 60, 0, 3, H), None)
    assert f.is_lift and f.graph.same_as(induced_rect_graph(S.rect, 1))


def test_fold_rejects_image_outside_next():
    S = Slice(R(0, 2, 0, 11, V), 0, 0)
    with pytest.raises(ValueError):
        fold_slice(S, R(0, 20, 4, 7, H), Slice(R(0, 20, 7, 9, H), 1, 0))


@st.composite
def fold_case(draw):
    w = draw(st.integers(1, 5))
    h = draw(st.integers(8, 24))
    lo = draw(st.integers(1, h - 4))
    hi = draw(st.integers(lo + 1, min(lo + 8, h - 2)))
    b_lo = draw(st.integers(lo, hi))
    b_hi = draw(st.integers(b_lo, hi))
    x_left = draw(st.integers(-3, 0))
    return (
        Slice(R(0, w - 1, 0, h - 1, V), 0, 0),
        R(x_left, w + 4, lo, hi, H),
        Slice(R(x_left, w + 4, b_lo, b_hi, H), 1, 0),
    )


@given(fold_case())
def test_fold_invariants(case):
    S, nxt, beta = case
    f = fold_slice(S, nxt, beta)
    x, y, layer = decode(f.graph.vertices)
    # locality and conservation
    assert np.all((x >= S.rect.h.lo) & (x <= S.rect.h.hi) & (y >= S.rect.v.lo) & (y <= S.rect.v.hi))
    assert f.graph.n_vertices == S.rect.size + int(f.top_boundary.sum())
    # the top layer is the lifted part plus the columns over the top boundary
    top = {(int(a), int(b)) for a, b, c in zip(x, y, layer) if c == 1}
    lifted = {(S.rect.h.lo + int(a), S.rect.v.lo + int(b)) for a, b in zip(*np.nonzero(f.indicator))}
    assert top == lifted | f.top_points()
    assert f.graph.n_components() == 1
    f.graph.check()


def _hand_assembly(second_rect):
    nxt = R(-2, 20, 4, 7, H)
    slices = [Slice(R(0, 2, 0, 11, V), 0, 0), Slice(second_rect, 1, 0), Slice(nxt, 2, 0)]
    folded = [fold_slice(slices[0], nxt, slices[2]), fold_slice(slices[1], nxt, slices[2]), fold_slice(slices[2], None, None)]
    return SlabAssembly.from_parts(slices, folded, {0: 2, 1: 2})


def test_audit_allows_merged_sibling_images():
    report = overlap_audit(_hand_assembly(R(10, 12, 0, 11, V)))
    assert report.passed and report.violations == []


def test_audit_flags_translated_slice():
    report = overlap_audit(_hand_assembly(R(1, 3, 0, 11, V)))
    assert not report.passed
    assert any({v.slice_a, v.slice_b} == {0, 1} for v in report.violations)


def test_empty_assembly():
    cat = build_catalog(ParamSeed(2, 3, (3,), 0), (40, 40))
    empty_tree = RectTree(cat, [], {}, set())
    a = assemble_phi(cat, empty_tree, (1, 1), seed=0)
    assert a.slices == [] and a.graph.n_vertices == 0
    assert overlap_audit(a).passed and full_chain_component_count(a) == 0


def test_desk_instance_audits(desk_instance):
    assert desk_instance.catalog_audit.passed
    assert desk_instance.overlap.passed, desk_instance.overlap.summary()


def test_slice_intersections_follow_injection(desk_instance):
    a = desk_instance.assembly
    linked = {tuple(sorted(p)) for p in a.beta.items()}
    assert slice_intersection_pairs(a) == linked


def test_components_match_forest(desk_instance):
    a = desk_instance.assembly
    assert full_chain_component_count(a) == a.forest.n_components
    # slices share an assembly component exactly when they share a forest component
    f = np.array([a.forest.labels[k] for k in range(len(a.slices))])
    _, inv_a = np.unique(a.slice_component, return_inverse=True)
    _, inv_f = np.unique(f, return_inverse=True)
    assert len({(x, y) for x, y in zip(inv_a, inv_f)}) == len(set(inv_a)) == len(set(inv_f))


def test_cut_below_frontier_collides_when_folded():
    # cutting two consecutive indices below the top one breaks the disjointness claim
    inst = build_instance(desk_plan(seed=0, m=(1, 1, 1, 1, 3, 3), fold_clearance=False), (600, 600))
    assert not inst.overlap.passed
    assert all(v.reason in ("unlinked contact", "layer-0 contact") for v in inst.overlap.violations[:5])
