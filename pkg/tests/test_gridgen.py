import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from slabperc.geometry import Orientation, PairKind, PlanarRect, classify_pair, encode, induced_rect_graph
from slabperc.gridgen import (
    ParamSeed,
    Symmetry,
    apply_symmetry,
    audit_catalog,
    build_catalog,
    derive_params,
    fork_rects,
    make_window,
    randomize_symmetry,
    sample_nested_grids,
)

R = PlanarRect.from_bounds


def test_derive_params_examples():
    assert derive_params(ParamSeed(2, 3, (2,))) == [(2, 3), (3, 7)]
    assert derive_params(ParamSeed(2, 3, (3, 4))) == [(2, 3), (3, 12), (12, 48)]


def test_derive_params_overflow_names_level():
    with pytest.raises(OverflowError, match="level"):
        derive_params(ParamSeed(2, 3, (1000,) * 5))


def test_param_seed_rejects_short_periods():
    with pytest.raises(ValueError):
        ParamSeed(2, 3, (3, 1))
    with pytest.raises(ValueError):
        ParamSeed(2, 3, ())


@given(st.integers(1, 6), st.integers(1, 6), st.lists(st.integers(2, 6), min_size=1, max_size=4))
def test_period_multiplies_by_L(l0, d0, L):
    params = derive_params(ParamSeed(l0, d0, tuple(L)))
    for i, (l, d) in enumerate(params):
        assert l + d == (l0 + d0) * int(np.prod(L[:i]))
        if i:
            assert l == params[i - 1][1]


@given(st.integers(0, 10_000))
def test_nested_strips_cover_square_columns(seed):
    grids = sample_nested_grids(ParamSeed(2, 3, (2, 3), seed))
    xs = np.arange(0, 2 * grids[-1].period)
    for lo, hi in zip(grids, grids[1:]):
        # every strip column of the coarser grid is a square column of the finer one
        cols = xs[hi.in_strip_col(xs)]
        assert not lo.in_strip_col(cols).any()
        # and the strip is a whole square column: its neighbours are finer strips
        starts = cols[~hi.in_strip_col(cols - 1)]
        assert lo.in_strip_col(starts - 1).all()
        assert lo.in_strip_col(starts + hi.l).all()


def test_sampling_is_deterministic():
    s = ParamSeed(2, 3, (3, 4, 5), 42)
    assert sample_nested_grids(s) == sample_nested_grids(s)


def test_fork_rects_window_at_origin():
    params = derive_params(ParamSeed(2, 3, (2,)))
    verts, horiz = fork_rects(make_window(1, 0, 0, params, (2,)), params)
    assert verts == [R(5, 6, 0, 4, Orientation.VERTICAL)]
    assert horiz == R(2, 9, 0, 1, Orientation.HORIZONTAL)
    assert (horiz.width, horiz.height) == (8, 2)


def test_fork_has_L_minus_one_verticals_all_well_joined():
    params = derive_params(ParamSeed(2, 3, (4,)))
    w = make_window(1, 0, 0, params, (4,))
    assert len(w.vframes) == len(w.hframes) == 4
    verts, horiz = fork_rects(w, params)
    assert len(verts) == 3
    assert all(classify_pair(v, horiz) is PairKind.V2H for v in verts)
    l, d = params[0]
    side = params[1][1]
    assert all((v.width, v.height) == (l, side - l) for v in verts)
    assert (horiz.width, horiz.height) == (side + d - l, l)


def test_catalog_small_viewport():
    cat = build_catalog(ParamSeed(2, 3, (3, 4), 0), (200, 200))
    assert all(e.j % 2 == 0 for e in cat.by_orientation(Orientation.VERTICAL))
    assert all(e.j % 2 == 1 for e in cat.by_orientation(Orientation.HORIZONTAL))
    audit = audit_catalog(cat)
    assert audit.passed
    assert audit.vertical_overlaps == []
    assert audit.n_mixed_intersections > 0


def test_catalog_rejects_empty_viewport():
    with pytest.raises(ValueError):
        build_catalog(ParamSeed(2, 3, (3, 4), 0), (0, 0))
    with pytest.raises(ValueError):
        build_catalog(ParamSeed(2, 3, (3, 4, 5), 0), (50, 50))


def test_catalog_is_deterministic():
    s = ParamSeed(2, 3, (3, 4), 9)
    assert build_catalog(s, (250, 250)).dump_lines() == build_catalog(s, (250, 250)).dump_lines()


@given(st.integers(0, 2**31 - 1))
def test_catalog_audit_random_seeds(seed):
    cat = build_catalog(ParamSeed(2, 3, (3, 4), seed), (200, 200))
    audit = audit_catalog(cat)
    assert audit.passed, audit.problems()
    for e in cat.usable():
        if e.orientation is Orientation.HORIZONTAL:
            # the extension crosses exactly one vertical strip segment of the next grid
            g = cat.grids[e.i + 1]
            cols = np.arange(e.rect.h.lo, e.rect.h.hi + 1)
            inside = g.in_strip_col(cols)
            assert int(np.sum(np.diff(inside.astype(int)) == 1) + inside[0]) == 1


def test_fork_verticals_stay_in_their_window():
    cat = build_catalog(ParamSeed(2, 3, (3, 4), 5), (300, 300))
    by_window = {}
    for e in cat.by_orientation(Orientation.VERTICAL):
        by_window.setdefault((e.level, e.window), []).append(e)
    levels = {}
    for (lvl, w), es in by_window.items():
        levels.setdefault(lvl, []).append((w, es))
    for lvl, group in levels.items():
        for w, es in group:
            for w2, others in group:
                if w2 == w:
                    continue
                for e in es:
                    assert all(e.rect.intersect(o.rect) is None for o in others)
                    assert e.rect.intersect(w2) is None


def test_identity_symmetry_is_noop():
    cat = build_catalog(ParamSeed(2, 3, (3, 4), 1), (200, 200))
    same = apply_symmetry(cat, Symmetry())
    assert [e.rect for e in same.entries] == [e.rect for e in cat.entries]


def test_quarter_turn_swaps_orientation():
    cat = build_catalog(ParamSeed(2, 3, (3, 4), 1), (200, 200))
    turned = apply_symmetry(cat, Symmetry(rot=1))
    for a, b in zip(cat.entries, turned.entries):
        assert b.rect.orientation is a.rect.orientation.swapped()
        assert (b.rect.width, b.rect.height) == (a.rect.height, a.rect.width)
    assert audit_catalog(turned).passed


def test_layer_swap_exchanges_layers():
    g = induced_rect_graph(R(0, 2, 0, 2), layer=1)
    swapped = apply_symmetry(g, Symmetry(layer_swap=True))
    assert np.array_equal(swapped.vertices, np.sort(encode(*np.meshgrid(range(3), range(3)), 0).ravel()))


def test_randomize_symmetry_returns_element():
    r = R(0, 4, 0, 1, Orientation.HORIZONTAL)
    out, g = randomize_symmetry(r, 11)
    assert out == apply_symmetry(r, g)


def test_level0_offset_uniform():
    counts = np.zeros((5, 5), int)
    for s in range(10_000):
        g = sample_nested_grids(ParamSeed(2, 3, (3,), s))[0]
        counts[g.ox, g.oy] += 1
    assert stats.chisquare(counts.ravel()).pvalue > 0.01
