"""Balanced cuts, slice folding into the two-layer slab, and the overlap audit."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from .geometry import (
    Block,
    FiniteGraph,
    Orientation,
    PlanarRect,
    SlabVertex,
    decode,
    encode,
    graph_union,
    induced_rect_graph,
    induced_subgraph,
)
from .gridgen import RectCatalog
from .tree import AbstractForest, RectTree, build_abstract_forest

MIN_SLICE_SIDE = 3


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def balanced_cut(B: Block, m: int, seed=None) -> list[Block]:
    """Split ``B`` into ``m`` consecutive blocks whose sizes differ by at most one.

    The positions of the longer blocks are drawn uniformly, which makes the
    partition uniform over all balanced ordered partitions.
    """
    n = B.length
    if m < 1 or m > n:
        raise ValueError(f"cannot cut a block of length {n} into {m} pieces")
    q, r = divmod(n, m)
    sizes = np.full(m, q)
    if r:
        sizes[_rng(seed).choice(m, size=r, replace=False)] += 1
    out, lo = [], B.lo
    for s in sizes:
        out.append(Block(lo, lo + int(s) - 1))
        lo += int(s)
    return out


def n_balanced_cuts(n: int, m: int) -> int:
    return comb(m, n % m)


@dataclass(frozen=True)
class Slice:
    rect: PlanarRect
    owner: int | None = None
    slot: int = 0


def cut_rect(R: PlanarRect, m: int, seed=None, owner: int | None = None) -> list[Slice]:
    """Vertical rectangles are cut along columns, horizontal ones along rows.

    An actual cut (``m >= 2``) must leave every slice at least three wide.
    """
    if R.orientation is Orientation.UNTAGGED:
        raise ValueError("cut_rect needs an orientation-tagged rectangle")
    across = R.h if R.orientation is Orientation.VERTICAL else R.v
    if m >= 2 and across.length // m < MIN_SLICE_SIDE:
        raise ValueError(
            f"cutting {across.length} into {m} slices leaves a side below {MIN_SLICE_SIDE}"
        )
    pieces = balanced_cut(across, m, seed)
    if R.orientation is Orientation.VERTICAL:
        rects = [PlanarRect(b, R.v, R.orientation) for b in pieces]
    else:
        rects = [PlanarRect(R.h, b, R.orientation) for b in pieces]
    return [Slice(r, owner, k) for k, r in enumerate(rects)]


# ---------------------------------------------------------------------------
# folding


@dataclass
class FoldedSlice:
    source: Slice
    graph: FiniteGraph
    indicator: np.ndarray  # (width, height) of the source rect, 1 = top layer
    top_boundary: np.ndarray  # boolean mask, same shape
    bottom_boundary: np.ndarray

    @property
    def rect(self) -> PlanarRect:
        return self.source.rect

    def _mask_points(self, mask) -> set[tuple[int, int]]:
        ix, iy = np.nonzero(mask)
        r = self.rect
        return {(int(r.h.lo + a), int(r.v.lo + b)) for a, b in zip(ix, iy)}

    def top_points(self) -> set[tuple[int, int]]:
        return self._mask_points(self.top_boundary)

    def bottom_points(self) -> set[tuple[int, int]]:
        return self._mask_points(self.bottom_boundary)

    @property
    def is_lift(self) -> bool:
        return bool(self.indicator.all())

    def end_sets(self) -> tuple[np.ndarray, np.ndarray]:
        """Keys of the images of the two short sides (long-direction crossing ends)."""
        r = self.rect
        vertical = (
            r.orientation is Orientation.VERTICAL
            if r.orientation is not Orientation.UNTAGGED
            else r.height >= r.width
        )
        if vertical:
            sides = [(slice(None), 0), (slice(None), r.height - 1)]
        else:
            sides = [(0, slice(None)), (r.width - 1, slice(None))]
        X, Y = _grid(r)
        out = []
        for sl in sides:
            x, y = X[sl], Y[sl]
            I = self.indicator[sl]
            t = self.top_boundary[sl]
            keys = np.concatenate([encode(x, y, I), encode(x[t], y[t], 0)])
            out.append(np.unique(keys))
        return out[0], out[1]


def _grid(r: PlanarRect):
    xs = np.arange(r.h.lo, r.h.hi + 1, dtype=np.int64)
    ys = np.arange(r.v.lo, r.v.hi + 1, dtype=np.int64)
    return np.meshgrid(xs, ys, indexing="ij")


def _neighbour_any(mask: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mask)
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


def fold_slice(S: Slice, next_rect: PlanarRect | None, beta_slice: Slice | None) -> FoldedSlice:
    """Move the part of ``S`` lying over ``next_rect`` but outside its image slice to layer 0.

    The result is the graph union of the layered image of ``S``, both layers
    over the top boundary and the layer-0 graph over both boundaries.
    """
    r = S.rect
    X, Y = _grid(r)
    ones = np.ones(X.shape, dtype=bool)
    if next_rect is None or r.intersect(next_rect) is None:
        empty = np.zeros_like(ones)
        return FoldedSlice(S, induced_rect_graph(r, 1), ones, empty, empty.copy())
    if beta_slice is None or not next_rect.contains(beta_slice.rect):
        raise ValueError("image slice must lie inside the next rectangle")
    b = beta_slice.rect
    in_next = (X >= next_rect.h.lo) & (X <= next_rect.h.hi) & (Y >= next_rect.v.lo) & (Y <= next_rect.v.hi)
    in_beta = (X >= b.h.lo) & (X <= b.h.hi) & (Y >= b.v.lo) & (Y <= b.v.hi)
    ind = ~(in_next & ~in_beta)
    top = ind & _neighbour_any(~ind)
    bottom = ~ind & _neighbour_any(ind)
    layered = induced_subgraph(encode(X, Y, ind.astype(np.int64)).ravel())
    columns = induced_subgraph(np.concatenate([encode(X[top], Y[top], 0), encode(X[top], Y[top], 1)]))
    tb = top | bottom
    floor = induced_subgraph(encode(X[tb], Y[tb], 0))
    return FoldedSlice(S, graph_union([layered, columns, floor]), ind, top, bottom)


# ---------------------------------------------------------------------------
# assembly


@dataclass
class SlabAssembly:
    slices: list[Slice]
    folded: list[FoldedSlice]
    beta: dict[int, int]
    graph: FiniteGraph
    labels: np.ndarray  # component id per graph vertex
    n_components: int
    slice_component: np.ndarray
    catalog: RectCatalog | None = None
    tree: RectTree | None = None
    forest: AbstractForest | None = None
    m: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_parts(cls, slices, folded, beta, **extra) -> "SlabAssembly":
        graph = graph_union(f.graph for f in folded)
        n, labels = graph.components()
        sc = np.array(
            [labels[np.searchsorted(graph.vertices, f.graph.vertices[0])] for f in folded], dtype=np.int64
        )
        return cls(list(slices), list(folded), dict(beta), graph, labels, n, sc, **extra)

    def slice_keys(self, k: int) -> np.ndarray:
        return self.folded[k].graph.vertices

    def component_of_key(self, keys) -> np.ndarray:
        return self.labels[np.searchsorted(self.graph.vertices, keys)]

    def dump_lines(self) -> list[str]:
        """``V x y layer slice component`` then ``E x1 y1 l1 x2 y2 l2`` records."""
        out = []
        for k, f in enumerate(self.folded):
            x, y, l = decode(f.graph.vertices)
            comp = self.component_of_key(f.graph.vertices)
            out.extend(f"V\t{a}\t{b}\t{c}\t{k}\t{d}" for a, b, c, d in zip(x, y, l, comp))
        ax, ay, al = decode(self.graph.edges[:, 0])
        bx, by, bl = decode(self.graph.edges[:, 1])
        out.extend(
            f"E\t{a}\t{b}\t{c}\t{d}\t{e}\t{f}" for a, b, c, d, e, f in zip(ax, ay, al, bx, by, bl)
        )
        return out


def assemble_phi(catalog: RectCatalog, tree: RectTree, m: Sequence[int], seed) -> SlabAssembly:
    """Cut every usable rectangle, draw the injections and fold every slice."""
    rng = _rng(seed)
    m = tuple(int(x) for x in m)
    usable = sorted(tree.next)
    E = catalog.entries
    slices: list[Slice] = []
    for eid in usable:
        e = E[eid]
        if e.j >= len(m):
            raise ValueError(f"no slice count for index j={e.j}")
        slices.extend(cut_rect(e.rect, m[e.j], rng, owner=eid))
    forest = build_abstract_forest(tree, {eid: m[E[eid].j] for eid in usable}, rng)
    assert all(forest.owner[k] == s.owner for k, s in enumerate(slices))
    folded = []
    for k, s in enumerate(slices):
        nxt = tree.next[s.owner]
        try:
            if nxt is None:
                folded.append(fold_slice(s, None, None))
            else:
                folded.append(fold_slice(s, E[nxt].rect, slices[forest.beta[k]]))
        except ValueError as exc:
            raise ValueError(f"folding slice {k} (entry {s.owner}) failed: {exc}") from exc
    return SlabAssembly.from_parts(slices, folded, forest.beta, catalog=catalog, tree=tree, forest=forest, m=m)


# ---------------------------------------------------------------------------
# audit


@dataclass
class Violation:
    slice_a: int
    slice_b: int
    reason: str
    vertices: list[SlabVertex]


@dataclass
class AuditReport:
    passed: bool
    violations: list[Violation]
    n_slices: int
    n_shared_vertices: int
    n_linked_pairs: int

    def summary(self) -> dict:
        return {
            "passed": self.passed,
            "n_violations": len(self.violations),
            "n_slices": self.n_slices,
            "n_shared_vertices": self.n_shared_vertices,
            "n_linked_pairs": self.n_linked_pairs,
        }


def shared_vertex_pairs(assembly: SlabAssembly) -> tuple[np.ndarray, np.ndarray]:
    """``(pairs, keys)``: every pair of folded slices sharing a vertex, per shared key."""
    n = len(assembly.folded)
    if n == 0:
        return np.empty((0, 2), np.int64), np.empty(0, np.int64)
    keys = np.concatenate([f.graph.vertices for f in assembly.folded])
    owner = np.concatenate([np.full(len(f.graph.vertices), k, np.int64) for k, f in enumerate(assembly.folded)])
    order = np.argsort(keys, kind="stable")
    ks, os_ = keys[order], owner[order]
    uniq, start, counts = np.unique(ks, return_index=True, return_counts=True)
    two = start[counts == 2]
    pairs = [np.column_stack([os_[two], os_[two + 1]])]
    pkeys = [ks[two]]
    for s, c in zip(start[counts > 2], counts[counts > 2]):
        grp = os_[s : s + c]
        for a in range(c):
            for b in range(a + 1, c):
                pairs.append(np.array([[grp[a], grp[b]]]))
                pkeys.append(ks[s : s + 1])
    P = np.concatenate(pairs)
    return np.sort(P, axis=1), np.concatenate(pkeys)


def overlap_audit(assembly: SlabAssembly) -> AuditReport:
    """Check that folded slices meet only along injection links, on layer 1, exactly on ``S1 ∩ S2``."""
    n = len(assembly.folded)
    beta = np.full(max(n, 1), -1, dtype=np.int64)
    for a, b in assembly.beta.items():
        beta[a] = b
    pairs, keys = shared_vertex_pairs(assembly)
    violations: list[Violation] = []
    if len(pairs):
        a, b = pairs[:, 0], pairs[:, 1]
        linked = (beta[a] == b) | (beta[b] == a)
        top = (keys & 1) == 1
        bad = ~(linked & top)
        groups: dict[tuple[int, int, str], list[int]] = defaultdict(list)
        for x, y, k, lk in zip(a[bad], b[bad], keys[bad], linked[bad]):
            groups[(int(x), int(y), "layer-0 contact" if lk else "unlinked contact")].append(int(k))
        for (x, y, why), ks in sorted(groups.items()):
            vx, vy, vl = decode(np.array(ks))
            violations.append(Violation(x, y, why, [SlabVertex(int(p), int(q), int(r)) for p, q, r in zip(vx, vy, vl)]))
        codes, counts = np.unique(a * n + b, return_counts=True)
        observed = dict(zip(codes.tolist(), counts.tolist()))
    else:
        observed = {}
    for s, t in assembly.beta.items():
        ra, rb = assembly.slices[s].rect, assembly.slices[t].rect
        inter = ra.intersect(rb)
        want = inter.size if inter is not None else 0
        lo, hi = min(s, t), max(s, t)
        got = observed.get(lo * n + hi, 0)
        if got < want:
            violations.append(Violation(s, t, f"linked overlap incomplete ({got} of {want})", []))
    return AuditReport(not violations, violations, n, int(len(keys)), len(assembly.beta))


def slice_intersection_pairs(assembly: SlabAssembly) -> set[tuple[int, int]]:
    pairs, _ = shared_vertex_pairs(assembly)
    return {(int(a), int(b)) for a, b in pairs}


def full_chain_component_count(assembly: SlabAssembly) -> int:
    """Components of the assembly graph restricted to folded slices of usable entries."""
    return int(len(np.unique(assembly.slice_component))) if len(assembly.folded) else 0
