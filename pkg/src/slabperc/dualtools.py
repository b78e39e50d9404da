"""Planar duality on finite boxes.

Dual vertex ``(x, y)`` sits at the point ``(x + 1/2, y + 1/2)``.  For a box
with columns ``x0..x1`` and rows ``y0..y1`` the dual vertices cover
``x0-1..x1`` by ``y0-1..y1``, i.e. the faces of the box plus an outer ring.
Each primal edge crosses exactly one dual edge:

* ``(x, y)-(x+1, y)`` crosses ``(x, y-1)-(x, y)``
* ``(x, y)-(x, y+1)`` crosses ``(x-1, y)-(x, y)``

Ring-to-ring dual edges with no primal partner inside the box are left
undefined.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .geometry import FiniteGraph, PlanarRect, decode, encode, induced_rect_graph
from .percolation import BondConfig, label_clusters


@dataclass
class DualConfig:
    viewport: PlanarRect
    layer: int
    u: np.ndarray  # (E, 2) dual endpoints, aligned with the primal edge order
    v: np.ndarray
    open: np.ndarray
    p: float | None = None

    @property
    def n_pairs(self) -> int:
        return len(self.open)

    @property
    def n_open(self) -> int:
        return int(self.open.sum())

    @property
    def shape(self) -> tuple[int, int]:
        """Dual vertex grid size (including the ring)."""
        return self.viewport.width + 1, self.viewport.height + 1

    def vertex_id(self, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy)
        return (xy[..., 0] - (self.viewport.h.lo - 1)) * self.shape[1] + (xy[..., 1] - (self.viewport.v.lo - 1))

    def vertex_xy(self, ids) -> np.ndarray:
        ids = np.asarray(ids)
        h = self.shape[1]
        return np.stack([ids // h + self.viewport.h.lo - 1, ids % h + self.viewport.v.lo - 1], axis=-1)

    def is_ring(self, xy) -> np.ndarray:
        xy = np.asarray(xy)
        r = self.viewport
        return (xy[..., 0] == r.h.lo - 1) | (xy[..., 0] == r.h.hi) | (xy[..., 1] == r.v.lo - 1) | (xy[..., 1] == r.v.hi)

    def edge_lines(self) -> list[str]:
        """Line records ``x1 y1 x2 y2 open`` for every defined dual edge."""
        return [f"{a[0]}\t{a[1]}\t{b[0]}\t{b[1]}\t{int(o)}" for a, b, o in zip(self.u, self.v, self.open)]


def _planar_box(graph: FiniteGraph) -> tuple[PlanarRect, int]:
    x, y, l = decode(graph.vertices)
    if graph.n_vertices == 0:
        raise ValueError("empty graph")
    if np.unique(l).size != 1:
        raise ValueError("duality needs a single-layer graph")
    box = PlanarRect.from_bounds(int(x.min()), int(x.max()), int(y.min()), int(y.max()))
    ref = induced_rect_graph(box, int(l[0]))
    if not ref.same_as(graph):
        raise ValueError("duality needs the full induced graph of a rectangle")
    return box, int(l[0])


def _crossing_duals(graph: FiniteGraph) -> tuple[np.ndarray, np.ndarray]:
    ax, ay, _ = decode(graph.edges[:, 0])
    bx, by, _ = decode(graph.edges[:, 1])
    horiz = ay == by
    ux = np.where(horiz, np.minimum(ax, bx), np.minimum(ax, bx) - 1)
    uy = np.where(horiz, np.minimum(ay, by) - 1, np.minimum(ay, by))
    vx = np.where(horiz, ux, ux + 1)
    vy = np.where(horiz, uy + 1, uy)
    return np.stack([ux, uy], 1), np.stack([vx, vy], 1)


def dual_of_config(config):
    """Complementary configuration on the crossing dual edges (an involution).

    A :class:`~slabperc.percolation.BondConfig` on a planar box maps to a
    :class:`DualConfig`; a :class:`DualConfig` maps back to the primal box.
    """
    if isinstance(config, DualConfig):
        g = induced_rect_graph(config.viewport, config.layer)
        return BondConfig(g, ~config.open, config.p if config.p is not None else 0.5)
    box, layer = _planar_box(config.graph)
    u, v = _crossing_duals(config.graph)
    return DualConfig(box, layer, u, v, ~config.open, config.p)


def dual_clusters(dc: DualConfig) -> tuple[int, np.ndarray]:
    """Components of the open dual subgraph over all dual vertices."""
    W, H = dc.shape
    n = W * H
    a, b = dc.vertex_id(dc.u[dc.open]), dc.vertex_id(dc.v[dc.open])
    adj = coo_matrix((np.ones(len(a), np.int8), (a, b)), shape=(n, n))
    return connected_components(adj, directed=False)


def dual_cluster_sets(dc: DualConfig) -> list[set[tuple[int, int]]]:
    k, lab = dual_clusters(dc)
    xy = dc.vertex_xy(np.arange(len(lab)))
    out: list[set] = [set() for _ in range(k)]
    for (x, y), c in zip(xy, lab):
        out[c].add((int(x), int(y)))
    return out


def touches(dual_cluster, primal_cluster) -> bool:
    """Some dual vertex sits at a diagonal half-step from some primal vertex."""
    prim = {(int(p[0]), int(p[1])) for p in primal_cluster}
    if not prim:
        return False
    for x, y in dual_cluster:
        if any((x + dx, y + dy) in prim for dx in (0, 1) for dy in (0, 1)):
            return True
    return False


# ---------------------------------------------------------------------------
# separation


@dataclass
class Witness:
    edges: list[tuple[tuple[int, int], tuple[int, int]]]
    vertices: list[tuple[int, int]]
    closed: bool
    crossed: np.ndarray  # primal edge indices crossed by the path

    def lines(self) -> list[str]:
        return [f"{k}\t{a[0]}\t{a[1]}\t{b[0]}\t{b[1]}" for k, (a, b) in enumerate(self.edges)]


def _key_index(graph: FiniteGraph, verts) -> np.ndarray:
    verts = list(verts)
    if not verts:
        return np.zeros(0, np.int64)
    arr = np.asarray(verts, dtype=np.int64)
    layer = arr[:, 2] if arr.shape[1] > 2 else decode(graph.vertices[:1])[2][0]
    keys = encode(arr[:, 0], arr[:, 1], layer)
    idx = np.searchsorted(graph.vertices, keys)
    if np.any(idx >= graph.n_vertices) or np.any(graph.vertices[np.minimum(idx, graph.n_vertices - 1)] != keys):
        raise ValueError("cluster vertex outside the configuration graph")
    return idx


def _bfs_path(n: int, adj: list[list[int]], sources: np.ndarray, targets: set[int]) -> list[int] | None:
    prev = np.full(n, -2, np.int64)
    q = deque()
    for s in sources:
        prev[s] = -1
        q.append(int(s))
    while q:
        a = q.popleft()
        if a in targets:
            path = [a]
            while prev[path[-1]] != -1:
                path.append(int(prev[path[-1]]))
            return path[::-1]
        for b in adj[a]:
            if prev[b] == -2:
                prev[b] = a
                q.append(b)
    return None


def _adjacency(n: int, ea: np.ndarray, eb: np.ndarray) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in zip(ea.tolist(), eb.tolist()):
        adj[a].append(b)
        adj[b].append(a)
    return adj


def separation_witness(C1, C2, config: BondConfig) -> Witness | None:
    """Open dual path separating two distinct open clusters, or ``None``.

    A shortest primal path from ``C1`` to ``C2`` leaves ``C1`` through one
    closed edge; its dual is closed into a cycle (or a ring-to-ring arc)
    using only duals of edges between ``C1`` and the complementary region
    that contains ``C2``.  The result is checked by deleting the crossed
    primal edges from the full box graph.
    """
    g = config.graph
    i1, i2 = _key_index(g, C1), _key_index(g, C2)
    s1, s2 = set(i1.tolist()), set(i2.tolist())
    if s1 == s2:
        raise ValueError("the two clusters coincide")
    if s1 & s2:
        raise ValueError("clusters must be disjoint")
    lab = label_clusters(config).label
    for name, s in (("C1", i1), ("C2", i2)):
        if s.size == 0 or np.unique(lab[s]).size != 1 or np.sum(lab == lab[s[0]]) != s.size:
            raise ValueError(f"{name} is not an open cluster of the configuration")

    dc = dual_of_config(config)
    n = g.n_vertices
    ea, eb = g.edge_index()
    path = _bfs_path(n, _adjacency(n, ea, eb), i1, s2)
    if path is None:
        return None
    w0 = path[1]
    in1 = np.zeros(n, bool)
    in1[i1] = True
    rest = ~in1[ea] & ~in1[eb]
    adj = coo_matrix((np.ones(int(rest.sum()), np.int8), (ea[rest], eb[rest])), shape=(n, n))
    _, comp = connected_components(adj, directed=False)
    region = comp == comp[w0]
    region[in1] = False
    iface = (in1[ea] & region[eb]) | (in1[eb] & region[ea])
    e_first = int(np.flatnonzero(((ea == path[0]) & (eb == w0)) | ((eb == path[0]) & (ea == w0)))[0])

    # dual interface graph with the ring contracted to one node
    RING = -1
    du = dc.vertex_id(dc.u)
    dv = dc.vertex_id(dc.v)
    ring_u = dc.is_ring(dc.u)
    ring_v = dc.is_ring(dc.v)
    node_u = np.where(ring_u, RING, du)
    node_v = np.where(ring_v, RING, dv)
    ids = np.unique(np.concatenate([node_u[iface], node_v[iface]]))
    remap = {int(x): k for k, x in enumerate(ids)}
    m = len(ids)
    nbrs: list[list[tuple[int, int]]] = [[] for _ in range(m)]
    for e in np.flatnonzero(iface):
        if e == e_first:
            continue
        a, b = remap[int(node_u[e])], remap[int(node_v[e])]
        if a == b:
            continue
        nbrs[a].append((b, e))
        nbrs[b].append((a, e))
    start, goal = remap[int(node_u[e_first])], remap[int(node_v[e_first])]
    # walk start -> ... -> goal, then back to start along the first edge
    steps: list[tuple[int, int]] = []  # (edge, node the edge is entered from)
    if start != goal:
        prev = {start: (None, None)}
        q = deque([start])
        while q and goal not in prev:
            a = q.popleft()
            for b, e in nbrs[a]:
                if b not in prev:
                    prev[b] = (a, e)
                    q.append(b)
        if goal not in prev:
            return None
        x = goal
        while prev[x][0] is not None:
            steps.append((int(prev[x][1]), prev[x][0]))
            x = prev[x][0]
        steps.reverse()
    steps.append((e_first, goal))
    crossed = np.array([e for e, _ in steps], dtype=np.int64)
    if not dc.open[crossed].all() or not separates(config, crossed, i1, i2):
        return None
    ring_node = remap.get(RING)
    walk = []
    for e, frm in steps:
        a, b = tuple(map(int, dc.u[e])), tuple(map(int, dc.v[e]))
        if remap[int(node_u[e])] != frm:
            a, b = b, a
        walk.append((e, a, b, frm))
    if ring_node is None:
        closed = True
        verts = [a for _, a, _, _ in walk]
    else:
        r = next(t for t, w in enumerate(walk) if w[3] == ring_node)
        walk = walk[r:] + walk[:r]
        closed = False
        verts = [a for _, a, _, _ in walk] + [walk[-1][2]]
    return Witness(
        [(a, b) for _, a, b, _ in walk], verts, closed, np.array([e for e, _, _, _ in walk], dtype=np.int64)
    )


def separates(config: BondConfig, crossed: np.ndarray, i1: np.ndarray, i2: np.ndarray) -> bool:
    """``True`` if deleting ``crossed`` from the full box graph splits the two sets."""
    g = config.graph
    keep = np.ones(g.n_edges, bool)
    keep[crossed] = False
    _, lab = g.components(keep)
    return not np.intersect1d(lab[i1], lab[i2]).size


def witness_valid(w: Witness, C1, C2, config: BondConfig) -> bool:
    dc = dual_of_config(config)
    g = config.graph
    i1, i2 = _key_index(g, C1), _key_index(g, C2)
    ea, eb = g.edge_index()
    in1 = np.zeros(g.n_vertices, bool)
    in1[i1] = True
    touches_c1 = bool(np.any(in1[ea[w.crossed]] | in1[eb[w.crossed]]))
    return bool(dc.open[w.crossed].all()) and touches_c1 and separates(config, w.crossed, i1, i2)


# ---------------------------------------------------------------------------
# diagnostics


def spanning_clusters(config: BondConfig, axis: str = "H") -> list[set[tuple[int, int, int]]]:
    """Open clusters touching both sides of the box across ``axis``."""
    box, _ = _planar_box(config.graph)
    lab = label_clusters(config).label
    x, y, l = decode(config.graph.vertices)
    c = x if axis == "H" else y
    lo, hi = (box.h.lo, box.h.hi) if axis == "H" else (box.v.lo, box.v.hi)
    ids = np.intersect1d(lab[c == lo], lab[c == hi])
    return [
        {(int(a), int(b), int(d)) for a, b, d in zip(x[lab == k], y[lab == k], l[lab == k])} for k in ids
    ]


def boundary_arm_count(cluster, viewport: PlanarRect) -> int:
    """Approximate number of separate arms of a cluster reaching the box boundary.

    Counts maximal runs of cluster vertices along the cyclic walk around the
    box perimeter.  This is only a finite-volume proxy for counting ends.
    """
    pts = {(int(p[0]), int(p[1])) for p in cluster}
    r = viewport
    walk = (
        [(x, r.v.lo) for x in range(r.h.lo, r.h.hi + 1)]
        + [(r.h.hi, y) for y in range(r.v.lo + 1, r.v.hi + 1)]
        + [(x, r.v.hi) for x in range(r.h.hi - 1, r.h.lo - 1, -1)]
        + [(r.h.lo, y) for y in range(r.v.hi - 1, r.v.lo, -1)]
    )
    hit = [p in pts for p in walk]
    if all(hit):
        return 1
    return sum(1 for t in range(len(hit)) if hit[t] and not hit[t - 1])
