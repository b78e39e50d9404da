"""Blocks, rectangles and finite subgraphs of the slab Z^2 x {0, 1}.

Vertices are packed into int64 keys so that graph unions, intersections and
audits reduce to sorted-array set operations.  Planar objects live on layer 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

COORD_MAX = 2**30
_OFF = 2**30


class Orientation(str, enum.Enum):
    VERTICAL = "V"
    HORIZONTAL = "H"
    UNTAGGED = "U"

    def swapped(self) -> "Orientation":
        if self is Orientation.VERTICAL:
            return Orientation.HORIZONTAL
        if self is Orientation.HORIZONTAL:
            return Orientation.VERTICAL
        return self


class PairKind(str, enum.Enum):
    V2H = "V2H"
    H2V = "H2V"
    DISJOINT = "Disjoint"
    OTHER = "Other"


@dataclass(frozen=True, order=True)
class Block:
    """Consecutive integers ``lo..hi`` (inclusive)."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty block [{self.lo}, {self.hi}]")

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    @property
    def length(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, x) -> bool:
        if isinstance(x, Block):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def proper_subset_of(self, other: "Block") -> bool:
        return self in other and self != other

    def intersect(self, other: "Block") -> "Block | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Block(lo, hi) if lo <= hi else None

    def shift(self, t: int) -> "Block":
        return Block(self.lo + t, self.hi + t)

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))


@dataclass(frozen=True)
class PlanarRect:
    """Closed integer box ``h x v``: ``h`` holds the columns, ``v`` the rows."""

    h: Block
    v: Block
    orientation: Orientation = Orientation.UNTAGGED

    @classmethod
    def from_bounds(cls, x0, x1, y0, y1, orientation=Orientation.UNTAGGED) -> "PlanarRect":
        return cls(Block(x0, x1), Block(y0, y1), orientation)

    @property
    def width(self) -> int:
        return self.h.length

    @property
    def height(self) -> int:
        return self.v.length

    @property
    def size(self) -> int:
        return self.width * self.height

    @property
    def shorter_side(self) -> int:
        return min(self.width, self.height)

    @property
    def longer_side(self) -> int:
        return max(self.width, self.height)

    def tagged(self, orientation: Orientation) -> "PlanarRect":
        return PlanarRect(self.h, self.v, orientation)

    def intersect(self, other: "PlanarRect") -> "PlanarRect | None":
        h = self.h.intersect(other.h)
        v = self.v.intersect(other.v)
        if h is None or v is None:
            return None
        return PlanarRect(h, v)

    def contains(self, other: "PlanarRect") -> bool:
        return other.h in self.h and other.v in self.v

    def contains_point(self, x: int, y: int) -> bool:
        return x in self.h and y in self.v

    def shift(self, dx: int, dy: int) -> "PlanarRect":
        return PlanarRect(self.h.shift(dx), self.v.shift(dy), self.orientation)

    def points(self) -> np.ndarray:
        """All lattice points as an ``(n, 2)`` array, row-major in y."""
        xs = np.arange(self.h.lo, self.h.hi + 1)
        ys = np.arange(self.v.lo, self.v.hi + 1)
        X, Y = np.meshgrid(xs, ys)
        return np.column_stack([X.ravel(), Y.ravel()])

    def keys(self, layer: int = 1) -> np.ndarray:
        p = self.points()
        return encode(p[:, 0], p[:, 1], layer)

    def __str__(self) -> str:
        return f"[{self.h.lo},{self.h.hi}]x[{self.v.lo},{self.v.hi}]"


class SlabVertex(NamedTuple):
    x: int
    y: int
    layer: int = 1


# ---------------------------------------------------------------------------
# key packing


def encode(x, y, layer=1):
    """Pack coordinates into int64 keys.  Accepts scalars or arrays."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    layer = np.asarray(layer, dtype=np.int64)
    if np.any(np.abs(x) >= COORD_MAX) or np.any(np.abs(y) >= COORD_MAX):
        raise OverflowError("coordinate outside the packable range")
    return ((x + _OFF) << 32) | ((y + _OFF) << 1) | (layer & 1)


def decode(keys) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    keys = np.asarray(keys, dtype=np.int64)
    x = (keys >> 32) - _OFF
    y = ((keys >> 1) & (2**31 - 1)) - _OFF
    layer = keys & 1
    return x, y, layer


def planar_part(keys) -> np.ndarray:
    """Keys with the layer bit forced to 1 (projection onto the top layer)."""
    return np.asarray(keys, dtype=np.int64) | 1


# offsets between adjacent keys
_DX = np.int64(1) << 32
_DY = np.int64(2)
_DZ = np.int64(1)


def _adjacent_pairs(keys: np.ndarray) -> np.ndarray:
    """All unit-distance pairs inside a sorted key set (the induced edge set)."""
    keys = np.asarray(keys, dtype=np.int64)
    out = []
    for step in (_DX, _DY):
        cand = keys + step
        hit = np.isin(cand, keys, assume_unique=True)
        out.append(np.column_stack([keys[hit], cand[hit]]))
    bottom = keys[(keys & 1) == 0]
    cand = bottom + _DZ
    hit = np.isin(cand, keys, assume_unique=True)
    out.append(np.column_stack([bottom[hit], cand[hit]]))
    edges = np.concatenate(out) if out else np.empty((0, 2), np.int64)
    return _unique_edges(edges)


def _unique_edges(edges: np.ndarray) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges) == 0:
        return np.empty((0, 2), np.int64)
    edges = np.sort(edges, axis=1)
    return np.unique(edges, axis=0)


def _row_view(edges: np.ndarray) -> np.ndarray:
    """View ``(m, 2)`` int64 rows as single opaque items for set operations."""
    e = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    return e.view(np.dtype((np.void, 16))).ravel()


def edges_isin(edges: np.ndarray, pool: np.ndarray) -> np.ndarray:
    return np.isin(_row_view(edges), _row_view(pool))


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True, eq=False)
class FiniteGraph:
    """Finite subgraph of the slab.

    ``vertices`` is a sorted array of unique keys, ``edges`` an ``(m, 2)``
    array of key pairs with ``a < b``, lexicographically sorted and unique.
    """

    vertices: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.int64)
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "edges", e)

    @classmethod
    def empty(cls) -> "FiniteGraph":
        return cls(np.empty(0, np.int64), np.empty((0, 2), np.int64))

    @classmethod
    def from_keys(cls, keys, edges=None) -> "FiniteGraph":
        """Build a graph; without ``edges`` the induced subgraph on ``keys``."""
        v = np.unique(np.asarray(keys, dtype=np.int64))
        e = _adjacent_pairs(v) if edges is None else _unique_edges(edges)
        return cls(v, e)

    @classmethod
    def from_vertices(cls, verts: Iterable[Sequence[int]], edges=None) -> "FiniteGraph":
        verts = list(verts)
        if not verts:
            return cls.empty()
        arr = np.array([(v[0], v[1], v[2] if len(v) > 2 else 1) for v in verts], dtype=np.int64)
        keys = encode(arr[:, 0], arr[:, 1], arr[:, 2])
        if edges is not None:
            edges = [
                (encode(a[0], a[1], a[2] if len(a) > 2 else 1), encode(b[0], b[1], b[2] if len(b) > 2 else 1))
                for a, b in edges
            ]
            edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
        return cls.from_keys(keys, edges)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex_set(self) -> set[SlabVertex]:
        x, y, l = decode(self.vertices)
        return {SlabVertex(int(a), int(b), int(c)) for a, b, c in zip(x, y, l)}

    def edge_set(self) -> set[frozenset]:
        out = set()
        for a, b in self.edges:
            (xa, ya, la), (xb, yb, lb) = (decode(a), decode(b))
            out.add(frozenset({SlabVertex(int(xa), int(ya), int(la)), SlabVertex(int(xb), int(yb), int(lb))}))
        return out

    def has_edge(self, u: Sequence[int], w: Sequence[int]) -> bool:
        a = int(encode(u[0], u[1], u[2] if len(u) > 2 else 1))
        b = int(encode(w[0], w[1], w[2] if len(w) > 2 else 1))
        a, b = min(a, b), max(a, b)
        if self.n_edges == 0:
            return False
        i = np.searchsorted(self.edges[:, 0], a, side="left")
        j = np.searchsorted(self.edges[:, 0], a, side="right")
        return bool(np.any(self.edges[i:j, 1] == b))

    def edge_index(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints as positions into ``vertices``."""
        if self.n_edges == 0:
            return np.empty(0, np.int64), np.empty(0, np.int64)
        return (np.searchsorted(self.vertices, self.edges[:, 0]), np.searchsorted(self.vertices, self.edges[:, 1]))

    def components(self, edge_mask: np.ndarray | None = None) -> tuple[int, np.ndarray]:
        """Connected components, optionally keeping only masked edges."""
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        n = self.n_vertices
        if n == 0:
            return 0, np.empty(0, np.int64)
        a, b = self.edge_index()
        if edge_mask is not None:
            a, b = a[edge_mask], b[edge_mask]
        adj = coo_matrix((np.ones(len(a), np.int8), (a, b)), shape=(n, n))
        k, labels = connected_components(adj, directed=False)
        return int(k), labels.astype(np.int64)

    def n_components(self) -> int:
        return self.components()[0]

    def check(self) -> None:
        """Raise if the structural invariants do not hold."""
        if len(self.vertices) and np.any(np.diff(self.vertices) <= 0):
            raise ValueError("vertices must be sorted and unique")
        if self.n_edges:
            a, b = self.edges[:, 0], self.edges[:, 1]
            if np.any(a >= b):
                raise ValueError("edges must satisfy a < b (no self-loops)")
            if not (np.all(np.isin(a, self.vertices)) and np.all(np.isin(b, self.vertices))):
                raise ValueError("edge endpoint missing from vertex set")
            if len(np.unique(self.edges, axis=0)) != self.n_edges:
                raise ValueError("duplicate edges")
            d = b - a
            if not np.all((d == _DX) | (d == _DY) | ((d == _DZ) & ((a & 1) == 0))):
                raise ValueError("edge endpoints are not at lattice distance 1")

    def same_as(self, other: "FiniteGraph") -> bool:
        return np.array_equal(self.vertices, other.vertices) and np.array_equal(self.edges, other.edges)

    def __eq__(self, other):
        if not isinstance(other, FiniteGraph):
            return NotImplemented
        return self.same_as(other)

    def __hash__(self):
        return hash((self.vertices.tobytes(), self.edges.tobytes()))


# ---------------------------------------------------------------------------
# operations


def classify_pair(q: PlanarRect, r: PlanarRect) -> PairKind:
    """Well-joinedness of the ordered pair ``(q, r)``."""
    if q.h.proper_subset_of(r.h) and r.v.proper_subset_of(q.v):
        return PairKind.V2H
    if q.v.proper_subset_of(r.v) and r.h.proper_subset_of(q.h):
        return PairKind.H2V
    if q.intersect(r) is None:
        return PairKind.DISJOINT
    return PairKind.OTHER


def induced_rect_graph(r: PlanarRect, layer: int = 1) -> FiniteGraph:
    if layer not in (0, 1):
        raise ValueError("layer must be 0 or 1")
    w, h = r.width, r.height
    xs = np.arange(r.h.lo, r.h.hi + 1, dtype=np.int64)
    ys = np.arange(r.v.lo, r.v.hi + 1, dtype=np.int64)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    keys = encode(X, Y, layer)  # shape (w, h), sorted along both axes
    horiz = np.column_stack([keys[:-1, :].ravel(), keys[1:, :].ravel()]) if w > 1 else np.empty((0, 2), np.int64)
    vert = np.column_stack([keys[:, :-1].ravel(), keys[:, 1:].ravel()]) if h > 1 else np.empty((0, 2), np.int64)
    edges = np.concatenate([horiz, vert])
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return FiniteGraph(keys.ravel(), edges[order])


def induced_subgraph(keys) -> FiniteGraph:
    """Slab-induced subgraph on an arbitrary key set."""
    return FiniteGraph.from_keys(keys)


def graph_union(parts: Iterable[FiniteGraph]) -> FiniteGraph:
    """Union of vertex sets and edge sets; never adds edges between parts."""
    parts = list(parts)
    if not parts:
        return FiniteGraph.empty()
    v = np.unique(np.concatenate([p.vertices for p in parts]))
    e = np.concatenate([p.edges for p in parts])
    e = np.unique(e, axis=0) if len(e) else np.empty((0, 2), np.int64)
    return FiniteGraph(v, e)


def union_pathology_edges(parts: Sequence[FiniteGraph]) -> np.ndarray:
    """Edges of the induced graph on the union of vertices that no part owns.

    These are exactly the adjacencies a site-style union would add between
    neighbouring but unrelated pieces.
    """
    u = graph_union(parts)
    induced = induced_subgraph(u.vertices)
    if induced.n_edges == 0:
        return np.empty((0, 2), np.int64)
    have = edges_isin(induced.edges, u.edges)
    return induced.edges[~have]


def rects_bounding_box(rects: Iterable[PlanarRect]) -> PlanarRect | None:
    rects = list(rects)
    if not rects:
        return None
    return PlanarRect.from_bounds(
        min(r.h.lo for r in rects), max(r.h.hi for r in rects), min(r.v.lo for r in rects), max(r.v.hi for r in rects)
    )
