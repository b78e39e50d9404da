"""Nested (l, d)-grids, windows, forks and the rectangle catalog.

An (l, d)-grid with offset ``o`` puts column ``x`` in a strip iff
``(x - o) mod (l + d) < l``; the remaining columns form the square-columns.
Grid ``i + 1`` has ``l' = d_i`` and its strips sit exactly on square-columns of
grid ``i``, so each grid-``(i + 1)`` square is a window cut into ``L_{i+1}``
vertical and ``L_{i+1}`` horizontal level-``i`` frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .geometry import (
    COORD_MAX,
    Block,
    FiniteGraph,
    Orientation,
    PairKind,
    PlanarRect,
    decode,
    encode,
)


@dataclass(frozen=True)
class ParamSeed:
    l0: int
    d0: int
    L: tuple[int, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "L", tuple(int(x) for x in self.L))
        if self.l0 < 1 or self.d0 < 1:
            raise ValueError("l0 and d0 must be positive")
        if len(self.L) < 1:
            raise ValueError("need at least one level (K >= 1)")
        for i, x in enumerate(self.L, start=1):
            if x < 2:
                raise ValueError(f"L_{i} = {x} < 2")

    @property
    def K(self) -> int:
        return len(self.L)


def derive_params(seed: ParamSeed) -> list[tuple[int, int]]:
    """``(l_i, d_i)`` for ``i = 0..K`` from the level recursion."""
    out = [(seed.l0, seed.d0)]
    for i, L in enumerate(seed.L, start=1):
        l, d = out[-1]
        nl, nd = d, L * l + (L - 1) * d
        if 2 * (nl + nd) >= COORD_MAX:
            raise OverflowError(f"grid parameters overflow the coordinate range at level {i}")
        out.append((nl, nd))
    return out


@dataclass(frozen=True)
class GridInstance:
    level: int
    l: int
    d: int
    ox: int
    oy: int

    @property
    def period(self) -> int:
        return self.l + self.d

    def in_strip_col(self, x) -> np.ndarray:
        return (np.asarray(x) - self.ox) % self.period < self.l

    def in_strip_row(self, y) -> np.ndarray:
        return (np.asarray(y) - self.oy) % self.period < self.l

    def square_block(self, t: int, axis: str) -> Block:
        """Square interval containing coordinate ``t`` (``axis`` 'x' or 'y')."""
        o = self.ox if axis == "x" else self.oy
        r = (t - o) % self.period
        if r < self.l:
            raise ValueError(f"coordinate {t} lies in a strip of grid {self.level}")
        lo = t - r + self.l
        return Block(lo, lo + self.d - 1)

    def block_in_square(self, b: Block, axis: str) -> bool:
        o = self.ox if axis == "x" else self.oy
        r = (b.lo - o) % self.period
        return r >= self.l and r + b.length <= self.period


def sample_nested_grids(seed: ParamSeed) -> list[GridInstance]:
    """Offsets for levels ``0..K``; level ``i+1`` strips cover square-columns of level ``i``."""
    params = derive_params(seed)
    rng = np.random.default_rng(seed.seed)
    l, d = params[0]
    P = l + d
    ox, oy = (int(v) for v in rng.integers(P, size=2))
    grids = [GridInstance(0, l, d, ox, oy)]
    for i, L in enumerate(seed.L):
        l, d = params[i]
        P = l + d
        nl, nd = params[i + 1]
        tx, ty = (int(v) for v in rng.integers(L, size=2))
        grids.append(GridInstance(i + 1, nl, nd, (ox + l + tx * P) % (L * P), (oy + l + ty * P) % (L * P)))
        ox, oy = grids[-1].ox, grids[-1].oy
    return grids


@dataclass(frozen=True)
class Window:
    level: int
    square: PlanarRect
    vframes: tuple[PlanarRect, ...]
    hframes: tuple[PlanarRect, ...]


def make_window(level: int, x0: int, y0: int, params: Sequence[tuple[int, int]], L: Sequence[int]) -> Window:
    """Window of grid ``level`` whose square has lower-left corner ``(x0, y0)``."""
    l, d = params[level - 1]
    side = params[level][1]
    n = L[level - 1]
    P = l + d
    sq = PlanarRect.from_bounds(x0, x0 + side - 1, y0, y0 + side - 1)
    vf = tuple(PlanarRect.from_bounds(x0 + k * P, x0 + k * P + l - 1, y0, y0 + side - 1) for k in range(n))
    hf = tuple(PlanarRect.from_bounds(x0, x0 + side - 1, y0 + k * P, y0 + k * P + l - 1) for k in range(n))
    return Window(level, sq, vf, hf)


def subwindows(w: Window, params, L) -> Iterator[Window]:
    if w.level <= 1:
        return
    l, d = params[w.level - 1]
    P = l + d
    x0, y0 = w.square.h.lo, w.square.v.lo
    n = L[w.level - 1]
    for a in range(n - 1):
        for b in range(n - 1):
            yield make_window(w.level - 1, x0 + l + a * P, y0 + l + b * P, params, L)


def fork_rects(w: Window, params: Sequence[tuple[int, int]]) -> tuple[list[PlanarRect], PlanarRect]:
    """Fork verticals and the extended bottom horizontal of a window.

    Verticals are the non-leftmost vertical frames with the top ``l`` rows
    removed; the horizontal starts where the leftmost frame ends and runs
    ``d`` columns past the window's right edge.
    """
    l, d = params[w.level - 1]
    x0, y0 = w.square.h.lo, w.square.v.lo
    side = w.square.width
    top = y0 + side - l - 1
    verticals = [
        PlanarRect(f.h, Block(y0, top), Orientation.VERTICAL) for f in w.vframes[1:]
    ]
    horizontal = PlanarRect(
        Block(x0 + l, x0 + side - 1 + d), Block(y0, y0 + l - 1), Orientation.HORIZONTAL
    )
    return verticals, horizontal


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class CatalogEntry:
    id: int
    rect: PlanarRect
    i: int
    level: int
    window: PlanarRect
    clipped: bool = False
    frontier: bool = False

    @property
    def orientation(self) -> Orientation:
        return self.rect.orientation

    @property
    def j(self) -> int:
        return 2 * self.i + (1 if self.orientation is Orientation.HORIZONTAL else 0)

    @property
    def usable(self) -> bool:
        return not self.clipped


@dataclass
class RectCatalog:
    entries: list[CatalogEntry]
    viewport: PlanarRect
    params: list[tuple[int, int]]
    L: tuple[int, ...]
    grids: list[GridInstance] = field(default_factory=list)

    @property
    def K(self) -> int:
        return len(self.L)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k: int) -> CatalogEntry:
        return self.entries[k]

    def usable(self) -> list[CatalogEntry]:
        return [e for e in self.entries if not e.clipped]

    def by_orientation(self, o: Orientation) -> list[CatalogEntry]:
        return [e for e in self.entries if e.orientation is o]

    def dump_lines(self) -> list[str]:
        """One record per entry: level orientation i j h.lo h.hi v.lo v.hi flags."""
        out = []
        for e in self.entries:
            flags = ",".join(f for f, on in (("clipped", e.clipped), ("frontier", e.frontier)) if on) or "-"
            r = e.rect
            out.append(
                f"{e.level}\t{e.orientation.value}\t{e.i}\t{e.j}\t{r.h.lo}\t{r.h.hi}\t{r.v.lo}\t{r.v.hi}\t{flags}"
            )
        return out


def _as_viewport(viewport) -> PlanarRect:
    if isinstance(viewport, PlanarRect):
        return viewport
    w, h = viewport
    if w <= 0 or h <= 0:
        raise ValueError("empty viewport")
    return PlanarRect.from_bounds(0, w - 1, 0, h - 1)


def build_catalog(seed: ParamSeed, viewport) -> RectCatalog:
    """Sample the grids and list every fork rectangle of every window in view.

    A rectangle is ``clipped`` when it leaves the viewport or when the top
    window above it (with its extension) is not entirely inside the viewport,
    so that its chain of ``next`` links would leave the sampled region.
    """
    viewport = _as_viewport(viewport)
    params = derive_params(seed)
    grids = sample_nested_grids(seed)
    K = seed.K
    top = grids[K]
    P = top.period
    ext = params[K - 1][1]

    def starts(o, lo, hi):
        first = o + top.l + ((lo - top.d + 1 - o - top.l) // P) * P
        s = first
        while s <= hi:
            if s + top.d - 1 >= lo:
                yield s
            s += P

    entries: list[CatalogEntry] = []
    n_complete = 0

    def emit(w: Window, complete: bool):
        verts, horiz = fork_rects(w, params)
        i = w.level - 1
        for r in verts + [horiz]:
            inside = viewport.contains(r)
            entries.append(
                CatalogEntry(
                    id=len(entries),
                    rect=r,
                    i=i,
                    level=w.level,
                    window=w.square,
                    clipped=not (complete and inside),
                    frontier=(r.orientation is Orientation.HORIZONTAL and i == K - 1),
                )
            )

    def walk(w: Window, complete: bool):
        if viewport.contains(w.square):
            emit(w, complete)
        for sub in subwindows(w, params, seed.L):
            walk(sub, complete)

    for y0 in starts(top.oy, viewport.v.lo, viewport.v.hi):
        for x0 in starts(top.ox, viewport.h.lo, viewport.h.hi):
            w = make_window(K, x0, y0, params, seed.L)
            reach = PlanarRect.from_bounds(x0, x0 + top.d - 1 + ext, y0, y0 + top.d - 1)
            complete = viewport.contains(reach)
            n_complete += complete
            walk(w, complete)

    if n_complete == 0:
        raise ValueError("viewport holds no complete top-level window")
    return RectCatalog(entries, viewport, params, seed.L, grids)


# ---------------------------------------------------------------------------
# audit


@dataclass
class CatalogAudit:
    n_entries: int
    vertical_overlaps: list[tuple[int, int]]
    horizontal_overlaps: list[tuple[int, int]]
    bad_mixed: list[tuple[int, int, str]]
    n_mixed_intersections: int

    @property
    def passed(self) -> bool:
        return not (self.vertical_overlaps or self.horizontal_overlaps or self.bad_mixed)

    def problems(self) -> list[str]:
        out = [f"vertical overlap {a} {b}" for a, b in self.vertical_overlaps]
        out += [f"horizontal overlap {a} {b}" for a, b in self.horizontal_overlaps]
        out += [f"mixed pair {a} {b} is {kind}" for a, b, kind in self.bad_mixed]
        return out


def _bounds(entries):
    a = np.array([(e.rect.h.lo, e.rect.h.hi, e.rect.v.lo, e.rect.v.hi) for e in entries], dtype=np.int64)
    return a.reshape(-1, 4)


def intersecting_pairs(entries: Sequence[CatalogEntry]) -> np.ndarray:
    """Index pairs ``(a, b)``, ``a < b``, of entries whose rectangles meet."""
    if len(entries) < 2:
        return np.empty((0, 2), np.int64)
    B = _bounds(entries)
    # sweep over x to keep memory linear-ish
    order = np.argsort(B[:, 0], kind="stable")
    Bs = B[order]
    out = []
    hi_x = Bs[:, 1]
    for k in range(len(Bs)):
        # candidates start before this one ends
        stop = np.searchsorted(Bs[:, 0], Bs[k, 1], side="right")
        cand = np.arange(k + 1, stop)
        if len(cand) == 0:
            continue
        m = (Bs[cand, 0] <= hi_x[k]) & (Bs[cand, 2] <= Bs[k, 3]) & (Bs[cand, 3] >= Bs[k, 2])
        for c in cand[m]:
            a, b = order[k], order[c]
            out.append((min(a, b), max(a, b)))
    return np.array(sorted(out), dtype=np.int64).reshape(-1, 2)


def audit_catalog(catalog: RectCatalog) -> CatalogAudit:
    """Pairwise disjointness within each orientation; well-joinedness across."""
    from .geometry import classify_pair

    E = catalog.entries
    vo, ho, bad = [], [], []
    mixed = 0
    for a, b in intersecting_pairs(E):
        ea, eb = E[a], E[b]
        if ea.orientation is eb.orientation:
            (vo if ea.orientation is Orientation.VERTICAL else ho).append((ea.id, eb.id))
            continue
        mixed += 1
        v, h = (ea, eb) if ea.orientation is Orientation.VERTICAL else (eb, ea)
        if classify_pair(v.rect, h.rect) not in (PairKind.V2H, PairKind.H2V):
            bad.append((v.id, h.id, classify_pair(v.rect, h.rect).value))
    return CatalogAudit(len(E), vo, ho, bad, mixed)


# ---------------------------------------------------------------------------
# symmetries


@dataclass(frozen=True)
class Symmetry:
    """Element of D4 x Z2: rotate by ``90 * rot`` after an optional mirror, optional layer swap."""

    rot: int = 0
    flip: bool = False
    layer_swap: bool = False

    @classmethod
    def from_index(cls, k: int) -> "Symmetry":
        if not 0 <= k < 16:
            raise ValueError("symmetry index must be in 0..15")
        return cls(k % 4, bool((k // 4) % 2), bool(k // 8))

    @property
    def index(self) -> int:
        return self.rot + 4 * int(self.flip) + 8 * int(self.layer_swap)

    @property
    def swaps_orientation(self) -> bool:
        return self.rot % 2 == 1

    def linear(self, x, y):
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        if self.flip:
            x = -x
        for _ in range(self.rot % 4):
            x, y = -y, x
        return x, y

    def _shift(self, viewport: PlanarRect) -> tuple[int, int]:
        cx, cy = self.linear([viewport.h.lo, viewport.h.hi], [viewport.v.lo, viewport.v.hi])
        return viewport.h.lo - int(cx.min()), viewport.v.lo - int(cy.min())

    def apply_points(self, x, y, viewport: PlanarRect):
        sx, sy = self._shift(viewport)
        X, Y = self.linear(x, y)
        return X + sx, Y + sy

    def apply_rect(self, r: PlanarRect, viewport: PlanarRect) -> PlanarRect:
        X, Y = self.apply_points([r.h.lo, r.h.hi], [r.v.lo, r.v.hi], viewport)
        o = r.orientation.swapped() if self.swaps_orientation else r.orientation
        return PlanarRect.from_bounds(int(X.min()), int(X.max()), int(Y.min()), int(Y.max()), o)

    def apply_graph(self, g: FiniteGraph, viewport: PlanarRect) -> FiniteGraph:
        def move(keys):
            x, y, l = decode(keys)
            X, Y = self.apply_points(x, y, viewport)
            return encode(X, Y, (l ^ 1) if self.layer_swap else l)

        return FiniteGraph.from_keys(move(g.vertices), move(g.edges.ravel()).reshape(-1, 2))

    def apply_catalog(self, cat: RectCatalog) -> RectCatalog:
        vp = cat.viewport
        entries = [
            replace(e, rect=self.apply_rect(e.rect, vp), window=self.apply_rect(e.window, vp)) for e in cat.entries
        ]
        return RectCatalog(entries, self.apply_rect(vp, vp), cat.params, cat.L, [])


def randomize_symmetry(obj, seed, viewport: PlanarRect | None = None):
    """Apply a uniformly drawn element of D4 x Z2; returns ``(copy, element)``.

    ``obj`` may be a :class:`RectCatalog`, a :class:`FiniteGraph` (needs
    ``viewport`` or uses its bounding box) or a :class:`PlanarRect`.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = Symmetry.from_index(int(rng.integers(16)))
    return apply_symmetry(obj, g, viewport), g


def apply_symmetry(obj, g: Symmetry, viewport: PlanarRect | None = None):
    if isinstance(obj, RectCatalog):
        return g.apply_catalog(obj)
    if isinstance(obj, FiniteGraph):
        if viewport is None:
            x, y, _ = decode(obj.vertices)
            viewport = PlanarRect.from_bounds(int(x.min()), int(x.max()), int(y.min()), int(y.max()))
        return g.apply_graph(obj, viewport)
    if isinstance(obj, PlanarRect):
        return g.apply_rect(obj, viewport or obj)
    raise TypeError(f"cannot transform {type(obj).__name__}")
