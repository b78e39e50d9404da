"""Deterministic SVG drawings of grids, windows, catalogs and assemblies.

The SVG is written by hand so that identical inputs give identical bytes.
Lattice ``y`` grows upwards; it is flipped when mapped to SVG coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .geometry import PlanarRect, decode
from .gridgen import GridInstance, RectCatalog, Window, sample_nested_grids

LEVEL_COLORS = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2", "#edc948", "#9c755f")
COMPONENT_COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)  # fmt: skip

HATCH = (
    '<pattern id="layer0" patternUnits="userSpaceOnUse" width="4" height="4">'
    '<path d="M0,4 L4,0" stroke="#000" stroke-width="0.6"/></pattern>'
)


@dataclass(frozen=True)
class RenderOptions:
    scale: float = 1.0
    margin: int = 4
    stroke: float = 0.5
    opacity: float = 0.55
    viewport: PlanarRect | None = None
    title: str | None = None


def _num(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


class _Canvas:
    def __init__(self, frame: PlanarRect, opt: RenderOptions):
        self.frame = frame
        self.opt = opt
        self.body: list[str] = []

    def xy(self, x: float, y_top: float) -> tuple[float, float]:
        s, m = self.opt.scale, self.opt.margin
        return m + (x - self.frame.h.lo) * s, m + (self.frame.v.hi + 1 - y_top) * s

    def rect(self, r: PlanarRect, fill: str, stroke: str = "none", opacity: float | None = None, cls: str = ""):
        x, y = self.xy(r.h.lo, r.v.hi + 1)
        s = self.opt.scale
        attrs = [
            f'x="{_num(x)}"', f'y="{_num(y)}"', f'width="{_num(r.width * s)}"', f'height="{_num(r.height * s)}"',
            f'fill="{fill}"', f'stroke="{stroke}"',
        ]  # fmt: skip
        if stroke != "none":
            attrs.append(f'stroke-width="{_num(self.opt.stroke)}"')
        if opacity is not None:
            attrs.append(f'fill-opacity="{_num(opacity)}"')
        if cls:
            attrs.append(f'class="{cls}"')
        self.body.append(f"<rect {' '.join(attrs)}/>")

    def svg(self) -> str:
        s, m = self.opt.scale, self.opt.margin
        W = _num(self.frame.width * s + 2 * m)
        H = _num(self.frame.height * s + 2 * m)
        head = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
            f"<defs>{HATCH}</defs>",
        ]
        if self.opt.title:
            head.append(f"<title>{escape(self.opt.title)}</title>")
        frame = self.xy(self.frame.h.lo, self.frame.v.hi + 1)
        tail = [
            f'<rect x="{_num(frame[0])}" y="{_num(frame[1])}" width="{_num(self.frame.width * s)}" '
            f'height="{_num(self.frame.height * s)}" fill="none" stroke="#000" '
            f'stroke-width="{_num(self.opt.stroke)}" class="frame"/>',
            "</svg>",
        ]
        return "\n".join(head + self.body + tail) + "\n"


def _strip_runs(member, lo: int, hi: int) -> list[tuple[int, int]]:
    """Maximal runs of coordinates in ``[lo, hi]`` accepted by ``member``."""
    cols = np.arange(lo, hi + 1)
    inside = member(cols)
    runs = []
    start = None
    for c, f in zip(cols, inside):
        if f and start is None:
            start = c
        if not f and start is not None:
            runs.append((start, c - 1))
            start = None
    if start is not None:
        runs.append((start, hi))
    return runs


def _draw_grid(cv: _Canvas, grid: GridInstance, color: str):
    f = cv.frame
    for a, b in _strip_runs(grid.in_strip_col, f.h.lo, f.h.hi):
        cv.rect(PlanarRect.from_bounds(a, b, f.v.lo, f.v.hi), color, opacity=0.45, cls="strip-v")
    for a, b in _strip_runs(grid.in_strip_row, f.v.lo, f.v.hi):
        cv.rect(PlanarRect.from_bounds(f.h.lo, f.h.hi, a, b), color, opacity=0.45, cls="strip-h")


def render_svg(obj, options: RenderOptions | None = None) -> str:
    """Draw a grid, window, catalog, assembly or run configuration."""
    from .config import RunConfig
    from .slicing import SlabAssembly

    opt = options or RenderOptions()
    if isinstance(obj, GridInstance):
        frame = opt.viewport or PlanarRect.from_bounds(0, 4 * obj.period - 1, 0, 4 * obj.period - 1)
        cv = _Canvas(frame, opt)
        _draw_grid(cv, obj, LEVEL_COLORS[obj.level % len(LEVEL_COLORS)])
        return cv.svg()
    if isinstance(obj, Window):
        cv = _Canvas(opt.viewport or obj.square, opt)
        cv.rect(obj.square, "#ffffff", "#000", cls="window")
        for r in obj.vframes:
            cv.rect(r, LEVEL_COLORS[0], "#000", opt.opacity, cls="vframe")
        for r in obj.hframes:
            cv.rect(r, LEVEL_COLORS[1], "#000", opt.opacity, cls="hframe")
        return cv.svg()
    if isinstance(obj, RectCatalog):
        cv = _Canvas(opt.viewport or obj.viewport, opt)
        for e in sorted(obj.entries, key=lambda e: (-e.level, e.id)):
            color = "#cccccc" if e.clipped else LEVEL_COLORS[e.i % len(LEVEL_COLORS)]
            cv.rect(e.rect, color, "#000", opt.opacity, cls=f"rect-{e.orientation.value}")
        return cv.svg()
    if isinstance(obj, SlabAssembly):
        frame = opt.viewport or (obj.catalog.viewport if obj.catalog is not None else _bbox(obj))
        cv = _Canvas(frame, opt)
        for k, s in enumerate(obj.slices):
            comp = int(obj.slice_component[k])
            cv.rect(s.rect, COMPONENT_COLORS[comp % len(COMPONENT_COLORS)], "#000", opt.opacity, cls=f"slice c{comp}")
        keys = obj.graph.vertices[(obj.graph.vertices & 1) == 0]
        x, y, _ = decode(keys)
        for a, b, c in _row_runs(x, y):
            cv.rect(PlanarRect.from_bounds(a, b, c, c), "url(#layer0)", cls="layer0")
        return cv.svg()
    if isinstance(obj, RunConfig):
        w, h = obj.viewport
        frame = opt.viewport or PlanarRect.from_bounds(0, w - 1, 0, h - 1)
        cv = _Canvas(frame, opt)
        for g in sample_nested_grids(obj.param_seed)[: len(obj.L)]:
            _draw_grid(cv, g, LEVEL_COLORS[g.level % len(LEVEL_COLORS)])
        return cv.svg()
    raise TypeError(f"cannot render {type(obj).__name__}")


def _bbox(assembly) -> PlanarRect:
    x, y, _ = decode(assembly.graph.vertices)
    if len(x) == 0:
        return PlanarRect.from_bounds(0, 0, 0, 0)
    return PlanarRect.from_bounds(int(x.min()), int(x.max()), int(y.min()), int(y.max()))


def _row_runs(x: np.ndarray, y: np.ndarray) -> list[tuple[int, int, int]]:
    """Merge points into horizontal runs ``(x_lo, x_hi, y)``."""
    if len(x) == 0:
        return []
    order = np.lexsort((x, y))
    x, y = x[order], y[order]
    brk = np.flatnonzero((np.diff(y) != 0) | (np.diff(x) != 1)) + 1
    starts = np.concatenate([[0], brk])
    ends = np.concatenate([brk - 1, [len(x) - 1]])
    return [(int(x[s]), int(x[e]), int(y[s])) for s, e in zip(starts, ends)]

