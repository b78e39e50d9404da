"""Bernoulli bond percolation on finite slab graphs.

Random numbers come from counter-style substreams: trials are grouped in
blocks of :data:`TRIAL_BLOCK`, block ``b`` draws from
``Philox(SeedSequence(master, spawn_key=(b,)))`` and trial ``t`` consumes the
``t mod TRIAL_BLOCK``-th run of ``n_edges`` uniforms of its block.  Serial and
parallel runs therefore see the same numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .geometry import FiniteGraph, PlanarRect, edges_isin, encode, graph_union, induced_rect_graph
from .slicing import FoldedSlice, SlabAssembly

TRIAL_BLOCK = 256
_SMALL_GRAPH = 64  # vertices; below this trials are processed as a batch
_ROW_CHUNK = 2_000_000  # max uniforms held at once on the large-graph path


# ---------------------------------------------------------------------------
# random streams


def block_generator(master: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(master, spawn_key=(block,))))


def trial_uniforms(master: int, n_edges: int, trials: int, start: int = 0) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(first_trial, U)`` with ``U`` of shape ``(rows, n_edges)``."""
    t = start
    end = start + trials
    rows_per_chunk = max(1, _ROW_CHUNK // max(n_edges, 1))
    while t < end:
        b = t // TRIAL_BLOCK
        gen = block_generator(master, b)
        skip = t - b * TRIAL_BLOCK
        if skip:
            gen.random(skip * n_edges)
        stop = min(end, (b + 1) * TRIAL_BLOCK)
        while t < stop:
            rows = min(rows_per_chunk, stop - t)
            yield t, gen.random((rows, n_edges))
            t += rows


# ---------------------------------------------------------------------------
# configurations and clusters


@dataclass
class BondConfig:
    graph: FiniteGraph
    open: np.ndarray
    p: float
    seed: int | None = None

    def __post_init__(self):
        self.open = np.asarray(self.open, dtype=bool)
        if self.open.shape != (self.graph.n_edges,):
            raise ValueError("open mask must cover exactly the graph's edges")

    @property
    def n_open(self) -> int:
        return int(self.open.sum())

    def restrict(self, sub: FiniteGraph) -> "BondConfig":
        """Configuration induced on a subgraph whose edges are edges of ``self.graph``."""
        if sub.n_edges == 0:
            return BondConfig(sub, np.zeros(0, bool), self.p, self.seed)
        pos = _edge_positions(self.graph, sub.edges)
        return BondConfig(sub, self.open[pos], self.p, self.seed)


def _edge_positions(graph: FiniteGraph, edges: np.ndarray) -> np.ndarray:
    """Row of each of ``edges`` inside ``graph.edges`` (all must be present)."""
    if not np.all(edges_isin(edges, graph.edges)):
        raise ValueError("configuration graph does not contain the target")
    E = graph.edges
    lo = np.searchsorted(E[:, 0], edges[:, 0], side="left")
    hi = np.searchsorted(E[:, 0], edges[:, 0], side="right")
    out = np.empty(len(edges), np.int64)
    for k, (a, b) in enumerate(zip(lo, hi)):
        out[k] = a + int(np.flatnonzero(E[a:b, 1] == edges[k, 1])[0])
    return out


def sample_config(graph: FiniteGraph, p: float, seed: int, trial: int = 0) -> BondConfig:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    _, U = next(trial_uniforms(seed, graph.n_edges, 1, start=trial))
    return BondConfig(graph, U[0] < p, p, seed)


@dataclass
class ClusterLabeling:
    graph: FiniteGraph
    label: np.ndarray
    sizes: np.ndarray

    @property
    def n_clusters(self) -> int:
        return len(self.sizes)

    def cluster_of(self, vertex) -> int:
        k = encode(vertex[0], vertex[1], vertex[2] if len(vertex) > 2 else 1)
        return int(self.label[np.searchsorted(self.graph.vertices, k)])

    def clusters(self) -> list[set]:
        from .geometry import decode

        x, y, l = decode(self.graph.vertices)
        out: list[set] = [set() for _ in range(self.n_clusters)]
        for a, b, c, k in zip(x, y, l, self.label):
            out[k].add((int(a), int(b), int(c)))
        return out


def label_clusters(config: BondConfig) -> ClusterLabeling:
    n, lab = config.graph.components(config.open)
    return ClusterLabeling(config.graph, lab, np.bincount(lab, minlength=n))


# ---------------------------------------------------------------------------
# crossings


@dataclass
class CrossingSpec:
    """Open-path event between two vertex sets inside a target graph."""

    graph: FiniteGraph
    side_a: np.ndarray
    side_b: np.ndarray
    direction: str = "H"
    target: object = None

    @classmethod
    def for_rect(cls, rect: PlanarRect, direction: str, layer: int = 1) -> "CrossingSpec":
        if direction not in ("H", "V"):
            raise ValueError("direction must be 'H' or 'V'")
        g = induced_rect_graph(rect, layer)
        if direction == "H":
            ys = np.arange(rect.v.lo, rect.v.hi + 1)
            a = encode(np.full_like(ys, rect.h.lo), ys, layer)
            b = encode(np.full_like(ys, rect.h.hi), ys, layer)
        else:
            xs = np.arange(rect.h.lo, rect.h.hi + 1)
            a = encode(xs, np.full_like(xs, rect.v.lo), layer)
            b = encode(xs, np.full_like(xs, rect.v.hi), layer)
        return cls(g, np.sort(a), np.sort(b), direction, rect)

    @classmethod
    def for_folded(cls, fs: FoldedSlice) -> "CrossingSpec":
        a, b = fs.end_sets()
        r = fs.rect
        direction = "V" if r.height >= r.width else "H"
        return cls(fs.graph, a, b, direction, fs)

    def side_index(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.graph.vertices
        return np.searchsorted(v, self.side_a), np.searchsorted(v, self.side_b)


def crossing_event(spec: CrossingSpec, config: BondConfig) -> bool:
    sub = config if config.graph is spec.graph else config.restrict(spec.graph)
    _, lab = sub.graph.components(sub.open)
    ia, ib = spec.side_index()
    return bool(np.intersect1d(lab[ia], lab[ib]).size)


def _cross_batch(spec: CrossingSpec, open_rows: np.ndarray) -> np.ndarray:
    """Crossing indicator for each row of a batch of open masks (min-label propagation)."""
    n = spec.graph.n_vertices
    ea, eb = spec.graph.edge_index()
    ia, ib = spec.side_index()
    T = open_rows.shape[0]
    lab = np.tile(np.arange(n, dtype=np.int32), (T, 1))
    while True:
        changed = False
        for e in range(len(ea)):
            o = open_rows[:, e]
            la, lb = lab[:, ea[e]], lab[:, eb[e]]
            m = np.where(o, np.minimum(la, lb), la)
            diff = o & (la != lb)
            if diff.any():
                changed = True
                lab[:, ea[e]] = m
                lab[:, eb[e]] = np.where(o, m, lb)
        if not changed:
            break
    A = lab[:, ia]
    B = lab[:, ib]
    return (A[:, :, None] == B[:, None, :]).any(axis=(1, 2))


def _cross_rows(spec: CrossingSpec, open_rows: np.ndarray) -> np.ndarray:
    if spec.graph.n_vertices <= _SMALL_GRAPH:
        return _cross_batch(spec, open_rows)
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    n = spec.graph.n_vertices
    ea, eb = spec.graph.edge_index()
    ia, ib = spec.side_index()
    out = np.empty(len(open_rows), bool)
    for r, o in enumerate(open_rows):
        adj = coo_matrix((np.ones(int(o.sum()), np.int8), (ea[o], eb[o])), shape=(n, n))
        _, lab = connected_components(adj, directed=False)
        out[r] = np.intersect1d(lab[ia], lab[ib]).size > 0
    return out


@dataclass
class Estimate:
    p: float
    successes: int
    trials: int

    @property
    def p_hat(self) -> float:
        return self.successes / self.trials

    @property
    def sigma(self) -> float:
        q = self.p_hat
        return float(np.sqrt(q * (1 - q) / self.trials))

    def __iter__(self):
        return iter((self.p_hat, self.sigma))


def _map_blocks(fn, trials: int, n_jobs: int, group: int = 1):
    """Run ``fn(start, count)`` over spans of ``group`` trial blocks, results in span order."""
    step = TRIAL_BLOCK * max(1, group)
    spans = [(s, min(step, trials - s)) for s in range(0, trials, step)]
    if n_jobs == 1 or len(spans) == 1:
        return [fn(s, c) for s, c in spans]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs)(delayed(fn)(s, c) for s, c in spans)


def estimate_crossing(spec: CrossingSpec, p, trials: int, seed: int, n_jobs: int = 1):
    """Monte Carlo crossing frequency with binomial standard error.

    With a sequence ``p`` the estimates share their uniforms (monotone
    coupling) and a list of :class:`Estimate` is returned.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    grid = np.atleast_1d(np.asarray(p, dtype=float))
    if np.any((grid < 0) | (grid > 1)):
        raise ValueError("p must lie in [0, 1]")
    nE = spec.graph.n_edges

    small = spec.graph.n_vertices <= _SMALL_GRAPH

    def work(start, count):
        hits = np.zeros(len(grid), np.int64)
        chunks = trial_uniforms(seed, nE, count, start=start)
        if small:  # one batch per span; same uniforms, fewer Python round trips
            chunks = [(start, np.concatenate([U for _, U in chunks]))]
        for _, U in chunks:
            for k, q in enumerate(grid):
                hits[k] += int(_cross_rows(spec, U < q).sum())
        return hits

    hits = np.sum(_map_blocks(work, trials, n_jobs, group=64 if small else 1), axis=0)
    est = [Estimate(float(q), int(h), trials) for q, h in zip(grid, hits)]
    return est if np.ndim(p) else est[0]


def coupled_crossing_paths(spec: CrossingSpec, grid: Sequence[float], trials: int, seed: int) -> np.ndarray:
    """Per-trial crossing indicators on a shared-uniform p-grid, shape ``(len(grid), trials)``."""
    out = np.zeros((len(grid), trials), bool)
    for t0, U in trial_uniforms(seed, spec.graph.n_edges, trials):
        for k, q in enumerate(grid):
            out[k, t0 : t0 + len(U)] = _cross_rows(spec, U < q)
    return out


# ---------------------------------------------------------------------------
# exhaustive oracle


def _enumerate_open(n_edges: int, chunk: int = 1 << 16) -> Iterator[np.ndarray]:
    total = 1 << n_edges
    bits = np.arange(n_edges, dtype=np.int64)
    for s in range(0, total, chunk):
        codes = np.arange(s, min(total, s + chunk), dtype=np.int64)
        yield ((codes[:, None] >> bits) & 1).astype(bool)


def _reach_from(graph: FiniteGraph, sources: np.ndarray, open_rows: np.ndarray) -> np.ndarray:
    """Vertices reachable from ``sources`` along open edges (frontier flooding)."""
    ea, eb = graph.edge_index()
    ot = np.ascontiguousarray(open_rows.T)
    reach = np.zeros((graph.n_vertices, open_rows.shape[0]), bool)
    reach[sources] = True
    while True:
        before = int(reach.sum())
        for e in range(len(ea)):
            a, b = ea[e], eb[e]
            grow = ot[e] & (reach[a] | reach[b])
            reach[a] |= grow
            reach[b] |= grow
        if int(reach.sum()) == before:
            return reach.T


def event_indicator(graph: FiniteGraph, event: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Event value for every configuration, indexed by the bit code of its open set."""
    E = graph.n_edges
    if E > 20:
        raise ValueError("exhaustive enumeration limited to 20 edges")
    return np.concatenate([np.asarray(event(rows), bool) for rows in _enumerate_open(E)])


@lru_cache(maxsize=4)
def _popcounts(E: int) -> np.ndarray:
    codes = np.arange(1 << E, dtype=np.int64)
    out = np.zeros(len(codes), np.int64)
    for e in range(E):
        out += (codes >> e) & 1
    return out


def counts_from_indicator(ind: np.ndarray, E: int) -> np.ndarray:
    """``c[k]`` = number of configurations with ``k`` open edges in the event."""
    return np.bincount(_popcounts(E)[ind], minlength=E + 1)


def event_open_counts(graph: FiniteGraph, event: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    return counts_from_indicator(event_indicator(graph, event), graph.n_edges)


def crossing_indicator(spec: CrossingSpec) -> Callable[[np.ndarray], np.ndarray]:
    ia, ib = spec.side_index()
    return lambda rows: _reach_from(spec.graph, ia, rows)[:, ib].any(axis=1)


def probability_from_counts(counts: np.ndarray, p):
    E = len(counts) - 1
    if isinstance(p, Fraction):
        return sum(Fraction(int(c)) * p**k * (1 - p) ** (E - k) for k, c in enumerate(counts))
    k = np.arange(E + 1)
    return float(np.sum(counts * p**k * (1 - p) ** (E - k)))


def crossing_counts(spec: CrossingSpec) -> np.ndarray:
    return event_open_counts(spec.graph, crossing_indicator(spec))


def exact_crossing_probability(spec: CrossingSpec, p):
    """Sum of ``p^|w| (1-p)^(|E|-|w|)`` over all crossing configurations."""
    return probability_from_counts(crossing_counts(spec), p)


# ---------------------------------------------------------------------------
# FKG


@dataclass
class FKGResult:
    p_ab: float
    p_a: float
    p_b: float

    @property
    def product(self):
        return self.p_a * self.p_b

    @property
    def passed(self) -> bool:
        return self.p_ab >= self.product - 1e-12


def _as_event(graph: FiniteGraph, ev) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(ev, CrossingSpec):
        if ev.graph.n_edges != graph.n_edges or not np.array_equal(ev.graph.edges, graph.edges):
            sub_pos = _edge_positions(graph, ev.graph.edges)
            inner = crossing_indicator(ev)
            return lambda rows: inner(rows[:, sub_pos])
        return crossing_indicator(ev)
    return ev


def indicator_is_increasing(ind: np.ndarray, E: int) -> bool:
    """Opening any single closed edge never turns the event off."""
    codes = np.arange(len(ind), dtype=np.int64)
    for e in range(E):
        low = codes[((codes >> e) & 1) == 0]
        if np.any(ind[low] & ~ind[low | (1 << e)]):
            return False
    return True


def is_increasing(graph: FiniteGraph, event) -> bool:
    return indicator_is_increasing(event_indicator(graph, _as_event(graph, event)), graph.n_edges)


class FKGTable:
    """Exhaustive event indicators on one small graph, reused across events and ``p``."""

    def __init__(self, graph):
        if isinstance(graph, PlanarRect):
            graph = induced_rect_graph(graph)
        if graph.n_edges > 20:
            raise ValueError("exhaustive enumeration limited to 20 edges")
        self.graph = graph
        self._ind: dict = {}

    def indicator(self, event, name) -> np.ndarray:
        if name not in self._ind:
            ind = event_indicator(self.graph, _as_event(self.graph, event))
            if not indicator_is_increasing(ind, self.graph.n_edges):
                raise ValueError(f"event {name} is not increasing")
            self._ind[name] = ind
        return self._ind[name]

    def check(self, event_a, event_b, p, names=("A", "B")) -> FKGResult:
        A = self.indicator(event_a, names[0])
        B = self.indicator(event_b, names[1])
        E = self.graph.n_edges

        def prob(ind):
            return probability_from_counts(counts_from_indicator(ind, E), p)

        return FKGResult(prob(A & B), prob(A), prob(B))


def fkg_check(graph, event_a, event_b, p) -> FKGResult:
    """Exact ``P(A and B)`` against ``P(A) P(B)`` for increasing events.

    Both events are checked for monotonicity over every configuration first;
    a non-increasing event raises ``ValueError``.
    """
    return FKGTable(graph).check(event_a, event_b, p)


# ---------------------------------------------------------------------------
# roads


@dataclass
class RoadResult:
    p: float
    trials: int
    joint_successes: int
    marginal_successes: list[int]
    extraction_ok: int

    @property
    def joint(self) -> float:
        return self.joint_successes / self.trials

    @property
    def marginals(self) -> list[float]:
        return [s / self.trials for s in self.marginal_successes]

    @property
    def product(self) -> float:
        return float(np.prod(self.marginals))

    @property
    def sigma(self) -> float:
        """Standard error of ``joint - product`` (binomial plus delta method)."""
        n = self.trials
        j = self.joint
        var = j * (1 - j) / n
        m = np.array(self.marginals)
        for k, q in enumerate(m):
            others = np.prod(np.delete(m, k))
            var += others**2 * q * (1 - q) / n
        return float(np.sqrt(var))


def road_specs(catalog, ray_entries: Sequence[int]) -> list[CrossingSpec]:
    """Vertical crossings for vertical members, horizontal for horizontal ones."""
    from .geometry import Orientation

    out = []
    for eid in ray_entries:
        r = catalog.entries[eid].rect
        out.append(CrossingSpec.for_rect(r, "V" if r.orientation is Orientation.VERTICAL else "H"))
    return out


def road_survival(specs: Sequence[CrossingSpec], p: float, trials: int, seed: int, n_jobs: int = 1) -> RoadResult:
    """Joint and marginal frequencies of the prescribed crossings along a road prefix.

    Each success is also checked for a single open cluster of the road that
    contains a crossing cluster of every member.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    road = graph_union(s.graph for s in specs)
    n = road.n_vertices
    ea, eb = road.edge_index()
    local = []
    for s in specs:
        pos = _edge_positions(road, s.graph.edges)
        vidx = np.searchsorted(road.vertices, s.graph.vertices)
        la, lb = s.graph.edge_index()
        ia, ib = s.side_index()
        local.append((pos, vidx, la, lb, ia, ib, s.graph.n_vertices))

    def work(start, count):
        joint = ext = 0
        marg = np.zeros(len(specs), np.int64)
        for _, U in trial_uniforms(seed, road.n_edges, count, start=start):
            for row in U < p:
                ok = True
                crossing_labels = []
                for k, (pos, vidx, la, lb, ia, ib, nv) in enumerate(local):
                    o = row[pos]
                    adj = coo_matrix((np.ones(int(o.sum()), np.int8), (la[o], lb[o])), shape=(nv, nv))
                    _, lab = connected_components(adj, directed=False)
                    good = np.intersect1d(lab[ia], lab[ib])
                    if good.size:
                        marg[k] += 1
                        crossing_labels.append(vidx[np.isin(lab, good)])
                    else:
                        ok = False
                if ok:
                    joint += 1
                    adj = coo_matrix((np.ones(int(row.sum()), np.int8), (ea[row], eb[row])), shape=(n, n))
                    _, rl = connected_components(adj, directed=False)
                    common = np.unique(rl[crossing_labels[0]])
                    for verts in crossing_labels[1:]:
                        common = np.intersect1d(common, rl[verts])
                    ext += int(common.size > 0)
        return joint, marg, ext

    res = _map_blocks(work, trials, n_jobs)
    return RoadResult(
        p,
        trials,
        int(sum(r[0] for r in res)),
        [int(x) for x in np.sum([r[1] for r in res], axis=0)],
        int(sum(r[2] for r in res)),
    )


# ---------------------------------------------------------------------------
# census


@dataclass
class SpanSpec:
    """Spanning surrogate for an infinite cluster.

    With ``box`` set, an open cluster spans if it touches both sides of the
    box across ``axis``.  With ``box=None`` each assembly component is
    measured against the bounding box of the top-level tree it belongs to.
    """

    box: PlanarRect | None = None
    axis: str = "H"


@dataclass
class CensusResult:
    p: float
    counts: np.ndarray
    n_components: int
    spanning_at_p1: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def median(self) -> float:
        return float(np.median(self.counts))

    def distribution(self) -> dict[int, int]:
        v, c = np.unique(self.counts, return_counts=True)
        return {int(a): int(b) for a, b in zip(v, c)}


def _span_masks(assembly: SlabAssembly, span: SpanSpec) -> tuple[np.ndarray, np.ndarray]:
    from .geometry import decode, rects_bounding_box

    x, y, _ = decode(assembly.graph.vertices)
    coord = x if span.axis == "H" else y
    if span.box is not None:
        lo, hi = (span.box.h.lo, span.box.h.hi) if span.axis == "H" else (span.box.v.lo, span.box.v.hi)
        return coord == lo, coord == hi
    # per top-level tree boxes
    tree = assembly.tree
    cat = assembly.catalog
    roots = tree.component_labels()
    boxes = {}
    for r in set(roots.values()):
        boxes[r] = rects_bounding_box(cat.entries[v].rect for v in roots if roots[v] == r)
    comp_root = {}
    for k, s in enumerate(assembly.slices):
        comp_root.setdefault(int(assembly.slice_component[k]), roots[s.owner])
    root_of_vertex = np.array([comp_root[int(c)] for c in assembly.labels])
    lo = np.empty(len(coord), np.int64)
    hi = np.empty(len(coord), np.int64)
    for r, b in boxes.items():
        m = root_of_vertex == r
        lo[m], hi[m] = (b.h.lo, b.h.hi) if span.axis == "H" else (b.v.lo, b.v.hi)
    return coord == lo, coord == hi


def spanning_components(assembly: SlabAssembly, open_mask: np.ndarray, masks) -> int:
    lo_m, hi_m = masks
    _, lab = assembly.graph.components(open_mask)
    spanning = np.intersect1d(lab[lo_m], lab[hi_m])
    if spanning.size == 0:
        return 0
    first = np.zeros(lab.max() + 1, np.int64)
    first[lab[::-1]] = np.arange(len(lab))[::-1]
    return int(np.unique(assembly.labels[first[spanning]]).size)


def phi_census(assembly: SlabAssembly, p, trials: int, seed: int, span: SpanSpec | None = None, n_jobs: int = 1):
    """Per trial, count assembly components holding a spanning open cluster.

    A sequence ``p`` gives coupled runs (shared uniforms) and a list of results.
    """
    span = span or SpanSpec()
    grid = np.atleast_1d(np.asarray(p, dtype=float))
    masks = _span_masks(assembly, span)
    nE = assembly.graph.n_edges

    def work(start, count):
        out = np.zeros((len(grid), count), np.int64)
        for t0, U in trial_uniforms(seed, nE, count, start=start):
            for r, u in enumerate(U):
                for k, q in enumerate(grid):
                    out[k, t0 - start + r] = spanning_components(assembly, u < q, masks)
        return out

    counts = np.concatenate(_map_blocks(work, trials, n_jobs), axis=1) if trials else np.zeros((len(grid), 0), int)
    full = spanning_components(assembly, np.ones(nE, bool), masks)
    res = [CensusResult(float(q), counts[k], assembly.n_components, full) for k, q in enumerate(grid)]
    return res if np.ndim(p) else res[0]


def trial_records(name: str, values: Sequence) -> list[str]:
    """Line-oriented per-trial output: ``trial<TAB>statistic<TAB>value``."""
    return [f"{t}\t{name}\t{v}" for t, v in enumerate(values)]
