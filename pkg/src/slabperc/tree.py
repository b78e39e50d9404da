"""Overlap tree of the catalog, rays, and the bag-and-injection forest."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np

from .geometry import Orientation
from .gridgen import RectCatalog, intersecting_pairs


class StructureError(RuntimeError):
    """A structural invariant of the construction failed on an instance."""


@dataclass
class RectTree:
    catalog: RectCatalog
    edges: list[tuple[int, int]]
    next: dict[int, int | None]
    frontier: set[int]
    children: dict[int, list[int]] = field(default_factory=dict)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.next)

    def roots(self) -> list[int]:
        return [v for v in self.nodes if self.next[v] is None]

    def root_of(self, v: int) -> int:
        while self.next[v] is not None:
            v = self.next[v]
        return v

    def component_labels(self) -> dict[int, int]:
        return {v: self.root_of(v) for v in self.nodes}


def build_overlap_tree(catalog: RectCatalog) -> RectTree:
    """Intersection graph on the usable entries plus the ``next`` map.

    ``next(V)`` is the horizontal neighbour of equal index, ``next(H)`` the
    vertical neighbour of index ``i + 1``.  Frontier horizontals (top index)
    have no ``next``; any other usable node without exactly one candidate is
    reported as a :class:`StructureError`.
    """
    usable = catalog.usable()
    pairs = intersecting_pairs(usable)
    edges = [(usable[a].id, usable[b].id) for a, b in pairs]
    nbrs: dict[int, list[int]] = {e.id: [] for e in usable}
    for a, b in edges:
        nbrs[a].append(b)
        nbrs[b].append(a)
    E = catalog.entries
    nxt: dict[int, int | None] = {}
    frontier: set[int] = set()
    children: dict[int, list[int]] = {e.id: [] for e in usable}
    for e in usable:
        if e.orientation is Orientation.VERTICAL:
            cand = [u for u in nbrs[e.id] if E[u].orientation is Orientation.HORIZONTAL and E[u].i == e.i]
        else:
            cand = [u for u in nbrs[e.id] if E[u].orientation is Orientation.VERTICAL and E[u].i == e.i + 1]
        if e.frontier:
            if cand:
                raise StructureError(f"frontier entry {e.id} has a parent candidate")
            nxt[e.id] = None
            frontier.add(e.id)
            continue
        if len(cand) != 1:
            raise StructureError(f"entry {e.id} has {len(cand)} parent candidates")
        nxt[e.id] = cand[0]
        children[cand[0]].append(e.id)
    # every intersection must be a next link, otherwise the graph is not a tree
    for a, b in edges:
        if nxt.get(a) != b and nxt.get(b) != a:
            raise StructureError(f"entries {a} and {b} intersect without a next link")
    return RectTree(catalog, edges, nxt, frontier, children)


@dataclass
class Ray:
    entries: list[int]
    truncated: bool


def ray(tree: RectTree, start: int, maxlen: int) -> Ray:
    if start not in tree.next:
        raise ValueError(f"entry {start} is clipped or unknown")
    out = [start]
    v = start
    while len(out) < maxlen and tree.next[v] is not None:
        v = tree.next[v]
        out.append(v)
    return Ray(out, truncated=tree.next[v] is None)


# ---------------------------------------------------------------------------
# abstract forest


@dataclass
class AbstractForest:
    bags: dict[Hashable, list[int]]
    beta: dict[int, int]
    owner: dict[int, Hashable]
    labels: dict[int, int]

    @property
    def n_slots(self) -> int:
        return len(self.owner)

    @property
    def n_components(self) -> int:
        return len(set(self.labels.values()))


def _next_map(tree) -> Mapping:
    return tree.next if isinstance(tree, RectTree) else tree


def build_abstract_forest(tree, bag_sizes: Mapping[Hashable, int], seed) -> AbstractForest:
    """Bags of the requested sizes joined by uniformly drawn injections.

    ``tree`` is a :class:`RectTree` or any mapping ``node -> next node``
    (``None`` at roots).
    """
    nxt = _next_map(tree)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    nodes = sorted(nxt, key=lambda v: (str(type(v)), v))
    for v in nodes:
        if bag_sizes[v] < 1:
            raise ValueError(f"bag at node {v!r} must be nonempty")
        u = nxt[v]
        if u is not None and bag_sizes[v] > bag_sizes[u]:
            raise ValueError(f"bag size decreases along next at node {v!r}")
    bags: dict[Hashable, list[int]] = {}
    owner: dict[int, Hashable] = {}
    k = 0
    for v in nodes:
        bags[v] = list(range(k, k + bag_sizes[v]))
        for s in bags[v]:
            owner[s] = v
        k += bag_sizes[v]
    beta: dict[int, int] = {}
    for v in nodes:
        u = nxt[v]
        if u is None:
            continue
        img = rng.choice(len(bags[u]), size=len(bags[v]), replace=False)
        for s, t in zip(bags[v], img):
            beta[s] = bags[u][int(t)]
    return AbstractForest(bags, beta, owner, _forest_labels(k, beta))


def _forest_labels(n: int, beta: Mapping[int, int]) -> dict[int, int]:
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    if n == 0:
        return {}
    a = np.fromiter(beta.keys(), dtype=np.int64, count=len(beta))
    b = np.fromiter(beta.values(), dtype=np.int64, count=len(beta))
    adj = coo_matrix((np.ones(len(a), np.int8), (a, b)), shape=(n, n))
    _, lab = connected_components(adj, directed=False)
    return {s: int(lab[s]) for s in range(n)}
