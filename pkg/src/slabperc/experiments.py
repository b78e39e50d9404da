"""Experiment drivers shared by the command line, the demos and the test suite.

Each driver returns plain records (dicts) ready for :func:`~slabperc.report.emit_report`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import Orientation, PlanarRect, induced_rect_graph
from .gridgen import RectCatalog, audit_catalog, build_catalog
from .percolation import (
    CrossingSpec,
    FKGTable,
    crossing_counts,
    estimate_crossing,
    probability_from_counts,
    phi_census,
    road_specs,
    road_survival,
    sample_config,
)
from .planner import ParamPlan, slice_schedule
from .slicing import SlabAssembly, assemble_phi, full_chain_component_count, overlap_audit
from .tree import RectTree, build_overlap_tree, ray


def small_rects(max_edges: int = 20, degenerate: bool = True) -> list[PlanarRect]:
    """Every rectangle anchored at the origin whose lattice graph has at most ``max_edges`` edges.

    With ``degenerate`` the single-row and single-column paths are included.
    """
    out = []
    lo = 0 if degenerate else 1
    for w in range(lo, max_edges + 1):
        for h in range(lo, max_edges + 1):
            if w == h == 0:
                continue
            if w * (h + 1) + h * (w + 1) <= max_edges:
                out.append(PlanarRect.from_bounds(0, w, 0, h))
    return out


# ---------------------------------------------------------------------------
# structure


@dataclass
class Instance:
    plan: ParamPlan
    catalog: RectCatalog
    tree: RectTree
    assembly: SlabAssembly
    catalog_audit: object
    overlap: object

    @property
    def passed(self) -> bool:
        return self.catalog_audit.passed and self.overlap.passed


def build_instance(plan: ParamPlan, viewport, seed: int | None = None) -> Instance:
    """Catalog, tree, assembly and both audits for one sampled instance.

    ``seed`` drives the cuts and injections; by default the grid seed is used.
    """
    cat = build_catalog(plan.seed, viewport)
    ca = audit_catalog(cat)
    tree = build_overlap_tree(cat)
    m = slice_schedule(plan)
    asm = assemble_phi(cat, tree, m, plan.seed.seed if seed is None else seed)
    return Instance(plan, cat, tree, asm, ca, overlap_audit(asm))


def catalog_stats(inst: Instance) -> dict:
    cat = inst.catalog
    return {
        "n_entries": len(cat),
        "n_usable": len(cat.usable()),
        "n_vertical": len(cat.by_orientation(Orientation.VERTICAL)),
        "n_horizontal": len(cat.by_orientation(Orientation.HORIZONTAL)),
        "n_frontier": len(inst.tree.frontier),
        "n_intersections": len(inst.tree.edges),
        "audit_passed": bool(inst.catalog_audit.passed),
        "audit_problems": inst.catalog_audit.problems()[:20],
    }


def assembly_stats(inst: Instance) -> dict:
    a = inst.assembly
    return {
        "n_slices": len(a.slices),
        "n_components": full_chain_component_count(a),
        "forest_components": a.forest.n_components if a.forest is not None else 0,
        "m": list(a.m),
        "audit": inst.overlap.summary(),
    }


# ---------------------------------------------------------------------------
# crossings


def crossing_records(p_grid: Sequence[float], trials: int, seed: int, rects=None, n_jobs: int = 1) -> list[dict]:
    """Monte Carlo against exhaustive enumeration on small rectangles."""
    rects = small_rects() if rects is None else rects
    out = []
    for k, r in enumerate(rects):
        for d, direction in enumerate("HV"):
            spec = CrossingSpec.for_rect(r, direction)
            ests = estimate_crossing(spec, list(p_grid), trials, seed + 2 * k + d, n_jobs=n_jobs)
            counts = crossing_counts(spec)
            for est in ests:
                exact = min(1.0, max(0.0, probability_from_counts(counts, est.p)))
                # binomial standard error at the reference value (the plug-in
                # estimate collapses to 0 whenever every trial agrees), with
                # the usual half-count continuity correction
                sig0 = float(np.sqrt(exact * (1 - exact) / trials))
                ok = abs(est.p_hat - exact) - 0.5 / trials <= 3 * sig0 + 1e-12
                out.append(
                    {
                        "name": "crossing",
                        "p": est.p,
                        "estimate": est.p_hat,
                        "sigma": sig0,
                        "trials": trials,
                        "reference": exact,
                        "passed": bool(ok),
                        "detail": {"cols": r.width, "rows": r.height, "direction": direction, "plugin_sigma": est.sigma},
                    }
                )
    return out


def fkg_records(p_grid: Sequence[float], rects=None) -> list[dict]:
    rects = small_rects() if rects is None else rects
    out = []
    for r in rects:
        table = FKGTable(r)
        specs = {d: CrossingSpec.for_rect(r, d) for d in "HV"}
        for a, b in itertools.combinations_with_replacement("HV", 2):
            for p in p_grid:
                res = table.check(specs[a], specs[b], Fraction(p).limit_denominator(1000), (a, b))
                out.append(
                    {
                        "name": "fkg",
                        "p": float(p),
                        "estimate": float(res.p_ab),
                        "sigma": 0.0,
                        "trials": 0,
                        "reference": float(res.product),
                        "passed": bool(res.passed),
                        "detail": {"cols": r.width, "rows": r.height, "events": a + b},
                    }
                )
    return out


def pick_ray(inst: Instance, length: int = 6) -> list[int]:
    """The first full-length ray from a usable level-0 vertical rectangle."""
    E = inst.catalog.entries
    for eid in sorted(inst.tree.next):
        if E[eid].i == 0 and E[eid].orientation is Orientation.VERTICAL:
            r = ray(inst.tree, eid, length)
            if len(r.entries) == length:
                return r.entries
    raise ValueError(f"no usable ray of length {length}")


def road_record(inst: Instance, p: float, trials: int, seed: int, length: int = 6, n_jobs: int = 1) -> dict:
    entries = pick_ray(inst, length)
    res = road_survival(road_specs(inst.catalog, entries), p, trials, seed, n_jobs=n_jobs)
    return {
        "name": "road",
        "p": p,
        "estimate": res.joint,
        "sigma": res.sigma,
        "trials": trials,
        "reference": res.product,
        "passed": bool(res.joint >= res.product - 3 * res.sigma),
        "detail": {
            "entries": entries,
            "marginals": res.marginals,
            "extraction_ok": res.extraction_ok,
            "joint_successes": res.joint_successes,
        },
    }


def scaling_records(p: float, ns: Sequence[int], trials: int, seed: int, n_jobs: int = 1) -> list[dict]:
    """Horizontal crossing of ``2n x n`` rectangles for growing ``n``."""
    out = []
    for k, n in enumerate(ns):
        spec = CrossingSpec.for_rect(PlanarRect.from_bounds(0, 2 * n - 1, 0, n - 1), "H")
        est = estimate_crossing(spec, p, trials, seed + k, n_jobs=n_jobs)
        out.append(
            {
                "name": "scaling",
                "p": p,
                "estimate": est.p_hat,
                "sigma": est.sigma,
                "trials": trials,
                "reference": None,
                "passed": None,
                "detail": {"n": int(n)},
            }
        )
    return out


def folded_records(inst: Instance, p: float, trials: int, seed: int, limit: int = 2, n_jobs: int = 1) -> list[dict]:
    """Long-way crossing of folded slices against the stretched planar comparison rectangle."""
    a = inst.assembly
    E = inst.catalog.entries
    n, Lam = inst.plan.n, inst.plan.Lam
    m = a.m
    picked = [k for k, f in enumerate(a.folded) if not f.is_lift][:limit]
    out = []
    for t, k in enumerate(picked):
        j = E[a.slices[k].owner].j
        spec = CrossingSpec.for_folded(a.folded[k])
        est = estimate_crossing(spec, p, trials, seed + 2 * t, n_jobs=n_jobs)
        long_side, short_side = int(2 * Lam[j] * n[j]), int(-(-n[j] // (2 * m[j])))
        comp = PlanarRect.from_bounds(0, long_side - 1, 0, short_side - 1)
        cest = estimate_crossing(CrossingSpec.for_rect(comp, "H"), p, trials, seed + 2 * t + 1, n_jobs=n_jobs)
        sig = float(np.hypot(est.sigma, cest.sigma))
        out.append(
            {
                "name": "folded",
                "p": p,
                "estimate": est.p_hat,
                "sigma": sig,
                "trials": trials,
                "reference": cest.p_hat,
                "passed": bool(est.p_hat >= cest.p_hat - 3 * sig),
                "detail": {"slice": k, "j": j, "comparison": [long_side, short_side]},
            }
        )
    return out


def census_records(inst: Instance, p_grid: Sequence[float], trials: int, seed: int, n_jobs: int = 1) -> list[dict]:
    res = phi_census(inst.assembly, list(p_grid), trials, seed, n_jobs=n_jobs)
    return [
        {
            "p": r.p,
            "trials": trials,
            "counts": [int(x) for x in r.counts],
            "median": r.median,
            "distribution": {str(k): v for k, v in r.distribution().items()},
            "n_components": int(r.n_components),
            "spanning_at_p1": int(r.spanning_at_p1),
        }
        for r in res
    ]


def dual_records(box: tuple[int, int], p: float, seeds: Sequence[int], axis: str = "H") -> list[dict]:
    from .dualtools import dual_of_config, separation_witness, spanning_clusters, witness_valid

    w, h = box
    g = induced_rect_graph(PlanarRect.from_bounds(0, w - 1, 0, h - 1))
    out = []
    for s in seeds:
        cfg = sample_config(g, p, s)
        dc = dual_of_config(cfg)
        span = spanning_clusters(cfg, axis)
        found = valid = 0
        for a, b in zip(span, span[1:]):
            wit = separation_witness(a, b, cfg)
            if wit is not None:
                found += 1
                valid += int(witness_valid(wit, a, b, cfg))
        out.append(
            {
                "seed": int(s),
                "p": p,
                "conservation": cfg.n_open + dc.n_open == g.n_edges,
                "n_spanning": len(span),
                "witnesses_found": found,
                "witnesses_valid": valid,
            }
        )
    return out
