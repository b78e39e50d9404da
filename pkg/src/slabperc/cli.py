"""Command line: ``slabperc {plan,build,simulate,census,dual,render} CONFIG``.

Exit status is 0 when every audit and check passes, 1 when an audit or
check fails and 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments as ex
from .config import ConfigError, RunConfig, load_config
from .planner import PlanError, validate_plan
from .render import RenderOptions, render_svg
from .report import emit_report

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _viewport(s: str) -> tuple[int, int]:
    try:
        w, h = s.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError("viewport must look like 600x600") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slabperc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("plan", "validate the parameter plan"),
        ("build", "catalog, tree, assembly and audits"),
        ("simulate", "crossing, FKG, road and comparison experiments"),
        ("census", "count assembly components holding spanning open clusters"),
        ("dual", "duality conservation and separation witnesses"),
        ("render", "write SVG figures"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", type=Path)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--viewport", type=_viewport)
        sp.add_argument("--out", type=str)
        sp.add_argument("--strict", action="store_true", help="require n strictly increasing across levels")
        sp.add_argument("--jobs", type=int)
    return ap


def _resolve(args) -> RunConfig:
    cfg = load_config(args.config)
    kw = {}
    for key in ("seed", "trials", "viewport", "out", "jobs"):
        v = getattr(args, key)
        if v is not None:
            kw[key] = v
    if args.strict:
        kw["strict"] = True
    return cfg.replace(**kw) if kw else cfg


def _write_lines(path: Path, lines) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return str(path)


def _run_dir(cfg: RunConfig, command: str) -> Path:
    return Path(cfg.out) / f"{command}-seed{cfg.seed}"


def cmd_plan(cfg: RunConfig) -> dict:
    return {"config": cfg, "validation": validate_plan(cfg.plan).as_dict(), "passed": True}


def cmd_build(cfg: RunConfig) -> dict:
    inst = ex.build_instance(cfg.plan, cfg.viewport)
    d = _run_dir(cfg, "build")
    files = [
        _write_lines(d / "catalog.tsv", inst.catalog.dump_lines()),
        _write_lines(d / "assembly.tsv", inst.assembly.dump_lines()),
    ]
    return {
        "config": cfg,
        "validation": validate_plan(cfg.plan).as_dict(),
        "catalog": ex.catalog_stats(inst),
        "assembly": ex.assembly_stats(inst),
        "files": files,
    }


def cmd_simulate(cfg: RunConfig) -> dict:
    recs: list[dict] = []
    inst = None
    if {"road", "folded"} & set(cfg.experiments):
        inst = ex.build_instance(cfg.plan, cfg.viewport)
    if "crossing" in cfg.experiments:
        recs += ex.crossing_records(cfg.p, cfg.trials, cfg.seed, n_jobs=cfg.jobs)
    if "fkg" in cfg.experiments:
        recs += ex.fkg_records(cfg.p)
    for p in cfg.p:
        if "road" in cfg.experiments:
            recs.append(ex.road_record(inst, p, cfg.trials, cfg.seed, n_jobs=cfg.jobs))
        if "scaling" in cfg.experiments:
            recs += ex.scaling_records(p, (8, 16, 32, 64), cfg.trials, cfg.seed, n_jobs=cfg.jobs)
        if "folded" in cfg.experiments:
            recs += ex.folded_records(inst, p, cfg.trials, cfg.seed, n_jobs=cfg.jobs)
    passed = all(r["passed"] is not False for r in recs)
    out = {"config": cfg, "experiments": recs, "passed": passed}
    if inst is not None:
        out["catalog"] = ex.catalog_stats(inst)
        out["assembly"] = ex.assembly_stats(inst)
        out["passed"] = passed and inst.passed
    return out


def cmd_census(cfg: RunConfig) -> dict:
    inst = ex.build_instance(cfg.plan, cfg.viewport)
    census = ex.census_records(inst, cfg.p, cfg.trials, cfg.seed, n_jobs=cfg.jobs)
    d = _run_dir(cfg, "census")
    lines = [f"{t}\tp={c['p']}\t{v}" for c in census for t, v in enumerate(c["counts"])]
    return {
        "config": cfg,
        "catalog": ex.catalog_stats(inst),
        "assembly": ex.assembly_stats(inst),
        "census": census,
        "files": [_write_lines(d / "census.tsv", lines)],
    }


def cmd_dual(cfg: RunConfig) -> dict:
    from .dualtools import dual_of_config, separation_witness, spanning_clusters
    from .geometry import PlanarRect, induced_rect_graph
    from .percolation import sample_config

    w, h = (min(v, 256) for v in cfg.viewport)
    seeds = range(cfg.seed, cfg.seed + min(cfg.trials, 50))
    recs = [r for p in cfg.p for r in ex.dual_records((w, h), p, seeds)]
    # dump the first witness found, if any
    d = _run_dir(cfg, "dual")
    files = []
    g = induced_rect_graph(PlanarRect.from_bounds(0, w - 1, 0, h - 1))
    for p in cfg.p:
        for s in seeds:
            c = sample_config(g, p, s)
            span = spanning_clusters(c)
            if len(span) >= 2:
                wit = separation_witness(span[0], span[1], c)
                if wit is not None:
                    files.append(_write_lines(d / f"witness-p{p}-s{s}.tsv", wit.lines()))
                    files.append(_write_lines(d / f"dual-p{p}-s{s}.tsv", dual_of_config(c).edge_lines()))
                    break
    ok = all(r["conservation"] and r["witnesses_valid"] == max(r["n_spanning"] - 1, 0) for r in recs)
    return {"config": cfg, "dual": recs, "files": files, "passed": ok}


def cmd_render(cfg: RunConfig) -> dict:
    from .gridgen import make_window, sample_nested_grids

    inst = ex.build_instance(cfg.plan, cfg.viewport)
    d = _run_dir(cfg, "render")
    d.mkdir(parents=True, exist_ok=True)
    opt = RenderOptions(scale=1.0)
    (d / "catalog.svg").write_text(render_svg(inst.catalog, opt), encoding="utf-8")
    (d / "assembly.svg").write_text(render_svg(inst.assembly, opt), encoding="utf-8")
    (d / "grids.svg").write_text(render_svg(cfg, opt), encoding="utf-8")
    g0 = sample_nested_grids(cfg.param_seed)[0]
    (d / "grid0.svg").write_text(render_svg(g0, RenderOptions(scale=8.0)), encoding="utf-8")
    files = [str(d / n) for n in ("catalog.svg", "assembly.svg", "grids.svg", "grid0.svg")]
    level = min(2, len(cfg.L))
    first = next((e for e in inst.catalog.entries if e.level == level), None)
    if first is not None:
        w = make_window(level, first.window.h.lo, first.window.v.lo, cfg.plan.levels, cfg.L)
        (d / "window.svg").write_text(render_svg(w, RenderOptions(scale=8.0)), encoding="utf-8")
        files.append(str(d / "window.svg"))
    return {
        "config": cfg,
        "catalog": ex.catalog_stats(inst),
        "assembly": ex.assembly_stats(inst),
        "files": files,
    }


COMMANDS = {
    "plan": cmd_plan,
    "build": cmd_build,
    "simulate": cmd_simulate,
    "census": cmd_census,
    "dual": cmd_dual,
    "render": cmd_render,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        results = COMMANDS[args.command](cfg)
    except PlanError as exc:
        print(f"plan error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = emit_report(results, cfg.out, command=args.command)
    status = "passed" if report["passed"] else "FAILED"
    print(f"{args.command}: {status}")
    return EXIT_OK if report["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
