"""Structured run reports (JSON) validated against a bundled schema.

Report files are numbered ``report-0000.json``, ``report-0001.json``, ...
and opened in exclusive-create mode, so earlier reports are never touched.
"""

from __future__ import annotations

import json
import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

SCHEMA_VERSION = "1.0"


@lru_cache(maxsize=1)
def report_schema() -> dict:
    text = resources.files("slabperc").joinpath("schemas/report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_report(report: dict) -> None:
    jsonschema.validate(report, report_schema())


def _plain(obj):
    """Convert numpy scalars, tuples and infinities into JSON-safe values."""
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    return obj


def emit_report(results: dict, out_dir=None, command: str = "report") -> dict:
    """Assemble, validate and optionally write a report.

    ``results`` must contain ``config`` (a :class:`~slabperc.config.RunConfig`
    or a mapping) and may contain ``validation``, ``catalog``, ``assembly``,
    ``experiments``, ``census``, ``dual``, ``files`` and ``warnings``.
    ``passed`` defaults to the conjunction of every audit present.
    """
    import dataclasses

    cfg = results["config"]
    if dataclasses.is_dataclass(cfg):
        cfg = dataclasses.asdict(cfg)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "plan": {"config": _plain(cfg), "validation": _plain(results.get("validation"))},
    }
    for key in ("catalog", "assembly", "experiments", "census", "dual", "files", "warnings"):
        if results.get(key) is not None:
            report[key] = _plain(results[key])
    if "passed" in results:
        passed = bool(results["passed"])
    else:
        passed = True
        if "catalog" in report:
            passed &= report["catalog"]["audit_passed"]
        if "assembly" in report:
            passed &= report["assembly"]["audit"]["passed"]
    report["passed"] = passed
    validate_report(report)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def write_report(report: dict, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    k = 0
    while True:
        path = out / f"report-{k:04d}.json"
        try:
            fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o644)
        except FileExistsError:
            k += 1
            continue
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path
