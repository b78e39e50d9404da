"""Pilot run that calibrates the census threshold used by the acceptance suite.

Runs the census at p = 0.95 on pilot seeds disjoint from the acceptance
seed and writes ``tests/data/census_pilot.json``.  The frozen threshold is
the smallest pilot median (never below 2).

    python3 demos/census_pilot.py
"""

import json
from pathlib import Path

from slabperc.experiments import build_instance, census_records
from slabperc.planner import desk_plan

PILOT_SEEDS = (101, 102, 103, 104, 105)
P, TRIALS = 0.95, 200


def main():
    runs = []
    for s in PILOT_SEEDS:
        inst = build_instance(desk_plan(seed=s), (600, 600))
        rec = census_records(inst, [P], TRIALS, seed=1000 + s)[0]
        runs.append({"seed": s, "median": rec["median"], "distribution": rec["distribution"], "n_components": rec["n_components"]})
        print(f"seed {s}: median {rec['median']}, components {rec['n_components']}")
    threshold = max(2, int(min(r["median"] for r in runs)))
    out = {"p": P, "trials": TRIALS, "viewport": [600, 600], "runs": runs, "threshold": threshold, "floor": 2}
    path = Path(__file__).resolve().parents[1] / "tests" / "data" / "census_pilot.json"
    path.write_text(json.dumps(out, indent=2) + "\n")
    print(f"frozen threshold {threshold} -> {path}")


if __name__ == "__main__":
    main()
