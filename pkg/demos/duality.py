"""Dual configurations and separating dual paths on a random box.

    python3 demos/duality.py
"""

from slabperc.dualtools import dual_of_config, separation_witness, spanning_clusters, witness_valid
from slabperc.geometry import PlanarRect, induced_rect_graph
from slabperc.percolation import sample_config

g = induced_rect_graph(PlanarRect.from_bounds(0, 127, 0, 23))
for seed in range(50):
    cfg = sample_config(g, 0.5, seed)
    spans = spanning_clusters(cfg, "V")
    if len(spans) >= 2:
        break
dc = dual_of_config(cfg)
print(f"seed {seed}: {cfg.n_open} open primal + {dc.n_open} open dual = {g.n_edges} edge pairs")
print(f"{len(spans)} clusters cross the box top to bottom")
for a, b in zip(spans, spans[1:]):
    w = separation_witness(a, b, cfg)
    kind = "cycle" if w.closed else "boundary-to-boundary path"
    print(f"  separated by a {kind} of {len(w.edges)} open dual edges, valid = {witness_valid(w, a, b, cfg)}")
