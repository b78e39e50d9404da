"""Crossing probabilities: exact values, Monte Carlo, correlation and growth.

    python3 demos/crossings.py
"""

from fractions import Fraction

from slabperc.geometry import PlanarRect
from slabperc.percolation import CrossingSpec, estimate_crossing, exact_crossing_probability, fkg_check
from slabperc.experiments import scaling_records

square = PlanarRect.from_bounds(0, 1, 0, 1)
h = CrossingSpec.for_rect(square, "H")
v = CrossingSpec.for_rect(square, "V")
print("unit square, p = 1/2: exact horizontal crossing", exact_crossing_probability(h, Fraction(1, 2)))
est = estimate_crossing(h, 0.5, 100_000, seed=1)
print(f"  Monte Carlo {est.p_hat:.4f} +- {est.sigma:.4f}")

res = fkg_check(square, h, v, Fraction(1, 2))
print(f"  both crossings {res.p_ab} >= product {res.product}: {res.passed}")

rect = PlanarRect.from_bounds(0, 3, 0, 2)
spec = CrossingSpec.for_rect(rect, "H")
print("4x3 box, coupled p-grid:")
for e in estimate_crossing(spec, [0.3, 0.5, 0.7], 20_000, seed=2):
    print(f"  p={e.p}: {e.p_hat:.4f} (exact {float(exact_crossing_probability(spec, e.p)):.4f})")

print("2n x n boxes at p = 0.6:")
for r in scaling_records(0.6, (8, 16, 32, 64), 2000, seed=3):
    print(f"  n={r['detail']['n']:3d}: {r['estimate']:.3f} +- {r['sigma']:.3f}")
