"""Radial fractional Sobolev calculus and the inequality harnesses.

The radial transform is self-reciprocal (the Gaussian is a fixed
point), Parseval ties the physical and spectral sides together, and
the weighted-sup and product estimates are exercised on seeded random
families: boundedness is the claim, the constants are empirical.
"""

import numpy as np

from similab import NormSpec, hs_norm, l2_norm, make_grid, schauder_ratio, strauss_ratio
from similab.driver import gaussian_sum_family
from similab.sobolev import hankel_forward

g = make_grid(5, 10.0, 800)
f = g.sample(lambda r: np.exp(-0.5 * r * r))
sf = hankel_forward(f)
sel = sf.wavenumbers <= 8.0
print("Gaussian fixed point: sup_k |uhat - exact| =",
      f"{np.max(np.abs(sf.values[sel] - np.exp(-0.5 * sf.wavenumbers[sel] ** 2))):.2e}")
print(f"Parseval: |hs(f,0) - l2(f)| / l2 = "
      f"{abs(hs_norm(f, 0.0) - l2_norm(f)) / l2_norm(f):.2e}")

print("\ndilation covariance ||f(2.)||_s = 2^(s-n/2) ||f||_s:")
f2 = g.sample(lambda r: np.exp(-0.5 * (2 * r) ** 2))
for s in (0.0, 1.0, 1.6, 6.0):
    lhs = hs_norm(f2, s)
    rhs = 2.0 ** (s - 2.5) * hs_norm(f, s)
    print(f"  s={s:3.1f}: relative error {abs(lhs - rhs) / rhs:.2e}")

fam = gaussian_sum_family(g, 50, seed=0)
ratios0 = [strauss_ratio(u, 1.6, 0) for u in fam]
ratios1 = [strauss_ratio(u, 1.6, 1) for u in fam]
print("\nweighted-sup (Strauss-type) ratios over 50 random fields, n=5, s=1.6:")
print(f"  alpha=0: max {max(ratios0):.3f}   alpha=1: max {max(ratios1):.3f}")

spec = NormSpec(1.6, 6, 5)
fam = gaussian_sum_family(g, 120, seed=1, unit_spec=spec)
worst = max(
    schauder_ratio(*fam[4 * i : 4 * i + 4], spec) for i in range(30)
)
print(f"product-estimate (Schauder-type) max ratio over 30 quadruples: {worst:.3e}")
print("(empirical suprema; the estimates assert boundedness, not a constant)")
