"""Ray profiles of a few cones and the inverse K of the first integral.

For sigma_1 and the (4, 2) cone everything is known in closed form, so the
table can be compared against it directly.  The fitted growth exponent of K
is printed next to the expected value 1 + mu.
"""

import numpy as np

from halfspace_ln import ConePair, build_table
from halfspace_ln.profile import asymptotic_exponent, inequality_margins

for n, k in [(3, 1), (4, 2), (3, 2), (5, 3)]:
    cone = ConePair.garding(n, k)
    table = build_table(cone)
    mu = (n - k) / k
    slope = asymptotic_exponent(table, 1e2, 1e4)
    margins = inequality_margins(table)
    print(f"{cone.label}: mu = {mu:.3f}, K tail exponent {slope:.6f} (expected {1 + mu:.6f})")
    print(f"    A(1/2) = {table.A_at_half:.12f}, smallest inequality margin {min(margins.values()):.2e}")

table = build_table(ConePair.garding(4, 2))
x = np.array([0.1, 1.0, 10.0])
print("\n(4,2): K(x) vs sqrt(2 x^4 + 1) / 2")
for xi, k_tab in zip(x, table.K(x)):
    print(f"    x = {xi:5.1f}   table {k_tab:.15f}   exact {np.sqrt(2 * xi**4 + 1) / 2:.15f}")
