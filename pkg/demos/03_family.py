"""The one-parameter family vanishing on the boundary when mu <= 1.

Each member is fixed by w(1) = 1 + a.  Members are ordered in a, all are
asymptotic to t at the boundary, and only a = 0 gives a complete metric at
infinity.  The last block shows how slowly the family grows near the
boundary as a increases.
"""

import numpy as np

from halfspace_ln import ConePair, build_family, build_table, theorem_D_table, verify_theorem_B

table = build_table(ConePair.garding(4, 2))
members = [build_family(table, a) for a in (0.0, 0.5, 1.0, 2.0)]
t = np.array([1e-4, 0.1, 1.0, 5.0])
for sol in members:
    print(f"a = {sol.a_param:3.1f}  b = {sol.b:.6f}  w(t) = {np.round(sol.w(t), 6)}")

report = verify_theorem_B(members, np.geomspace(1e-6, 20, 200))
for check in report.checks:
    print(f"  property {check.number}: {'ok' if check.passed else 'FAILED'}  {check.name}")

rows = theorem_D_table(table, 0.1, [1, 10, 100, 1000])
print("\n a       b          w(0.1)      w'(0.1)")
for a, b, w, wp in zip(rows.a, rows.b, rows.w_eps, rows.wprime_eps):
    print(f"{a:6.0f}  {b:.6f}  {w:.8f}  {wp:.8f}")
print("growth from a = 1 to a = 1000:", {k: round(v, 3) for k, v in rows.growth.items()})
