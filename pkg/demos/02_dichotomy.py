"""Finite-time blowup versus global existence.

With w(0) = 1 and w'(0) = 2 the solution blows up in finite time exactly
when mu > 1.  The stepper's blowup estimate is compared with the maximal
time obtained from the primitive of 1 / sqrt(2K).
"""

import math

from halfspace_ln import ConePair, IvpSpec, build_table, max_time, solve_ivp
from halfspace_ln.ivp import growth_check

for n, k in [(5, 1), (4, 1), (5, 2), (4, 2), (3, 2), (6, 5)]:
    table = build_table(ConePair.garding(n, k))
    mu = (n - k) / k
    T = max_time(table, 1.0, 2.0)
    if math.isfinite(T):
        traj = solve_ivp(table, IvpSpec(1.0, 2.0, 0.0, 10 * T))
        print(f"({n},{k}) mu={mu:.2f}: blowup at {traj.T_estimate:.12f}, quadrature {T:.12f}")
    else:
        p = math.sqrt(2 * float(table.K(0.01)))
        traj = solve_ivp(table, IvpSpec(1.0, p, 0.0, 1e3))
        ok, C, worst = growth_check(traj)
        print(f"({n},{k}) mu={mu:.2f}: global, w(1000) = {traj.w[-1]:.6g}, w' <= {C:.4f} w holds: {ok}")
