"""Barrier constructions: the ball, the annular supersolution, and a witness
that comparison fails for the nonhyperbolic members.
"""

from halfspace_ln import ConePair, build_table
from halfspace_ln.barriers import BarrierSpec, certify_annulus_supersolution, counterexample_witness

cone = ConePair.garding(4, 2)
for C in (37.5, 30.0):
    cert = certify_annulus_supersolution(cone, BarrierSpec.annulus(201.0, 10.0, C))
    print(f"annulus R=201, r1=10, C={C}: certified {cert.passed}")
    print(f"    C - 9R^2/r1^4 = {cert.margins['C_lower']:.4f},  R^3/(21 r1^4) - C = {cert.margins['C_upper']:.4f}")

table = build_table(cone)
wit = counterexample_witness(table, 1.0)
print(f"\nexterior ball centred at {wit.center}, radius {wit.R}:")
print(f"    value {wit.barrier_value:.6f} at x_n = 1, while u(1) = {wit.u_value:.6f}")
print(f"    recomputed from the tuple: {wit.recompute():.6f}")
