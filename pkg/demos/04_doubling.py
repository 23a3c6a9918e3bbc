"""Closing a surface with a teardrop tube and watching the tube curvature converge.

Two copies of a disk are glued along a thin tube whose cross-section is a
teardrop of total absolute curvature pi + 4 eta. As the tube thickness eps
shrinks, the tube's integral of |H| tends to that curvature times the
boundary length, at first order in eps.
"""

# %%
import math

from confdiam import ambient as amb
from confdiam import doubling as dbl
from confdiam import generators as gen

e3 = amb.euclidean()
drop = dbl.make_teardrop(0.05)
print("teardrop: length", round(drop.length, 4), " int|kappa|", dbl.total_abs_curvature(drop),
      " pi + 4 eta", math.pi + 0.2)

# %%
disk = gen.disk(1.0, 16, 8)
double = dbl.build_double(disk, 0.04, drop, 64, e3)
print("doubled disk: closed", double.mesh.is_closed, " Euler characteristic", double.mesh.euler_characteristic())
ann = dbl.build_double(gen.annulus(0.5, 1.0, 4, 48), 0.04, drop, 32, e3)
print("doubled annulus: Euler characteristic", ann.mesh.euler_characteristic())

# %%
rows = dbl.convergence_study(disk, e3, drop, [0.08, 0.04, 0.02])
print(f"{'eps':>6} {'tube int|H|':>12} {'error':>8} {'d(Sigma)':>9} {'d(M_eps)':>9}")
for r in rows:
    print(f"{r.eps:6.2f} {r.tube_H:12.5f} {r.error:8.4f} {r.d_sigma:9.4f} {r.d_double:9.4f}")
print("limit", rows[0].reference)
print("error ratios", [round(a.error / b.error, 2) for a, b in zip(rows, rows[1:])])
