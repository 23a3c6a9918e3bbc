"""Smallness gates, constants and the diameter inequality on a mesh."""

# %%
import math

from confdiam import ambient as amb
from confdiam import gates
from confdiam import generators as gen

# %%
print("C(2, 2/3) =", gates.wz_constant(2 / 3), "= 3888 pi =", 3888 * math.pi)
print("Sobolev constant c(2, 2/3), K >= 0:", gates.hs_constant(2, 2 / 3, 1.0))

# %% [markdown]
# Negative curvature puts no restriction on the area. In the round S^3 the
# area gate caps alpha; the cap binds below 2/3 once |Sigma| exceeds pi/6.

# %%
for area in (0.1, math.pi / 6, math.pi / 4, 1.5):
    try:
        alpha, C = gates.optimal_alpha(area, 1.0, inj=math.pi)
        print(f"|Sigma| = {area:.4f}: alpha = {alpha:.4f}, C = {C:.1f}")
    except gates.GateViolation as exc:
        print(f"|Sigma| = {area:.4f}: {exc}")

# %%
# the full report on a flat disk and on a geodesic disk of the ball
for mesh, a in ((gen.disk(1.0, 12, 8), amb.euclidean()), (gen.disk(0.5, 12, 8), amb.hyperbolic_ball())):
    r = gates.main_inequality_report(mesh, a)
    print(f"{a.kind:22s} d = {r.diameter:.4f}  rhs = {r.rhs:.4g}  margin = {r.margin:.4g}  ({r.verdict})")

# %%
# closed surfaces use the bound without the boundary term
r = gates.wu_zheng_check(gen.icosphere(3), amb.euclidean())
print("unit sphere: int|H| =", round(r.total_H, 4), "(8 pi =", round(8 * math.pi, 4), ")", r.verdict)
r = gates.wu_zheng_check(gen.icosphere(3), amb.sphere_stereographic())
print("great sphere of S^3:", r.verdict)
