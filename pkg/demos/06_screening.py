"""Ruling out connected minimal surfaces between far-apart curves.

A connected minimal surface has intrinsic diameter at most C pi times its
boundary length, so components further apart than that bound cannot be
joined by one.
"""

# %%
from confdiam import ambient as amb
from confdiam import generators as gen
from confdiam import plateau as pl

# %%
curves = [gen.circle(1.0, 64), gen.circle(1.0, 64, center=(0, 0, 1e6))]
v = pl.screen_boundary(curves, amb.euclidean())
print(f"euclidean: separation {v.separation:.3g}, bound {v.bound:.3g} -> {v.verdict}")

# %%
# tiny horocyclic circles in the half-space, ln 10 apart
curves = [gen.circle(1e-6, 64, center=(0, 0, 1.0)), gen.circle(1e-5, 64, center=(0, 0, 10.0))]
v = pl.screen_boundary(curves, amb.hyperbolic_half_space())
print(f"half-space: separation {v.separation:.4f}, bound {v.bound:.4f} -> {v.verdict}")

# %%
# in S^3 the constant depends on the area of a competitor, which must be supplied
pair = gen.circle_pair(0.2, 0.5, 32)
for budget in (0.1, 10.0):
    v = pl.screen_boundary(pair, amb.sphere_stereographic(), area_budget=budget)
    print(f"s3, area budget {budget}: {v.verdict} {v.note}")
