"""Area descent with a fixed boundary, in flat and hyperbolic space."""

# %%
import numpy as np

from confdiam import ambient as amb
from confdiam import generators as gen
from confdiam import plateau as pl
from confdiam import surface as srf

e3, ball = amb.euclidean(), amb.hyperbolic_ball()

# %% [markdown]
# Two coaxial unit circles at height 1 bound a catenoid. The descent moves
# vertices along their normals only, preconditioned by a cotangent stiffness.

# %%
a, b = gen.circle_pair(1.0, 1.0, 48)
mesh, hist = pl.minimize_area(pl.span_tube(a, b, 16), e3)
neck = np.linalg.norm(mesh.positions[np.abs(mesh.positions[:, 2]) < 1e-9, :2], axis=1).mean()
print("catenoid:", hist.reason, "after", hist.iterations, "steps; neck", round(neck, 4),
      "analytic", round(gen.catenoid_neck(1.0, 1.0), 4))

# %% [markdown]
# Past the critical ratio no catenoid exists; the neck pinches and the run is
# flagged instead of looping.

# %%
crit = pl.catenoid_critical_ratio()
print("critical height / radius", crit)
for h in (0.95 * crit, 1.05 * crit):
    _, hist = pl.minimize_area(pl.span_tube(*gen.circle_pair(1.0, h, 48), 16), e3)
    print(f"h = {h:.4f}: converged {hist.converged}, neck collapse {hist.neck_collapse}")

# %% [markdown]
# In the ball, the minimal disk bounded by a horizontal circle is a piece of
# a sphere meeting the boundary at right angles.

# %%
height, r = 0.3, 0.5
mesh, hist = pl.minimize_area(pl.span_disk(gen.circle(r, 48, center=(0, 0, height)), rings=8), ball)
c = (1 + r * r + height * height) / (2 * height)
dist = np.linalg.norm(mesh.positions - [0, 0, c], axis=1)
print("hyperbolic disk:", hist.reason, "| sphere radius", round(np.sqrt(c * c - 1), 4),
      "fit", round(dist.min(), 4), "to", round(dist.max(), 4))
print("residual int|H| / area:", srf.total_mean_curvature(mesh, ball) / srf.area(mesh, ball))
