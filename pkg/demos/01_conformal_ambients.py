"""Conformal ambients, areas and mean curvature.

Run with ``python demos/01_conformal_ambients.py``.
"""

# %%
import math

import numpy as np

from confdiam import ambient as amb
from confdiam import generators as gen
from confdiam import surface as srf

ball = amb.hyperbolic_ball()
half = amb.hyperbolic_half_space()
s3 = amb.sphere_stereographic()

# %% [markdown]
# Every ambient is a chart with metric exp(2 phi) times the flat metric.
# The chart disk of radius 1/2 in the ball has hyperbolic radius ln 3.

# %%
disk = gen.disk(0.5, rings=24, segments=6)
rho = math.log(3.0)
print("hyperbolic area   ", srf.area(disk, ball), "exact", 2 * math.pi * (math.cosh(rho) - 1))
print("hyperbolic length ", srf.boundary_length(disk, ball), "exact", 2 * math.pi * math.sinh(rho))

# %% [markdown]
# Mean curvature picks up the gradient of phi. The unit sphere is a great
# sphere of S^3 under stereographic projection, so its |H| nearly vanishes.

# %%
sphere = gen.icosphere(4)
print("sphere total |H| in e3", srf.total_mean_curvature(sphere, amb.euclidean()))
print("sphere total |H| in s3", srf.total_mean_curvature(sphere, s3))

# %%
# a horizontal plane in the half-space is a horosphere: |H| = 2 everywhere
patch = gen.plane_patch(1.0, 24, height=1.0)
H = srf.mean_curvature(patch, half).H_conf_norm[patch.interior_vertices]
print("horosphere |H| range", H.min(), H.max())

# %%
# closed-form model distances
print("d(0, 0.5 e1) in the ball", amb.ambient_distance(ball, [0, 0, 0], [0.5, 0, 0]), "= ln 3 =", math.log(3))
print("antipodes in s3         ", amb.ambient_distance(s3, [0, 0, 0], [1e9, 0, 0]))
print("segment rules agree     ",
      np.round([amb.curve_length(ball, np.array([[0, 0, 0], [0.5, 0, 0.]]), rule=r) for r in amb.QUADRATURE_RULES], 8))
