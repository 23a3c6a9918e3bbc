"""The Sobolev inequality for piecewise-linear functions on a surface."""

# %%
import numpy as np

from confdiam import ambient as amb
from confdiam import gates
from confdiam import generators as gen

ball = amb.hyperbolic_ball()
mesh = gen.disk(0.5, 10)

# %%
rng = np.random.default_rng(0)
ratios = []
for _ in range(20):
    f = np.zeros(mesh.n_vertices)
    f[mesh.interior_vertices] = rng.random(len(mesh.interior_vertices))
    lhs, rhs = gates.hoffman_spruck_check(mesh, ball, f)
    ratios.append(lhs / rhs)
print("lhs / rhs over 20 random functions: max", max(ratios))

# %% [markdown]
# The weighted variant needs <x, D psi> e^psi to integrate to something
# non-negative. The stereographic weight fails this on any cap.

# %%
psi, grad = gates.stereographic_weight()
print("stereographic weight on a cap:", gates.weighted_gate(gen.spherical_cap(1.0, 1.0, 8), psi, grad))
