# %% [markdown]
# Distances between convex bodies via averaged projections.
#
# Compare a random polygon with the unit disk, then a pair of random
# polytopes in space, and check the classic deviations bracket the metric.

# %%
import numpy as np

from intrinsic_metrics import MetricConfig, Polytope, delta_j, deviation_Delta_j, deviation_rho_j, unit_ball
from intrinsic_metrics.geometry import Ball, disk_polygon_symdiff

rng = np.random.default_rng(1)
cfg = MetricConfig(subspace_samples=400, volume_samples=2000)

# %% In the plane, the top index is just the area of the symmetric difference.
P = Polytope(rng.uniform(-1.2, 1.2, (9, 2)))
est = delta_j(P, unit_ball(2), 2, cfg, rng=2)
exact = disk_polygon_symdiff(P.vertices, Ball(np.zeros(2), 1.0))
print(f"delta_2(P, disk) = {est.value:.6f} +- {est.std_error:.1e}   exact area = {exact:.6f}")

# %% Lower indices need the Grassmannian average.
print(f"delta_1(P, disk) = {delta_j(P, unit_ball(2), 1, cfg, rng=3).value:.4f}")

# %% Two polytopes in R^3 sharing the origin.
K = Polytope(0.8 * rng.standard_normal((10, 3)))
L = Polytope(0.8 * rng.standard_normal((10, 3)))
for j in (1, 2, 3):
    d = delta_j(K, L, j, cfg, rng=4)
    D = deviation_Delta_j(K, L, j, cfg, rng=4)
    r = deviation_rho_j(K, L, j, cfg, rng=4)
    print(f"j={j}: delta={d.value:.4f}  Delta={D.value:.4f}  rho={r.value:.4f}")
