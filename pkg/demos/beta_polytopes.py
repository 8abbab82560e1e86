# %% [markdown]
# Random polytopes from beta-distributed points.
#
# How much of the ball a random hull misses, how that shrinks with N, and the
# exact one-dimensional case.

# %%
import numpy as np

from intrinsic_metrics import constants as C
from intrinsic_metrics.beta import sample_beta
from intrinsic_metrics.experiments import appendixB_expectation, scaling_factor, scaling_factor_estimate

# %% Samples concentrate towards the sphere as beta decreases.
for beta in (2.0, 0.0, -0.5, -0.9):
    r = np.linalg.norm(sample_beta(3, beta, 20_000, rng=1), axis=1)
    print(f"beta={beta:5.1f}: mean radius {r.mean():.4f}")

# %% Normalized missed area in the plane approaches its limit constant.
limit = C.affentranger_A(2, 0.0)
for N in (100, 500, 2000):
    est = C.affentranger_mc(2, 0.0, N, 400, rng=N)
    print(f"N={N:5d}: N^(2/3) E[missed] = {est.value:.3f} +- {est.std_error:.3f}   limit {limit:.3f}")

# %% The radius that matches the expected missed volume.
for N in (100, 1000, 10_000):
    a = scaling_factor(2, N, 0.0, "asymptotic")
    e = scaling_factor_estimate(2, N, 0.0, "empirical", rng=5, reps=200)
    print(f"N={N:6d}: asymptotic t={a:.5f}  empirical t={e.value:.5f} +- {e.std_error:.1e}")

# %% On the line everything is exact: the expected hull length of N uniform points.
for N in (1, 2, 5, 50):
    print(N, appendixB_expectation(N, 0.0), 2 * (N - 1) / (N + 1))
print("beta=1, N=10:", appendixB_expectation(10, 1.0))
