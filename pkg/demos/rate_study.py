# %% [markdown]
# Decay of the best-approximation error with the number of vertices.
#
# Inflated random sphere polytopes approximate the ball in delta_j at rate
# N^(-2/(n-1)).  This reruns a small version of the study and compares the
# inflated construction against the plain inscribed hull.

# %%
from intrinsic_metrics import MetricConfig
from intrinsic_metrics.experiments import ExperimentSpec, best_approx_search, theorem1_run

cfg = MetricConfig(subspace_samples=64, volume_samples=2000)

# %%
for n, j in ((3, 1), (3, 3)):
    spec = ExperimentSpec(n, j, (50, 100, 200, 400), reps=20, seed=3, cfg=cfg)
    res = theorem1_run(spec, compare_unscaled=True)
    print(f"n={n} j={j}: slope {res.slope:.3f} +- {res.slope_stderr:.3f} (target {-2 / (n - 1):.3f}) {res.flags}")
    for row, cmp in zip(res.rows, res.comparison):
        print(f"  N={row.N:4d} mean={row.mean:.5f} ratio_to_bound={row.ratio:.3f} "
              f"gain_vs_inscribed={cmp.improvement:.5f} (z={cmp.z:.1f})")

# %% A local search can beat the random construction for tiny N.
trace = []
P, est = best_approx_search(2, 2, 4, 800, rng=7, trace=trace)
print(f"square-ish 4-gon: start {trace[0]:.4f} -> {est.value:.4f} after {len(trace) - 1} accepted moves")
