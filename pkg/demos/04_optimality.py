"""Random directions rarely return: the contrast with lattice frequencies."""

# %%
from arwaves.experiments import compare_models, expected_length_check
from arwaves.field import optimality_experiment

# %% [markdown]
# For N random unit directions, how often does R_N stay below 1 - eps on the
# annulus 1 <= |t| <= e^(aN)?

# %%
for row in optimality_experiment(2, [6, 8, 10, 12], 0.25, 0.2, 20, seed=0):
    print(f"N={row['N']:2d}  radius={row['radius']:6.2f}  P(no almost period)={row['prob_no_almost_period']:.2f}")

# %% [markdown]
# Guaranteed almost-period sizes for the full and linearised models.

# %%
for n in (5, 65):
    for row in compare_models(n, 0.5 if n == 5 else 0.25):
        print(row)

# %% [markdown]
# Sanity check on the simulator: the mean nodal length matches the closed form.

# %%
out = expected_length_check(5, 50, seed=1)
print(f"n=5: mean {out['mean']:.4f} +- {out['stderr']:.4f}, target {out['target']:.4f}")
