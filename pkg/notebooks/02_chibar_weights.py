# %% [markdown]
# # Chi-bar-squared weights
#
# The weight `w_i` is the probability that a Gaussian vector with covariance
# `V`, projected onto the nonnegative orthant in the `V^{-1}` metric, lands
# with exactly `i` positive coordinates.  Up to three dimensions there are
# closed forms in terms of correlations.  Beyond that we count projections.

# %%
import time

import numpy as np

import isobinom as ib

nu = np.array([17114, 14502, 793, 165]) / 32574
metric = ib.cone_covariance(nu)
closed = ib.weights_closed_form(metric)
print("closed form:", np.round(closed.weights, 5))

# %% [markdown]
# ## Monte Carlo agreement
#
# Standard error at one million draws is about 5e-4 per weight.

# %%
t0 = time.perf_counter()
mc = ib.weights_monte_carlo(metric, reps=1_000_000, seed=7)
print(f"monte carlo: {np.round(mc.weights, 5)}  ({time.perf_counter() - t0:.2f}s)")
print("max abs difference:", np.abs(mc.weights - closed.weights).max())

# %% [markdown]
# ## Invariances
#
# Scaling `V` scales every projection by the same factor, so with a shared
# seed the counts agree draw by draw.  Reversing the coordinates relabels the
# orthant without changing how many coordinates are positive.

# %%
scaled = ib.metric_from_matrix(5.0 * metric.V)
same = ib.weights_monte_carlo(scaled, reps=100_000, seed=7).weights
base = ib.weights_monte_carlo(metric, reps=100_000, seed=7).weights
print("identical under scaling:", np.array_equal(same, base))

rev = ib.metric_from_matrix(metric.V[::-1, ::-1])
print("reversal, closed form:", np.round(ib.weights_closed_form(rev).weights, 5))

# %% [markdown]
# ## Six groups
#
# No closed form is used here.  Even-indexed and odd-indexed weights each
# sum to one half, which is a cheap sanity check on the simulation.

# %%
six = ib.cone_covariance(np.full(6, 1 / 6))
w6 = ib.weights_monte_carlo(six, reps=1_000_000, seed=1).weights
print("weights:", np.round(w6, 4))
print("even sum:", w6[0::2].sum().round(4), " odd sum:", w6[1::2].sum().round(4))

# %% [markdown]
# ## Tail probabilities
#
# The p-value is the weighted sum of chi-square tails, with the zero-degree
# component a point mass at the origin.

# %%
for t in (0.0, 2.5979, 5.4057, 8.4942):
    print(f"t = {t:7.4f}   p = {ib.chibar_pvalue(t, closed):.4f}")
