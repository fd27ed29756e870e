# %% [markdown]
# # Testing for an increasing trend in malformation rates
#
# Four groups of mothers, ordered by alcohol consumption, with the number of
# newborns and how many had a congenital sex organ malformation.  Do the
# malformation probabilities rise with consumption?
#
# Run with `python notebooks/01_worked_example.py`, or open it as a notebook
# in any editor that understands `# %%` cells.

# %%
import numpy as np

import isobinom as ib
from isobinom.data import bundled_path
from isobinom.report import read_sample

sample = read_sample(bundled_path("malformation.csv"))
print("totals   ", sample.totals)
print("successes", sample.successes)

# %% [markdown]
# ## Three fits
#
# The pooled fit forces a common probability.  The unrestricted fit uses each
# group's own proportion.  The isotonic fit is the best nondecreasing
# sequence; here the first two groups violate the order and get pooled.

# %%
est = ib.estimate_all(sample)
np.set_printoptions(precision=5, suppress=False)
print("pooled     ", est.pi0_hat)
print("unrestricted", est.pi_bar)
print("isotonic   ", est.pi_tilde)
print("isotonic, categories 1-2 pooled:", est.pi_tilde[0] == 43 / 15808)

# %% [markdown]
# On the logit scale the parameters are the log-odds of the last group
# followed by each group's log-odds ratio against it.

# %%
print("theta_hat  ", est.theta_hat)
print("theta_bar  ", est.theta_bar)
print("theta_tilde", est.theta_tilde)

# %% [markdown]
# ## Null distribution
#
# Under equality every statistic below is asymptotically a mixture of
# chi-squares.  The mixing weights depend only on the group shares.

# %%
metric = ib.cone_covariance(sample.nu)
closed = ib.weights_closed_form(metric)
print("weights (closed form):", closed.weights)
print("correlations:\n", ib.correlations(metric.V))

# %% [markdown]
# ## Statistics and p-values
#
# `T` compares two divergences from the unrestricted fit; `S` measures the
# isotonic fit against the pooled one directly.  `W`, `H` and `D` are Wald
# type.  `T(0)` is the likelihood ratio statistic and `S(1)` is
# Bartholomew's chi-square.

# %%
lambdas = [-1.5, -1.0, -0.5, 0.0, 2 / 3, 1.0]
for st in ib.compute_statistics(sample, lambdas, est=est):
    p = ib.chibar_pvalue(st.value, closed)
    print(f"{st.label:<12} {st.value:8.4f}   p = {p:.4f}")

# %% [markdown]
# All tests reject at 5% except the Wald family, whose p-values sit near
# 0.17.  The same table comes from the command line:
#
#     isobinom test malformation.csv --format text

# %%
from isobinom.cli import main  # noqa: E402

main(["test", "malformation.csv", "--format", "text"])
