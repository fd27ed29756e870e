"""Reference computations that share no code with the package."""

from fractions import Fraction
from itertools import product

import numpy as np


def grid_isotonic_mle(totals, successes, step=1e-3):
    """Maximise the binomial log-likelihood over a monotone grid by dynamic programming.

    Returns the best grid log-likelihood and its argmax.
    """
    g = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logg = np.log(g)
        log1g = np.log1p(-g)
    rows = []
    for n, k in zip(totals, successes):
        a = k * logg if k > 0 else np.zeros_like(g)
        b = (n - k) * log1g if n - k > 0 else np.zeros_like(g)
        rows.append(a + b)
    best = rows[0].copy()
    back = []
    for row in rows[1:]:
        run_max = np.maximum.accumulate(best)
        # position of the running max
        pos = np.where(best == run_max, np.arange(best.size), 0)
        idx = np.maximum.accumulate(pos)
        back.append(idx)
        best = row + run_max
    j = int(np.argmax(best))
    val = float(best[j])
    path = [j]
    for idx in reversed(back):
        j = int(idx[j])
        path.append(j)
    return val, g[path[::-1]]


def minmax_isotonic(totals, successes):
    """Exact isotonic regression by the max-min formula over block averages."""
    I = len(totals)

    def av(s, t):
        return Fraction(sum(successes[s:t + 1]), sum(totals[s:t + 1]))

    return [max(min(av(s, t) for t in range(i, I)) for s in range(i + 1)) for i in range(I)]


def loglik(pi, totals, successes):
    out = 0.0
    for p, n, k in zip(pi, totals, successes):
        if k > 0:
            out += k * np.log(p)
        if n - k > 0:
            out += (n - k) * np.log1p(-p)
    return out


def enumerate_projection(z, Q):
    """Project ``z`` on the nonnegative orthant in the metric ``Q`` by trying every face."""
    k = len(z)
    c = Q @ z
    best, best_val = None, np.inf
    for pattern in product((False, True), repeat=k):
        S = np.flatnonzero(pattern)
        zeta = np.zeros(k)
        if S.size:
            zeta[S] = np.linalg.solve(Q[np.ix_(S, S)], c[S])
        if np.any(zeta[S] < -1e-12):
            continue
        grad = Q @ zeta - c
        off = np.setdiff1d(np.arange(k), S)
        if off.size and np.any(grad[off] < -1e-9 * max(1.0, np.abs(c).max())):
            continue
        val = (z - zeta) @ Q @ (z - zeta)
        if val < best_val:
            best, best_val = zeta, val
    return best


def random_spd(rng, k):
    A = rng.normal(size=(k, k))
    return A @ A.T + 0.1 * k * np.eye(k)
