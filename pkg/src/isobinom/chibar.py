"""Chi-bar-squared null distribution of the order-restricted statistics.

The limit law is ``sum_i w_i chi2_i`` where ``w_i`` is the probability that
the projection of ``Z ~ N(0, V)`` onto the nonnegative orthant, in the
metric ``V^{-1}``, has exactly ``i`` positive components.  ``V`` is the
covariance of the scaled adjacent differences of the sample proportions.

Weights come either from the orthant-probability closed forms (I <= 4) or
from Monte Carlo.  Monte Carlo draws use numpy's PCG64 generator; block
``b`` of ``MC_BLOCK`` draws is seeded with ``SeedSequence(seed,
spawn_key=(b,))``, so the weights depend only on ``(seed, reps, V)`` and
not on how blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from .model import design_matrices, sigma_nu

__all__ = [
    "ConeMetric",
    "ChiBarDistribution",
    "cone_covariance",
    "metric_from_matrix",
    "correlations",
    "partial_correlations",
    "project_cone",
    "project_cone_batch",
    "weights_closed_form",
    "weights_monte_carlo",
    "chi_bar",
    "chisq_sf",
    "chibar_pvalue",
    "POSITIVE_TOL",
    "MC_BLOCK",
]

POSITIVE_TOL = 1e-8
MC_BLOCK = 16384


class ProjectionError(RuntimeError):
    """The active-set solver failed to terminate."""


@dataclass(frozen=True, eq=False)
class ConeMetric:
    """Covariance ``V`` of the limiting Gaussian and its inverse."""

    V: np.ndarray
    Vinv: np.ndarray
    nu: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.V.shape[0]


@dataclass(frozen=True, eq=False)
class ChiBarDistribution:
    """Mixing weights ``w_0, ..., w_{I-1}`` of a chi-bar-squared law."""

    weights: np.ndarray
    method: str
    reps: Optional[int] = None
    seed: Optional[int] = None
    metric: Optional[ConeMetric] = field(default=None, repr=False)

    @property
    def df_max(self) -> int:
        return len(self.weights) - 1

    def sf(self, t):
        return chibar_pvalue(t, self)


def cone_covariance(nu) -> ConeMetric:
    """``V = G diag(nu*)^{-1} G^T + e e^T / nu_I`` and ``V^{-1} = T^T Sigma T``."""
    nu = np.asarray(nu, dtype=float)
    if nu.ndim != 1 or nu.size < 2:
        raise ValueError("nu must be a vector of length >= 2")
    if np.any(nu <= 0):
        raise ValueError("every category weight must be positive")
    dm = design_matrices(nu.size)
    nu_star = nu[:-1]
    V = dm.G @ np.diag(1.0 / nu_star) @ dm.G.T + np.outer(dm.e_last, dm.e_last) / nu[-1]
    Vinv = dm.T.T @ sigma_nu(nu_star) @ dm.T
    resid = np.max(np.abs(Vinv @ V - np.eye(nu.size - 1)))
    if resid > 1e-10 * max(1.0, np.max(np.abs(V)) * np.max(np.abs(Vinv))):
        # nu that does not sum to one breaks the closed form; fall back
        Vinv = np.linalg.inv(V)
    return ConeMetric(V, Vinv, nu)


def metric_from_matrix(V) -> ConeMetric:
    """Wrap an arbitrary symmetric positive definite covariance."""
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ValueError("V must be square")
    if not np.allclose(V, V.T, rtol=1e-12, atol=0):
        raise ValueError("V must be symmetric")
    np.linalg.cholesky(V)
    return ConeMetric(V, np.linalg.inv(V))


def correlations(V) -> np.ndarray:
    d = np.sqrt(np.diag(V))
    out = V / np.outer(d, d)
    np.fill_diagonal(out, 1.0)
    return out


def partial_correlations(V) -> np.ndarray:
    """Partial correlation of each pair given all remaining coordinates."""
    P = np.linalg.inv(V)
    d = np.sqrt(np.diag(P))
    out = -P / np.outer(d, d)
    np.fill_diagonal(out, 1.0)
    return out


# ---------------------------------------------------------------------------
# projection onto the nonnegative orthant

def _mask_solver(Q):
    cache = {}

    def inv(mask: int):
        m = cache.get(mask)
        if m is None:
            idx = [j for j in range(Q.shape[0]) if mask >> j & 1]
            m = np.zeros_like(Q)
            if idx:
                m[np.ix_(idx, idx)] = np.linalg.inv(Q[np.ix_(idx, idx)])
            cache[mask] = m
        return m

    return inv


def _solve_on_masks(inv, masks, c):
    # s = Q_PP^{-1} c_P on each row's passive set P, zero elsewhere
    s = np.zeros_like(c)
    for m in np.unique(masks):
        rows = masks == m
        s[rows] = c[rows] @ inv(int(m)).T
    return s


def project_cone_batch(z, metric: ConeMetric, max_pivots: Optional[int] = None):
    """Project rows of ``z`` onto ``{zeta >= 0}`` in the ``V^{-1}`` metric.

    Solves ``min 0.5 zeta^T Q zeta - c^T zeta`` with ``Q = V^{-1}`` and
    ``c = Q z`` by the Lawson-Hanson active-set method, run on all rows at
    once.  Each row keeps its own passive set; subproblems that share a
    passive set are solved together.

    Returns
    -------
    zeta : ndarray, shape (R, k)
    positive_count : ndarray of int, shape (R,)
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    Q = metric.Vinv
    k = Q.shape[0]
    if z.shape[1] != k:
        raise ValueError(f"z has {z.shape[1]} columns, metric has dimension {k}")
    if max_pivots is None:
        max_pivots = 100 * k
    inv = _mask_solver(Q)
    bits = 1 << np.arange(k)
    c = z @ Q  # Q symmetric
    # per-row tolerance keeps each row's answer independent of its batch
    tol = (1e-12 * max(1.0, float(np.max(np.abs(Q))))
           * np.maximum(1.0, np.max(np.abs(z), axis=1, initial=0.0)))
    R = z.shape[0]
    x = np.zeros_like(z)
    passive = np.zeros((R, k), dtype=bool)
    pivots = np.zeros(R, dtype=int)
    rows = np.arange(R)
    while True:
        grad = c - x @ Q  # negative gradient
        cand = np.where(passive, -np.inf, grad)
        j = np.argmax(cand, axis=1)
        best = cand[rows, j]
        act = best > tol
        if not np.any(act):
            break
        if np.any(pivots[act] >= max_pivots):
            raise ProjectionError("active-set pivot limit reached")
        ai = np.flatnonzero(act)
        passive[ai, j[ai]] = True
        pivots[ai] += 1
        # inner loop: restore feasibility on the rows that just pivoted
        while ai.size:
            masks = passive[ai] @ bits
            s = _solve_on_masks(inv, masks, c[ai])
            P = passive[ai]
            feasible = np.all(~P | (s > 0), axis=1)
            done = ai[feasible]
            x[done] = s[feasible]
            if feasible.all():
                break
            keep = ~feasible
            ai, s, P = ai[keep], s[keep], P[keep]
            xa = x[ai]
            blocked = P & (s <= 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(blocked, xa / (xa - s), np.inf)
            alpha = np.min(ratio, axis=1)
            xa = xa + alpha[:, None] * (s - xa)
            drop = P & (xa <= tol[ai, None])
            xa[drop] = 0.0
            passive[ai] = P & ~drop
            x[ai] = xa
            pivots[ai] += 1
            if np.any(pivots[ai] >= max_pivots):
                raise ProjectionError("active-set pivot limit reached")
    count = np.sum(x > POSITIVE_TOL, axis=1)
    return x, count


def project_cone(z, metric: ConeMetric):
    """Single-vector form of :func:`project_cone_batch`."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise ValueError("z must be a vector")
    x, count = project_cone_batch(z[None, :], metric)
    return x[0], int(count[0])


# ---------------------------------------------------------------------------
# weights

def weights_closed_form(metric: ConeMetric) -> ChiBarDistribution:
    """Exact weights for cones of dimension 1, 2 or 3 (I = 2, 3, 4)."""
    k = metric.dim
    if k == 1:
        w = [0.5, 0.5]
    elif k == 2:
        rho = correlations(metric.V)[0, 1]
        top = (math.pi - math.acos(rho)) / (2 * math.pi)
        w = [0.5 - top, 0.5, top]
    elif k == 3:
        r = correlations(metric.V)
        p = partial_correlations(metric.V)
        w3 = (2 * math.pi - math.acos(r[0, 1]) - math.acos(r[0, 2])
              - math.acos(r[1, 2])) / (4 * math.pi)
        w2 = (3 * math.pi - math.acos(p[0, 1]) - math.acos(p[0, 2])
              - math.acos(p[1, 2])) / (4 * math.pi)
        w = [0.5 - w2, 0.5 - w3, w2, w3]
    else:
        raise ValueError(f"no closed form for cone dimension {k}; use Monte Carlo")
    return ChiBarDistribution(np.array(w), "closed_form", metric=metric)


def _mc_block(args):
    metric, seed, block, size = args
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(seed, spawn_key=(block,))))
    L = np.linalg.cholesky(metric.V)
    z = rng.standard_normal((size, metric.dim)) @ L.T
    _, count = project_cone_batch(z, metric)
    return np.bincount(count, minlength=metric.dim + 1)


def weights_monte_carlo(metric: ConeMetric, reps: int = 1_000_000, seed: int = 0,
                        workers: int = 1) -> ChiBarDistribution:
    """Estimate the weights as positive-count frequencies of projected draws."""
    reps = int(reps)
    if reps < 1:
        raise ValueError("reps must be >= 1")
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    np.linalg.cholesky(metric.V)
    nblocks = -(-reps // MC_BLOCK)
    jobs = [(metric, seed, b, min(MC_BLOCK, reps - b * MC_BLOCK)) for b in range(nblocks)]
    if workers > 1 and nblocks > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_mc_block, jobs))
    else:
        parts = [_mc_block(j) for j in jobs]
    counts = np.sum(parts, axis=0)
    return ChiBarDistribution(counts / reps, "monte_carlo", reps=reps, seed=seed,
                              metric=metric)


def chi_bar(metric: ConeMetric, method: str = "auto", reps: int = 1_000_000,
            seed: int = 0, workers: int = 1) -> ChiBarDistribution:
    """Weights by the requested method; ``auto`` prefers the closed form."""
    if method == "auto":
        method = "closed" if metric.dim <= 3 else "mc"
    if method in ("closed", "closed_form"):
        return weights_closed_form(metric)
    if method in ("mc", "monte_carlo"):
        return weights_monte_carlo(metric, reps, seed, workers)
    raise ValueError(f"unknown weights method {method!r}")


# ---------------------------------------------------------------------------
# tails

def chisq_sf(t, df):
    """``P(chi2_df >= t)``; ``df = 0`` is a point mass at zero."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    df = int(df)
    if df < 0:
        raise ValueError("df must be nonnegative")
    if df == 0:
        out = np.where(t_arr == 0, 1.0, 0.0)
    else:
        out = special.gammaincc(df / 2.0, t_arr / 2.0)
    return float(out) if out.ndim == 0 else out


def chibar_pvalue(t, dist: ChiBarDistribution):
    """``sum_i w_i P(chi2_i >= t)``; ``nan`` inputs give ``nan``."""
    t_arr = np.asarray(t, dtype=float)
    nan = np.isnan(t_arr)
    tt = np.where(nan, 0.0, t_arr)
    if np.any(tt < 0):
        raise ValueError("t must be nonnegative")
    p = sum(w * chisq_sf(tt, i) for i, w in enumerate(dist.weights))
    p = np.clip(np.where(nan, np.nan, p), 0.0, 1.0)
    return float(p) if p.ndim == 0 else p
