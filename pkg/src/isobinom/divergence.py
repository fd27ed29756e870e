"""Phi-divergences between cell probability vectors.

The Cressie-Read power family ``d_lambda`` is available in closed form; any
other convex ``phi`` can go through :func:`divergence_generic`.  Zero cells
follow the usual conventions ``0 * phi(0/0) = 0`` and
``0 * phi(p/0) = p * lim_{u->inf} phi(u)/u``.  A divergence that is infinite
under these conventions is returned as ``inf`` rather than raised.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "LAMBDA_POLE_TOL",
    "power_divergence",
    "divergence_generic",
    "phi_power",
    "phi_power_slope",
    "PHI_POWER_CURVATURE",
]

# distance to -1 or 0 below which the limiting formulas are used
LAMBDA_POLE_TOL = 1e-9

# phi''(1) for every member of the power family
PHI_POWER_CURVATURE = 1.0


def _check_pair(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("probability vectors must be nonnegative")
    return p, q


def _xlogy_ratio(a, b):
    # sum over cells of a * log(a / b), with 0 log 0 = 0 and a > 0 = b -> inf
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(a > 0, a * (np.log(a) - np.log(b)), 0.0)
    return t.sum(axis=-1)


def power_divergence(lam: float, p, q):
    """Cressie-Read divergence ``d_lambda(p, q)``.

    Parameters
    ----------
    lam : float
        Family index.  Values within ``LAMBDA_POLE_TOL`` of 0 or -1 use the
        Kullback-Leibler and reverse Kullback-Leibler limits.
    p, q : array_like
        Cell probabilities; the divergence is taken along the last axis, so
        stacked vectors of shape ``(..., k)`` give a result of shape ``(...)``.

    Returns
    -------
    float or ndarray
        Nonnegative divergence, ``inf`` where it is not finite.
    """
    p, q = _check_pair(p, q)
    lam = float(lam)
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    if abs(lam) < LAMBDA_POLE_TOL:
        out = _xlogy_ratio(p, q)
    elif abs(lam + 1.0) < LAMBDA_POLE_TOL:
        out = _xlogy_ratio(q, p)
    else:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if lam > -1.0:
                # p > 0 = q diverges iff lam > 0
                power = np.where(p > 0, p ** (lam + 1.0) * q ** (-lam), 0.0)
            else:
                # q > 0 = p diverges
                power = np.where(q > 0, p ** (lam + 1.0) * q ** (-lam), 0.0)
            # cellwise q * phi(p / q); avoids cancellation in sum(power) - 1
            cell = np.where(p == q, 0.0, power - p - lam * (p - q))
            out = cell.sum(axis=-1) / (lam * (lam + 1.0))
    out = np.asarray(out, dtype=float)
    # clip round-off below zero; leave inf untouched
    out = np.where(np.isfinite(out), np.maximum(out, 0.0), np.inf)
    return float(out) if out.ndim == 0 else out


def phi_power(lam: float):
    """The convex generator of the power family as a vectorized callable."""
    lam = float(lam)
    if abs(lam) < LAMBDA_POLE_TOL:
        def phi(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(x > 0, x * np.log(x), 0.0) - x + 1.0
    elif abs(lam + 1.0) < LAMBDA_POLE_TOL:
        def phi(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore"):
                return -np.log(x) + x - 1.0
    else:
        c = 1.0 / (lam * (lam + 1.0))

        def phi(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore"):
                return c * (x ** (lam + 1.0) - x - lam * (x - 1.0))
    return phi


def phi_power_slope(lam: float) -> float:
    """``lim_{u->inf} phi_lambda(u) / u``."""
    lam = float(lam)
    if lam > -LAMBDA_POLE_TOL:
        return math.inf
    # -1/lam for every lam < 0, including the lam = -1 limit
    return -1.0 / lam


def divergence_generic(phi, p, q, slope_at_infinity: float = math.inf):
    """``sum_cells q * phi(p / q)`` for a user supplied convex ``phi``.

    ``phi`` must satisfy ``phi(1) = phi'(1) = 0``; only ``phi(1) ~ 0`` is
    checked.  ``slope_at_infinity`` is ``lim phi(u)/u`` and prices cells with
    ``q = 0 < p``.
    """
    p, q = _check_pair(p, q)
    if abs(float(phi(np.float64(1.0)))) > 1e-10:
        raise ValueError("phi(1) must be 0")
    pos_q = q > 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(pos_q, p / np.where(pos_q, q, 1.0), 1.0)
        body = np.where(pos_q, q * phi(ratio), 0.0)
        edge = np.where(~pos_q & (p > 0), p * slope_at_infinity, 0.0)
        out = (body + edge).sum(axis=-1)
    out = np.asarray(out, dtype=float)
    out = np.where(np.isnan(out), np.inf, out)
    out = np.where(np.isfinite(out), np.maximum(out, 0.0), np.inf)
    return float(out) if out.ndim == 0 else out
