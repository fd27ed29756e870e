"""Order-restricted test statistics for H0: pi_1 = ... = pi_I.

Three Wald-type statistics (``W``, ``H``, ``D``) and two power-divergence
families (``T_lambda`` generalising the likelihood ratio statistic and
``S_lambda`` generalising Bartholomew's chi-square).  ``T_0`` is the
order-restricted likelihood ratio statistic and ``S_1`` is Bartholomew's.

The single-sample functions take an :class:`EstimateTriple` and return a
:class:`StatValue`.  All of them are thin wrappers around array kernels that
accept stacked replications, which is what the simulation engine uses.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logit

from .divergence import PHI_POWER_CURVATURE, power_divergence
from .estimate import EstimateTriple, _pool, estimate_all
from .model import IsotonicSample, design_matrices, fisher_info_null, sigma_nu

__all__ = [
    "StatValue",
    "wald_W",
    "wald_W_general",
    "wald_H",
    "wald_D",
    "stat_T",
    "stat_S",
    "g_squared",
    "bartholomew_x2",
    "compute_statistics",
    "batch_estimates",
    "batch_statistics",
    "stat_key",
]


@dataclass(frozen=True)
class StatValue:
    """One statistic evaluated on one sample.

    ``value`` is ``nan`` and ``reason`` explains why when the statistic is
    undefined for the data at hand.
    """

    kind: str
    value: float
    lam: Optional[float] = None
    reason: Optional[str] = None

    @property
    def defined(self) -> bool:
        return self.reason is None

    @property
    def label(self) -> str:
        return stat_key(self.kind, self.lam)


def stat_key(kind: str, lam: Optional[float] = None) -> str:
    if lam is None:
        return kind
    return f"{kind}({lam:.6g})"


# ---------------------------------------------------------------------------
# array kernels; leading axes index replications, the last axis categories

def _quiet(fn):
    # undefined rows carry nan/inf through the arithmetic and are masked after
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            return fn(*args, **kwargs)
    return wrapper


def _interior(x):
    return (x > 0.0) & (x < 1.0)


def _safe_logit(x):
    with np.errstate(divide="ignore", invalid="ignore"):
        return logit(x)


def batch_estimates(totals, successes):
    """Pooled, unrestricted and isotonic probability estimates, stacked.

    Parameters
    ----------
    totals : array_like, shape (I,)
    successes : array_like, shape (R, I)

    Returns
    -------
    pi0 : ndarray, shape (R,)
    pi_bar, pi_tilde : ndarray, shape (R, I)
    """
    totals = np.asarray(totals, dtype=float)
    succ = np.atleast_2d(np.asarray(successes, dtype=float))
    pi0 = succ.sum(axis=1) / totals.sum()
    pi_bar = succ / totals
    pi_tilde = pi_bar.copy()
    # only rows with a strict violation need pooling
    bad = np.any(pi_bar[:, :-1] > pi_bar[:, 1:], axis=1)
    for r in np.flatnonzero(bad):
        pi_tilde[r] = _pool(succ[r], totals)
    return pi0, pi_bar, pi_tilde


@_quiet
def _w_kernel(n, nu, pi0, pi_tilde):
    lt = _safe_logit(pi_tilde)
    theta_star = lt[..., :-1] - lt[..., -1:]
    quad = np.einsum("...i,ij,...j->...", theta_star, sigma_nu(nu[:-1]), theta_star)
    out = n * pi0 * (1.0 - pi0) * quad
    ok = _interior(pi0) & np.all(_interior(pi_tilde), axis=-1)
    return np.where(ok, np.maximum(out, 0.0), np.nan)


def _null_quad(nu, pi0, diff_logit):
    # (theta - theta_hat)^T I_F(theta_hat) (theta - theta_hat), written through
    # X (theta - theta_hat) = logit(pi) - logit(pi0)
    return pi0 * (1.0 - pi0) * np.sum(nu * diff_logit ** 2, axis=-1)


@_quiet
def _h_kernel(n, nu, pi0, pi_tilde):
    d = _safe_logit(pi_tilde) - _safe_logit(pi0)[..., None]
    out = n * _null_quad(nu, pi0, d)
    ok = _interior(pi0) & np.all(_interior(pi_tilde), axis=-1)
    return np.where(ok, np.maximum(out, 0.0), np.nan)


@_quiet
def _d_kernel(n, nu, pi0, pi_bar, pi_tilde):
    lb = _safe_logit(pi_bar)
    lt = _safe_logit(pi_tilde)
    first = _null_quad(nu, pi0, lb - _safe_logit(pi0)[..., None])
    second = np.sum(nu * pi_tilde * (1.0 - pi_tilde) * (lb - lt) ** 2, axis=-1)
    out = n * (first - second)
    ok = (_interior(pi0) & np.all(_interior(pi_tilde), axis=-1)
          & np.all(_interior(pi_bar), axis=-1))
    return np.where(ok, out, np.nan)


def _cells(pi, nu):
    out = np.empty(pi.shape[:-1] + (2 * pi.shape[-1],))
    out[..., 0::2] = nu * pi
    out[..., 1::2] = nu * (1.0 - pi)
    return out


@_quiet
def _t_kernel(lam, n, nu, pi0, pi_bar, pi_tilde):
    p_bar = _cells(pi_bar, nu)
    p_tilde = _cells(pi_tilde, nu)
    p_hat = _cells(np.broadcast_to(pi0[..., None], pi_bar.shape), nu)
    a = power_divergence(lam, p_bar, p_hat)
    b = power_divergence(lam, p_bar, p_tilde)
    ok = _interior(pi0) & np.isfinite(a) & np.isfinite(b)
    with np.errstate(invalid="ignore"):
        out = 2.0 * n / PHI_POWER_CURVATURE * (a - b)
    return np.where(ok, out, np.nan)


@_quiet
def _s_kernel(lam, n, nu, pi0, pi_tilde):
    p_tilde = _cells(pi_tilde, nu)
    p_hat = _cells(np.broadcast_to(pi0[..., None], pi_tilde.shape), nu)
    d = power_divergence(lam, p_tilde, p_hat)
    ok = _interior(pi0) & np.isfinite(d)
    return np.where(ok, 2.0 * n / PHI_POWER_CURVATURE * d, np.nan)


def _haldane(totals, successes):
    return (successes + 0.5) / (totals + 1.0)


def batch_statistics(totals, successes, lambdas, haldane=False, estimates=None):
    """All statistics for stacked replications sharing the same totals.

    Returns a dict mapping :func:`stat_key` labels to arrays of shape
    ``(R,)``; undefined entries are ``nan``.
    """
    totals = np.asarray(totals, dtype=float)
    succ = np.atleast_2d(np.asarray(successes, dtype=float))
    if estimates is None:
        estimates = batch_estimates(totals, succ)
    pi0, pi_bar, pi_tilde = estimates
    n = totals.sum()
    nu = totals / n
    pi_bar_d = _haldane(totals, succ) if haldane else pi_bar
    out = {
        "W": _w_kernel(n, nu, pi0, pi_tilde),
        "H": _h_kernel(n, nu, pi0, pi_tilde),
        "D": _d_kernel(n, nu, pi0, pi_bar_d, pi_tilde),
    }
    for lam in lambdas:
        out[stat_key("T", lam)] = _t_kernel(lam, n, nu, pi0, pi_bar, pi_tilde)
        out[stat_key("S", lam)] = _s_kernel(lam, n, nu, pi0, pi_tilde)
    return out


# ---------------------------------------------------------------------------
# single-sample interface

def _one(est: EstimateTriple):
    return (np.array([est.pi0_hat]), est.pi_bar[None, :], est.pi_tilde[None, :])


def _null_reason(est):
    if not 0.0 < est.pi0_hat < 1.0:
        return "pooled estimate on the boundary"
    return None


def _wrap(kind, value, lam=None, reason=None):
    value = float(value[0])
    if reason is None and math.isnan(value):
        reason = "infinite divergence"
    if reason is not None:
        value = math.nan
    return StatValue(kind, value, lam, reason)


def wald_W(est: EstimateTriple, s: IsotonicSample) -> StatValue:
    """``n pi0 (1 - pi0) theta*^T Sigma_nu theta*`` at the isotonic fit."""
    pi0, _, pi_tilde = _one(est)
    reason = _null_reason(est) or (
        None if est.theta_tilde is not None else "isotonic estimate on the boundary")
    return _wrap("W", _w_kernel(s.n, s.nu, pi0, pi_tilde), reason=reason)


def wald_W_general(est: EstimateTriple, s: IsotonicSample) -> float:
    """``W`` through the full matrix expression; used to cross-check :func:`wald_W`."""
    if _null_reason(est) or est.theta_tilde is None:
        return math.nan
    R = design_matrices(s.I).R
    info = fisher_info_null(est.pi0_hat, s.nu)
    middle = R @ np.linalg.solve(info, R.T)
    r_theta = R @ est.theta_tilde
    return float(s.n * r_theta @ np.linalg.solve(middle, r_theta))


def wald_H(est: EstimateTriple, s: IsotonicSample) -> StatValue:
    pi0, _, pi_tilde = _one(est)
    reason = _null_reason(est) or (
        None if est.theta_tilde is not None else "isotonic estimate on the boundary")
    return _wrap("H", _h_kernel(s.n, s.nu, pi0, pi_tilde), reason=reason)


def wald_D(est: EstimateTriple, s: IsotonicSample, haldane: bool = False) -> StatValue:
    """Difference of the null and isotonic Wald distances from the unrestricted fit.

    With ``haldane=True`` the unrestricted fit uses ``(N_i1 + 0.5) / (n_i + 1)``
    so that zero or full success counts stay finite.
    """
    pi0, pi_bar, pi_tilde = _one(est)
    if haldane:
        totals, succ = s.as_arrays()
        pi_bar = _haldane(totals, succ)[None, :]
    reason = _null_reason(est)
    if reason is None and est.theta_tilde is None:
        reason = "isotonic estimate on the boundary"
    if reason is None and not np.all(_interior(pi_bar)):
        reason = "unrestricted estimate on the boundary"
    return _wrap("D", _d_kernel(s.n, s.nu, pi0, pi_bar, pi_tilde), reason=reason)


def stat_T(lam: float, est: EstimateTriple, s: IsotonicSample) -> StatValue:
    """``2n (d_lambda(p_bar, p_hat) - d_lambda(p_bar, p_tilde))``."""
    pi0, pi_bar, pi_tilde = _one(est)
    v = _t_kernel(lam, s.n, s.nu, pi0, pi_bar, pi_tilde)
    return _wrap("T", v, float(lam), _null_reason(est))


def stat_S(lam: float, est: EstimateTriple, s: IsotonicSample) -> StatValue:
    """``2n d_lambda(p_tilde, p_hat)``."""
    pi0, _, pi_tilde = _one(est)
    v = _s_kernel(lam, s.n, s.nu, pi0, pi_tilde)
    return _wrap("S", v, float(lam), _null_reason(est))


def g_squared(est: EstimateTriple, s: IsotonicSample) -> float:
    """Order-restricted likelihood ratio statistic from its count form."""
    totals, succ = s.as_arrays()
    fail = totals - succ
    p0, pt = est.pi0_hat, est.pi_tilde
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(succ > 0, succ * (np.log(pt) - math.log(p0)), 0.0)
        b = np.where(fail > 0, fail * (np.log1p(-pt) - math.log1p(-p0)), 0.0)
    return float(2.0 * np.sum(a + b))


def bartholomew_x2(est: EstimateTriple, s: IsotonicSample) -> float:
    """Bartholomew's order-restricted chi-square."""
    totals, _ = s.as_arrays()
    p0 = est.pi0_hat
    return float(np.sum(totals * (est.pi_tilde - p0) ** 2) / (p0 * (1.0 - p0)))


def compute_statistics(s: IsotonicSample, lambdas, haldane: bool = False,
                       est: Optional[EstimateTriple] = None) -> list[StatValue]:
    """``T_lambda`` and ``S_lambda`` for each ``lambda``, then ``W``, ``H``, ``D``."""
    if est is None:
        est = estimate_all(s)
    out = [stat_T(lam, est, s) for lam in lambdas]
    out += [stat_S(lam, est, s) for lam in lambdas]
    out += [wald_W(est, s), wald_H(est, s), wald_D(est, s, haldane=haldane)]
    return out
