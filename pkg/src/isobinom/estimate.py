"""Maximum likelihood fits under the null, isotonic and unrestricted models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logit

from .model import IsotonicSample, theta_from_pi

__all__ = [
    "EstimateTriple",
    "pava",
    "pooled_estimate",
    "unrestricted_estimate",
    "isotonic_estimate",
    "estimate_all",
    "expand_loglinear",
    "binomial_loglik",
]


@dataclass(frozen=True)
class EstimateTriple:
    """The three fits every statistic is built from.

    ``theta_*`` entries are ``None`` when the matching probability vector
    touches 0 or 1, since the logit is then infinite.
    """

    pi0_hat: float
    pi_bar: np.ndarray
    pi_tilde: np.ndarray
    theta_hat: Optional[np.ndarray]
    theta_bar: Optional[np.ndarray]
    theta_tilde: Optional[np.ndarray]


def _theta_or_none(pi):
    if np.all((pi > 0.0) & (pi < 1.0)):
        return theta_from_pi(pi)
    return None


def pava(y, w) -> np.ndarray:
    """Weighted isotonic (nondecreasing) regression by pooling adjacent violators.

    Adjacent blocks are merged into their weighted mean whenever the left
    block strictly exceeds the right one; ties are left alone.
    """
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    if y.shape != w.shape or y.ndim != 1:
        raise ValueError("y and w must be 1-d arrays of equal length")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    return _pool(y * w, w)


def _pool(num, w):
    # Block PAVA on numerators ``num`` (= w * y) so that integer counts are
    # pooled exactly.  Each block holds (numerator, weight, length).
    sums, weights, sizes = [], [], []
    for a, b in zip(num.tolist(), w.tolist()):
        sums.append(a)
        weights.append(b)
        sizes.append(1)
        while len(sums) > 1 and sums[-2] / weights[-2] > sums[-1] / weights[-1]:
            a, b, k = sums.pop(), weights.pop(), sizes.pop()
            sums[-1] += a
            weights[-1] += b
            sizes[-1] += k
    return np.repeat(np.array(sums) / np.array(weights), sizes)


def pooled_estimate(s: IsotonicSample):
    """Common success probability ``N_.1 / n`` and its parameter vector."""
    pi0 = sum(s.successes) / s.n
    if 0.0 < pi0 < 1.0:
        theta = np.zeros(s.I)
        theta[0] = logit(pi0)
    else:
        theta = None
    return pi0, theta


def unrestricted_estimate(s: IsotonicSample):
    totals, succ = s.as_arrays()
    pi_bar = succ / totals
    return pi_bar, _theta_or_none(pi_bar)


def isotonic_estimate(s: IsotonicSample):
    """Order-restricted MLE of ``pi`` (nondecreasing) and its parameters."""
    totals, succ = s.as_arrays()
    pi_tilde = _pool(succ, totals)
    return pi_tilde, _theta_or_none(pi_tilde)


def estimate_all(s: IsotonicSample) -> EstimateTriple:
    pi0, theta_hat = pooled_estimate(s)
    pi_bar, theta_bar = unrestricted_estimate(s)
    pi_tilde, theta_tilde = isotonic_estimate(s)
    return EstimateTriple(pi0, pi_bar, pi_tilde, theta_hat, theta_bar, theta_tilde)


def expand_loglinear(theta, nu):
    """Redundant log-linear terms ``u`` and ``u_1(i)``, i < I.

    Together with ``theta`` they give ``log p_ij = u + u_1(i) + theta_2(j)
    + theta_12(ij)`` under the corner constraints ``u_1(I) = 0``,
    ``theta_2(2) = 0``, ``theta_12(i2) = 0`` and ``theta_12(Ij) = 0``.
    """
    theta = np.asarray(theta, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if theta.shape != nu.shape:
        raise ValueError("theta and nu differ in length")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    a = np.logaddexp(0.0, theta[0])  # log(1 + exp(theta_2(1)))
    u = np.log(nu[-1]) - a
    u1 = np.log(nu[:-1] / nu[-1]) + a - np.logaddexp(0.0, theta[0] + theta[1:])
    return float(u), u1


def binomial_loglik(pi, s: IsotonicSample) -> float:
    """Binomial log-likelihood (without the combinatorial constant)."""
    pi = np.asarray(pi, dtype=float)
    totals, succ = s.as_arrays()
    fail = totals - succ
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(succ > 0, succ * np.log(pi), 0.0)
        b = np.where(fail > 0, fail * np.log1p(-pi), 0.0)
    return float(np.sum(a) + np.sum(b))

