"""Data model and logistic parametrization for I ordered binomial samples.

Category ``i`` contributes ``totals[i]`` trials of which ``successes[i]``
are successes.  The saturated logistic model writes

    logit(pi) = X @ theta

with ``theta[0]`` the common (nuisance) logit of the last category and
``theta[1:]`` the interaction parameters ``logit(pi_i) - logit(pi_I)``.
Under homogeneity every interaction parameter is zero.

Probability vectors and parameter vectors are plain 1-d float arrays.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit, logit

__all__ = [
    "IsotonicSample",
    "DesignMatrices",
    "validate_sample",
    "design_matrices",
    "nu_from_totals",
    "sigma_nu",
    "theta_from_pi",
    "pi_from_theta",
    "cell_probs",
    "fisher_info",
    "fisher_info_null",
]


@dataclass(frozen=True)
class IsotonicSample:
    """Success counts for ``I`` ordered binomial groups.

    Attributes
    ----------
    totals : tuple of int
        Number of trials ``n_i`` per category, in increasing ordinal order.
    successes : tuple of int
        Number of successes ``N_i1`` per category.
    """

    totals: tuple[int, ...]
    successes: tuple[int, ...]

    @property
    def I(self) -> int:  # noqa: E743
        return len(self.totals)

    @property
    def n(self) -> int:
        return int(sum(self.totals))

    @property
    def failures(self) -> tuple[int, ...]:
        return tuple(t - s for t, s in zip(self.totals, self.successes))

    @property
    def nu(self) -> np.ndarray:
        return nu_from_totals(self.totals)

    def reversed(self) -> "IsotonicSample":
        """Same data with the category order flipped."""
        return IsotonicSample(self.totals[::-1], self.successes[::-1])

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.asarray(self.totals, dtype=float),
                np.asarray(self.successes, dtype=float))


def _as_int(value, what):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, numbers.Real) and float(value).is_integer():
            return int(value)
        raise ValueError(f"{what} must be an integer, got {value!r}")
    return int(value)


def validate_sample(raw) -> IsotonicSample:
    """Build an :class:`IsotonicSample` from ``(total, successes)`` pairs.

    Raises
    ------
    ValueError
        If fewer than two categories are given, a total is below one, a
        success count falls outside ``[0, total]`` or a value is not integral.
    """
    pairs = list(raw)
    if len(pairs) < 2:
        raise ValueError(f"need at least 2 categories, got {len(pairs)}")
    totals, successes = [], []
    for k, pair in enumerate(pairs, start=1):
        try:
            total, succ = pair
        except (TypeError, ValueError):
            raise ValueError(f"category {k}: expected a (total, successes) pair") from None
        total = _as_int(total, f"category {k} total")
        succ = _as_int(succ, f"category {k} successes")
        if total < 1:
            raise ValueError(f"category {k}: total must be >= 1, got {total}")
        if not 0 <= succ <= total:
            raise ValueError(
                f"category {k}: successes {succ} outside [0, {total}]")
        totals.append(total)
        successes.append(succ)
    return IsotonicSample(tuple(totals), tuple(successes))


@dataclass(frozen=True)
class DesignMatrices:
    """Fixed matrices of the saturated logistic model with ``I`` categories.

    ``X`` is the logistic design, ``G`` the (I-1)x(I-1) difference matrix
    (ones on the diagonal, minus ones on the superdiagonal), ``T`` its
    inverse (upper triangular ones), ``R = [0 | G]`` the constraint matrix
    and ``e_last`` the last standard basis vector of length I-1.
    """

    X: np.ndarray
    Xinv: np.ndarray
    G: np.ndarray
    T: np.ndarray
    R: np.ndarray
    e_last: np.ndarray


@lru_cache(maxsize=64)
def _design(I: int) -> DesignMatrices:
    k = I - 1
    X = np.zeros((I, I))
    X[:, 0] = 1.0
    X[:k, 1:] = np.eye(k)
    Xinv = np.zeros((I, I))
    Xinv[0, k] = 1.0
    Xinv[1:, :k] = np.eye(k)
    Xinv[1:, k] = -1.0
    G = np.eye(k) - np.eye(k, k=1)
    T = np.triu(np.ones((k, k)))
    R = np.hstack([np.zeros((k, 1)), G])
    e_last = np.zeros(k)
    e_last[-1] = 1.0
    for a in (X, Xinv, G, T, R, e_last):
        a.setflags(write=False)
    return DesignMatrices(X, Xinv, G, T, R, e_last)


def design_matrices(I: int) -> DesignMatrices:
    if I < 2:
        raise ValueError("I must be at least 2")
    return _design(int(I))


def nu_from_totals(totals) -> np.ndarray:
    """Plug-in category weights ``n_i / n``."""
    totals = np.asarray(totals, dtype=float)
    if np.any(totals <= 0):
        raise ValueError("category totals must be positive")
    return totals / totals.sum()


def _check_nu(nu) -> np.ndarray:
    nu = np.asarray(nu, dtype=float)
    if nu.ndim != 1 or nu.size < 2:
        raise ValueError("nu must be a vector of length >= 2")
    if np.any(nu <= 0) or abs(nu.sum() - 1.0) > 1e-9:
        raise ValueError("nu must be positive and sum to 1")
    return nu


def sigma_nu(nu_star) -> np.ndarray:
    """``diag(nu*) - nu* nu*^T`` for the leading ``I-1`` weights."""
    nu_star = np.asarray(nu_star, dtype=float)
    return np.diag(nu_star) - np.outer(nu_star, nu_star)


def _interior(pi, what="pi"):
    pi = np.asarray(pi, dtype=float)
    if np.any(~np.isfinite(pi)) or np.any(pi <= 0.0) or np.any(pi >= 1.0):
        raise ValueError(f"{what} must lie strictly inside (0, 1)")
    return pi


def theta_from_pi(pi) -> np.ndarray:
    """Log-linear parameters ``X^{-1} logit(pi)``.

    Raises ``ValueError`` when a probability is 0 or 1 (infinite logit).
    """
    pi = _interior(pi)
    if pi.ndim != 1 or pi.size < 2:
        raise ValueError("pi must be a vector of length >= 2")
    return design_matrices(pi.size).Xinv @ logit(pi)


def pi_from_theta(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.size < 2:
        raise ValueError("theta must be a vector of length >= 2")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    return expit(design_matrices(theta.size).X @ theta)


def cell_probs(theta, nu) -> np.ndarray:
    """The 2I cell probabilities ``(nu_1 pi_1, nu_1 (1-pi_1), ...)``."""
    nu = _check_nu(nu)
    pi = pi_from_theta(theta)
    if pi.size != nu.size:
        raise ValueError("theta and nu differ in length")
    return _cells(pi, nu)


def _cells(pi, nu):
    # works on stacked (..., I) inputs
    pi = np.asarray(pi, dtype=float)
    out = np.empty(pi.shape[:-1] + (2 * pi.shape[-1],))
    out[..., 0::2] = nu * pi
    out[..., 1::2] = nu * (1.0 - pi)
    return out


def fisher_info(pi, nu) -> np.ndarray:
    """Per-observation Fisher information ``X^T diag{nu_i pi_i (1-pi_i)} X``."""
    pi = _interior(pi)
    nu = _check_nu(nu)
    X = design_matrices(pi.size).X
    return X.T @ (X * (nu * pi * (1.0 - pi))[:, None])


def fisher_info_null(pi0: float, nu) -> np.ndarray:
    """Fisher information at a homogeneous ``pi``: the scaled arrowhead matrix."""
    pi0 = float(pi0)
    if not 0.0 < pi0 < 1.0:
        raise ValueError("pi0 must lie strictly inside (0, 1)")
    nu = _check_nu(nu)
    nu_star = nu[:-1]
    A = np.diag(np.concatenate([[1.0], nu_star]))
    A[0, 1:] = nu_star
    A[1:, 0] = nu_star
    return pi0 * (1.0 - pi0) * A
