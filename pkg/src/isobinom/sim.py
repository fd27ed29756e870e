"""Monte Carlo size and power of the order-restricted tests.

Twenty-four built-in scenarios with four ordered groups: letters A-F fix
the group sizes and the base success probability, the digit picks the null
(0) or one of three increasing alternatives.

Replications are drawn in blocks of ``SIM_BLOCK``.  Block ``b`` uses a
PCG64 stream seeded with ``SeedSequence(seed, spawn_key=(1, b))``, so a
result depends only on its inputs, never on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logit

from .chibar import ChiBarDistribution, chi_bar, chibar_pvalue, cone_covariance
from .stats import batch_statistics, stat_key

__all__ = [
    "Scenario",
    "SimResult",
    "scenario_catalog",
    "get_scenario",
    "run_scenario",
    "dale_check",
    "dale_band",
    "efficiency",
    "efficiencies",
    "dale_verdicts",
    "annotate",
    "default_lambda_grid",
    "statistic_keys",
    "SIM_BLOCK",
    "CSV_FIELDS",
]

SIM_BLOCK = 5000

CSV_FIELDS = ("scenario", "statistic", "lambda", "estimate", "kind", "reps", "undefined",
              "rho_T0", "rho_S1", "dale_0.35", "dale_0.7")

DALE_EPSILONS = (0.35, 0.7)


@dataclass(frozen=True)
class Scenario:
    id: str
    totals: tuple[int, ...]
    pis: tuple[float, ...]

    def __post_init__(self):
        if len(self.totals) != len(self.pis):
            raise ValueError("totals and pis differ in length")
        if len(self.totals) < 2:
            raise ValueError("a scenario needs at least 2 groups")
        if any(t < 1 for t in self.totals):
            raise ValueError("group sizes must be positive")
        if any(not 0.0 <= p <= 1.0 for p in self.pis):
            raise ValueError("probabilities must lie in [0, 1]")

    @property
    def is_null(self) -> bool:
        return all(p == self.pis[0] for p in self.pis)

    @property
    def letter(self) -> str:
        return self.id.split("-")[0]


_SIZES = {
    "A": (40, 30, 20, 10), "B": (60, 45, 30, 15), "C": (100, 75, 50, 25),
    "D": (40, 30, 20, 10), "E": (60, 45, 30, 15), "F": (100, 75, 50, 25),
}
_PATTERNS = {
    0.05: [(0.05,) * 4, (0.05, 0.1, 0.1, 0.1), (0.05, 0.1, 0.125, 0.125),
           (0.05, 0.1, 0.125, 0.135)],
    0.35: [(0.35,) * 4, (0.35, 0.45, 0.45, 0.45), (0.35, 0.45, 0.475, 0.475),
           (0.35, 0.45, 0.475, 0.485)],
}


def scenario_catalog() -> list[Scenario]:
    out = []
    for letter, totals in _SIZES.items():
        base = 0.05 if letter in "ABC" else 0.35
        for k, pis in enumerate(_PATTERNS[base]):
            out.append(Scenario(f"{letter}-{k}", totals, pis))
    return out


def get_scenario(sid: str) -> Scenario:
    for sc in scenario_catalog():
        if sc.id == sid.upper():
            return sc
    raise KeyError(f"unknown scenario {sid!r}")


def default_lambda_grid() -> list[float]:
    """Step-0.3 grid over [-1.5, 3] merged with -1, -0.5, 2/3 and 1."""
    grid = {round(-1.5 + 0.3 * k, 10) for k in range(16)}
    grid |= {-1.0, -0.5, 0.0, 1.0}
    grid.add(2.0 / 3.0)
    return sorted(grid)


def statistic_keys(lambdas) -> list[str]:
    keys = [stat_key("T", lam) for lam in lambdas]
    keys += [stat_key("S", lam) for lam in lambdas]
    return keys + ["W", "H", "D"]


@dataclass
class SimResult:
    """Rejection counts per statistic for one scenario."""

    scenario: str
    totals: tuple
    pis: tuple
    is_null: bool
    reps: int
    alpha: float
    seed: int
    lambdas: list
    weights_method: str
    weights: list
    haldane: bool
    rejections: dict = field(default_factory=dict)
    defined: dict = field(default_factory=dict)
    undefined_policy: str = "excluded from the denominator"
    dale: Optional[dict] = None
    efficiency_T0: Optional[dict] = None
    efficiency_S1: Optional[dict] = None

    def undefined(self, key: str) -> int:
        return self.reps - self.defined[key]

    def proportion(self, key: str) -> Optional[float]:
        """Rejection proportion over defined replications, ``None`` if there are none."""
        d = self.defined[key]
        return self.rejections[key] / d if d else None

    @property
    def keys(self) -> list[str]:
        return statistic_keys(self.lambdas)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SimResult":
        d = json.loads(text)
        d["totals"] = tuple(d["totals"])
        d["pis"] = tuple(d["pis"])
        return cls(**d)

    def rows(self):
        kind = "size" if self.is_null else "power"
        for lam in self.lambdas:
            for stat in ("T", "S"):
                yield self._row(stat, lam, stat_key(stat, lam), kind)
        for stat in ("W", "H", "D"):
            yield self._row(stat, None, stat, kind)

    def _row(self, stat, lam, key, kind):
        p = self.proportion(key)
        dale = (self.dale or {}).get(key, {})
        return {
            "scenario": self.scenario,
            "statistic": stat,
            "lambda": "" if lam is None else repr(float(lam)),
            "estimate": "n/a" if p is None else repr(p),
            "kind": kind,
            "reps": self.reps,
            "undefined": self.undefined(key),
            "rho_T0": _cell((self.efficiency_T0 or {}).get(key)),
            "rho_S1": _cell((self.efficiency_S1 or {}).get(key)),
            "dale_0.35": _cell(dale.get("0.35")),
            "dale_0.7": _cell(dale.get("0.7")),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow(row)
        return buf.getvalue()


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "yes" if x else "no"
    return repr(float(x))


def _sim_block(args):
    totals, pis, lambdas, seed, block, size, weights, alpha, haldane = args
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(seed, spawn_key=(1, block))))
    succ = rng.binomial(np.asarray(totals), np.asarray(pis), size=(size, len(totals)))
    stats = batch_statistics(totals, succ, lambdas, haldane=haldane)
    dist = ChiBarDistribution(np.asarray(weights), "given")
    rej, ok = {}, {}
    for key, v in stats.items():
        good = ~np.isnan(v)
        p = chibar_pvalue(np.where(good, np.maximum(v, 0.0), np.nan), dist)
        ok[key] = int(good.sum())
        rej[key] = int(np.sum(good & (p <= alpha)))
    return rej, ok


def run_scenario(sc: Scenario, reps: int = 50_000, alpha: float = 0.05,
                 lambdas=None, seed: int = 0, weights_method: str = "auto",
                 mc_reps: int = 1_000_000, workers: int = 1,
                 haldane: bool = False) -> SimResult:
    """Simulate ``reps`` samples from ``sc`` and count rejections at level ``alpha``.

    The chi-bar weights are computed once from the scenario's group sizes.
    Replications where a statistic is undefined are counted separately and
    left out of that statistic's rejection proportion.
    """
    reps = int(reps)
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    lambdas = default_lambda_grid() if lambdas is None else [float(x) for x in lambdas]
    if not lambdas:
        raise ValueError("need at least one lambda")
    totals = np.asarray(sc.totals, dtype=float)
    dist = chi_bar(cone_covariance(totals / totals.sum()), weights_method,
                   reps=mc_reps, seed=seed)
    weights = dist.weights.tolist()
    nblocks = -(-reps // SIM_BLOCK)
    jobs = [(sc.totals, sc.pis, lambdas, int(seed), b,
             min(SIM_BLOCK, reps - b * SIM_BLOCK), weights, alpha, haldane)
            for b in range(nblocks)]
    if workers > 1 and nblocks > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_sim_block, jobs))
    else:
        parts = [_sim_block(j) for j in jobs]
    keys = statistic_keys(lambdas)
    rejections = {k: sum(p[0][k] for p in parts) for k in keys}
    defined = {k: sum(p[1][k] for p in parts) for k in keys}
    return SimResult(sc.id, tuple(sc.totals), tuple(sc.pis), sc.is_null, reps,
                     float(alpha), int(seed), lambdas, dist.method, weights,
                     bool(haldane), rejections, defined)


def dale_check(alpha_hat: float, alpha: float, epsilon: float) -> bool:
    """``|logit(1 - alpha_hat) - logit(1 - alpha)| <= epsilon``."""
    for a in (alpha_hat, alpha):
        if not 0.0 < a < 1.0:
            raise ValueError("sizes must lie strictly inside (0, 1)")
    return bool(abs(logit(1.0 - alpha_hat) - logit(1.0 - alpha)) <= epsilon)


def dale_band(alpha: float, epsilon: float) -> tuple[float, float]:
    """Range of simulated sizes accepted by :func:`dale_check`."""
    centre = logit(1.0 - alpha)
    lo = 1.0 - 1.0 / (1.0 + math.exp(-(centre + epsilon)))
    hi = 1.0 - 1.0 / (1.0 + math.exp(-(centre - epsilon)))
    return lo, hi


def efficiency(beta_T: float, alpha_T: float, beta_base: float, alpha_base: float) -> float:
    """Size-corrected power gain relative to a baseline statistic."""
    gap = beta_base - alpha_base
    if gap == 0:
        raise ZeroDivisionError("baseline power equals baseline size")
    return ((beta_T - alpha_T) - gap) / gap


def efficiencies(null: SimResult, alt: SimResult, baseline: str = "T(0)") -> dict:
    """``efficiency`` of every statistic in ``alt`` against ``baseline``.

    Sizes come from ``null``, the matching scenario ending in 0.  Entries are
    ``None`` when a proportion is unavailable or the baseline gap is zero.
    """
    if baseline not in alt.defined:
        raise KeyError(f"baseline {baseline} was not simulated")
    b_base, a_base = alt.proportion(baseline), null.proportion(baseline)
    out = {}
    for key in alt.keys:
        b, a = alt.proportion(key), null.proportion(key)
        if None in (b, a, b_base, a_base) or b_base == a_base:
            out[key] = None
        else:
            out[key] = efficiency(b, a, b_base, a_base)
    return out


def dale_verdicts(result: SimResult, epsilons=DALE_EPSILONS) -> dict:
    """Dale check of every simulated size; ``None`` where it cannot be applied."""
    out = {}
    for key in result.keys:
        a = result.proportion(key)
        out[key] = {
            str(eps): (dale_check(a, result.alpha, eps) if a is not None and 0 < a < 1 else None)
            for eps in epsilons
        }
    return out


def annotate(null: SimResult, alts=()) -> None:
    """Attach Dale verdicts to ``null`` and both efficiency tables to each of ``alts``."""
    null.dale = dale_verdicts(null)
    for alt in alts:
        if "T(0)" in alt.defined:
            alt.efficiency_T0 = efficiencies(null, alt, "T(0)")
        if "S(1)" in alt.defined:
            alt.efficiency_S1 = efficiencies(null, alt, "S(1)")
