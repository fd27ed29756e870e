"""Input parsing and the test report shared by the CLI and library users."""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from pathlib import Path

from . import __version__
from .chibar import chi_bar, chibar_pvalue, cone_covariance, correlations, partial_correlations
from .estimate import estimate_all
from .model import IsotonicSample, validate_sample
from .stats import compute_statistics

__all__ = [
    "TABLE_LAMBDAS",
    "read_sample",
    "parse_lambda",
    "parse_lambdas",
    "build_report",
    "dumps_report",
    "format_report_text",
]

TABLE_LAMBDAS = (-1.5, -1.0, -0.5, 0.0, 2.0 / 3.0, 1.0)


def read_sample(path) -> IsotonicSample:
    """Read a CSV (``total,successes`` header) or JSON (``{"categories": [...]}``) file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
            cats = doc["categories"]
            raw = [(c["total"], c["successes"]) for c in cats]
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"{path}: not a valid categories document ({exc})") from None
        return validate_sample(raw)
    reader = csv.DictReader(text.splitlines())
    fields = [f.strip().lower() for f in (reader.fieldnames or [])]
    if fields != ["total", "successes"]:
        raise ValueError(f"{path}: expected header 'total,successes', got {reader.fieldnames}")
    raw = []
    for lineno, row in enumerate(reader, start=2):
        vals = [v.strip() for v in row.values()]
        try:
            raw.append(tuple(int(v) for v in vals))
        except (TypeError, ValueError):
            raise ValueError(f"{path}:{lineno}: non-integer entry {vals}") from None
    return validate_sample(raw)


def parse_lambda(text: str) -> float:
    """Parse ``0.5``, ``-3/2`` or ``2/3``; ``0.6667`` is read as exactly 2/3."""
    text = text.strip()
    try:
        value = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"bad lambda value {text!r}") from None
    if abs(value - 2.0 / 3.0) < 5e-5:
        value = 2.0 / 3.0
    return value


def parse_lambdas(text: str) -> list[float]:
    out = [parse_lambda(t) for t in text.split(",") if t.strip()]
    if not out:
        raise ValueError("empty lambda list")
    return out


def _vec(x):
    return None if x is None else [float(v) for v in x]


def _num(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else float(x)


def build_report(s: IsotonicSample, lambdas=TABLE_LAMBDAS, weights_method="closed",
                 mc_reps=1_000_000, seed=0, haldane=False, decreasing=False) -> dict:
    """Estimates, chi-bar weights, statistics and p-values as a JSON-ready dict.

    With ``decreasing=True`` the category order is flipped first, so the
    alternative becomes ``pi_1 >= ... >= pi_I``; the echoed input keeps the
    order given by the caller.
    """
    data = s.reversed() if decreasing else s
    est = estimate_all(data)
    metric = cone_covariance(data.nu)
    dist = chi_bar(metric, weights_method, reps=mc_reps, seed=seed)
    rows = []
    for st in compute_statistics(data, lambdas, haldane=haldane, est=est):
        p = None
        if st.defined:
            p = float(chibar_pvalue(max(st.value, 0.0), dist))
        rows.append({
            "kind": st.kind,
            "lambda": st.lam,
            "value": _num(st.value),
            "p_value": p,
            "defined": st.defined,
            "reason": st.reason,
        })
    return {
        "tool": "isobinom",
        "version": __version__,
        "input": {
            "totals": list(s.totals),
            "successes": list(s.successes),
            "direction": "decreasing" if decreasing else "increasing",
        },
        "estimates": {
            "pi0_hat": float(est.pi0_hat),
            "pi_bar": _vec(est.pi_bar),
            "pi_tilde": _vec(est.pi_tilde),
            "theta_hat": _vec(est.theta_hat),
            "theta_bar": _vec(est.theta_bar),
            "theta_tilde": _vec(est.theta_tilde),
        },
        "chi_bar": {
            "method": dist.method,
            "weights": _vec(dist.weights),
            "mc_reps": dist.reps,
            "seed": dist.seed,
            "correlations": correlations(metric.V).tolist(),
            "partial_correlations": partial_correlations(metric.V).tolist(),
        },
        "haldane": bool(haldane),
        "statistics": rows,
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def _f4(x):
    return "undefined" if x is None else f"{x:.4f}"


def _fmt_vec(v):
    return "undefined" if v is None else "(" + ", ".join(f"{x:.4f}" for x in v) + ")"


def format_report_text(report: dict) -> str:
    est = report["estimates"]
    cb = report["chi_bar"]
    lines = [
        f"categories       {len(report['input']['totals'])} ({report['input']['direction']})",
        f"pi0_hat          {est['pi0_hat']:.4f}",
        f"pi_bar           {_fmt_vec(est['pi_bar'])}",
        f"pi_tilde         {_fmt_vec(est['pi_tilde'])}",
        f"theta_hat        {_fmt_vec(est['theta_hat'])}",
        f"theta_bar        {_fmt_vec(est['theta_bar'])}",
        f"theta_tilde      {_fmt_vec(est['theta_tilde'])}",
        f"weights ({cb['method']}) {_fmt_vec(cb['weights'])}",
        "",
        f"{'statistic':<12}{'lambda':>9}{'value':>12}{'p-value':>10}  note",
    ]
    for row in report["statistics"]:
        lam = "" if row["lambda"] is None else f"{row['lambda']:.4g}"
        note = row["reason"] or ""
        lines.append(f"{row['kind']:<12}{lam:>9}{_f4(row['value']):>12}"
                     f"{_f4(row['p_value']):>10}  {note}".rstrip())
    return "\n".join(lines) + "\n"

