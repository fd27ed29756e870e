"""Command line interface: ``isobinom test | weights | simulate``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .chibar import chi_bar, cone_covariance, correlations, partial_correlations
from .data import BUNDLED, bundled_path
from .report import (TABLE_LAMBDAS, build_report, dumps_report, format_report_text,
                     parse_lambdas, read_sample)
from .sim import (Scenario, annotate, dale_band, default_lambda_grid, get_scenario,
                  run_scenario, scenario_catalog)


class CLIError(Exception):
    pass


def _resolve_data(name: str):
    path = Path(name)
    if path.exists():
        return read_sample(path)
    if path.name in BUNDLED:
        return read_sample(bundled_path(path.name))
    raise CLIError(f"data file not found: {name}")


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _lambdas(text: str):
    try:
        return parse_lambdas(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _floats(text: str):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _ints(text: str):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------

def cmd_test(args) -> int:
    sample = _resolve_data(args.data)
    report = build_report(sample, args.lambdas, args.weights, args.mc_reps, args.seed,
                          args.haldane, args.decreasing)
    text = dumps_report(report) + "\n" if args.format == "json" else format_report_text(report)
    _emit(text, args.output)
    undefined = [r for r in report["statistics"] if not r["defined"]]
    for r in undefined:
        lam = "" if r["lambda"] is None else f"({r['lambda']:g})"
        print(f"warning: {r['kind']}{lam} undefined: {r['reason']}", file=sys.stderr)
    return 0


def cmd_weights(args) -> int:
    if args.data:
        nu = _resolve_data(args.data).nu
    else:
        nu = np.asarray(args.nu, dtype=float)
        if nu.size < 2 or np.any(nu <= 0) or abs(nu.sum() - 1.0) > 1e-9:
            raise CLIError("--nu must list at least two positive weights summing to 1")
    metric = cone_covariance(nu)
    dist = chi_bar(metric, args.method, reps=args.mc_reps, seed=args.seed)
    doc = {
        "nu": nu.tolist(),
        "method": dist.method,
        "mc_reps": dist.reps,
        "seed": dist.seed,
        "weights": dist.weights.tolist(),
        "correlations": correlations(metric.V).tolist(),
        "partial_correlations": partial_correlations(metric.V).tolist(),
    }
    if args.format == "json":
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = [f"method  {dist.method}"]
        lines += [f"w_{i}     {w:.5f}" for i, w in enumerate(dist.weights)]
        k = metric.dim
        for i in range(k):
            for j in range(i + 1, k):
                lines.append(f"rho_{i + 1}{j + 1}  {doc['correlations'][i][j]: .5f}"
                             f"   partial {doc['partial_correlations'][i][j]: .5f}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return 0


def _null_partner(sc: Scenario) -> Scenario:
    if sc.id[:1] in "ABCDEF" and sc.id[1:2] == "-":
        return get_scenario(sc.letter + "-0")
    return Scenario(sc.id + "-null", sc.totals, (sc.pis[0],) * len(sc.pis))


def cmd_simulate(args) -> int:
    if args.totals or args.pis:
        if not (args.totals and args.pis):
            raise CLIError("a custom scenario needs both --totals and --pis")
        try:
            scenarios = [Scenario(args.name, tuple(args.totals), tuple(args.pis))]
        except ValueError as exc:
            raise CLIError(str(exc)) from None
    elif args.all:
        scenarios = scenario_catalog()
    elif args.scenario:
        try:
            scenarios = [get_scenario(s) for s in args.scenario]
        except KeyError as exc:
            raise CLIError(exc.args[0]) from None
    else:
        raise CLIError("give --scenario IDS, --all, or --totals/--pis")
    lambdas = args.lambdas or default_lambda_grid()
    kw = dict(reps=args.reps, alpha=args.alpha, lambdas=lambdas, seed=args.seed,
              weights_method=args.weights, mc_reps=args.mc_reps, workers=args.workers,
              haldane=args.haldane)
    results = {}

    def run(sc):
        if sc.id not in results:
            results[sc.id] = run_scenario(sc, **kw)
        return results[sc.id]

    requested = [run(sc) for sc in scenarios]
    for sc in scenarios:
        if not sc.is_null:
            run(_null_partner(sc))
    for sc in scenarios:
        if sc.is_null:
            annotate(results[sc.id])
        else:
            null_sc = _null_partner(sc)
            annotate(results[null_sc.id], [results[sc.id]])

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for res in requested:
        if args.format in ("csv", "both"):
            (out_dir / f"{res.scenario}.csv").write_text(res.to_csv())
        if args.format in ("json", "both"):
            (out_dir / f"{res.scenario}.json").write_text(res.to_json() + "\n")
        _print_summary(res)
    return 0


def _print_summary(res):
    def pct(key):
        p = res.proportion(key)
        return "n/a" if p is None else f"{p:.4f}"

    if res.is_null:
        print(f"{res.scenario}: simulated sizes (alpha={res.alpha}, reps={res.reps})")
        bands = {eps: dale_band(res.alpha, eps) for eps in (0.35, 0.7)}
        print("  Dale bands: " + ", ".join(
            f"eps={eps}: [{lo:.4f}, {hi:.4f}]" for eps, (lo, hi) in bands.items()))
        for key in res.keys:
            v = (res.dale or {}).get(key, {})
            verdict = "close" if v.get("0.35") else "fairly close" if v.get("0.7") else "outside"
            if v.get("0.35") is None:
                verdict = "n/a"
            print(f"  {key:<14}{pct(key):>8}  {verdict:<13} undefined={res.undefined(key)}")
    else:
        print(f"{res.scenario}: simulated powers (alpha={res.alpha}, reps={res.reps})")
        for key in res.keys:
            r0 = (res.efficiency_T0 or {}).get(key)
            r1 = (res.efficiency_S1 or {}).get(key)
            f = lambda x: "n/a" if x is None else f"{x:+.4f}"  # noqa: E731
            print(f"  {key:<14}{pct(key):>8}  rho_T0={f(r0):>8}  rho_S1={f(r1):>8}"
                  f"  undefined={res.undefined(key)}")


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isobinom",
        description="Order-restricted tests of equal binomial proportions "
                    "against an increasing trend.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test one dataset")
    p.add_argument("data", help="CSV/JSON file, or the bundled 'malformation.csv'")
    p.add_argument("--lambdas", type=_lambdas, default=list(TABLE_LAMBDAS),
                   help="comma separated lambda values (fractions allowed)")
    p.add_argument("--weights", choices=("closed", "mc", "auto"), default="auto")
    p.add_argument("--mc-reps", type=int, default=1_000_000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--haldane", action="store_true",
                   help="add 0.5 to counts for the unrestricted fit inside D")
    p.add_argument("--decreasing", action="store_true",
                   help="test against a decreasing trend instead")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("weights", help="chi-bar-squared mixing weights")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--nu", type=_floats, help="comma separated category weights")
    src.add_argument("--data", help="CSV/JSON file to take the weights n_i/n from")
    p.add_argument("--method", choices=("closed", "mc", "auto"), default="auto")
    p.add_argument("--mc-reps", type=int, default=1_000_000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("simulate", help="simulated size and power")
    p.add_argument("--scenario", nargs="+", metavar="ID", help="e.g. A-0 F-3")
    p.add_argument("--all", action="store_true", help="all 24 built-in scenarios")
    p.add_argument("--totals", type=_ints, help="custom scenario group sizes")
    p.add_argument("--pis", type=_floats, help="custom scenario success probabilities")
    p.add_argument("--name", default="custom", help="id of the custom scenario")
    p.add_argument("--reps", type=int, default=50_000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--lambdas", type=_lambdas)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--weights", choices=("closed", "mc", "auto"), default="auto")
    p.add_argument("--mc-reps", type=int, default=1_000_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--haldane", action="store_true")
    p.add_argument("--format", choices=("csv", "json", "both"), default="both")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, ValueError, OSError) as exc:
        print(f"isobinom {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
