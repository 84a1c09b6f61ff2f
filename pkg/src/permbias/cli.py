"""``permbias`` command line.

Exit codes: 0 success, 2 invalid input, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import secrets
import sys
from pathlib import Path

from . import __version__
from .analysis import analyze
from .calibration import elo_to_preferences, fit_huber, fit_ols
from .dataio import (
    BUNDLED,
    SEASON_FIELDS,
    _csv_cell,
    bundled_path,
    parse_elo,
    parse_seasons,
    sha256_file,
    write_report,
)
from .errors import MalformedRow
from .lrtest import TestConfig, TestResult, decide, exact_pvalue, mc_pvalue
from .model import PreferenceVector, extreme_permutations, full_log_likelihood, log_likelihood
from .sampler import sample_batch

EXIT_INPUT = 2
EXIT_IO = 3


class CliError(ValueError):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated list of numbers") from None


def _dataset_path(text: str) -> Path:
    """A real path, or the name of a bundled dataset such as ``premier_league.csv``."""
    p = Path(text)
    if p.exists():
        return p
    key = p.name[:-4] if p.name.endswith(".csv") else p.name
    if key in BUNDLED:
        return bundled_path(key)
    return p


def _select_season(path: Path, league: str | None, season: str | None):
    records = parse_seasons(path)
    if league:
        records = [r for r in records if r.league == league]
    if season:
        records = [r for r in records if r.season == season]
    if len(records) != 1:
        raise CliError(f"{path}: selected {len(records)} seasons; narrow the choice with --league/--season")
    return records[0]


def _problem(args, need_observed: bool):
    """Resolve ``(PreferenceVector, observed order or None)`` from the flags."""
    if (args.weights is None) == (args.input is None):
        raise CliError("give exactly one of --weights or --input")
    observed = None
    if args.weights is not None:
        q = PreferenceVector(args.weights)
    else:
        rec = _select_season(_dataset_path(args.input), args.league, args.season)
        q, observed = rec.preferences, rec.observed
    if getattr(args, "observed", None):
        observed = [q.index_of(lab.strip()) for lab in args.observed.split(",")]
    if need_observed and observed is None:
        raise CliError("--observed is required with --weights")
    return q, observed


def _result_dict(res: TestResult, alpha: float) -> dict:
    return {
        "method": res.method,
        "observed_loglik": res.observed_ell,
        "p_value": res.p_value,
        "replications_used": res.replications_used,
        "tie_count": res.tie_count,
        "std_error": res.std_error,
        "ci95": list(res.ci95),
        "surprisal": None if math.isinf(res.surprisal) else res.surprisal,
        "surprisal_censored": res.censored,
        "surprisal_lower_bound": res.surprisal_lower_bound if res.censored else None,
        "decision": decide(res, alpha).value,
        "alpha": alpha,
    }


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def cmd_sample(args) -> int:
    q, _ = _problem(args, need_observed=False)
    perms, _ = sample_batch(q, args.count, _seed(args), threads=args.threads)
    out = sys.stdout
    for row in perms:
        out.write(",".join(q.labels[i] for i in row) + "\n")
    return 0


def cmd_loglik(args) -> int:
    q, observed = _problem(args, need_observed=True)
    ell = log_likelihood(q, observed)
    full = full_log_likelihood(q, observed)
    lo, hi = extreme_permutations(q)
    print(
        json.dumps(
            {
                "reduced_loglik": ell,
                "full_loglik": full,
                "likelihood": math.exp(full),
                "min_loglik": log_likelihood(q, lo),
                "max_loglik": log_likelihood(q, hi),
            },
            indent=2,
        )
    )
    return 0


def cmd_pvalue(args) -> int:
    q, observed = _problem(args, need_observed=True)
    cfg = TestConfig(replications=args.replications, master_seed=_seed(args), alpha=args.alpha)
    res = mc_pvalue(q, observed, cfg, threads=args.threads)
    print(json.dumps(_result_dict(res, args.alpha), indent=2))
    return 0


def cmd_exact(args) -> int:
    q, observed = _problem(args, need_observed=True)
    res = exact_pvalue(q, observed, exact_max_n=args.exact_max_n)
    print(json.dumps(_result_dict(res, args.alpha), indent=2))
    return 0


def cmd_calibrate(args) -> int:
    data = parse_elo(args.input)
    ols = fit_ols(data)
    fit = fit_huber(data) if args.method == "huber" else ols
    if args.method == "huber":
        for f in (ols, fit):
            print(
                f"# {f.method}: slope={f.slope!r} intercept={f.intercept!r} "
                f"r_squared={f.r_squared!r} iterations={f.iterations} converged={f.converged}"
            )
    else:
        print(f"# ols: slope={ols.slope!r} intercept={ols.intercept!r} r_squared={ols.r_squared!r}")
    prefs = elo_to_preferences(fit, [(d.team, d.elo) for d in data])
    lines = ["team,preference"] + [f"{t},{float(w)!r}" for t, w in zip(prefs.labels, prefs.weights)]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_analyze(args) -> int:
    path = _dataset_path(args.input)
    records = parse_seasons(path)
    if not records:
        raise MalformedRow(f"{path}: no seasons found")
    report = analyze(
        records,
        replications=args.replications,
        seed=_seed(args),
        alpha=args.alpha,
        threads=args.threads,
        dataset_sha256=sha256_file(path),
    )
    if args.output:
        write_report(report, args.format, args.output)
    widths = [max(len(f), 22) for f in SEASON_FIELDS]
    widths[0] = max(len(s.league) for s in report.seasons)
    print("  ".join(f.ljust(w) for f, w in zip(SEASON_FIELDS, widths)).rstrip())
    for s in report.seasons:
        cells = [_csv_cell(getattr(s, f)) for f in SEASON_FIELDS]
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip())
    rejected = sum(s.reject_at_alpha for s in report.seasons)
    print(f"# {rejected}/{len(report.seasons)} seasons reject at alpha={args.alpha}; seed={report.seed}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permbias", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def q_source(p, observed=True):
        p.add_argument("--weights", type=_float_list, help="inline preference weights, e.g. 3,1,2")
        p.add_argument("--input", help="season CSV (or bundled dataset name)")
        p.add_argument("--league", help="league to select from --input")
        p.add_argument("--season", help="season to select from --input")
        if observed:
            p.add_argument("--observed", help="observed ranking as labels, rank 1 first")

    def mc_flags(p):
        p.add_argument("--replications", type=_positive_int, default=1_000_000)
        p.add_argument("--seed", type=int, default=None, help="master seed (default: fresh entropy, echoed)")
        p.add_argument("--threads", type=_positive_int, default=None, help="worker threads (default: all cores)")

    p = sub.add_parser("sample", help="draw random rankings")
    q_source(p, observed=False)
    p.add_argument("--count", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=_positive_int, default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("loglik", help="log-likelihood of a ranking")
    q_source(p)
    p.set_defaults(func=cmd_loglik)

    p = sub.add_parser("pvalue", help="Monte Carlo p-value")
    q_source(p)
    mc_flags(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_pvalue)

    p = sub.add_parser("exact", help="exact p-value by enumeration")
    q_source(p)
    p.add_argument("--exact-max-n", type=_positive_int, default=10)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("calibrate", help="fit Elo -> log win probability and emit preferences")
    p.add_argument("--input", required=True, help="Elo CSV: team,elo,win_probability")
    p.add_argument("--method", choices=("ols", "huber"), default="huber")
    p.add_argument("--output", help="write team,preference CSV here instead of stdout")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("analyze", help="test every season of a dataset")
    p.add_argument("--input", required=True, help="season CSV or bundled name (premier_league.csv, la_liga.csv)")
    mc_flags(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="report file")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    alpha = getattr(args, "alpha", 0.5)
    if not 0 < alpha < 1:
        parser.error(f"--alpha must be in (0, 1), got {alpha}")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"permbias: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"permbias: error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
