"""Command-line entry point: ``trialpool <subcommand> ...``.

Exit status is 0 on success, 1 for data/analysis errors (a JSON error
object is printed on stderr) and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from typing import Sequence

import numpy as np

from . import __version__
from ._config import DEFAULT_REPS, DEFAULT_STEPS_PER_TRIAL, SEED_ENV, THREADS_ENV, default_seed
from .correlation import checkpoint_correlation_matrix
from .earlystop import (
    EarlyStopPolicy,
    enumerate_policy,
    enumerate_seed_stopping,
    optimize_policy,
    simulate_policy,
    simulate_seed_stopping,
)
from .errors import ParseError, TrialPoolError
from .expected import expected_max_curve
from .seeds import aggregated_std, best_worst_anova, kde, rank_seeds, seed_values
from .synthgen import generate_pool, load_config
from .trials import SeedAxis, best_value, build_seed_grid, dumps_jsonl, read_pool

log = logging.getLogger("trialpool")


class Output:
    """Number formatting shared by all writers."""

    def __init__(self, full_precision: bool = False):
        self.full_precision = full_precision

    def num(self, v):
        if v is None:
            return None
        if isinstance(v, (bool, np.bool_)):
            return bool(v)
        if isinstance(v, (int, np.integer)):
            return int(v)
        v = float(v)
        if not math.isfinite(v) or self.full_precision:
            return v
        return float(f"{v:.6g}")

    def cell(self, v) -> str:
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return ""
        if isinstance(v, (float, np.floating)):
            v = float(v)
            if self.full_precision or not math.isfinite(v):
                return repr(v)
            return f"{v:.6g}"
        return str(v)

    def csv_text(self, header: Sequence[str], rows) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([self.cell(v) for v in row])
        return buf.getvalue()

    def json_text(self, obj) -> str:
        return json.dumps(self._walk(obj), indent=2) + "\n"

    def _walk(self, obj):
        if isinstance(obj, dict):
            return {str(k): self._walk(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [self._walk(v) for v in obj]
        if isinstance(obj, (float, int, np.floating, np.integer)) and not isinstance(obj, bool):
            return self.num(obj)
        if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
            return obj.value
        return obj


def write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".trialpool-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fractions(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated fractions, got {text!r}") from None


def _budget_range(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B or a comma list, got {text!r}") from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args, out: Output) -> str:
    pool = read_pool(args.input)
    if args.normalized:
        return dumps_jsonl(pool)
    wi = sorted({t.wi_seed for t in pool})
    do = sorted({t.do_seed for t in pool})
    summary = {
        "task": pool.task_id,
        "metric": pool.metric_kind.value,
        "n_trials": len(pool),
        "n_wi_seeds": len(wi),
        "n_do_seeds": len(do),
        "fully_crossed": len(wi) * len(do) == len(pool),
        "common_fractions": list(pool.common_fractions),
        "final_min": pool.final_values.min(),
        "final_max": pool.final_values.max(),
        "final_mean": pool.final_values.mean(),
    }
    return out.json_text(summary)


def _scores(pool, args) -> list[float]:
    if args.score == "final":
        return list(pool.final_values)
    fracs = args.at if args.score == "best-at" else None
    if args.score == "best-at" and not fracs:
        raise ParseError("--score best-at requires --at")
    return [best_value(t, fracs) for t in pool]


def cmd_expected(args, out: Output) -> str:
    pool = read_pool(args.input)
    curve = expected_max_curve(_scores(pool, args), args.x_max)
    lower, upper = curve.band(args.band)
    rows = [(p.x, p.mean, p.std, p.min, p.max, lo, hi) for p, lo, hi in zip(curve.points, lower, upper)]
    if args.format == "json":
        keys = ("x", "mean", "std", "min", "max", "lower", "upper")
        return out.json_text({"band": args.band, "points": [dict(zip(keys, r)) for r in rows]})
    return out.csv_text(["x", "mean", "std", "min", "max", "lower", "upper"], rows)


def cmd_seeds(args, out: Output) -> str:
    grid = build_seed_grid(read_pool(args.input))
    wi = aggregated_std(grid, SeedAxis.WI)
    do = aggregated_std(grid, SeedAxis.DO)
    if args.format == "json":
        return out.json_text(
            {
                "agg_over_wi": wi.expected_std,
                "agg_over_do": do.expected_std,
                "total": wi.overall_std,
                "per_wi_seed": [{"seed": s, "std": v} for s, v in wi.per_seed],
                "per_do_seed": [{"seed": s, "std": v} for s, v in do.per_seed],
                "wi_ranking": [{"seed": s, "mean": m} for s, m in rank_seeds(grid, SeedAxis.WI)],
                "do_ranking": [{"seed": s, "mean": m} for s, m in rank_seeds(grid, SeedAxis.DO)],
            }
        )
    rows = [("agg_over_wi", wi.expected_std), ("agg_over_do", do.expected_std), ("total", wi.overall_std)]
    return out.csv_text(["aggregate", "std"], rows)


def cmd_anova(args, out: Output) -> str:
    grid = build_seed_grid(read_pool(args.input))
    axes = [SeedAxis.WI, SeedAxis.DO] if args.axis == "both" else [SeedAxis.parse(args.axis)]
    report = {}
    for axis in axes:
        ranked = rank_seeds(grid, axis)
        res = best_worst_anova(grid, axis)
        report[axis.value] = dict(res.to_dict(), best_seed=ranked[0][0], worst_seed=ranked[-1][0])
    return out.json_text(report)


def cmd_corr(args, out: Output) -> str:
    m = checkpoint_correlation_matrix(read_pool(args.input), args.method, running_best=args.running_best)
    header = [""] + [out.cell(f) for f in m.fractions]
    rows = [[f, *row] for f, row in zip(m.fractions, m.values)]
    return out.csv_text(header, rows)


def cmd_kde(args, out: Output) -> str:
    pool = read_pool(args.input)
    if args.values == "final" and args.seed_rank is None:
        values = list(pool.final_values)
    else:
        grid = build_seed_grid(pool)
        axis = SeedAxis.parse(args.axis)
        if args.values in ("wi-std", "do-std"):
            std_axis = SeedAxis.WI if args.values == "wi-std" else SeedAxis.DO
            values = [v for _, v in aggregated_std(grid, std_axis).per_seed]
        else:
            ranked = rank_seeds(grid, axis)
            seed = ranked[0][0] if args.seed_rank == "best" else ranked[-1][0]
            values = list(seed_values(grid, axis, seed))
    xs, dens = kde(values, args.bandwidth, args.points)
    return out.csv_text(["x", "density"], zip(xs, dens))


def cmd_es_simulate(args, out: Output) -> str:
    pool = read_pool(args.input)
    seed = default_seed() if args.seed is None else args.seed
    if args.by_seed:
        grid = build_seed_grid(pool)
        if args.exact:
            rep = enumerate_seed_stopping(grid, args.by_seed, args.t, args.f, args.p, s=args.s)
        else:
            rep = simulate_seed_stopping(
                grid, args.by_seed, args.t, args.f, args.p, args.reps, seed, args.s, args.threads
            )
    else:
        policy = EarlyStopPolicy(args.t, args.f, args.p, args.s)
        if args.exact:
            rep = enumerate_policy(pool, policy)
        else:
            rep = simulate_policy(pool, policy, args.reps, seed, args.threads)
    body = rep.to_dict()
    body["master_seed"] = None if args.exact else seed
    if args.by_seed:
        body["by_seed"] = args.by_seed
    return out.json_text(body)


def cmd_es_optimize(args, out: Output) -> str:
    pool = read_pool(args.input)
    seed = default_seed() if args.seed is None else args.seed
    budgets = args.budget_range if args.budget_range else [args.budget_trials]
    rows = []
    for x in budgets:
        res = optimize_policy(pool, x, args.f_grid, args.reps, seed, args.s, args.max_trials, args.threads)
        r = res.to_row()
        rows.append([r[k] for k in ("x", "t", "f", "p", "expected_perf", "baseline_perf", "rer")])
        log.info("budget %d: best %s", x, res.best_policy)
    return out.csv_text(["x", "t", "f", "p", "expected_perf", "baseline_perf", "rer"], rows)


def cmd_synth(args, out: Output) -> str:
    cfg = load_config(args.config)
    return dumps_jsonl(generate_pool(cfg))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", "-o", help="output file (default: stdout); written atomically")
    common.add_argument("--full-precision", action="store_true", help="print round-trippable floats")
    common.add_argument("-v", "--verbose", action="store_true")

    def with_input(p):
        p.add_argument("input", help="trial pool in JSON-lines format")
        return p

    def mc_options(p):
        p.add_argument("--reps", type=int, default=DEFAULT_REPS, help="Monte-Carlo repetitions (default %(default)s)")
        p.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV} or a fixed constant)")
        p.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
        p.add_argument("--s", type=float, default=DEFAULT_STEPS_PER_TRIAL, help="epochs per full trial")

    parser = argparse.ArgumentParser(prog="trialpool", description="Seed-variance analysis and early-stopping policy search over trial pools.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = with_input(sub.add_parser("validate", parents=[common], help="check a pool and print a JSON summary"))
    p.add_argument("--normalized", action="store_true", help="emit the validated pool as sorted JSON-lines instead")
    p.set_defaults(func=cmd_validate)

    p = with_input(
        sub.add_parser(
            "expected",
            parents=[common],
            help="expected best-of-x curve",
            description="CSV columns: x, mean, std, min, max, lower, upper. "
            "lower/upper follow --band (std: mean -/+ std; minmax: observed pool range).",
        )
    )
    p.add_argument("--x-max", type=int, required=True)
    p.add_argument("--band", choices=["std", "minmax"], default="std")
    p.add_argument(
        "--score",
        choices=["final", "best", "best-at"],
        default="final",
        help="trial score: final value, best over all checkpoints, or best over --at",
    )
    p.add_argument("--at", type=_fractions, help="comma-separated fractions for --score best-at")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_expected)

    p = with_input(
        sub.add_parser(
            "seeds",
            parents=[common],
            help="per-seed standard deviation report",
            description="CSV rows agg_over_wi, agg_over_do, total with column std (sample std, n-1).",
        )
    )
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_seeds)

    p = with_input(sub.add_parser("anova", parents=[common], help="ANOVA between best and worst seeds (JSON)"))
    p.add_argument("--axis", choices=["wi", "do", "both"], default="both")
    p.set_defaults(func=cmd_anova)

    p = with_input(
        sub.add_parser(
            "corr",
            parents=[common],
            help="checkpoint correlation matrix",
            description="CSV with a header row and first column of checkpoint fractions; "
            "undefined correlations are empty cells.",
        )
    )
    p.add_argument("--method", choices=["spearman", "pearson"], default="spearman")
    p.add_argument("--running-best", action="store_true", help="correlate best-so-far values")
    p.set_defaults(func=cmd_corr)

    p = with_input(sub.add_parser("kde", parents=[common], help="Gaussian KDE, CSV columns x, density"))
    p.add_argument("--values", choices=["final", "wi-std", "do-std"], default="final")
    p.add_argument("--axis", choices=["wi", "do"], default="wi")
    p.add_argument("--seed-rank", choices=["best", "worst"], help="restrict to the best/worst seed on --axis")
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--points", type=int, default=512)
    p.set_defaults(func=cmd_kde)

    es = sub.add_parser("earlystop", help="early-stopping policies").add_subparsers(dest="es_command", required=True)
    p = with_input(es.add_parser("simulate", parents=[common], help="score one (t, f, p) policy (JSON)"))
    p.add_argument("--t", type=int, required=True, help="trials (or seed groups) started")
    p.add_argument("--f", type=float, required=True, help="stopping fraction")
    p.add_argument("--p", type=int, required=True, help="trials (or seed groups) continued")
    p.add_argument("--exact", action="store_true", help="enumerate all draws instead of sampling")
    p.add_argument("--by-seed", choices=["wi", "do"], help="experimental: stop whole seed groups")
    mc_options(p)
    p.set_defaults(func=cmd_es_simulate)

    p = with_input(
        es.add_parser(
            "optimize",
            parents=[common],
            help="best policy per budget",
            description="CSV columns: x, t, f, p, expected_perf, baseline_perf, rer.",
        )
    )
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--budget-trials", type=int)
    g.add_argument("--budget-range", type=_budget_range, help="A:B inclusive, or a comma list")
    p.add_argument("--f-grid", type=_fractions, help="stopping fractions (default: common checkpoints)")
    p.add_argument("--max-trials", type=int, help="cap on trials started")
    mc_options(p)
    p.set_defaults(func=cmd_es_optimize)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic pool as JSON-lines")
    p.add_argument("--config", required=True, help="flat JSON or YAML file with SynthConfig fields")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out = Output(args.full_precision)
    try:
        text = args.func(args, out)
        write_output(text, args.out)
    except TrialPoolError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(json.dumps({"error": "E_INVALID_ARGUMENT", "message": str(exc)}) + "\n")
        return 1
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "E_IO", "message": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
