"""Command-line interface.

Machine-readable output (JSON or CSV) goes to stdout and is byte-identical
across runs with the same config, seed, and version, regardless of worker
count.  Human-readable progress, the summary line, and the timestamp go to
stderr.  Exit codes: 0 all checks pass (vacuous cells count as passes),
1 at least one check failed or the run errored, 2 usage or configuration
error, 3 no failures but at least one inconclusive check.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from datetime import datetime, timezone

from . import __version__
from .canonical import ClaimReport, MgfReport, TailReport
from .config import (
    CanonicalScenario,
    ClaimScenario,
    ConfigError,
    CoverageScenario,
    EstimateScenario,
    PacBayesScenario,
    TailsScenario,
    load_config,
    scenario_to_config,
)
from .harness import (
    CoverageReport,
    EstimateReport,
    PacBayesMoments,
    TailsBundle,
    run_canonical,
    run_claim,
    run_coverage,
    run_estimate,
    run_pacbayes,
    run_tails,
)
from .serialize import csv_text, dumps
from .stats import EstimateWithError

__all__ = ["main", "entry", "build_parser"]

_EXIT_CODES = {"pass": 0, "fail": 1, "inconclusive": 3}

_COMMANDS = {
    "estimate": EstimateScenario,
    "coverage": CoverageScenario,
    "canonical": CanonicalScenario,
    "tails": TailsScenario,
    "claim": ClaimScenario,
    "pacbayes": PacBayesScenario,
}

_COMMAND_HELP = {
    "estimate": "variance breakdowns of both replace-one estimators at one sample",
    "coverage": "Monte Carlo coverage of the deviation bounds",
    "canonical": "exponential-moment certificate for a centered pair",
    "tails": "self-normalized tail comparisons for a centered pair",
    "claim": "sub-Gaussian moment envelope for a nonnegative variable",
    "pacbayes": "posterior-averaged coverage or moment certificates",
}


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gapbounds",
        description="Deviation bounds with data-dependent variance proxies: "
        "estimators, coverage sweeps, and moment certificates.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, help_text in _COMMAND_HELP.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the scenario JSON file")
        p.add_argument(
            "--seed", type=int, default=None, help="master seed (overrides the config)"
        )
        p.add_argument(
            "--workers",
            type=_positive,
            default=1,
            help="worker threads; the output does not depend on this",
        )
        p.add_argument(
            "--format", choices=("json", "csv"), default="json", help="stdout payload format"
        )
        p.add_argument(
            "--figures",
            metavar="DIR",
            default=None,
            help="also render figures into this directory",
        )
    return parser


# ---------------------------------------------------------------------------
# report conversion
# ---------------------------------------------------------------------------


def _est_dict(e: EstimateWithError | None):
    if e is None:
        return None
    return {"value": e.value, "stderr": e.stderr, "replicates": e.replicates}


def _breakdown_dict(vb) -> dict:
    return {
        "per_k": [_est_dict(e) for e in vb.per_k],
        "total": _est_dict(vb.total),
        "heavy_tail": vb.heavy_tail,
    }


def _breakdown_rows(name: str, vb) -> list:
    rows = [
        (name, str(k + 1), e.value, e.stderr, e.replicates) for k, e in enumerate(vb.per_k)
    ]
    rows.append((name, "total", vb.total.value, vb.total.stderr, vb.total.replicates))
    return rows


def _tail_dict(rep: TailReport | None):
    if rep is None:
        return None
    return {
        "which": rep.which,
        "n_samples": rep.n_samples,
        "eb": _est_dict(rep.eb),
        "y": rep.y,
        "rows": [
            {
                "t": r.t,
                "frequency": r.frequency,
                "bound": r.bound,
                "margin": r.margin,
                "verdict": r.verdict,
            }
            for r in rep.rows
        ],
        "verdict": rep.verdict,
    }


def _moment_dict(rep) -> dict:
    return {
        "which": rep.which,
        "n_trials": rep.n_trials,
        "ev": _est_dict(rep.ev),
        "rows": [
            {
                "parameter": r.parameter,
                "estimate": r.estimate,
                "stderr": r.stderr,
                "threshold": r.threshold,
                "margin": r.margin,
                "verdict": r.verdict,
            }
            for r in rep.rows
        ],
        "verdict": rep.verdict,
    }


_COVERAGE_HEADER = (
    "bound", "x", "y", "delta", "violations", "violations_robust",
    "nominal", "rate", "rate_robust", "stderr", "verdict",
)


def _payload(report):
    """(verdict, report dict, csv header, csv rows) for any report type."""
    if isinstance(report, EstimateReport):
        heavy = report.semi_empirical.heavy_tail or report.efron_stein.heavy_tail
        verdict = "inconclusive" if heavy else "pass"
        rep = {
            "sample": list(report.sample),
            "oracle": report.oracle,
            "semi_empirical": _breakdown_dict(report.semi_empirical),
            "efron_stein": _breakdown_dict(report.efron_stein),
            "verdict": verdict,
        }
        rows = _breakdown_rows("semi_empirical", report.semi_empirical)
        rows += _breakdown_rows("efron_stein", report.efron_stein)
        return verdict, rep, ("estimator", "k", "value", "stderr", "replicates"), rows
    if isinstance(report, CoverageReport):
        rep = {
            "trials": report.trials,
            "oracle": report.oracle,
            "mean": _est_dict(report.mean_estimate),
            "ev": _est_dict(report.ev_estimate),
            "cells": [
                {
                    "bound": c.bound_id,
                    "x": c.x,
                    "y": c.y,
                    "delta": c.delta,
                    "violations": c.violations,
                    "violations_robust": c.violations_robust,
                    "nominal": c.nominal,
                    "rate": c.rate,
                    "rate_robust": c.rate_robust,
                    "stderr": c.stderr,
                    "verdict": c.verdict,
                }
                for c in report.cells
            ],
            "verdict": report.verdict,
        }
        rows = [
            (
                c.bound_id, c.x, c.y, c.delta, c.violations, c.violations_robust,
                c.nominal, c.rate, c.rate_robust, c.stderr, c.verdict,
            )
            for c in report.cells
        ]
        return report.verdict, rep, _COVERAGE_HEADER, rows
    if isinstance(report, MgfReport):
        rep = {
            "n_samples": report.n_samples,
            "margin": report.margin,
            "rows": [
                {
                    "lambda": r.lam,
                    "estimate": r.estimate,
                    "stderr": r.stderr,
                    "verdict": r.verdict,
                    "heavy_tail": r.heavy_tail,
                }
                for r in report.rows
            ],
            "verdict": report.verdict,
        }
        rows = [
            (r.lam, r.estimate, r.stderr, r.verdict, r.heavy_tail) for r in report.rows
        ]
        return report.verdict, rep, ("lambda", "estimate", "stderr", "verdict", "heavy_tail"), rows
    if isinstance(report, TailsBundle):
        rep = {
            "mean_scaled": _tail_dict(report.mean_scaled),
            "regularized": _tail_dict(report.regularized),
            "verdict": report.verdict,
        }
        rows = []
        for part in (report.mean_scaled, report.regularized):
            if part is not None:
                rows += [
                    (part.which, r.t, r.frequency, r.bound, r.margin, r.verdict)
                    for r in part.rows
                ]
        return (
            report.verdict,
            rep,
            ("part", "t", "frequency", "bound", "margin", "verdict"),
            rows,
        )
    if isinstance(report, ClaimReport):
        rep = {
            "alpha": report.alpha,
            "n_samples": report.n_samples,
            "c_estimate": _est_dict(report.c_estimate),
            "rows": [
                {
                    "x": r.x,
                    "estimate": r.estimate,
                    "stderr": r.stderr,
                    "threshold": r.threshold,
                    "margin": r.margin,
                    "verdict": r.verdict,
                }
                for r in report.rows
            ],
            "verdict": report.verdict,
        }
        rows = [
            (r.x, r.estimate, r.stderr, r.threshold, r.margin, r.verdict)
            for r in report.rows
        ]
        return (
            report.verdict,
            rep,
            ("x", "estimate", "stderr", "threshold", "margin", "verdict"),
            rows,
        )
    if isinstance(report, PacBayesMoments):
        rep = {
            "root": _moment_dict(report.root),
            "unit": _moment_dict(report.unit),
            "verdict": report.verdict,
        }
        rows = []
        for part in (report.root, report.unit):
            rows += [
                (part.which, r.parameter, r.estimate, r.stderr, r.threshold, r.margin, r.verdict)
                for r in part.rows
            ]
        return (
            report.verdict,
            rep,
            ("which", "parameter", "estimate", "stderr", "threshold", "margin", "verdict"),
            rows,
        )
    raise TypeError(f"no payload for {type(report).__name__}")


def _summary(command: str, report, verdict: str) -> str:
    if isinstance(report, EstimateReport):
        t1 = report.semi_empirical.total
        t2 = report.efron_stein.total
        return (
            f"{command}: semi-empirical total {t1.value:.6g} (se {t1.stderr:.3g}), "
            f"one-sided total {t2.value:.6g} (se {t2.stderr:.3g}); verdict {verdict}"
        )
    if isinstance(report, CoverageReport):
        n_fail = sum(c.verdict == "fail" for c in report.cells)
        n_vac = sum(c.verdict == "vacuous" for c in report.cells)
        return (
            f"{command}: {len(report.cells)} cells over {report.trials} trials — "
            f"{n_fail} fail, {n_vac} vacuous; verdict {verdict}"
        )
    if isinstance(report, MgfReport):
        n_fail = sum(r.verdict == "fail" for r in report.rows)
        n_inc = sum(r.verdict in ("inconclusive", "unstable") for r in report.rows)
        return (
            f"{command}: {len(report.rows)} lambda values — "
            f"{n_fail} fail, {n_inc} inconclusive; verdict {verdict}"
        )
    if isinstance(report, TailsBundle):
        parts = []
        for part in (report.mean_scaled, report.regularized):
            if part is not None:
                parts.append(f"{part.which} {part.verdict}")
        return f"{command}: " + ", ".join(parts) + f"; verdict {verdict}"
    if isinstance(report, ClaimReport):
        c = report.c_estimate
        n_fail = sum(r.verdict == "fail" for r in report.rows)
        return (
            f"{command}: C estimate {c.value:.6g} (se {c.stderr:.3g}), "
            f"{n_fail} of {len(report.rows)} rows fail; verdict {verdict}"
        )
    if isinstance(report, PacBayesMoments):
        return (
            f"{command}: root {report.root.verdict}, unit {report.unit.verdict}; "
            f"verdict {verdict}"
        )
    return f"{command}: verdict {verdict}"


def _run(scenario, workers: int):
    if isinstance(scenario, EstimateScenario):
        return run_estimate(scenario)
    if isinstance(scenario, CoverageScenario):
        return run_coverage(scenario, workers)
    if isinstance(scenario, CanonicalScenario):
        return run_canonical(scenario)
    if isinstance(scenario, TailsScenario):
        return run_tails(scenario)
    if isinstance(scenario, ClaimScenario):
        return run_claim(scenario)
    return run_pacbayes(scenario, workers)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        scenario = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    expected = _COMMANDS[args.command]
    if not isinstance(scenario, expected):
        declared = next(k for k, v in _COMMANDS.items() if isinstance(scenario, v))
        print(
            f"config error: scenario: the config declares {declared!r} but the "
            f"{args.command!r} command was invoked",
            file=sys.stderr,
        )
        return 2
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            print("config error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
            return 2
        scenario = dataclasses.replace(scenario, master_seed=args.seed)
    try:
        report = _run(scenario, args.workers)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    verdict, rep_dict, header, rows = _payload(report)
    payload = {
        "tool": "gapbounds",
        "version": __version__,
        "command": args.command,
        "seed": scenario.master_seed,
        "config": scenario_to_config(scenario),
        "report": rep_dict,
        "verdict": verdict,
    }
    if args.format == "json":
        sys.stdout.write(dumps(payload) + "\n")
    else:
        sys.stdout.write(csv_text(header, rows))
    if args.figures is not None:
        from .figures import render_figures  # deferred: pulls in matplotlib

        for path in render_figures(report, args.figures, args.command):
            print(f"figure: {path}", file=sys.stderr)
    print(_summary(args.command, report, verdict), file=sys.stderr)
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    print(f"completed {stamp} seed={scenario.master_seed}", file=sys.stderr)
    return _EXIT_CODES[verdict]


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
