"""Optional figure rendering for scenario reports.

Figures are a side output for human inspection; the machine-readable
payload on stdout is the determinism contract, not these files.
"""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)
import numpy as np  # noqa: E402

from .canonical import ClaimReport, MgfReport, TailReport
from .harness import (
    CoverageReport,
    EstimateReport,
    PacBayesMoments,
    TailsBundle,
)

__all__ = ["render_figures"]

_DPI = 150


def _save(fig, outdir: str, name: str) -> str:
    path = os.path.join(outdir, name)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def _estimate_figure(report: EstimateReport, outdir: str, prefix: str) -> list[str]:
    ks = np.arange(1, len(report.semi_empirical.per_k) + 1)
    semi = [e.value for e in report.semi_empirical.per_k]
    semi_se = [e.stderr for e in report.semi_empirical.per_k]
    es = [e.value for e in report.efron_stein.per_k]
    es_se = [e.stderr for e in report.efron_stein.per_k]
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.4
    ax.bar(ks - width / 2, semi, width, yerr=semi_se, capsize=2, label="semi-empirical")
    ax.bar(ks + width / 2, es, width, yerr=es_se, capsize=2, label="one-sided replace-one")
    ax.set_xlabel("coordinate k")
    ax.set_ylabel("variance term")
    ax.set_title("Per-coordinate variance breakdown")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return [_save(fig, outdir, f"{prefix}_breakdown.png")]


def _coverage_figure(report: CoverageReport, outdir: str, prefix: str) -> list[str]:
    paths = []
    by_bound: dict[str, list] = {}
    for cell in report.cells:
        by_bound.setdefault(cell.bound_id, []).append(cell)
    for bound_id, cells in by_bound.items():
        fig, ax = plt.subplots(figsize=(7, 4))
        if bound_id == "mcdiarmid":
            xs = [c.delta for c in cells]
            ax.set_xlabel("delta")
        else:
            xs = [c.x for c in cells]
            ax.set_xlabel("exponent x")
        nominal = [c.nominal for c in cells]
        rate = [c.rate for c in cells]
        robust = [c.rate_robust for c in cells]
        err = [3.0 * c.stderr for c in cells]
        ax.plot(xs, nominal, "k--", label="nominal failure probability")
        ax.errorbar(xs, rate, yerr=err, fmt="o", label="observed rate")
        if any(c.violations != c.violations_robust for c in cells):
            ax.plot(xs, robust, "s", label="rate beyond estimator noise")
        ax.set_yscale("log")
        floor = max(1.0 / (10 * report.trials), 1e-12)
        ax.set_ylim(bottom=floor)
        ax.set_ylabel("violation rate")
        ax.set_title(f"Coverage: {bound_id}")
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        paths.append(_save(fig, outdir, f"{prefix}_coverage_{bound_id}.png"))
    return paths


def _mgf_figure(report: MgfReport, outdir: str, prefix: str) -> list[str]:
    lams = [r.lam for r in report.rows]
    est = [r.estimate for r in report.rows]
    err = [report.margin * r.stderr for r in report.rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.errorbar(lams, est, yerr=err, fmt="o-", label="moment estimate")
    ax.axhline(1.0, color="k", linestyle="--", label="certificate level")
    ax.set_xlabel("lambda")
    ax.set_ylabel("estimate")
    ax.set_title("Exponential moment across the lambda grid")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return [_save(fig, outdir, f"{prefix}_mgf.png")]


def _tail_figure(report: TailReport, outdir: str, name: str) -> str:
    ts = [r.t for r in report.rows]
    freq = [r.frequency for r in report.rows]
    bound = [r.bound for r in report.rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ts, bound, "k--", label="tail bound")
    ax.plot(ts, freq, "o", label="observed frequency")
    ax.set_yscale("log")
    ax.set_ylim(bottom=max(min(f for f in freq if f > 0), 1e-12) / 10 if any(f > 0 for f in freq) else 1e-6)
    ax.set_xlabel("threshold t")
    ax.set_ylabel("exceedance probability")
    ax.set_title(f"Tail comparison ({report.which})")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _save(fig, outdir, name)


def _tails_figures(bundle: TailsBundle, outdir: str, prefix: str) -> list[str]:
    paths = []
    if bundle.mean_scaled is not None:
        paths.append(_tail_figure(bundle.mean_scaled, outdir, f"{prefix}_tail_mean_scaled.png"))
    if bundle.regularized is not None:
        paths.append(_tail_figure(bundle.regularized, outdir, f"{prefix}_tail_regularized.png"))
    return paths


def _claim_figure(report: ClaimReport, outdir: str, prefix: str) -> list[str]:
    xs = [r.x for r in report.rows]
    est = [r.estimate for r in report.rows]
    err = [r.margin for r in report.rows]
    thr = [r.threshold for r in report.rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, thr, "k--", label="certified threshold")
    ax.errorbar(xs, est, yerr=err, fmt="o", label="moment estimate")
    ax.set_xlabel("x")
    ax.set_ylabel("estimate")
    ax.set_title("Exponential moment vs certified envelope")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return [_save(fig, outdir, f"{prefix}_claim.png")]


def _moments_figures(pbm: PacBayesMoments, outdir: str, prefix: str) -> list[str]:
    paths = []
    for rep in (pbm.root, pbm.unit):
        xs = [r.parameter for r in rep.rows]
        est = [r.estimate for r in rep.rows]
        err = [r.margin for r in rep.rows]
        thr = [r.threshold for r in rep.rows]
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(xs, thr, "k--", label="threshold")
        ax.errorbar(xs, est, yerr=err, fmt="o", label="estimate")
        ax.set_xlabel("parameter")
        ax.set_ylabel("estimate")
        ax.set_title(f"Posterior moment certificate ({rep.which})")
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        paths.append(_save(fig, outdir, f"{prefix}_moment_{rep.which}.png"))
    return paths


def render_figures(report, outdir: str, prefix: str) -> list[str]:
    """Render the figures for one report into ``outdir``; returns the paths."""
    os.makedirs(outdir, exist_ok=True)
    if isinstance(report, EstimateReport):
        return _estimate_figure(report, outdir, prefix)
    if isinstance(report, CoverageReport):
        return _coverage_figure(report, outdir, prefix)
    if isinstance(report, MgfReport):
        return _mgf_figure(report, outdir, prefix)
    if isinstance(report, TailsBundle):
        return _tails_figures(report, outdir, prefix)
    if isinstance(report, ClaimReport):
        return _claim_figure(report, outdir, prefix)
    if isinstance(report, PacBayesMoments):
        return _moments_figures(report, outdir, prefix)
    raise TypeError(f"no figure renderer for {type(report).__name__}")
