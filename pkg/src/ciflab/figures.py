"""Figure rendering for the report paths.

Every command that writes a report also drops a PNG next to it; these
helpers do the drawing. The Agg backend is forced at import because the
tool is expected to run headless, and every function returns the path it
wrote so callers can echo it.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "render_cif_figure",
    "render_probe_figure",
    "render_norms_figure",
    "render_lemmas_figure",
    "render_spectrum_figure",
]

_POS_STYLE = {"color": "tab:blue", "label": "positive part"}
_NEG_STYLE = {"color": "tab:red", "label": "negative part"}


def render_cif_figure(report, path) -> str:
    """Two panels: the fitted tail of the last rung, and the rung ladder."""
    fig, (ax_tail, ax_ladder) = plt.subplots(1, 2, figsize=(11.0, 4.2))

    last = report.rungs[-1]
    for est, target, style in (
        (last.est_pos, report.target_pos, _POS_STYLE),
        (last.est_neg, report.target_neg, _NEG_STYLE),
    ):
        if est.n_points:
            n = est.samples[:, 0]
            ax_tail.plot(n, est.samples[:, 2], ".", markersize=2.5, **style)
            fit = est.alpha_hat + est.beta_hat / np.log(n + 2.0)
            ax_tail.plot(n, fit, "-", color=style["color"], linewidth=1.0)
        ax_tail.axhline(target, color=style["color"], linestyle=":", linewidth=1.0)
    ax_tail.set_xlabel("index n")
    ax_tail.set_ylabel("(n+1) mu(n)")
    ax_tail.set_title(f"tail fit at R = {last.R:g}")
    ax_tail.legend(loc="best", fontsize=8)

    dims = [r.dim for r in report.rungs]
    for key, extr, target, style in (
        ("est_pos", report.extrapolated_pos, report.target_pos, _POS_STYLE),
        ("est_neg", report.extrapolated_neg, report.target_neg, _NEG_STYLE),
    ):
        ests = [getattr(r, key).alpha_hat for r in report.rungs]
        ax_ladder.plot(dims, ests, "o-", **style)
        ax_ladder.plot([dims[-1]], [extr], "*", color=style["color"], markersize=12)
        ax_ladder.axhline(target, color=style["color"], linestyle=":", linewidth=1.0)
    ax_ladder.set_xscale("log")
    ax_ladder.set_xlabel("matrix dimension")
    ax_ladder.set_ylabel("rung estimate")
    verdict = "pass" if report.passed else "FAIL"
    ax_ladder.set_title(f"ladder and extrapolation ({verdict})")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def render_probe_figure(report: dict, path) -> str:
    """Ratio sweep for the norm-bound probe, contrast curves for the blow-up."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    rows = report["rows"]
    cutoffs = [row["R"] for row in rows]
    if rows and "ratio" in rows[0]:
        ax.plot(cutoffs, [row["ratio"] for row in rows], "o-", color="tab:blue")
        ax.set_ylabel("quasi-norm ratio")
        ax.set_title("bound-constant envelope")
    else:
        ax.plot(cutoffs, [row["hs"] for row in rows], "o-",
                color="tab:red", label="capped singularity")
        control = report.get("control_rows", [])
        if control:
            ax.plot([row["R"] for row in control], [row["hs"] for row in control],
                    "s--", color="tab:gray", label="constant control")
        ax.set_ylabel("Hilbert-Schmidt norm")
        ax.set_title("one-sided mass growth")
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("cutoff R")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def render_norms_figure(report: dict, path) -> str:
    """Membership ladder: both norm columns against grid resolution."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    rows = report["ladder"]
    res = [row["res"] for row in rows]
    ax.loglog(res, [row["l2"] for row in rows], "o-", color="tab:red", label="quadratic norm")
    ax.loglog(res, [row["lm"] for row in rows], "s-", color="tab:blue", label="gauge norm")
    ax.set_xlabel("points per axis")
    ax.set_ylabel("norm on the refining grids")
    ax.set_title(
        f"{report['family']}: square-integrable={report['in_L2']}, "
        f"finite gauge={report['in_LM']}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def render_lemmas_figure(verdicts, path) -> str:
    """Margin bars: worst case over threshold, per suite (1.0 is the gate)."""
    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    names = [v["test"] for v in verdicts]
    margins = []
    colors = []
    for v in verdicts:
        threshold = v["threshold"] if v["threshold"] else 1.0
        margins.append(v["worst_case"] / threshold)
        colors.append("tab:green" if v["pass"] else "tab:red")
    ax.barh(range(len(names)), margins, color=colors)
    ax.axvline(1.0, color="black", linewidth=1.0, linestyle=":")
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=8)
    ax.set_xlabel("worst case / threshold")
    ax.set_title("suite margins (left of the dotted line passes)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def render_spectrum_figure(values, path, title="singular values") -> str:
    """Log-log decay plot of one spectrum."""
    v = np.asarray(values, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    positive = v > 0.0
    ranks = np.arange(1.0, v.size + 1.0)
    ax.loglog(ranks[positive], v[positive], ".", markersize=3, color="tab:blue")
    ax.set_xlabel("rank + 1")
    ax.set_ylabel("mu")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
