"""Summary figures rendered next to the delimited reports.

Only 2D overview charts live here (volume shares, label counts, pairwise
detector overlaps); the coordinate-projection data meant for 3D tooling is
exported as CSV by the experiments module and not rendered.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

# deterministic PNGs: fixed metadata, no timestamps
_SAVE_KW = {"dpi": 130, "metadata": {"Software": "magicsimplex"}}

_LABEL_COLORS = {
    "FREE": "#b3432b",
    "SEP": "#2b6fb3",
    "BOUND": "#b3912b",
    "PPT_UNKNOWN": "#7a7a7a",
}


def volume_figure(report, path: str | Path) -> None:
    """Bar chart of enclosure / PPT shares with binomial error bars."""
    labels = ["enclosure", "PPT", "PPT | enclosure"]
    values = [report.share_enclosure, report.share_ppt, report.share_ppt_in_enclosure]
    errors = [report.stderr_enclosure, report.stderr_ppt, report.stderr_ppt_in_enclosure]
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    ax.bar(labels, values, yerr=[3 * e for e in errors], capsize=4, color="#2b6fb3")
    ax.set_ylim(0, 1)
    ax.set_ylabel("relative volume")
    ax.set_title(f"d={report.d}, n={report.n_samples}, seed={report.seed}")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def classification_figure(summary: dict, path: str | Path) -> None:
    """Label counts plus per-criterion detection shares."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    counts = summary["counts"]
    names = list(counts)
    ax1.bar(names, [counts[k] for k in names], color=[_LABEL_COLORS[k] for k in names])
    ax1.set_ylabel("states")
    ax1.set_title(f"labels (n={summary['n']}, PPT={summary['ppt_count']})")
    ax1.tick_params(axis="x", rotation=20)
    ax1.grid(axis="y", alpha=0.3)

    shares = summary["criterion_shares"]
    crits = list(shares["SEP"]) + list(shares["BOUND"])
    vals = [shares["SEP"][c] for c in shares["SEP"]] + [
        shares["BOUND"][c] for c in shares["BOUND"]
    ]
    colors = ["#2b6fb3"] * len(shares["SEP"]) + ["#b3912b"] * len(shares["BOUND"])
    ax2.bar(crits, vals, color=colors)
    ax2.set_ylim(0, 1)
    ax2.set_ylabel("share within class")
    ax2.set_title("detector shares (SEP / BOUND)")
    ax2.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def overlap_figure(overlap, path: str | Path) -> None:
    """Grouped bars of exclusive and joint detections for each criterion pair."""
    payload = overlap.to_payload()
    pairs = list(payload["pairs"])
    only_a = [payload["pairs"][p]["only_first"] for p in pairs]
    joint = [payload["pairs"][p]["joint"] for p in pairs]
    only_b = [payload["pairs"][p]["only_second"] for p in pairs]
    x = range(len(pairs))
    width = 0.28
    fig, ax = plt.subplots(figsize=(7.5, 3.6))
    ax.bar([i - width for i in x], only_a, width, label="only first", color="#2b6fb3")
    ax.bar(list(x), joint, width, label="joint", color="#b3432b")
    ax.bar([i + width for i in x], only_b, width, label="only second", color="#4caf50")
    ax.set_xticks(list(x))
    ax.set_xticklabels(pairs, rotation=20)
    ax.set_ylabel(f"detections among {payload['n_bound']} BOUND states")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
