"""Chart rendering for evaluation reports and corpus statistics.

Everything draws through the Agg backend straight to files, so the
functions work headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluate import MetricsReport


def pair_accuracy_chart(report: MetricsReport, path) -> None:
    """Per-pair chamfer distance and normal consistency, side by side."""
    pairs = report.pairs
    labels = [p.label for p in pairs]
    cds = [p.cd for p in pairs]
    ncs = [p.nc for p in pairs]
    positions = range(len(pairs))

    fig, (ax_cd, ax_nc) = plt.subplots(1, 2, figsize=(max(6.0, 0.45 * len(pairs) + 2.0), 4.0))
    ax_cd.bar(positions, cds, color="#4472a8")
    ax_cd.set_title("Chamfer distance (x1000)")
    ax_nc.bar(positions, ncs, color="#53803f")
    ax_nc.set_title("Normal consistency")
    ax_nc.set_ylim(0.0, 1.05)
    for ax in (ax_cd, ax_nc):
        ax.set_xticks(list(positions))
        ax.set_xticklabels(labels, rotation=90, fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def summary_chart(report: MetricsReport, path) -> None:
    """Aggregate metrics as one labeled bar chart."""
    entries = [
        ("CD med", report.cd_median),
        ("ECD med", report.ecd_median),
        ("NC med", report.nc_median),
        ("MMD", report.mmd),
        ("COV %", report.cov_pct),
        ("JSD", report.jsd),
        ("IR %", report.ir_pct),
    ]
    entries = [(name, value) for name, value in entries if value is not None]
    names = [name for name, _ in entries]
    values = [value for _, value in entries]

    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    bars = ax.bar(names, values, color="#8064a2")
    ax.bar_label(bars, fmt="%.3g", fontsize=8)
    ax.set_title("Evaluation summary")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def operation_histogram(counts: dict[str, int], path) -> None:
    """Operation-kind frequencies for a corpus, as a horizontal bar chart."""
    names = list(counts.keys())
    values = [counts[name] for name in names]
    fig, ax = plt.subplots(figsize=(6.0, max(3.0, 0.3 * len(names) + 1.0)))
    ax.barh(names, values, color="#c0504d")
    ax.invert_yaxis()
    ax.set_xlabel("features")
    ax.set_title("Operation distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
