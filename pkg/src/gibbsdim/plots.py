"""Static figures rendered beside the delimited output of report runs.

All plot data is exactly what the CSVs carry; the figures are a
convenience view, never an extra data channel, and report runs accept
--no-plot to skip them entirely.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

DPI = 130


def dimension_figure(rows, slope, half_width, delta_formula, path):
    """log mass against log radius with the fitted and formula lines."""
    import numpy as np
    x = np.array([np.log(r["rho"]) for r in rows])
    y_mc = np.array([r["log_mu_mc"] for r in rows])
    y_f = np.array([r["log_mu_formula"] for r in rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(x, y_f, "s--", color="tab:gray", label="formula mass")
    ax.plot(x, y_mc, "o", color="tab:blue", label="Monte Carlo mass")
    xs = np.linspace(x.min(), x.max(), 32)
    inter = y_mc.mean() - slope * x.mean()
    ax.plot(xs, inter + slope * xs, color="tab:blue", lw=1,
            label=f"fit slope {slope:.4f} +- {half_width:.4f}")
    if delta_formula is not None:
        ax.plot(xs, y_f.mean() + delta_formula * (xs - x.mean()),
                color="tab:red", lw=1, ls=":",
                label=f"formula dimension {delta_formula:.4f}")
    ax.set_xlabel("log rho")
    ax.set_ylabel("log mass")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def pressure_figure(rows, path):
    """P_n against n plus the Cauchy gap on a log scale."""
    ns = [r["n"] for r in rows]
    ps = [r["P_n"] for r in rows]
    gaps = [abs(r["gap"]) for r in rows if r["gap"] is not None]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.4, 3.6))
    ax1.plot(ns, ps, "o-", ms=3)
    ax1.set_xlabel("n")
    ax1.set_ylabel("P_n")
    if gaps:
        ax2.semilogy(ns[len(ns) - len(gaps):], gaps, "o-", ms=3)
    ax2.set_xlabel("n")
    ax2.set_ylabel("|P_n - P_{n-1}|")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def series_figure(series, xlabel, ylabel, path, logy=False):
    """Small multiline plot: series is a list of (label, xs, ys)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for label, xs, ys in series:
        if logy:
            ax.semilogy(xs, ys, "o-", ms=3, label=label)
        else:
            ax.plot(xs, ys, "o-", ms=3, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(series) > 1 or (series and series[0][0]):
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def bowen_trace_figure(trace, root, path):
    """Bisection bracket width against iteration."""
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    if trace:
        its = [t[0] for t in trace]
        widths = [t[2] - t[1] for t in trace]
        ax.semilogy(its, widths, "o-", ms=3)
    ax.set_xlabel("iteration")
    ax.set_ylabel("bracket width")
    ax.set_title(f"root {root:.8f}")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
