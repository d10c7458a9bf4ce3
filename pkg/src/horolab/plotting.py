"""PNG figures from report tables (headless backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

LOG_SCALE_COLUMNS = {"sphere_vol", "ball_vol", "lower", "upper"}


def plot_table(table, path, x=None, columns=None, title=None):
    """Plot every numeric column of ``table`` against the first (or ``x``).

    Growth columns are drawn on a log axis.
    """
    data = np.asarray(table.rows, dtype=float)
    names = list(table.columns)
    ix = names.index(x) if x else 0
    cols = [c for c in (columns or names) if c != names[ix]]
    logy = any(c in LOG_SCALE_COLUMNS for c in cols)
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    for c in cols:
        y = data[:, names.index(c)]
        if logy and np.any(y <= 0):
            continue
        ax.plot(data[:, ix], y, label=c, lw=1.2)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(names[ix])
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_report(report, out_dir):
    """One PNG per table of ``report``; returns the paths."""
    import os

    paths = []
    for name, table in report.tables.items():
        if len(table.rows) < 2:
            continue
        path = os.path.join(out_dir, f"{report.experiment}_{name}.png")
        paths.append(plot_table(table, path, title=f"{report.experiment}: {name}"))
    return paths
