"""CSV data files and minimal SVG renderings of solves."""

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["write_csv", "write_snapshots_csv", "snapshot_svg", "convergence_svg", "snapshot_indices"]

# fixed ids and no date stamp keep the SVG bytes reproducible
_SVG_RC = {"svg.hashsalt": "kawahara", "svg.fonttype": "none"}


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return path


def snapshot_indices(n, count=5):
    return sorted(set(np.linspace(0, n - 1, min(count, n)).round().astype(int).tolist()))


def write_snapshots_csv(path, t, x, values, idx):
    """Long format: one row per (t, x) sample of the chosen snapshots."""
    rows = ((t[i], xv, values[i, j]) for i in idx for j, xv in enumerate(x))
    return write_csv(path, ["t", "x", "u"], rows)


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)


def snapshot_svg(path, t, x, values, idx, title=""):
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        for i in idx:
            ax.plot(x, values[i], lw=1, label=f"t = {t[i]:.3g}")
        ax.set_xlabel("x")
        ax.set_ylabel("u")
        if title:
            ax.set_title(title)
        ax.legend(fontsize=7, frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def convergence_svg(path, history, title="Picard iterates"):
    """Successive-iterate differences on a log scale."""
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        h = np.asarray(history, dtype=float)
        if h.size:
            ax.semilogy(np.arange(1, h.size + 1), np.maximum(h, 1e-300), "o-", ms=3)
        ax.set_xlabel("iteration")
        ax.set_ylabel("update size")
        ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)
