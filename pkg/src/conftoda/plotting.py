"""Optional PNG rendering of sweep tables and boundary curves.

The CSV tables written by :mod:`conftoda.report` are the primary output.
These helpers draw them with matplotlib's Agg backend so that no display
is required.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .pairspace import ConformalPair

FIG_SIZE = (4.5, 3.5)


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_sweep(eps: np.ndarray, residual: np.ndarray, path: str, title: str = "", slope: Optional[float] = 2.0) -> None:
    """Log-log residual against step size, with a reference line of the given slope."""
    plt = _pyplot()
    eps, residual = np.asarray(eps, float), np.asarray(residual, float)
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.loglog(eps, residual, "o-", label="residual")
    if slope is not None and len(eps):
        ref = residual[0] * (eps / eps[0]) ** slope
        ax.loglog(eps, ref, "k--", lw=0.8, label=f"slope {slope:g}")
    ax.set_xlabel("eps")
    ax.set_ylabel("residual")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_pair(pair: ConformalPair, path: str, title: str = "") -> None:
    """The two boundary curves f(S^1) and g(S^1) of a pair."""
    plt = _pyplot()
    s = pair.samples()
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    for key, style in (("f", "-"), ("g", "--")):
        z = np.append(s[key], s[key][0])
        ax.plot(z.real, z.imag, style, label=f"{key}(S^1)")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
