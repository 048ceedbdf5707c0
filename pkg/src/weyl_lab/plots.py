"""Static figure rendering for spectra, bound reports, and counting ratios.

Figures are written straight to files (SVG by default from the command-line
driver); the Date metadata is stripped and the hash salt pinned so repeated
runs produce identical documents.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "weyl-lab"

import matplotlib.pyplot as plt
import numpy as np

from .analysis import CountingData
from .spectral import Spectrum


def _save(fig, path) -> None:
    path = str(path)
    metadata = {"Date": None} if path.endswith(".svg") else None
    fig.savefig(path, metadata=metadata)
    plt.close(fig)


def save_staircase(spectrum: Spectrum, path, weyl_curve=None) -> None:
    """Eigenvalue staircase N(lambda), optionally with the leading-order
    counting term overlaid.

    ``weyl_curve`` is a pair (lambdas, values)."""
    ev = spectrum.eigenvalues
    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)
    ax.step(np.concatenate([[0.0], ev]), np.arange(0, ev.size + 1), where="post",
            lw=1.2, label=r"$N(\Lambda)$")
    if spectrum.reliability_cutoff < ev[-1]:
        ax.axvline(spectrum.reliability_cutoff, color="crimson", ls=":",
                   lw=1.0, label="reliability cutoff")
    if weyl_curve is not None:
        lams, values = weyl_curve
        ax.plot(lams, values, "--", color="gray", lw=1.2, label="leading-order term")
    ax.set_xlabel(r"$\Lambda$")
    ax.set_ylabel("eigenvalues below")
    ax.legend(loc="upper left", frameon=False)
    _save(fig, path)


def save_riesz_versus_bound(counting: CountingData, bounds: np.ndarray, path) -> None:
    """Riesz mean against its trace bound on log-log axes."""
    lam = counting.lambdas
    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)
    keep = counting.riesz > 0
    ax.loglog(lam[keep], counting.riesz[keep], lw=1.4, label=r"$S(\Lambda)$")
    ax.loglog(lam, np.asarray(bounds), "--", lw=1.4, label="trace bound")
    if (~counting.trusted).any():
        edge = lam[counting.trusted]
        if edge.size:
            ax.axvline(edge.max(), color="crimson", ls=":", lw=1.0, label="trust limit")
    ax.set_xlabel(r"$\Lambda$")
    ax.set_ylabel("energy")
    ax.legend(loc="upper left", frameon=False)
    _save(fig, path)


def save_weyl_ratio(counting: CountingData, weyl_values: np.ndarray, path) -> None:
    """Pointwise ratio of the counting function to its leading-order term."""
    lam = counting.lambdas
    ratio = np.where(np.asarray(weyl_values) > 0,
                     counting.counts / np.asarray(weyl_values), np.nan)
    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)
    ax.semilogx(lam[counting.trusted], ratio[counting.trusted], "o-", ms=3,
                lw=1.0, label="trusted")
    if (~counting.trusted).any():
        ax.semilogx(lam[~counting.trusted], ratio[~counting.trusted], "o", ms=3,
                    color="lightgray", label="untrusted")
    ax.axhline(1.0, color="gray", ls="--", lw=1.0)
    ax.set_xlabel(r"$\Lambda$")
    ax.set_ylabel(r"$N(\Lambda)\, /\, W(\Lambda)$")
    ax.legend(loc="lower right", frameon=False)
    _save(fig, path)
