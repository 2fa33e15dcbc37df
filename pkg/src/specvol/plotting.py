"""Figure rendering for the CLI report paths (matplotlib, file output only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_lines(out_path, x, curves: dict, title: str, xlabel: str, ylabel: str,
               logy: bool = False) -> None:
    """Render one or more curves over a shared abscissa to an image file."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, y in curves.items():
        ax.plot(x, y, lw=1.2, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(curves) > 1:
        ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def save_error_histograms(out_path, errors: dict, title: str) -> None:
    """One histogram panel per estimator of the per-path estimation errors."""
    tags = list(errors)
    ncols = min(3, len(tags))
    nrows = (len(tags) + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(4 * ncols, 3 * nrows),
                             squeeze=False)
    for ax in axes.flat[len(tags):]:
        ax.set_visible(False)
    for ax, tag in zip(axes.flat, tags):
        e = np.asarray(errors[tag])
        ax.hist(e, bins=40, color="#4878d0")
        ax.axvline(0.0, color="k", lw=0.8)
        ax.set_title(tag)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def save_spectrum_fit(out_path, k, s_data, s_model, title: str) -> None:
    """Block-averaged periodogram against the fitted model spectrum."""
    k = np.asarray(k, dtype=float)
    s_data = np.asarray(s_data, dtype=float)
    nbin = max(1, len(k) // 200)
    m = (len(k) // nbin) * nbin
    kb = k[:m].reshape(-1, nbin).mean(axis=1)
    sb = s_data[:m].reshape(-1, nbin).mean(axis=1)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(kb, sb, ".", ms=3, alpha=0.6, label="periodogram (binned)")
    ax.plot(k, s_model, "r-", lw=1.2, label="fitted spectrum")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.set_xlabel("frequency index k")
    ax.set_ylabel("energy")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
