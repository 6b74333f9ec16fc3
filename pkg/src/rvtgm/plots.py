"""Figure rendering for the CLI report path.

Each function writes one PNG next to the delimited output it illustrates.
The Agg backend keeps rendering headless and deterministic enough for
batch runs; figures are diagnostics, not data products.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .engine import PsaSpectrum
from .hazard import HazardAggregate
from .nonergodic import FnergResult
from .spectra import EasSpectrum

_DPI = 150


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_psa(result: PsaSpectrum, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(result.periods, result.psa, color="k", lw=1.6)
    ax.set_xlabel("period (s)")
    ax.set_ylabel("PSA (input amplitude units)")
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)


def plot_eas(original: EasSpectrum, extended: EasSpectrum, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(extended.freqs, np.maximum(extended.amps, 1e-300), color="0.4", lw=1.2,
              label="extrapolated")
    ax.loglog(original.freqs, np.maximum(original.amps, 1e-300), color="k", lw=1.8,
              label="input band")
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("EAS amplitude")
    ax.legend(frameon=False)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)


def plot_fnerg(results: list[FnergResult], mean: np.ndarray, sd: np.ndarray, path) -> None:
    periods = results[0].periods
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for res in results[: min(len(results), 50)]:
        ax.semilogx(res.periods, res.values, color="0.7", lw=0.5)
    ax.semilogx(periods, mean, color="k", lw=1.8, label="mean")
    ax.fill_between(periods, mean - sd, mean + sd, color="C0", alpha=0.25, label="±1 sd")
    ax.set_xlabel("period (s)")
    ax.set_ylabel("non-ergodic PSA factor (ln units)")
    ax.legend(frameon=False)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)


def plot_samples(freqs: np.ndarray, samples: np.ndarray, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for row in samples[: min(len(samples), 50)]:
        ax.semilogx(freqs, row, color="0.7", lw=0.5)
    ax.semilogx(freqs, samples.mean(axis=0), color="k", lw=1.8, label="sample mean")
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("ln-EAS adjustment")
    ax.legend(frameon=False)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)


def plot_hazard(agg: HazardAggregate, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.fill_between(agg.levels, agg.fractiles[0.02], agg.fractiles[0.98],
                    color="C0", alpha=0.15, label="2–98%")
    ax.fill_between(agg.levels, agg.fractiles[0.16], agg.fractiles[0.84],
                    color="C0", alpha=0.3, label="16–84%")
    ax.loglog(agg.levels, agg.mean, color="k", lw=1.8, label="mean")
    ax.loglog(agg.levels, agg.median, color="k", lw=1.2, ls="--", label="median")
    positive = agg.mean[agg.mean > 0]
    if positive.size:
        ax.set_ylim(max(positive.min() * 0.5, 1e-12), None)
    ax.set_xlabel("intensity (g)")
    ax.set_ylabel("annual exceedance rate (1/yr)")
    ax.legend(frameon=False)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)


def plot_decomposition(periods, tau0, phi0, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.semilogx(periods, tau0, "o-", color="C1", label="tau0")
    ax.semilogx(periods, phi0, "s-", color="C0", label="phi0")
    ax.set_xlabel("period (s)")
    ax.set_ylabel("standard deviation (ln units)")
    ax.legend(frameon=False)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)
