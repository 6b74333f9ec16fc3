"""Desk-scale probabilistic hazard: scenario exceedance integration with
lognormal ground motion, and logic-tree aggregation across realizations.

Each scenario contributes rate * P(ln PSA > ln a) with a normal ln-PSA of
given median and sigma; branch curves share one intensity grid and are
aggregated into weighted mean, median, and fractile curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import ValidationError
from .spectra import Scenario

#: default intensity grid: 30 log-spaced levels over [0.001, 3] g
DEFAULT_LEVELS = np.logspace(math.log10(0.001), math.log10(3.0), 30)

FRACTILES = (0.02, 0.16, 0.84, 0.98)


@dataclass(frozen=True)
class ScenarioRate:
    """One hazard source: annual rate, median ln-PSA and aleatory sigma at the
    analysis period.  ``scenario`` carries provenance only."""

    rate: float
    median_ln: float
    sigma_ln: float
    scenario: Scenario | None = None

    def __post_init__(self):
        if not (self.rate > 0.0):
            raise ValidationError(f"annual rate must be > 0, got {self.rate}")
        if not (self.sigma_ln > 0.0):
            raise ValidationError(f"sigma must be > 0, got {self.sigma_ln}")
        if not math.isfinite(self.median_ln):
            raise ValidationError("median ln-PSA must be finite")


@dataclass(frozen=True)
class HazardCurve:
    """Annual exceedance rate versus intensity (ascending levels)."""

    levels: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        rates = np.asarray(self.rates, dtype=float)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "rates", rates)
        if levels.shape != rates.shape or levels.ndim != 1:
            raise ValidationError("hazard curve levels and rates must be matching 1-D arrays")
        if np.any(levels <= 0.0) or np.any(np.diff(levels) <= 0.0):
            raise ValidationError("intensity levels must be positive and strictly ascending")
        if np.any(rates < 0.0):
            raise ValidationError("exceedance rates must be >= 0")
        if np.any(np.diff(rates) > 1e-12 * np.maximum(rates[:-1], 1e-300)):
            raise ValidationError("exceedance rates must be non-increasing in intensity")

    def level_at_rate(self, rate: float) -> float:
        """Intensity at a target exceedance rate by log-log interpolation
        (e.g. rate = 1/return period)."""
        pos = self.rates > 0.0
        if not (self.rates[pos].min() <= rate <= self.rates[pos].max()):
            raise ValidationError(f"rate {rate} outside the curve's range")
        # rates decrease with level; flip for interpolation
        lr = np.log(self.rates[pos][::-1])
        ll = np.log(self.levels[pos][::-1])
        return float(np.exp(np.interp(math.log(rate), lr, ll)))


def scenario_hazard(
    scns: list[ScenarioRate],
    levels: np.ndarray | None = None,
    truncation: float | None = None,
) -> HazardCurve:
    """Total hazard curve rate(a) = sum_i rate_i * Phi_c((ln a - mu_i)/sigma_i).

    ``truncation`` optionally truncates the normal at +/- n sigma (default:
    none, matching the untruncated integral).
    """
    if not scns:
        raise ValidationError("scenario list is empty")
    levels = DEFAULT_LEVELS if levels is None else np.asarray(levels, dtype=float)
    if np.any(levels <= 0.0):
        raise ValidationError("intensity levels must be > 0")
    ln_a = np.log(levels)
    total = np.zeros_like(ln_a)
    for s in scns:
        x = (ln_a - s.median_ln) / s.sigma_ln
        sf = norm.sf(x)
        if truncation is not None:
            if not (truncation > 0.0):
                raise ValidationError(f"sigma truncation must be > 0, got {truncation}")
            tail = norm.sf(truncation)
            sf = np.clip((sf - tail) / (1.0 - 2.0 * tail), 0.0, 1.0)
            sf[x > truncation] = 0.0
            sf[x < -truncation] = 1.0
        total += s.rate * sf
    return HazardCurve(levels, total)


@dataclass(frozen=True)
class Branch:
    weight: float
    backbone_id: str = ""
    realization_id: int | None = None

    def __post_init__(self):
        if not (self.weight > 0.0):
            raise ValidationError(f"branch weight must be > 0, got {self.weight}")


@dataclass(frozen=True)
class LogicTree:
    branches: tuple

    def __post_init__(self):
        branches = tuple(self.branches)
        object.__setattr__(self, "branches", branches)
        if not branches:
            raise ValidationError("logic tree has no branches")
        total = math.fsum(b.weight for b in branches)
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"branch weights must sum to 1 within 1e-12, got {total!r}")

    @property
    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.branches])


def weighted_quantile(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    """Weighted quantile by linear interpolation of the inverse empirical CDF
    evaluated at midpoint cumulative weights.

    With sorted values v_(i) and weights w_(i), the quantile interpolates
    between the points (W_i - w_(i)/2, v_(i)) where W_i is the running weight
    sum, clamping to the extreme values outside that range.  For a single
    sample every quantile equals it; for equal weights the median of an odd
    set is its middle value.
    """
    order = np.argsort(values, kind="stable")
    v = values[order]
    w = weights[order]
    c = np.cumsum(w) - 0.5 * w
    return float(np.interp(p, c, v))


@dataclass(frozen=True)
class HazardAggregate:
    """Logic-tree statistics per intensity level."""

    levels: np.ndarray
    mean: np.ndarray
    median: np.ndarray
    fractiles: dict  # probability -> ndarray


def aggregate_tree(tree: LogicTree, curves: list[HazardCurve]) -> HazardAggregate:
    """Weighted mean, median, and 2/16/84/98% fractile curves over branches.

    All branch curves must share the same level grid.
    """
    if len(curves) != len(tree.branches):
        raise ValidationError(
            f"logic tree has {len(tree.branches)} branches but {len(curves)} curves given"
        )
    levels = curves[0].levels
    for c in curves[1:]:
        if c.levels.shape != levels.shape or not np.array_equal(c.levels, levels):
            raise ValidationError("branch curves do not share a common level grid")
    rates = np.vstack([c.rates for c in curves])  # (branches, levels)
    w = tree.weights
    mean = w @ rates
    median = np.array([weighted_quantile(rates[:, j], w, 0.5) for j in range(levels.size)])
    fractiles = {
        p: np.array([weighted_quantile(rates[:, j], w, p) for j in range(levels.size)])
        for p in FRACTILES
    }
    return HazardAggregate(levels=levels, mean=mean, median=median, fractiles=fractiles)
