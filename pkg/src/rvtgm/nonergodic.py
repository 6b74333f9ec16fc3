"""Non-ergodic PSA factors, correlated epistemic sampling, and the aleatory
sigma model.

The non-ergodic adjustment lives in ln-EAS space as a per-frequency mean and
standard deviation plus an inter-frequency correlation model.  Realizations
of the adjustment are drawn from the implied multivariate normal, multiplied
into the ergodic spectrum, and pushed through the response-spectrum engine;
the factor for one realization is the per-period difference of log PSA
between the adjusted and ergodic legs.  Keeping the inter-frequency
correlation is essential: uncorrelated draws average out across the
oscillator band and understate the PSA spread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .engine import RvtConfig, psa_spectrum
from .errors import NumericalError, RvtError, ValidationError
from .spectra import EasSpectrum, FrequencyGrid, Scenario


@dataclass(frozen=True)
class CorrelationModel:
    """Inter-frequency correlation descriptor.

    ``exp_ln_f`` is exponential in log-frequency separation,
    rho = exp(-|ln f1 - ln f2| / length); ``identity`` removes all
    correlation (diagnostic use).
    """

    model: str = "exp_ln_f"
    length: float = 0.7

    def __post_init__(self):
        if self.model not in ("exp_ln_f", "identity"):
            raise ValidationError(f"unknown correlation model {self.model!r}")
        if self.model == "exp_ln_f" and not (self.length > 0.0):
            raise ValidationError(f"correlation length must be > 0, got {self.length}")

    @classmethod
    def from_dict(cls, doc: dict) -> "CorrelationModel":
        return cls(model=doc.get("model", "exp_ln_f"), length=float(doc.get("length", 0.7)))

    def matrix(self, grid: FrequencyGrid) -> np.ndarray:
        if self.model == "identity":
            return np.eye(len(grid))
        lf = np.log(grid.freqs)
        return np.exp(-np.abs(lf[:, None] - lf[None, :]) / self.length)


@dataclass(frozen=True)
class NonErgodicField:
    """Per-frequency mean and epistemic sd of the ln-EAS adjustment."""

    grid: FrequencyGrid
    mean_ln: np.ndarray
    sd_ln: np.ndarray
    correlation: CorrelationModel = CorrelationModel()

    def __post_init__(self):
        mean = np.asarray(self.mean_ln, dtype=float)
        sd = np.asarray(self.sd_ln, dtype=float)
        object.__setattr__(self, "mean_ln", mean)
        object.__setattr__(self, "sd_ln", sd)
        if mean.shape != self.grid.freqs.shape or sd.shape != self.grid.freqs.shape:
            raise ValidationError("field mean/sd arrays must match the frequency grid")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(sd))):
            raise ValidationError("field mean/sd must be finite")
        if np.any(sd < 0.0):
            raise ValidationError("field sd_ln must be >= 0 everywhere")


@dataclass(frozen=True)
class FnergResult:
    """Per-period non-ergodic PSA factor in natural-log units."""

    periods: np.ndarray
    values: np.ndarray
    realization: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "periods", np.asarray(self.periods, dtype=float))
        if not np.all(np.isfinite(v)):
            raise ValidationError("non-ergodic factors must be finite")


def _cholesky_with_jitter(corr: np.ndarray) -> np.ndarray:
    for jitter in (0.0, 1e-14, 1e-12, 1e-10):
        try:
            return np.linalg.cholesky(corr + jitter * np.eye(corr.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(
        "correlation matrix is not positive semi-definite within the 1e-10 jitter budget"
    )


def sample_field(field: NonErgodicField, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` correlated ln-adjustment vectors, shape (n, len(grid)).

    Deterministic for a given seed; a draw is mean_ln + sd_ln * (L z) with L
    the Cholesky factor of the correlation matrix.
    """
    if n < 1:
        raise ValidationError(f"sample count must be >= 1, got {n}")
    chol = _cholesky_with_jitter(field.correlation.matrix(field.grid))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, len(field.grid)))
    return field.mean_ln[None, :] + (z @ chol.T) * field.sd_ln[None, :]


def realize_eas(eas: EasSpectrum, field: NonErgodicField, sample_ln: np.ndarray) -> EasSpectrum:
    """Multiply one sampled ln-adjustment into a spectrum.

    The adjustment is interpolated linearly in ln-frequency onto the spectrum
    grid and tapers to zero outside the field's band (no information there;
    the extrapolation models re-anchor from in-band amplitudes anyway).
    """
    sample_ln = np.asarray(sample_ln, dtype=float)
    if sample_ln.shape != field.grid.freqs.shape:
        raise ValidationError("sample length does not match the field grid")
    adj = np.interp(
        np.log(eas.freqs), np.log(field.grid.freqs), sample_ln, left=0.0, right=0.0
    )
    return EasSpectrum(eas.grid, eas.amps * np.exp(adj))


def _resample_union(a: EasSpectrum, b: EasSpectrum) -> tuple[EasSpectrum, EasSpectrum]:
    """Log-log resample two spectra onto the union of their grids restricted
    to the overlapping band.  Identical grids pass through untouched."""
    if a.grid.freqs.shape == b.grid.freqs.shape and np.array_equal(a.grid.freqs, b.grid.freqs):
        return a, b
    lo = max(a.f_min, b.f_min)
    hi = min(a.f_max, b.f_max)
    if not (lo < hi):
        raise ValidationError("spectra do not overlap in frequency; cannot form factor")
    union = np.unique(np.concatenate([a.freqs, b.freqs]))
    union = union[(union >= lo) & (union <= hi)]
    out = []
    for s in (a, b):
        if np.any(s.amps <= 0.0):
            raise ValidationError(
                "resampling onto a union grid requires strictly positive amplitudes"
            )
        amps = np.exp(np.interp(np.log(union), np.log(s.freqs), np.log(s.amps)))
        out.append(EasSpectrum(FrequencyGrid(union), amps))
    return out[0], out[1]


def fnerg_factor(
    eas_erg: EasSpectrum,
    eas_nerg: EasSpectrum,
    scn: Scenario,
    cfg: RvtConfig | None = None,
    realization: int | None = None,
) -> FnergResult:
    """Non-ergodic PSA factor: ln PSA(adjusted) - ln PSA(ergodic), with the
    identical RVT configuration on both legs."""
    cfg = cfg or RvtConfig()
    erg, nerg = _resample_union(eas_erg, eas_nerg)
    legs = {}
    for name, spec in (("ergodic", erg), ("non-ergodic", nerg)):
        try:
            legs[name] = psa_spectrum(spec, scn, cfg)
        except RvtError as exc:
            raise type(exc)(f"{name} leg: {exc}") from exc
    values = np.log(legs["non-ergodic"].psa) - np.log(legs["ergodic"].psa)
    return FnergResult(cfg.periods.copy(), values, realization)


def fnerg_realizations(
    eas_erg: EasSpectrum,
    field: NonErgodicField,
    scn: Scenario,
    cfg: RvtConfig | None = None,
    n: int = 100,
    seed: int = 0,
) -> list[FnergResult]:
    """Factors for ``n`` correlated field realizations (deterministic per seed)."""
    cfg = cfg or RvtConfig()
    samples = sample_field(field, n, seed)
    return [
        fnerg_factor(eas_erg, realize_eas(eas_erg, field, samples[i]), scn, cfg, realization=i)
        for i in range(n)
    ]


def summarize_factors(results: list[FnergResult]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-period mean and sd (ddof=1) across realizations."""
    if not results:
        raise ValidationError("no factor realizations to summarize")
    stack = np.vstack([r.values for r in results])
    sd = stack.std(axis=0, ddof=1) if stack.shape[0] > 1 else np.zeros(stack.shape[1])
    return results[0].periods, stack.mean(axis=0), sd


class AleatoryCoefficients:
    """Per-period aleatory model coefficients plus the smoothed constant
    shift, loaded from CSV columns period_s, phi0_m1, phi0_m2, tau0_m1,
    tau0_m2, dc0."""

    COLUMNS = ("period_s", "phi0_m1", "phi0_m2", "tau0_m1", "tau0_m2", "dc0")

    def __init__(self, periods, phi0_m1, phi0_m2, tau0_m1, tau0_m2, dc0):
        self.periods = np.asarray(periods, dtype=float)
        self.phi0_m1 = np.asarray(phi0_m1, dtype=float)
        self.phi0_m2 = np.asarray(phi0_m2, dtype=float)
        self.tau0_m1 = np.asarray(tau0_m1, dtype=float)
        self.tau0_m2 = np.asarray(tau0_m2, dtype=float)
        self.dc0 = np.asarray(dc0, dtype=float)
        if np.any(np.diff(self.periods) <= 0.0):
            raise ValidationError("aleatory coefficient periods must be strictly ascending")
        for name in ("phi0_m1", "phi0_m2", "tau0_m1", "tau0_m2"):
            if np.any(getattr(self, name) <= 0.0):
                raise ValidationError(f"aleatory coefficient {name} must be > 0 at every period")

    @classmethod
    def from_csv(cls, path) -> "AleatoryCoefficients":
        df = pd.read_csv(path)
        missing = [c for c in cls.COLUMNS if c not in df.columns]
        if missing:
            raise ValidationError(f"aleatory coefficient file {path} is missing columns {missing}")
        return cls(*(df[c].to_numpy() for c in cls.COLUMNS))

    def _interp(self, arr: np.ndarray, t0: float) -> float:
        if not (self.periods[0] <= t0 <= self.periods[-1]):
            raise ValidationError(
                f"period {t0} s outside the tabulated range "
                f"[{self.periods[0]}, {self.periods[-1]}] s"
            )
        return float(np.interp(math.log(t0), np.log(self.periods), arr))

    def at(self, t0: float) -> dict:
        return {
            name: self._interp(getattr(self, name), t0)
            for name in ("phi0_m1", "phi0_m2", "tau0_m1", "tau0_m2", "dc0")
        }


def _magnitude_blend(low: float, high: float, magnitude: float) -> float:
    if magnitude < 5.0:
        return low
    if magnitude > 6.5:
        return high
    return low + (high - low) * (magnitude - 5.0) / 1.5


def aleatory_sigma(
    magnitude: float, t0: float, coeffs: AleatoryCoefficients
) -> tuple[float, float, float]:
    """(phi0, tau0, sigma0) at a magnitude and period.

    Both components plateau below M 5 and above M 6.5 with a linear ramp in
    between; sigma0 is their root-sum-square.
    """
    c = coeffs.at(t0)
    phi0 = _magnitude_blend(c["phi0_m1"], c["phi0_m2"], magnitude)
    tau0 = _magnitude_blend(c["tau0_m1"], c["tau0_m2"], magnitude)
    return phi0, tau0, math.hypot(phi0, tau0)


def smooth_dc0(periods, dc0, window_decades: float = 1.0 / 3.0) -> np.ndarray:
    """Centered moving average of the constant shift over ln-period with the
    given window width in decades."""
    periods = np.asarray(periods, dtype=float)
    dc0 = np.asarray(dc0, dtype=float)
    logp = np.log10(periods)
    half = window_decades / 2.0
    out = np.empty_like(dc0)
    for i, lp in enumerate(logp):
        sel = np.abs(logp - lp) <= half + 1e-12
        out[i] = dc0[sel].mean()
    return out


def apply_backbone(
    periods: np.ndarray,
    y_erg: np.ndarray,
    fnerg: FnergResult,
    dc0: np.ndarray | float = 0.0,
) -> np.ndarray:
    """Non-ergodic median ln-PSA: y_erg + F_nerg + dc0, per period.

    ``periods`` must match the factor's period grid exactly.
    """
    periods = np.asarray(periods, dtype=float)
    y_erg = np.asarray(y_erg, dtype=float)
    if periods.shape != fnerg.periods.shape or not np.allclose(
        periods, fnerg.periods, rtol=1e-10, atol=0.0
    ):
        raise ValidationError("backbone and factor period grids are not aligned")
    if y_erg.shape != periods.shape:
        raise ValidationError("backbone median array does not match its period grid")
    return y_erg + fnerg.values + np.broadcast_to(np.asarray(dc0, dtype=float), periods.shape)
