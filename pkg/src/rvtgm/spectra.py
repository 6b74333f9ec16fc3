"""Sampled amplitude spectra and frequency-domain building blocks.

An :class:`EasSpectrum` is the engine's universal currency: amplitudes of a
smoothed horizontal-component Fourier acceleration spectrum sampled on an
ascending frequency grid (units g*s).  This module provides the oscillator
transfer magnitude, spectral moments by trapezoidal quadrature on the native
grid, the moment-based bandwidth measure, Brune corner frequency, the
kappa-Vs30 relation, and low/high-frequency extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

#: smallest number of samples that still supports quadrature and anchor bins
MIN_GRID_SAMPLES = 8


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly ascending positive frequency samples (Hz)."""

    freqs: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        object.__setattr__(self, "freqs", f)
        if f.ndim != 1 or f.size < MIN_GRID_SAMPLES:
            raise ValidationError(
                f"frequency grid needs at least {MIN_GRID_SAMPLES} samples, got {f.size}"
            )
        if not np.all(np.isfinite(f)):
            raise ValidationError("frequency grid contains non-finite values")
        if f[0] <= 0.0:
            raise ValidationError("frequencies must be strictly positive")
        if np.any(np.diff(f) <= 0.0):
            raise ValidationError("frequencies must be strictly ascending")

    @property
    def f_min(self) -> float:
        return float(self.freqs[0])

    @property
    def f_max(self) -> float:
        return float(self.freqs[-1])

    def __len__(self) -> int:
        return self.freqs.size


@dataclass(frozen=True)
class EasSpectrum:
    """Amplitude spectrum sampled on a :class:`FrequencyGrid`."""

    grid: FrequencyGrid
    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=float)
        object.__setattr__(self, "amps", a)
        if a.shape != self.grid.freqs.shape:
            raise ValidationError(
                f"amplitude array length {a.size} does not match grid length {len(self.grid)}"
            )
        if not np.all(np.isfinite(a)):
            raise ValidationError("spectrum amplitudes contain NaN or Inf")
        if np.any(a < 0.0):
            raise ValidationError("spectrum amplitudes must be non-negative")

    @property
    def freqs(self) -> np.ndarray:
        return self.grid.freqs

    @property
    def f_min(self) -> float:
        return self.grid.f_min

    @property
    def f_max(self) -> float:
        return self.grid.f_max

    def scaled(self, factor: float) -> "EasSpectrum":
        return EasSpectrum(self.grid, self.amps * factor)


@dataclass(frozen=True)
class SpectralMoments:
    """Frequency-weighted integrals m_k = 2 * integral (2 pi f)^k |X(f)|^2 df."""

    m0: float
    m1: float
    m2: float

    def __post_init__(self):
        for name in ("m0", "m1", "m2"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValidationError(f"spectral moment {name}={v} must be finite and >= 0")


@dataclass(frozen=True)
class Oscillator:
    """Single-degree-of-freedom oscillator: natural frequency f0 (Hz), damping ratio zeta."""

    f0: float
    zeta: float = 0.05

    def __post_init__(self):
        if not (self.f0 > 0.0):
            raise ValidationError(f"oscillator natural frequency must be > 0, got {self.f0}")
        if not (0.0 < self.zeta < 1.0):
            raise ValidationError(f"damping ratio must be in (0, 1), got {self.zeta}")

    @property
    def period(self) -> float:
        return 1.0 / self.f0


@dataclass(frozen=True)
class Scenario:
    """Earthquake/site descriptors feeding duration and extrapolation.

    ``stress_drop`` (bar) and ``beta`` (source shear velocity, km/s) are
    optional; consumers fall back to a stress-drop relation or coefficient-file
    defaults when absent.  Coordinates are carried for provenance only.
    """

    magnitude: float
    r_rup: float
    v_s30: float
    site_class: int = 0
    stress_drop: float | None = None
    beta: float | None = None
    eq_coords: tuple[float, float] | None = None
    site_coords: tuple[float, float] | None = None

    def __post_init__(self):
        if self.r_rup < 0.0:
            raise ValidationError(f"rupture distance must be >= 0, got {self.r_rup}")
        if not (self.v_s30 > 0.0):
            raise ValidationError(f"V_S30 must be > 0, got {self.v_s30}")
        if self.site_class not in (0, 1):
            raise ValidationError(f"site class indicator must be 0 or 1, got {self.site_class}")
        if self.stress_drop is not None and not (self.stress_drop > 0.0):
            raise ValidationError(f"stress drop must be > 0 when given, got {self.stress_drop}")
        if self.beta is not None and not (self.beta > 0.0):
            raise ValidationError(f"source shear velocity must be > 0, got {self.beta}")


def oscillator_transfer(osc: Oscillator, grid: FrequencyGrid | np.ndarray) -> np.ndarray:
    """Magnitude of the oscillator's pseudo-acceleration transfer function.

    |H(f)| = f0^2 / sqrt((f^2 - f0^2)^2 + (2 zeta f0 f)^2); tends to 1 well
    below f0 and peaks near 1/(2 zeta) at resonance.  Multiplying an input
    acceleration spectrum pointwise by |H| gives the response spectrum of the
    oscillator.
    """
    f = grid.freqs if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    f0 = osc.f0
    return f0**2 / np.sqrt((f**2 - f0**2) ** 2 + (2.0 * osc.zeta * f0 * f) ** 2)


def apply_oscillator(spec: EasSpectrum, osc: Oscillator) -> EasSpectrum:
    """Pointwise product of a spectrum with the oscillator transfer magnitude."""
    return EasSpectrum(spec.grid, spec.amps * oscillator_transfer(osc, spec.grid))


def spectral_moments(spec: EasSpectrum) -> SpectralMoments:
    """Moments m_0, m_1, m_2 of a spectrum by trapezoidal quadrature.

    The rule runs on the native (possibly irregular, typically log-spaced)
    grid, so sampled products need no resampling.  Raises
    :class:`NumericalError` for an all-zero spectrum since m0 = 0 breaks every
    downstream ratio.
    """
    f = spec.freqs
    x2 = spec.amps**2
    if not np.any(x2 > 0.0):
        raise NumericalError("degenerate spectrum: all amplitudes are zero")
    w = 2.0 * math.pi * f
    m0 = 2.0 * np.trapezoid(x2, f)
    m1 = 2.0 * np.trapezoid(w * x2, f)
    m2 = 2.0 * np.trapezoid(w**2 * x2, f)
    return SpectralMoments(float(m0), float(m1), float(m2))


def bandwidth_delta(m: SpectralMoments, b: float = 0.2) -> tuple[float, float]:
    """Moment-based bandwidth delta = sqrt(1 - m1^2/(m0 m2)) and its
    semi-empirical power delta_e = delta**(1 + b).

    ``b`` is the non-negative exponent of the crossing model (default 0.2).
    """
    if m.m0 <= 0.0 or m.m2 <= 0.0:
        raise NumericalError("bandwidth undefined: m0 and m2 must be positive")
    ratio = m.m1**2 / (m.m0 * m.m2)
    if ratio > 1.0 + 1e-9:
        raise NumericalError(
            f"moment inconsistency: m1^2/(m0*m2) = {ratio} exceeds 1 beyond tolerance"
        )
    delta = math.sqrt(max(1.0 - ratio, 0.0))
    return delta, delta ** (1.0 + b)


def brune_corner_frequency(magnitude: float, stress_drop: float, beta: float) -> float:
    """Brune corner frequency f_c = 4.9e6 * beta * (dsigma / M0)^(1/3).

    ``stress_drop`` in bar, ``beta`` in km/s, seismic moment from
    M0 = 10^(1.5 M + 16.05) (dyne-cm).
    """
    m0 = 10.0 ** (1.5 * magnitude + 16.05)
    return 4.9e6 * beta * (stress_drop / m0) ** (1.0 / 3.0)


#: generic crustal shear velocity (km/s) used when a scenario does not set one
DEFAULT_BETA = 3.5


def corner_frequency(scn: Scenario, stress_drop_table=None) -> float:
    """Corner frequency for a scenario.

    A user-supplied stress drop takes precedence; otherwise the supplied
    magnitude -> stress-drop relation (any callable, e.g.
    :class:`rvtgm.duration.StressDropTable`) is evaluated.  With neither
    available the configuration is incomplete.
    """
    beta = scn.beta if scn.beta is not None else DEFAULT_BETA
    if scn.stress_drop is not None:
        stress_drop = scn.stress_drop
    elif stress_drop_table is not None:
        stress_drop = stress_drop_table(scn.magnitude)
    else:
        raise ValidationError(
            "corner frequency needs a stress drop: set Scenario.stress_drop "
            "or configure a stress-drop relation"
        )
    return brune_corner_frequency(scn.magnitude, stress_drop, beta)


def kappa_from_vs30(v_s30: float) -> float:
    """High-frequency decay parameter kappa (s) from the Vs30 relation
    ln(kappa) = -0.4 ln(Vs30/760) - 3.5."""
    if not (v_s30 > 0.0):
        raise ValidationError(f"V_S30 must be > 0, got {v_s30}")
    return math.exp(-0.4 * math.log(v_s30 / 760.0) - 3.5)


def _extension_points(f_edge: float, f_target: float, log_step: float) -> np.ndarray:
    """Ascending log-spaced points between ``f_target`` and ``f_edge``,
    excluding ``f_edge`` (already on the native grid) and landing exactly on
    ``f_target``.  ``log_step`` is the native decades-per-sample at the edge,
    so the extension keeps the adjacent points-per-decade density."""
    span = abs(math.log10(f_edge) - math.log10(f_target))
    n = max(int(math.ceil(span / log_step)), 1)
    if f_target < f_edge:  # extend downward
        pts = np.logspace(math.log10(f_target), math.log10(f_edge), n + 1)[:-1]
        pts[0] = f_target
    else:  # extend upward
        pts = np.logspace(math.log10(f_edge), math.log10(f_target), n + 1)[1:]
        pts[-1] = f_target
    return pts


def _anchor_mean(spec: EasSpectrum, mask: np.ndarray, model_vals: np.ndarray, what: str) -> float:
    if np.count_nonzero(mask) < 2:
        raise ValidationError(
            f"{what} anchor bin contains fewer than 2 grid samples; cannot fit anchor amplitude"
        )
    return float(np.mean(spec.amps[mask] / model_vals[mask]))


def extrapolate_low(spec: EasSpectrum, f_c: float, f_target: float = 0.01) -> EasSpectrum:
    """Extend a spectrum down to ``f_target`` with an omega-square source model.

    Omega(f) = f^2 / (1 + f^2/f_c^2); the anchor amplitude is the mean of
    EAS/Omega over the [1.00 f_min, 1.05 f_min] bin.  Amplitudes on the
    original band are preserved bit-identically.
    """
    f_min = spec.f_min
    if not (f_target < f_min):
        raise ValidationError(
            f"low-frequency target {f_target} Hz must lie below the spectrum minimum {f_min} Hz"
        )
    if not (f_c > 0.0):
        raise ValidationError(f"corner frequency must be > 0, got {f_c}")

    omega = lambda f: f**2 / (1.0 + f**2 / f_c**2)
    mask = spec.freqs <= 1.05 * f_min * (1.0 + 1e-12)
    a_fmin = _anchor_mean(spec, mask, omega(spec.freqs), "low-frequency")

    log_step = math.log10(spec.freqs[1]) - math.log10(spec.freqs[0])
    ext = _extension_points(f_min, f_target, log_step)
    freqs = np.concatenate([ext, spec.freqs])
    amps = np.concatenate([a_fmin * omega(ext), spec.amps])
    return EasSpectrum(FrequencyGrid(freqs), amps)


def extrapolate_high(spec: EasSpectrum, kappa: float, f_target: float = 100.0) -> EasSpectrum:
    """Extend a spectrum up to ``f_target`` with a kappa decay model.

    D(f) = exp(-pi kappa f); the anchor amplitude is the mean of EAS/D over
    the [0.95 f_max, 1.00 f_max] bin.  Amplitudes on the original band are
    preserved bit-identically.
    """
    f_max = spec.f_max
    if not (f_target > f_max):
        raise ValidationError(
            f"high-frequency target {f_target} Hz must lie above the spectrum maximum {f_max} Hz"
        )
    if not (kappa > 0.0):
        raise ValidationError(f"kappa must be > 0, got {kappa}")

    decay = lambda f: np.exp(-math.pi * kappa * f)
    mask = spec.freqs >= 0.95 * f_max * (1.0 - 1e-12)
    a_fmax = _anchor_mean(spec, mask, decay(spec.freqs), "high-frequency")

    log_step = math.log10(spec.freqs[-1]) - math.log10(spec.freqs[-2])
    ext = _extension_points(f_max, f_target, log_step)
    freqs = np.concatenate([spec.freqs, ext])
    amps = np.concatenate([spec.amps, a_fmax * decay(ext)])
    return EasSpectrum(FrequencyGrid(freqs), amps)
