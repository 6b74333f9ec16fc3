"""Independent verification oracles for the test suite.

Stationary Gaussian records are synthesized by inverse transform of a target
amplitude spectrum with independent uniform random phases, so the realized
time-domain energy matches the target's zeroth moment by Parseval.  Peak
oscillator response comes from an exact piecewise-linear time-domain
integrator (state transition of the damped SDOF over each sample interval),
run over the record plus a free-decay tail.  Nothing here is used by the
production path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.signal import lfilter

from .errors import ValidationError
from .spectra import EasSpectrum, Oscillator


@dataclass(frozen=True)
class SyntheticRecord:
    """Acceleration samples at a fixed rate."""

    dt: float
    accel: np.ndarray

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ValidationError(f"sample interval must be > 0, got {self.dt}")
        object.__setattr__(self, "accel", np.asarray(self.accel, dtype=float))

    @property
    def duration(self) -> float:
        return self.dt * self.accel.size

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.dt


def synthesize(
    target: EasSpectrum, duration: float, seed: int, sample_rate: float | None = None
) -> SyntheticRecord:
    """Stationary random-phase record whose amplitude spectrum matches the
    target (log-log interpolated inside the band, zero outside).

    Raises if the target band exceeds the Nyquist frequency.
    """
    if sample_rate is None:
        sample_rate = 4.0 * target.f_max
    dt = 1.0 / sample_rate
    if target.f_max > 0.5 * sample_rate * (1.0 + 1e-12):
        raise ValidationError(
            f"aliasing: target spectrum extends to {target.f_max} Hz but Nyquist is "
            f"{0.5 * sample_rate} Hz"
        )
    n = int(round(duration * sample_rate))
    if n < 16:
        raise ValidationError("record too short to resolve the target band")
    freqs = np.fft.rfftfreq(n, dt)

    amps = np.zeros_like(freqs)
    band = (freqs >= target.f_min) & (freqs <= target.f_max)
    pos = target.amps > 0.0
    if np.count_nonzero(band) and np.count_nonzero(pos) >= 2:
        # log-log interpolation across the positive samples; a target that is
        # zero everywhere stays a zero record
        amps[band] = np.exp(
            np.interp(
                np.log(freqs[band]),
                np.log(target.freqs[pos]),
                np.log(target.amps[pos]),
            )
        )

    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * math.pi, freqs.size)
    coeffs = (amps / dt) * np.exp(1j * phases)
    coeffs[0] = 0.0  # zero-mean record
    if n % 2 == 0:
        coeffs[-1] = coeffs[-1].real  # Nyquist bin must stay real
    return SyntheticRecord(dt=dt, accel=np.fft.irfft(coeffs, n=n))


def _sdof_arma(osc: Oscillator, dt: float):
    """Exact discrete transfer of the damped SDOF (displacement output, unit
    base-acceleration forcing) for piecewise-linear input, as lfilter (b, a)
    coefficients.

    Derived from the state transition E = expm(M dt) and the exact integrals
    P = M^-1 (E - I), Q = M^-1 (dt E - P) that weight the interval endpoints.
    """
    w = 2.0 * math.pi * osc.f0
    m = np.array([[0.0, 1.0], [-w * w, -2.0 * osc.zeta * w]])
    e = expm(m * dt)
    eye = np.eye(2)
    p = np.linalg.solve(m, e - eye)
    q = np.linalg.solve(m, dt * e - p)
    v = np.array([0.0, -1.0])  # forcing enters the velocity equation
    b_start = (q / dt) @ v  # weight of the interval's left endpoint
    b_end = (p - q / dt) @ v  # weight of the right endpoint

    tr, det = np.trace(e), np.linalg.det(e)
    b0 = b_end[0]
    b1 = b_start[0] - e[1, 1] * b_end[0] + e[0, 1] * b_end[1]
    b2 = e[0, 1] * b_start[1] - e[1, 1] * b_start[0]
    return np.array([b0, b1, b2]), np.array([1.0, -tr, det])


def time_domain_peak(record: SyntheticRecord, osc: Oscillator) -> float:
    """Peak absolute pseudo-acceleration response w0^2 max|x(t)| of the
    oscillator to the record, including a decay tail of 10/(2 pi zeta f0)
    seconds after the excitation ends.

    Requires at least 20 samples per oscillator period for the peak of the
    sampled response to resolve the true maximum.
    """
    if record.dt > osc.period / 20.0:
        raise ValidationError(
            f"step size {record.dt} s too coarse for oscillator period {osc.period} s "
            "(need >= 20 samples per period)"
        )
    tail = 10.0 / (osc.zeta * 2.0 * math.pi * osc.f0)
    n_tail = int(math.ceil(tail / record.dt))
    u = np.concatenate([record.accel, np.zeros(n_tail)])
    b, a = _sdof_arma(osc, record.dt)
    x = lfilter(b, a, u)
    if not np.all(np.isfinite(x)):
        raise ValidationError("integrator produced non-finite response; reduce the step size")
    w0 = 2.0 * math.pi * osc.f0
    return float(w0 * w0 * np.max(np.abs(x)))


def ensemble_median_peak(
    target: EasSpectrum,
    duration: float,
    osc: Oscillator,
    n_seeds: int,
    base_seed: int = 0,
    sample_rate: float | None = None,
) -> float:
    """Median peak response over an ensemble of random-phase records."""
    peaks = np.empty(n_seeds)
    for i in range(n_seeds):
        rec = synthesize(target, duration, seed=base_seed + i, sample_rate=sample_rate)
        peaks[i] = time_domain_peak(rec, osc)
    return float(np.median(peaks))
