import numpy as np
import pytest

from rvtgm.spectra import EasSpectrum, FrequencyGrid


@pytest.fixture
def rect_spectrum():
    """Near-ideal unit rectangle on (0, 1] Hz: flat amplitude 1, dense grid."""

    def make(points_per_decade=200, f_start=1e-5):
        n = int(round(points_per_decade * np.log10(1.0 / f_start))) + 1
        f = np.logspace(np.log10(f_start), 0.0, n)
        f[-1] = 1.0
        return EasSpectrum(FrequencyGrid(f), np.ones_like(f))

    return make


@pytest.fixture
def band_spectrum():
    """Flat band-limited spectrum, configurable band and amplitude."""

    def make(f_lo=0.5, f_hi=25.0, amp=0.02, n=200):
        f = np.linspace(f_lo, f_hi, n)
        return EasSpectrum(FrequencyGrid(f), np.full(n, amp))

    return make
