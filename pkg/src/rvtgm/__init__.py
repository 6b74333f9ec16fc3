"""rvtgm: random-vibration-theory engine for converting effective amplitude
spectra to pseudo-spectral acceleration, non-ergodic PSA factors with
correlated epistemic sampling, aleatory residual decomposition, and
desk-scale hazard aggregation over a logic tree of realizations.
"""

__version__ = "0.1.0"

from .duration import (
    As96Coefficients,
    DurationResult,
    RatioTable,
    RmsDurationModel,
    StressDropTable,
    as96_d575,
    as96_interval,
    oscillator_duration,
    rms_duration,
)
from .engine import (
    PsaSpectrum,
    RvtConfig,
    default_period_grid,
    ground_motion_duration,
    prepare_spectrum,
    psa_single,
    psa_spectrum,
)
from .errors import NumericalError, RvtError, ValidationError
from .hazard import (
    Branch,
    HazardAggregate,
    HazardCurve,
    LogicTree,
    ScenarioRate,
    aggregate_tree,
    scenario_hazard,
    weighted_quantile,
)
from .nonergodic import (
    AleatoryCoefficients,
    CorrelationModel,
    FnergResult,
    NonErgodicField,
    aleatory_sigma,
    apply_backbone,
    fnerg_factor,
    fnerg_realizations,
    realize_eas,
    sample_field,
    smooth_dc0,
    summarize_factors,
)
from .peak_factor import (
    PeakFactorInputs,
    davenport_asymptote,
    expected_peak_factor,
    v75_cdf,
    zero_crossing_rate,
)
from .residuals import BinnedStats, Decomposition, ResidualTable, binned_stats, decompose
from .spectra import (
    EasSpectrum,
    FrequencyGrid,
    Oscillator,
    Scenario,
    SpectralMoments,
    apply_oscillator,
    bandwidth_delta,
    brune_corner_frequency,
    corner_frequency,
    extrapolate_high,
    extrapolate_low,
    kappa_from_vs30,
    oscillator_transfer,
    spectral_moments,
)
