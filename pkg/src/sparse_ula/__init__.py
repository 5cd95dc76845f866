"""Sparse uniform linear arrays for multi-user uplink: beam patterns, lobe
collision probabilities, analytic rate distributions and Monte Carlo checks."""

from . import kernels
from .analytic import (
    AnalyticScenario, CrossoverThresholds, TwoLobeModel, collision_prob_collocated,
    collision_prob_exact, collision_prob_gap, collision_prob_numeric, crossover_thresholds,
    fit_residual, fit_two_lobe, lobe_collision_prob, band_edge_g_main, rate_cdf_binomial,
    rate_cdf_gaussian, two_lobe_gain,
)
from .array import (
    ArrayConfig, beam_gain, correlation_from_channels, grating_lobe_positions,
    main_lobe_beamwidth, main_lobe_nulls, steering_vector,
)
from .beamform import (
    Beamformer, SinrReport, UplinkSnapshot, rate_from_sinr, sinr, sinr_mmse, sinr_mrc,
    sinr_zf,
)
from .channel import OneRingParams, UserPlacement, los_channel, one_ring_channel
from .errors import (
    DegenerateChannelError, DimensionError, NoCrossoverError, NumericalError, ParameterError,
    SingularInterferenceError, SingularMatrixError,
)
from .montecarlo import (
    Scenario, delta_histogram, simulate_rate_cdf, simulate_rates,
    simulate_two_lobe_rate_cdf, simulate_two_lobe_rates,
)
from .series import DistributionSeries, empirical_cdf, kolmogorov_distance, read_series, write_series

__version__ = "0.1.0"
