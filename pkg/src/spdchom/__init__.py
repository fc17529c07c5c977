"""Pulsed SPDC twin-photon source: HOM visibility, coincidence rates and ToA SNR.

The core model takes a two-mode squeezed vacuum through loss, mode mismatch
and a 50/50 splitter onto threshold detectors, and evaluates the coincidence
probabilities with and without interference in a truncated Fock space.
"""

from .counting import (
    PeakCounts,
    RateParams,
    coincidence_rate,
    estimate_p,
    snr_db,
    snr_model,
)
from .fit import FitProblem, FitResult, fit_eta_m
from .hom import (
    REFERENCE_N_MAX,
    REFERENCE_SETUP,
    CoincidencePair,
    SetupParams,
    VisibilityPoint,
    cc_mean,
    cc_min,
    coincidences,
    visibility,
    visibility_curve,
)
from .oracle import oracle_cc
from .source import SourceParams, TruncationConfig, lambda_from_p, p_from_lambda
from .toa import ToAConfig, ToAHistogram, extract_snr, simulate_histogram

__version__ = "0.1.0"
