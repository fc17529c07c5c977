"""Closed-form rate arithmetic: 2n-fold coincidences, SNR in dB, mean-pair estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "RateParams",
    "PeakCounts",
    "coincidence_rate",
    "estimate_p",
    "snr_db",
    "snr_model",
    "floor_db_from_p",
    "calibrate_snr_floor",
]


@dataclass(frozen=True)
class RateParams:
    f: float
    p: float
    eta: float
    n_fold: int = 1

    def __post_init__(self):
        if not self.f > 0:
            raise ValueError(f"repetition rate must be positive, got {self.f}")
        if self.p < 0:
            raise ValueError(f"p must be >= 0, got {self.p}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if int(self.n_fold) != self.n_fold or self.n_fold < 1:
            raise ValueError(f"n_fold must be a positive integer, got {self.n_fold}")


@dataclass(frozen=True)
class PeakCounts:
    main: float
    side: float


def coincidence_rate(params: RateParams) -> float:
    """2n-fold coincidence rate ``f p**n eta**(2n)`` in counts per second."""
    n = params.n_fold
    return params.f * params.p**n * params.eta ** (2 * n)


def estimate_p(cc: float, f: float, eta: float) -> float:
    """Invert the single-source rate: ``p = cc / (f eta**2)``."""
    if not f > 0:
        raise ValueError(f"repetition rate must be positive, got {f}")
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if cc < 0:
        raise ValueError(f"coincidence rate must be >= 0, got {cc}")
    return cc / (f * eta * eta)


def snr_db(peaks: PeakCounts) -> float:
    """``10 log10((main - side) / side)``."""
    if not peaks.side > 0:
        raise ValueError(f"side peak must be positive, got {peaks.side}")
    if peaks.main <= peaks.side:
        raise ValueError(
            f"main peak ({peaks.main}) must exceed side peak ({peaks.side}) for a defined SNR"
        )
    return 10.0 * math.log10((peaks.main - peaks.side) / peaks.side)


def floor_db_from_p(p_floor: float) -> float:
    return -10.0 * math.log10(p_floor)


def snr_model(p: float, floor_db: float | None = None) -> float:
    """Model SNR in dB: ``-10 log10(p + p_floor)``.

    Without a floor the SNR is simply 1/p. ``floor_db`` is the level the SNR
    saturates at as p -> 0, i.e. ``p_floor = 10**(-floor_db / 10)``.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    p_floor = 0.0 if floor_db is None else 10.0 ** (-floor_db / 10.0)
    return -10.0 * math.log10(p + p_floor)


def calibrate_snr_floor(snr_high_db: float, snr_low_db: float, power_ratio: float) -> tuple[float, float]:
    """Solve for ``(p_high, floor_db)`` from two SNR readings.

    ``snr_high_db`` is measured at mean pair number p_high and ``snr_low_db``
    at ``p_high / power_ratio``. Returns the p_high and floor that make
    :func:`snr_model` pass through both points.
    """
    if not power_ratio > 1:
        raise ValueError("power_ratio must exceed 1")
    total_high = 10.0 ** (-snr_high_db / 10.0)
    total_low = 10.0 ** (-snr_low_db / 10.0)
    p_high = (total_high - total_low) / (1.0 - 1.0 / power_ratio)
    p_floor = total_high - p_high
    if p_high <= 0 or p_floor <= 0:
        raise ValueError("readings are not consistent with a positive floor")
    return p_high, floor_db_from_p(p_floor)
