"""Fock-basis primitives: beam-splitter amplitudes, binomial loss, log combinatorics.

The beam splitter with transmittance ``eta`` maps creation operators as::

    a1^+ -> sqrt(eta) a1^+ + sqrt(1 - eta) a2^+
    a2^+ -> -sqrt(1 - eta) a1^+ + sqrt(eta) a2^+

so every amplitude is real and photons reflected out of mode 2 pick up a
factor of -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FockPair",
    "BsAmplitudeTable",
    "LossPmf",
    "log_factorial",
    "log_binomial",
    "bs_output_amplitudes",
    "loss_pmf",
    "binomial_identity_check",
]

# Exact factorials up to this size are logged once; lgamma beyond.
_EXACT_LIMIT = 256
_LOG_FACTORIALS = tuple(math.log(math.factorial(n)) for n in range(_EXACT_LIMIT + 1))


@dataclass(frozen=True, order=True)
class FockPair:
    """Two-mode number state |n1>|n2>."""

    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError(f"photon counts must be non-negative, got ({self.n1}, {self.n2})")

    @property
    def total(self) -> int:
        return self.n1 + self.n2


@dataclass(frozen=True)
class BsAmplitudeTable:
    input: FockPair
    transmittance: float
    amplitudes: dict[FockPair, float] = field(default_factory=dict)

    def __getitem__(self, out) -> float:
        if not isinstance(out, FockPair):
            out = FockPair(*out)
        return self.amplitudes.get(out, 0.0)

    def probabilities(self) -> dict[FockPair, float]:
        return {k: a * a for k, a in self.amplitudes.items()}

    def norm(self) -> float:
        return math.fsum(a * a for a in self.amplitudes.values())


@dataclass(frozen=True)
class LossPmf:
    input_count: int
    transmittance: float
    pmf: np.ndarray


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0 or math.isnan(eta):
        raise ValueError(f"transmittance must lie in [0, 1], got {eta}")
    return eta


def _log_pow(base: float, exponent: float) -> float:
    # 0**0 == 1 convention
    if exponent == 0:
        return 0.0
    if base == 0.0:
        return -math.inf
    return exponent * math.log(base)


def log_factorial(n: int) -> float:
    """Return ``ln(n!)``."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n <= _EXACT_LIMIT:
        return _LOG_FACTORIALS[n]
    return math.lgamma(n + 1.0)


def log_binomial(n: int, k: int) -> float:
    if k < 0 or k > n:
        return -math.inf
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k)


def bs_output_amplitudes(input: FockPair | tuple[int, int], eta: float) -> BsAmplitudeTable:
    """Expand a beam splitter acting on ``|n1, n2>`` into output number states.

    Terms of the double sum over transmitted photon numbers (k1 from mode 1,
    k2 from mode 2) are grouped by the output ``|k1 + k2, n1 + n2 - k1 - k2>``.
    Each term is evaluated as sign * exp(log magnitude) and groups are
    accumulated with ``math.fsum``.
    """
    if not isinstance(input, FockPair):
        input = FockPair(*input)
    eta = _check_eta(eta)
    n1, n2 = input.n1, input.n2
    total = n1 + n2
    prefactor = -0.5 * (log_factorial(n1) + log_factorial(n2))
    log_t = 0.5 * math.log(eta) if eta > 0 else None
    log_r = 0.5 * math.log(1.0 - eta) if eta < 1 else None

    def log_sqrt_pow(log_base, e):
        if e == 0:
            return 0.0
        return -math.inf if log_base is None else e * log_base

    groups: dict[int, list[float]] = {}
    for k1 in range(n1 + 1):
        for k2 in range(n2 + 1):
            log_mag = (
                prefactor
                + log_binomial(n1, k1)
                + log_binomial(n2, k2)
                + log_sqrt_pow(log_t, n2 + k1 - k2)
                + log_sqrt_pow(log_r, n1 - k1 + k2)
                + 0.5 * (log_factorial(k1 + k2) + log_factorial(total - k1 - k2))
            )
            if log_mag == -math.inf:
                continue
            term = math.exp(log_mag)
            groups.setdefault(k1 + k2, []).append(-term if k2 % 2 else term)

    amplitudes = {}
    for m1, terms in sorted(groups.items()):
        amp = math.fsum(terms)
        if amp != 0.0:
            amplitudes[FockPair(m1, total - m1)] = amp
    return BsAmplitudeTable(input=input, transmittance=eta, amplitudes=amplitudes)


def loss_pmf(n: int, eta: float) -> LossPmf:
    """Binomial survival distribution of ``n`` photons through transmittance ``eta``."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    eta = _check_eta(eta)
    pmf = np.empty(n + 1)
    for k in range(n + 1):
        pmf[k] = math.exp(log_binomial(n, k) + _log_pow(eta, k) + _log_pow(1.0 - eta, n - k))
    return LossPmf(input_count=n, transmittance=eta, pmf=pmf)


def binomial_identity_check(k3: int, k4: int, k5: int, k6: int) -> tuple[float, float]:
    """Evaluate both sides of the balanced-splitter binomial identity.

    lhs = C(k3,k5) C(k4,k6) sqrt((k5+k6)! (k3+k4-k5-k6)! / (k3! k4!))
    rhs = sqrt(C(k3,k5) C(k4,k6) C(k5+k6,k5) C(k3+k4-k5-k6, k3-k5))
    """
    if not (0 <= k5 <= k3 and 0 <= k6 <= k4):
        raise ValueError("require 0 <= k5 <= k3 and 0 <= k6 <= k4")
    l = k5 + k6
    rest = k3 + k4 - l
    lhs = math.exp(
        log_binomial(k3, k5)
        + log_binomial(k4, k6)
        + 0.5 * (log_factorial(l) + log_factorial(rest) - log_factorial(k3) - log_factorial(k4))
    )
    rhs = math.exp(
        0.5
        * (
            log_binomial(k3, k5)
            + log_binomial(k4, k6)
            + log_binomial(l, k5)
            + log_binomial(rest, k3 - k5)
        )
    )
    return lhs, rhs
