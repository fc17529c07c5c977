"""Two-mode squeezed vacuum: squeezing parameter, pair statistics, truncation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TruncationError",
    "SourceParams",
    "TruncationConfig",
    "lambda_from_p",
    "p_from_lambda",
    "pair_number_pmf",
    "truncation_level",
    "DEFAULT_TAIL_TOLERANCE",
    "DEFAULT_HARD_CAP",
]

DEFAULT_TAIL_TOLERANCE = 1e-9
DEFAULT_HARD_CAP = 64


class TruncationError(ValueError):
    """The Fock cutoff needed for the requested tail tolerance exceeds the cap."""


def lambda_from_p(p: float) -> float:
    if p < 0 or math.isnan(p):
        raise ValueError(f"mean pair number p must be >= 0, got {p}")
    return math.sqrt(p / (1.0 + p))


def p_from_lambda(lam: float) -> float:
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"squeezing parameter must lie in [0, 1), got {lam}")
    lam2 = lam * lam
    return lam2 / (1.0 - lam2)


@dataclass(frozen=True)
class SourceParams:
    """Squeezing parameter of the pair source. Build with :meth:`from_p`."""

    lam: float

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"squeezing parameter must lie in [0, 1), got {self.lam}")

    @classmethod
    def from_p(cls, p: float) -> "SourceParams":
        return cls(lambda_from_p(p))

    @property
    def p(self) -> float:
        return p_from_lambda(self.lam)

    @property
    def lam2(self) -> float:
        return self.lam * self.lam


def truncation_level(
    lam: float, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE, hard_cap: int = DEFAULT_HARD_CAP
) -> int:
    """Smallest N with ``lam**(2 (N + 1)) <= tail_tolerance``.

    Raises TruncationError when that N exceeds ``hard_cap``.
    """
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"squeezing parameter must lie in [0, 1), got {lam}")
    if not tail_tolerance > 0:
        raise ValueError(f"tail_tolerance must be positive, got {tail_tolerance}")
    if lam == 0.0 or tail_tolerance >= 1.0:
        return 0
    lam2 = lam * lam
    if lam2 <= tail_tolerance:
        return 0
    n = max(0, math.ceil(math.log(tail_tolerance) / math.log(lam2)) - 1)
    # guard the log estimate against rounding on either side
    while n > 0 and lam2 ** n <= tail_tolerance:
        n -= 1
    while lam2 ** (n + 1) > tail_tolerance:
        n += 1
    if n > hard_cap:
        raise TruncationError(
            f"lambda={lam:.6g} needs n_max={n} for tail {tail_tolerance:g}, above cap {hard_cap}"
        )
    return n


@dataclass(frozen=True)
class TruncationConfig:
    """Fock cutoff policy.

    With ``n_max=None`` the cutoff is derived per source from
    ``tail_tolerance``. A fixed ``n_max`` is used verbatim, whatever tail
    it leaves behind.
    """

    n_max: int | None = None
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE
    hard_cap: int = DEFAULT_HARD_CAP

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 0:
            raise ValueError(f"n_max must be non-negative, got {self.n_max}")
        if not self.tail_tolerance > 0:
            raise ValueError(f"tail_tolerance must be positive, got {self.tail_tolerance}")

    def level_for(self, source: SourceParams) -> int:
        if self.n_max is not None:
            return self.n_max
        return truncation_level(source.lam, self.tail_tolerance, self.hard_cap)

    def tail_mass(self, source: SourceParams) -> float:
        """Probability of the pair numbers dropped by the cutoff."""
        return source.lam2 ** (self.level_for(source) + 1)


def pair_number_pmf(source: SourceParams, trunc: TruncationConfig | int) -> np.ndarray:
    """``(1 - lam^2) lam^(2n)`` for n = 0..n_max."""
    n_max = trunc if isinstance(trunc, int) else trunc.level_for(source)
    lam2 = source.lam2
    return (1.0 - lam2) * lam2 ** np.arange(n_max + 1)
