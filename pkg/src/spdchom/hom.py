"""Hong-Ou-Mandel coincidences and visibility for a lossy, mode-mismatched TMSV source.

Setup: signal (A) and idler (B) of a two-mode squeezed vacuum each pass a
loss beam splitter (eta_a, eta_b), then a mode-matching splitter (eta_m) that
diverts photons into orthogonal modes E and F. A and B meet on a 50/50
splitter; E and F are routed 50/50 to the detectors without interfering.
Detectors are threshold detectors with efficiencies eta_d1 and eta_d2.

Two evaluation paths exist:

* :func:`coincidences` (and :func:`cc_min` / :func:`cc_mean`) collapses the
  sums analytically. The threshold factor expands to
  ``1 - q1**m1 - q2**m2 + q1**m1 * q2**m2`` with ``q = 1 - eta_d``; every term
  factorises over photons, so the binomial splits of E/F and the losses reduce
  to generating functions. Only the 50/50 interference distribution remains,
  and it is tabulated once with exact integer arithmetic.
* :func:`cc_min_direct` and :func:`cc_mean_direct` evaluate the full nested
  sums term by term. They are slow and exist to check the collapsed path.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .fock import log_binomial
from .source import (
    DEFAULT_TAIL_TOLERANCE,
    SourceParams,
    TruncationConfig,
    pair_number_pmf,
    truncation_level,
)

__all__ = [
    "SetupParams",
    "CoincidencePair",
    "VisibilityPoint",
    "DegenerateSetupError",
    "VisibilityCurveError",
    "REFERENCE_SETUP",
    "REFERENCE_N_MAX",
    "P_LIMIT",
    "balanced_splitter_pmf",
    "coincidences",
    "cc_min",
    "cc_mean",
    "visibility",
    "visibility_curve",
    "cc_min_direct",
    "cc_mean_direct",
    "joint_distribution",
    "visibility_many",
]

# Vacuum makes the visibility 0/0; p = 0 is evaluated here and flagged.
P_LIMIT = 1e-8

# Fixed pair-number cutoff under which the published visibility tables are
# reproduced to 5e-4; the converged model sits lower for p >= 0.5.
REFERENCE_N_MAX = 5


class DegenerateSetupError(ValueError):
    """The delayed-configuration coincidence rate is zero, so V is undefined."""


class VisibilityCurveError(ValueError):
    def __init__(self, p: float, cause: Exception):
        super().__init__(f"p={p!r}: {cause}")
        self.p = p
        self.cause = cause


@dataclass(frozen=True)
class SetupParams:
    """Transmittances and efficiencies of the interferometer, all in [0, 1]."""

    eta_a: float
    eta_b: float
    eta_m: float
    eta_d1: float
    eta_d2: float

    def __post_init__(self):
        for name in ("eta_a", "eta_b", "eta_m", "eta_d1", "eta_d2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")

    def with_eta_m(self, eta_m: float) -> "SetupParams":
        return replace(self, eta_m=eta_m)


REFERENCE_SETUP = SetupParams(eta_a=0.42, eta_b=0.29, eta_m=0.9878, eta_d1=0.68, eta_d2=0.70)


@dataclass(frozen=True)
class CoincidencePair:
    cc_min: float
    cc_mean: float

    @property
    def visibility(self) -> float:
        if self.cc_mean <= 0.0:
            raise DegenerateSetupError("cc_mean is zero; visibility undefined")
        return (self.cc_mean - self.cc_min) / self.cc_mean


@dataclass(frozen=True)
class VisibilityPoint:
    p: float
    v: float
    sigma_v: float | None = None
    limit: bool = False

    @property
    def clamped(self) -> float:
        return min(1.0, max(0.0, self.v))


# --- 50/50 interference table -------------------------------------------------

_TABLE_SIZES = (8, 16, 32, 48, 65)
_table_lock = threading.Lock()
_tables: dict[int, np.ndarray] = {}


def _krawtchouk_rows(k3: int, n_max: int) -> list[list[int]]:
    """Integer coefficients of (1+x)**k3 (1-x)**k4 for k4 = 0..n_max."""
    poly = [math.comb(k3, j) for j in range(k3 + 1)]
    rows = [poly]
    for _ in range(n_max):
        nxt = poly + [0]
        for i, c in enumerate(poly):
            nxt[i + 1] -= c
        poly = nxt
        rows.append(poly)
    return rows


def _build_table(size: int) -> np.ndarray:
    n_max = size - 1
    fact = [math.factorial(i) for i in range(2 * n_max + 1)]
    table = np.zeros((size, size, 2 * n_max + 1))
    for k3 in range(size):
        for k4, coeffs in enumerate(_krawtchouk_rows(k3, n_max)):
            total = k3 + k4
            denom = fact[k3] * fact[k4] << total
            for l, s in enumerate(coeffs):
                if s:
                    # exact integers until the final correctly-rounded division
                    table[k3, k4, l] = s * s * fact[l] * fact[total - l] / denom
    table.setflags(write=False)
    return table


def _interference_table(n_max: int) -> np.ndarray:
    """P[k3, k4, l]: probability of l photons in output A when k3 and k4
    indistinguishable photons enter a 50/50 splitter."""
    size = next((s for s in _TABLE_SIZES if s > n_max), n_max + 1)
    table = _tables.get(size)
    if table is None:
        with _table_lock:
            table = _tables.get(size)
            if table is None:
                table = _tables[size] = _build_table(size)
    return table[: n_max + 1, : n_max + 1, : 2 * n_max + 1]


def balanced_splitter_pmf(k3: int, k4: int) -> np.ndarray:
    """Output distribution of mode A for |k3, k4> on a 50/50 splitter."""
    return np.array(_interference_table(max(k3, k4))[k3, k4, : k3 + k4 + 1])


# --- collapsed evaluation -----------------------------------------------------


def _binomial_terms(n: int, x: float, y: float) -> np.ndarray:
    """C(n, k) x**k y**(n - k) for k = 0..n."""
    k = np.arange(n + 1)
    comb = np.array([math.comb(n, j) for j in range(n + 1)], dtype=float)
    return comb * np.power(x, k) * np.power(y, n - k)


def _click_kernels(n_max: int, q1: float, q2: float):
    table = _interference_table(n_max)
    l = np.arange(2 * n_max + 1)
    total = np.add.outer(np.arange(n_max + 1), np.arange(n_max + 1))
    rest = np.clip(total[:, :, None] - l, 0, None)
    q1_l = np.power(q1, l)
    q2_rest = np.power(q2, rest)
    g1 = table @ q1_l
    g2 = np.einsum("abl,abl->ab", table, q2_rest)
    g12 = np.einsum("abl,abl->ab", table * q1_l, q2_rest)
    return g1, g2, g12


def _resolve(source: SourceParams, trunc: TruncationConfig | None) -> tuple[int, np.ndarray]:
    trunc = trunc if trunc is not None else TruncationConfig()
    n_max = trunc.level_for(source)
    return n_max, pair_number_pmf(source, n_max)


def coincidences(
    source: SourceParams, setup: SetupParams, trunc: TruncationConfig | None = None
) -> CoincidencePair:
    """Per-pulse coincidence probabilities at zero delay and at large delay."""
    n_max, weights = _resolve(source, trunc)
    q1, q2 = 1.0 - setup.eta_d1, 1.0 - setup.eta_d2
    # photon-averaged no-click factors for a photon routed 50/50
    a1, a2, a12 = (1.0 + q1) / 2.0, (1.0 + q2) / 2.0, (q1 + q2) / 2.0
    g1, g2, g12 = _click_kernels(n_max, q1, q2)

    ea, eb, em = setup.eta_a, setup.eta_b, setup.eta_m
    min_terms = np.zeros(n_max + 1)
    mean_terms = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        sub = slice(0, n + 1)
        acc = 1.0
        for kernel, a, sign in ((g1, a1, -1.0), (g2, a2, -1.0), (g12, a12, 1.0)):
            h_a = _binomial_terms(n, ea * em, 1.0 - ea + ea * (1.0 - em) * a)
            h_b = _binomial_terms(n, eb * em, 1.0 - eb + eb * (1.0 - em) * a)
            acc += sign * (h_a @ kernel[sub, sub] @ h_b)
        min_terms[n] = acc

        def no_click(a):
            return ((1.0 - ea + ea * a) * (1.0 - eb + eb * a)) ** n

        mean_terms[n] = 1.0 - no_click(a1) - no_click(a2) + no_click(a12)
    # n = 0 contributes nothing in either configuration
    return CoincidencePair(
        cc_min=math.fsum(weights * min_terms), cc_mean=math.fsum(weights * mean_terms)
    )


def cc_min(source: SourceParams, setup: SetupParams, trunc: TruncationConfig | None = None) -> float:
    return coincidences(source, setup, trunc).cc_min


def cc_mean(source: SourceParams, setup: SetupParams, trunc: TruncationConfig | None = None) -> float:
    return coincidences(source, setup, trunc).cc_mean


def visibility(
    source: SourceParams, setup: SetupParams, trunc: TruncationConfig | None = None
) -> float:
    """Raw (unclamped) HOM visibility ``(cc_mean - cc_min) / cc_mean``.

    Dropping pair numbers above the cutoff moves each coincidence probability
    by at most the dropped tail mass, so V moves by at most
    ``2 * tail / cc_mean``. With a tolerance-derived cutoff the level is
    raised until that bound is below ``tail_tolerance``; a fixed ``n_max``
    is used as given.
    """
    trunc = trunc if trunc is not None else TruncationConfig()
    pair = coincidences(source, setup, trunc)
    if trunc.n_max is None and pair.cc_mean > 0.0:
        bound = 2.0 * trunc.tail_mass(source) / pair.cc_mean
        if bound > trunc.tail_tolerance:
            target = trunc.tail_tolerance * pair.cc_mean / 2.0
            n_max = truncation_level(source.lam, target, trunc.hard_cap)
            pair = coincidences(source, setup, replace(trunc, n_max=n_max))
    if pair.cc_mean <= 0.0:
        raise DegenerateSetupError(
            f"no coincidences without interference (p={source.p:g}, setup={setup}); "
            "visibility undefined"
        )
    return pair.visibility


def _curve_point(p: float, setup: SetupParams, trunc: TruncationConfig) -> VisibilityPoint:
    try:
        if p < 0 or math.isnan(p):
            raise ValueError("p must be >= 0")
        limit = p == 0.0
        source = SourceParams.from_p(P_LIMIT if limit else p)
        return VisibilityPoint(p=float(p), v=visibility(source, setup, trunc), limit=limit)
    except ValueError as exc:
        raise VisibilityCurveError(p, exc) from exc


def visibility_curve(
    p_grid: Iterable[float],
    setup: SetupParams,
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE,
    *,
    n_max: int | None = None,
    workers: int | None = None,
) -> list[VisibilityPoint]:
    """Visibility at each p, in input order. ``p = 0`` is reported as the
    ``P_LIMIT`` value with ``limit=True``."""
    trunc = TruncationConfig(n_max=n_max, tail_tolerance=tail_tolerance)
    grid = [float(p) for p in p_grid]
    if workers and workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda p: _curve_point(p, setup, trunc), grid))
    return [_curve_point(p, setup, trunc) for p in grid]


# --- literal nested sums ------------------------------------------------------


def _interference_amplitude(k3: int, k4: int, l: int) -> float:
    """Signed k5 sum of square-rooted binomial products (bracket before squaring)."""
    terms = []
    for k5 in range(max(0, l - k4), min(l, k3) + 1):
        log_mag = 0.5 * (
            log_binomial(k3, k5)
            + log_binomial(k4, l - k5)
            + log_binomial(l, k5)
            + log_binomial(k3 + k4 - l, k3 - k5)
        )
        term = math.exp(log_mag)
        terms.append(-term if (l - k5) % 2 else term)
    return math.fsum(terms)


def joint_distribution(
    source: SourceParams, setup: SetupParams, n_max: int
) -> Iterable[tuple[tuple[int, int, int, int, int, int], float]]:
    """Yield ``((n, k1, k2, k3, k4, l), P)`` for the photon distribution after
    the 50/50 splitter, before E and F are split: l photons in A,
    k3 + k4 - l in B, n - k1 in C, n - k2 in D, k1 - k3 in E, k2 - k4 in F."""
    lam2 = source.lam2
    ea, eb, em = setup.eta_a, setup.eta_b, setup.eta_m
    for n in range(n_max + 1):
        base = (1.0 - lam2) * lam2**n
        for k1 in range(n + 1):
            for k2 in range(n + 1):
                for k3 in range(k1 + 1):
                    for k4 in range(k2 + 1):
                        w = (
                            base
                            * math.comb(n, k1) * ea**k1 * (1 - ea) ** (n - k1)
                            * math.comb(n, k2) * eb**k2 * (1 - eb) ** (n - k2)
                            * math.comb(k1, k3) * math.comb(k2, k4)
                            * em ** (k3 + k4) * (1 - em) ** (k1 + k2 - k3 - k4)
                            * 0.5 ** (k3 + k4)
                        )
                        for l in range(k3 + k4 + 1):
                            amp = _interference_amplitude(k3, k4, l)
                            yield (n, k1, k2, k3, k4, l), w * amp * amp


def cc_min_direct(source: SourceParams, setup: SetupParams, n_max: int) -> float:
    """Zero-delay coincidence probability by explicit eight-index summation."""
    q1, q2 = 1.0 - setup.eta_d1, 1.0 - setup.eta_d2
    total = []
    for (n, k1, k2, k3, k4, l), p_x in joint_distribution(source, setup, n_max):
        if p_x == 0.0:
            continue
        e, f = k1 - k3, k2 - k4
        for k7 in range(e + 1):
            for k8 in range(f + 1):
                split = math.comb(e, k7) * math.comb(f, k8) * 0.5 ** (e + f)
                m1 = l + (f - k8) + k7
                m2 = (k3 + k4 - l) + (e - k7) + k8
                total.append((1.0 - q1**m1) * (1.0 - q2**m2) * p_x * split)
    return math.fsum(total)


def cc_mean_direct(source: SourceParams, setup: SetupParams, n_max: int) -> float:
    """Large-delay coincidence probability by explicit five-index summation."""
    lam2 = source.lam2
    q1, q2 = 1.0 - setup.eta_d1, 1.0 - setup.eta_d2
    ea, eb = setup.eta_a, setup.eta_b
    total = []
    for n in range(n_max + 1):
        base = (1.0 - lam2) * lam2**n
        for k1 in range(n + 1):
            for k2 in range(n + 1):
                for k3 in range(k1 + 1):
                    for k4 in range(k2 + 1):
                        prob = (
                            base
                            * math.comb(n, k1) * math.comb(n, k2)
                            * math.comb(k1, k3) * math.comb(k2, k4)
                            * ea**k1 * (1 - ea) ** (n - k1)
                            * eb**k2 * (1 - eb) ** (n - k2)
                            * 0.5 ** (k1 + k2)
                        )
                        m1 = k2 + k3 - k4
                        m2 = k1 - k3 + k4
                        total.append((1.0 - q1**m1) * (1.0 - q2**m2) * prob)
    return math.fsum(total)


def visibility_many(
    ps: Sequence[float], setup: SetupParams, trunc: TruncationConfig | None = None
) -> np.ndarray:
    """Raw visibilities at several p values (no limit handling)."""
    return np.array([visibility(SourceParams.from_p(p), setup, trunc) for p in ps])
