"""Brute-force HOM coincidences from an explicit multimode state vector.

Shares no code with the analytic path in :mod:`spdchom.hom`: beam splitters
are dense unitaries obtained by exponentiating the two-mode mixing generator,
and click probabilities come from summing the full outcome distribution.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from .hom import CoincidencePair, SetupParams
from .source import SourceParams

__all__ = ["ORACLE_MAX_N", "beam_splitter_unitary", "oracle_cc"]

ORACLE_MAX_N = 4


def beam_splitter_unitary(eta: float, dim1: int, dim2: int) -> np.ndarray:
    """Two-mode beam-splitter tensor ``U[m1, m2, n1, n2]`` on a truncated space.

    Built as ``expm(theta (a1 a2^+ - a1^+ a2))`` with ``cos(theta)**2 = eta``,
    which sends ``a1^+ -> sqrt(eta) a1^+ + sqrt(1-eta) a2^+``. The generator
    is exponentiated on a cutoff large enough that every state with
    ``n1 < dim1, n2 < dim2`` evolves without leaving the space.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    cut = dim1 + dim2 - 1
    a = np.diag(np.sqrt(np.arange(1, cut)), k=1)
    eye = np.eye(cut)
    a1 = np.kron(a, eye)
    a2 = np.kron(eye, a)
    theta = math.acos(math.sqrt(eta))
    u = expm(theta * (a1 @ a2.T - a1.T @ a2))
    u = u.reshape(cut, cut, cut, cut)
    return u[:dim1, :dim2, :dim1, :dim2]


def _apply(state: np.ndarray, u: np.ndarray, i: int, j: int) -> np.ndarray:
    out = np.tensordot(u, state, axes=([2, 3], [i, j]))
    return np.moveaxis(out, [0, 1], [i, j])


def _click_probability(prob: np.ndarray, d1_axes, d2_axes, q1: float, q2: float) -> float:
    ndim = prob.ndim
    m1 = np.zeros([1] * ndim, dtype=int)
    m2 = np.zeros([1] * ndim, dtype=int)
    for axis in d1_axes:
        shape = [1] * ndim
        shape[axis] = prob.shape[axis]
        m1 = m1 + np.arange(prob.shape[axis]).reshape(shape)
    for axis in d2_axes:
        shape = [1] * ndim
        shape[axis] = prob.shape[axis]
        m2 = m2 + np.arange(prob.shape[axis]).reshape(shape)
    weight = (1.0 - np.power(q1, m1)) * (1.0 - np.power(q2, m2))
    return float(np.sum(prob * weight))


def _tmsv(lam: float, n_max: int, dims: list[int]) -> np.ndarray:
    state = np.zeros(dims)
    norm = math.sqrt(1.0 - lam * lam)
    for n in range(n_max + 1):
        state[(n, n) + (0,) * (len(dims) - 2)] = norm * lam**n
    return state


def oracle_cc(source: SourceParams, setup: SetupParams, n_max: int) -> CoincidencePair:
    """Coincidence probabilities at zero and large delay by dense simulation.

    Modes: A, B (pair), C, D (loss), E, F (mode mismatch), G, H (vacuum ports
    splitting E and F). The delayed run adds two more vacuum ports so that A
    and B each meet the 50/50 splitter alone.
    """
    if n_max > ORACLE_MAX_N:
        raise ValueError(f"oracle limited to n_max <= {ORACLE_MAX_N}, got {n_max}")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    d = n_max + 1
    q1, q2 = 1.0 - setup.eta_d1, 1.0 - setup.eta_d2
    A, B, C, D, E, F, G, H, I, J = range(10)

    def prepare(dims):
        state = _tmsv(source.lam, n_max, dims)
        state = _apply(state, beam_splitter_unitary(setup.eta_a, dims[A], d), A, C)
        state = _apply(state, beam_splitter_unitary(setup.eta_b, dims[B], d), B, D)
        state = _apply(state, beam_splitter_unitary(setup.eta_m, dims[A], d), A, E)
        state = _apply(state, beam_splitter_unitary(setup.eta_m, dims[B], d), B, F)
        half = beam_splitter_unitary(0.5, d, d)
        state = _apply(state, half, E, G)
        state = _apply(state, half, F, H)
        return state

    # zero delay: A and B interfere; outputs can carry up to 2 n_max photons
    wide = 2 * n_max + 1
    state = prepare([wide, wide] + [d] * 6)
    state = _apply(state, beam_splitter_unitary(0.5, wide, wide), A, B)
    prob = (state**2).sum(axis=(C, D))
    # after summing out C, D the axes are A, B, E, F, G, H
    zero_delay = _click_probability(prob, (0, 2, 3), (1, 4, 5), q1, q2)

    # large delay: A and B split against separate vacuum ports I and J
    state = prepare([d] * 10)
    half = beam_splitter_unitary(0.5, d, d)
    state = _apply(state, half, A, I)
    state = _apply(state, half, B, J)
    prob = (state**2).sum(axis=(C, D))
    # axes now A, B, E, F, G, H, I, J
    delayed = _click_probability(prob, (0, 7, 2, 3), (6, 1, 4, 5), q1, q2)
    return CoincidencePair(cc_min=zero_delay, cc_mean=delayed)
