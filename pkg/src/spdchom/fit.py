"""Least-squares estimate of the mode-matching efficiency from (p, V) data."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .hom import SetupParams, VisibilityPoint, visibility
from .source import DEFAULT_TAIL_TOLERANCE, SourceParams, TruncationConfig

__all__ = [
    "FitError",
    "FitProblem",
    "FitResult",
    "golden_section",
    "fit_eta_m",
    "read_points_csv",
    "write_points_csv",
]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class FitError(RuntimeError):
    pass


@dataclass
class FitProblem:
    data: Sequence[VisibilityPoint]
    fixed_setup: SetupParams
    eta_m_bounds: tuple[float, float] = (0.90, 1.00)
    weighting: str = "uniform"
    fit_p_scale: bool = False
    p_scale_bounds: tuple[float, float] = (0.5, 2.0)

    def __post_init__(self):
        if len(self.data) < 2:
            raise ValueError("need at least two data points")
        lo, hi = self.eta_m_bounds
        if not 0.0 <= lo < hi <= 1.0:
            raise ValueError(f"eta_m bounds must satisfy 0 <= lo < hi <= 1, got {self.eta_m_bounds}")
        if self.weighting not in ("uniform", "inverse-variance"):
            raise ValueError(f"unknown weighting {self.weighting!r}")
        if self.weighting == "inverse-variance":
            if any(pt.sigma_v is None or not pt.sigma_v > 0 for pt in self.data):
                raise ValueError("inverse-variance weighting needs a positive sigma_v on every point")

    def weights(self) -> np.ndarray:
        if self.weighting == "uniform":
            return np.ones(len(self.data))
        return np.array([1.0 / pt.sigma_v**2 for pt in self.data])


@dataclass
class FitResult:
    eta_m: float
    residual_rms: float
    evaluations: int
    p_scale: float = 1.0
    converged: bool = True
    bracket: tuple[float, float] = field(default=(0.0, 0.0))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def golden_section(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-5, max_evals: int = 200
) -> tuple[float, float, tuple[float, float], int]:
    """Minimise a unimodal ``f`` on ``[lo, hi]``.

    Returns ``(x_best, f_best, final_bracket, evaluations)``. The bracket
    ends narrower than ``tol``; the endpoints themselves are evaluated so a
    minimum sitting on a bound is returned exactly.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol:
        if evals >= max_evals:
            raise FitError(f"golden-section did not reach width {tol:g} within {max_evals} evaluations")
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        evals += 1
    x_best, f_best = (c, fc) if fc <= fd else (d, fd)
    for edge in (lo, hi):
        if abs(x_best - edge) < 2 * tol:
            f_edge = f(edge)
            evals += 1
            if f_edge < f_best:
                x_best, f_best = edge, f_edge
    return x_best, f_best, (a, b), evals


def fit_eta_m(
    problem: FitProblem,
    trunc_tolerance: float = DEFAULT_TAIL_TOLERANCE,
    *,
    tol: float = 1e-5,
    max_evals: int = 200,
) -> FitResult:
    """Fit eta_m by golden-section search on the weighted squared residuals.

    ``max_evals`` bounds the eta_m search; with ``fit_p_scale`` each eta_m
    trial runs an inner search over the p multiplier, and ``evaluations``
    counts every objective evaluation.
    """
    ps = np.array([pt.p for pt in problem.data], dtype=float)
    vs = np.array([pt.v for pt in problem.data], dtype=float)
    if np.all(ps == ps[0]) and np.all(vs == vs[0]):
        raise FitError("all data points are identical")
    weights = problem.weights()
    weights = weights / weights.sum()
    trunc = TruncationConfig(tail_tolerance=trunc_tolerance)
    sources_cache: dict[float, list[SourceParams]] = {}
    counter = [0]

    def sources(scale):
        if scale not in sources_cache:
            sources_cache[scale] = [SourceParams.from_p(p * scale) for p in ps]
        return sources_cache[scale]

    def objective(eta_m, scale=1.0):
        counter[0] += 1
        setup = problem.fixed_setup.with_eta_m(eta_m)
        model = np.array([visibility(s, setup, trunc) for s in sources(scale)])
        return float(np.sum(weights * (model - vs) ** 2))

    best_scale = {}

    def outer(eta_m):
        if not problem.fit_p_scale:
            return objective(eta_m)
        lo, hi = problem.p_scale_bounds
        # search log(scale) so the bracket is symmetric around 1
        x, fx, _, _ = golden_section(
            lambda u: objective(eta_m, math.exp(u)), math.log(lo), math.log(hi), tol=1e-4
        )
        best_scale[eta_m] = math.exp(x)
        return fx

    lo, hi = problem.eta_m_bounds
    eta, f_best, bracket, _ = golden_section(outer, lo, hi, tol=tol, max_evals=max_evals)
    return FitResult(
        eta_m=eta,
        residual_rms=math.sqrt(max(f_best, 0.0)),
        evaluations=counter[0],
        p_scale=best_scale.get(eta, 1.0),
        bracket=bracket,
    )


def read_points_csv(path: str | Path) -> list[VisibilityPoint]:
    """Read ``p,v[,sigma_v]`` rows."""
    points = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if fields[:2] != ["p", "v"] or fields[2:] not in ([], ["sigma_v"]):
            raise ValueError(f"expected header p,v[,sigma_v], got {fields}")
        for row in reader:
            sigma = row.get("sigma_v")
            points.append(
                VisibilityPoint(
                    p=float(row["p"]),
                    v=float(row["v"]),
                    sigma_v=float(sigma) if sigma not in (None, "") else None,
                )
            )
    return points


def write_points_csv(path: str | Path, points: Sequence[VisibilityPoint]) -> None:
    with_sigma = any(pt.sigma_v is not None for pt in points)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["p", "v", "sigma_v"] if with_sigma else ["p", "v"])
        for pt in points:
            row = [repr(pt.p), repr(pt.v)]
            if with_sigma:
                row.append("" if pt.sigma_v is None else repr(pt.sigma_v))
            writer.writerow(row)
