"""Reference grids and the table/curve artifacts regenerated by ``spdchom tables``."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .hom import REFERENCE_N_MAX, REFERENCE_SETUP, visibility_curve

NVSV_P_GRID = (0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0)

# (label, repetition rate, eta_m, p at ~30 mW / ~300 mW / ~3 W)
HIGH_POWER_ROWS = (
    ("76MHz", 76e6, 0.9878, (0.0092, 0.092, 0.92)),
    ("2.5GHz", 2.5e9, 0.9828, (0.00028, 0.0028, 0.028)),
)

NUMERICS_ETA_M = (0.9888, 0.9878, 0.9868, 0.9858, 0.9848)
NUMERICS_P_GRID = tuple(float(p) for p in np.geomspace(1e-4, 2e-2, 16))

# 76 MHz pump sweep, 3..30 mW, p proportional to power with 0.0092 at 30 mW
FIT_P_GRID = tuple(0.0092 * mw / 30.0 for mw in range(3, 31, 3))

_FMT = "{:.6f}"


def _p(p: float) -> str:
    return f"{p:.6g}"


def write_tables(directory: str | Path, workers: int | None = None) -> list[Path]:
    """Write table_nvsv.csv, table_high_power.csv and fig_numerics.csv.

    Tables use the fixed ``REFERENCE_N_MAX`` cutoff; table_nvsv.csv also
    carries the converged visibility for comparison.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    fixed = visibility_curve(NVSV_P_GRID, REFERENCE_SETUP, n_max=REFERENCE_N_MAX, workers=workers)
    converged = visibility_curve(NVSV_P_GRID, REFERENCE_SETUP, workers=workers)
    path = out / "table_nvsv.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "visibility", "visibility_converged"])
        for a, b in zip(fixed, converged):
            w.writerow([_p(a.p), _FMT.format(a.v), _FMT.format(b.v)])
    written.append(path)

    path = out / "table_high_power.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["laser", "rep_rate_hz", "eta_m", "p", "visibility"])
        for label, rate, eta_m, ps in HIGH_POWER_ROWS:
            setup = REFERENCE_SETUP.with_eta_m(eta_m)
            for pt in visibility_curve(ps, setup, n_max=REFERENCE_N_MAX, workers=workers):
                w.writerow([label, f"{rate:.6g}", f"{eta_m:.4f}", _p(pt.p), _FMT.format(pt.v)])
    written.append(path)

    path = out / "fig_numerics.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p"] + [f"eta_m_{e:.4f}" for e in NUMERICS_ETA_M])
        curves = [
            visibility_curve(NUMERICS_P_GRID, REFERENCE_SETUP.with_eta_m(e), n_max=REFERENCE_N_MAX)
            for e in NUMERICS_ETA_M
        ]
        for i, p in enumerate(NUMERICS_P_GRID):
            w.writerow([_p(p)] + [_FMT.format(c[i].v) for c in curves])
    written.append(path)
    return written
