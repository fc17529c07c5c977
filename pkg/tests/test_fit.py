import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from spdchom.fit import (
    FitError,
    FitProblem,
    fit_eta_m,
    golden_section,
    read_points_csv,
    write_points_csv,
)
from spdchom.hom import REFERENCE_SETUP, VisibilityPoint, visibility_many
from spdchom.tables import FIT_P_GRID, NUMERICS_P_GRID

TRUE_ETA_M = 0.9878


def model_points(grid, eta_m=TRUE_ETA_M, sigma=None):
    vs = visibility_many(grid, REFERENCE_SETUP.with_eta_m(eta_m))
    return [VisibilityPoint(float(p), float(v), sigma) for p, v in zip(grid, vs)]


class TestGoldenSection:
    @pytest.mark.parametrize("centre", [0.13, 0.5, 0.91])
    def test_matches_scipy(self, centre):
        f = lambda x: (x - centre) ** 2 + 0.1 * (x - centre) ** 4
        x, fx, bracket, evals = golden_section(f, 0.0, 1.0, tol=1e-8)
        ref = minimize_scalar(f, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-10})
        assert x == pytest.approx(ref.x, abs=1e-7)
        assert bracket[1] - bracket[0] <= 1e-8
        assert evals < 60

    def test_edge_minimum(self):
        x, fx, _, _ = golden_section(lambda x: x, 0.0, 1.0)
        assert x == 0.0 and fx == 0.0

    def test_eval_limit(self):
        with pytest.raises(FitError):
            golden_section(lambda x: x * x, -1.0, 1.0, tol=1e-12, max_evals=20)


class TestFit:
    def test_noiseless_round_trip(self):
        result = fit_eta_m(FitProblem(model_points(NUMERICS_P_GRID), REFERENCE_SETUP))
        assert result.eta_m == pytest.approx(TRUE_ETA_M, abs=1e-4)
        assert 0.90 <= result.eta_m <= 1.00
        assert result.evaluations <= 200
        assert result.bracket[1] - result.bracket[0] <= 1e-5

    def test_two_exact_points(self):
        # the default 1e-5 bracket leaves ~2e-8; a tight bracket interpolates exactly
        result = fit_eta_m(FitProblem(model_points([0.01, 0.1]), REFERENCE_SETUP), tol=1e-12)
        assert result.residual_rms == pytest.approx(0.0, abs=1e-10)
        assert result.eta_m == pytest.approx(TRUE_ETA_M, abs=1e-9)

    def test_uniform_reweighting(self):
        rng = np.random.default_rng(5)
        points = model_points(FIT_P_GRID)
        noisy = [VisibilityPoint(pt.p, pt.v + rng.normal(0, 0.004), 0.004) for pt in points]
        scaled = [VisibilityPoint(pt.p, pt.v, 0.04) for pt in noisy]
        a = fit_eta_m(FitProblem(noisy, REFERENCE_SETUP, weighting="inverse-variance"))
        b = fit_eta_m(FitProblem(scaled, REFERENCE_SETUP, weighting="inverse-variance"))
        c = fit_eta_m(FitProblem(noisy, REFERENCE_SETUP))
        assert a.eta_m == b.eta_m == c.eta_m

    def test_local_optimality(self):
        rng = np.random.default_rng(9)
        noisy = [VisibilityPoint(pt.p, pt.v + rng.normal(0, 0.004)) for pt in model_points(FIT_P_GRID)]
        result = fit_eta_m(FitProblem(noisy, REFERENCE_SETUP))
        grid = np.array([pt.p for pt in noisy])
        vs = np.array([pt.v for pt in noisy])

        def rms(eta_m):
            return np.sqrt(np.mean((visibility_many(grid, REFERENCE_SETUP.with_eta_m(eta_m)) - vs) ** 2))

        assert result.residual_rms == pytest.approx(rms(result.eta_m), rel=1e-9)
        for step in (-1e-3, 1e-3):
            assert result.residual_rms <= rms(result.eta_m + step)

    def test_model_increasing_in_eta_m(self):
        h = 1e-4
        up = visibility_many(FIT_P_GRID, REFERENCE_SETUP.with_eta_m(TRUE_ETA_M + h))
        down = visibility_many(FIT_P_GRID, REFERENCE_SETUP.with_eta_m(TRUE_ETA_M - h))
        assert np.all((up - down) / (2 * h) > 0)

    def test_p_scale(self):
        points = model_points(NUMERICS_P_GRID)
        shifted = [VisibilityPoint(pt.p / 1.3, pt.v) for pt in points]
        result = fit_eta_m(FitProblem(shifted, REFERENCE_SETUP, fit_p_scale=True))
        assert result.p_scale == pytest.approx(1.3, rel=2e-2)
        assert result.eta_m == pytest.approx(TRUE_ETA_M, abs=5e-4)


class TestProblemValidation:
    def test_identical_points(self):
        pts = [VisibilityPoint(0.01, 0.96)] * 3
        with pytest.raises(FitError):
            fit_eta_m(FitProblem(pts, REFERENCE_SETUP))

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(data=[VisibilityPoint(0.01, 0.96)]),
            dict(eta_m_bounds=(0.99, 0.95)),
            dict(eta_m_bounds=(0.9, 1.1)),
            dict(weighting="inverse-variance"),
            dict(weighting="median"),
        ],
    )
    def test_invalid(self, kwargs):
        base = dict(data=model_points([0.01, 0.1]), fixed_setup=REFERENCE_SETUP)
        base.update(kwargs)
        with pytest.raises(ValueError):
            FitProblem(**base)


class TestCsv:
    def test_round_trip(self, tmp_path):
        points = model_points([0.01, 0.1], sigma=0.004)
        path = tmp_path / "pts.csv"
        write_points_csv(path, points)
        assert path.read_text().splitlines()[0] == "p,v,sigma_v"
        assert read_points_csv(path) == points

    def test_without_sigma(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("p,v\n0.01,0.96\n0.1,0.85\n")
        assert read_points_csv(path) == [VisibilityPoint(0.01, 0.96), VisibilityPoint(0.1, 0.85)]

    def test_bad_header(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("pp,v\n0.01,0.96\n")
        with pytest.raises(ValueError):
            read_points_csv(path)
