import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spdchom.hom import (
    P_LIMIT,
    REFERENCE_N_MAX,
    REFERENCE_SETUP,
    DegenerateSetupError,
    SetupParams,
    VisibilityCurveError,
    balanced_splitter_pmf,
    cc_mean,
    cc_mean_direct,
    cc_min,
    cc_min_direct,
    coincidences,
    joint_distribution,
    visibility,
    visibility_curve,
)
from spdchom.oracle import oracle_cc
from spdchom.source import SourceParams, TruncationConfig, truncation_level
from spdchom.tables import NUMERICS_ETA_M, NVSV_P_GRID

PERFECT = SetupParams(1.0, 1.0, 1.0, 1.0, 1.0)
REF5 = TruncationConfig(n_max=REFERENCE_N_MAX)


def random_tuples(count, seed=2024):
    rng = np.random.default_rng(seed)
    for i in range(count):
        p = (0.05, 0.3)[i % 2]
        yield SourceParams.from_p(p), SetupParams(*rng.uniform(0.2, 1.0, 5))


class TestOracleEquivalence:
    @pytest.mark.parametrize("source, setup", list(random_tuples(20)))
    def test_collapsed_matches_oracle(self, source, setup):
        fast = coincidences(source, setup, TruncationConfig(n_max=3))
        slow = oracle_cc(source, setup, 3)
        assert fast.cc_min == pytest.approx(slow.cc_min, abs=1e-10)
        assert fast.cc_mean == pytest.approx(slow.cc_mean, abs=1e-10)

    @pytest.mark.parametrize("source, setup", list(random_tuples(6, seed=7)))
    def test_literal_sums_match_collapsed(self, source, setup):
        fast = coincidences(source, setup, TruncationConfig(n_max=3))
        assert cc_min_direct(source, setup, 3) == pytest.approx(fast.cc_min, abs=1e-12)
        assert cc_mean_direct(source, setup, 3) == pytest.approx(fast.cc_mean, abs=1e-12)

    def test_oracle_single_pair_hom(self):
        pair = oracle_cc(SourceParams.from_p(0.1), PERFECT, 1)
        assert pair.cc_min == pytest.approx(0.0, abs=1e-14)
        assert pair.cc_mean > 0

    def test_oracle_no_overlap(self):
        setup = REFERENCE_SETUP.with_eta_m(0.0)
        pair = oracle_cc(SourceParams.from_p(0.2), setup, 2)
        assert pair.cc_min == pytest.approx(pair.cc_mean, abs=1e-14)

    def test_oracle_rejects_large_cutoff(self):
        with pytest.raises(ValueError):
            oracle_cc(SourceParams.from_p(0.1), REFERENCE_SETUP, 5)


class TestJointDistribution:
    @pytest.mark.parametrize("p, n_max", [(0.05, 3), (0.3, 3), (1.0, 4)])
    def test_normalisation(self, p, n_max):
        source = SourceParams.from_p(p)
        total = math.fsum(w for _, w in joint_distribution(source, REFERENCE_SETUP, n_max))
        assert total == pytest.approx(1.0 - source.lam ** (2 * (n_max + 1)), abs=1e-10)

    @pytest.mark.parametrize("k3, k4", [(0, 0), (1, 1), (2, 3), (5, 5), (7, 2)])
    def test_balanced_splitter_pmf(self, k3, k4):
        pmf = balanced_splitter_pmf(k3, k4)
        assert pmf.sum() == pytest.approx(1.0, abs=1e-13)
        if k3 == k4:
            assert np.all(np.abs(pmf[1::2]) < 1e-15)


class TestExamples:
    def test_perfect_dip(self):
        source = SourceParams.from_p(P_LIMIT)
        pair = coincidences(source, PERFECT)
        assert pair.cc_min / pair.cc_mean < 1e-7

    def test_distinguishable_half(self):
        source = SourceParams.from_p(P_LIMIT)
        one_pair = (1 - source.lam2) * source.lam2
        assert cc_mean(source, PERFECT) / one_pair == pytest.approx(0.5, rel=1e-6)

    @pytest.mark.parametrize("p", [0.01, 0.3, 2.0])
    def test_no_overlap(self, p):
        setup = REFERENCE_SETUP.with_eta_m(0.0)
        source = SourceParams.from_p(p)
        pair = coincidences(source, setup)
        assert pair.cc_min == pytest.approx(pair.cc_mean, abs=1e-12)
        assert visibility(source, setup) == pytest.approx(0.0, abs=1e-10)

    def test_no_signal_arm_single_pair(self):
        setup = SetupParams(0.0, 0.29, 0.9878, 0.68, 0.70)
        pair = coincidences(SourceParams.from_p(0.1), setup, TruncationConfig(n_max=1))
        assert pair.cc_mean == 0.0
        assert pair.cc_min == 0.0
        with pytest.raises(DegenerateSetupError):
            visibility(SourceParams.from_p(0.1), setup, TruncationConfig(n_max=1))

    def test_no_signal_arm_multi_pair(self):
        # Idler photons alone still split 50/50 onto both detectors once n >= 2.
        eb, d1, d2 = 0.29, 0.68, 0.70
        setup = SetupParams(0.0, eb, 0.9878, d1, d2)
        source = SourceParams.from_p(0.1)
        trunc = TruncationConfig(n_max=40)
        n = np.arange(41)
        w = (1 - source.lam2) * source.lam2**n
        terms = 1 - (1 - eb * d1 / 2) ** n - (1 - eb * d2 / 2) ** n + (1 - eb * (d1 + d2) / 2) ** n
        expected = math.fsum(w * terms)
        pair = coincidences(source, setup, trunc)
        assert pair.cc_mean == pytest.approx(expected, rel=1e-12)
        assert pair.cc_min == pytest.approx(expected, rel=1e-12)
        dense = oracle_cc(source, setup, 3)
        assert coincidences(source, setup, TruncationConfig(n_max=3)).cc_mean == pytest.approx(
            dense.cc_mean, abs=1e-12
        )

    def test_dead_detector(self):
        setup = SetupParams(0.42, 0.29, 0.9878, 0.0, 0.70)
        with pytest.raises(DegenerateSetupError):
            visibility(SourceParams.from_p(0.1), setup)

    @pytest.mark.parametrize(
        "p, expected",
        [(0.001, 0.974), (0.01, 0.960), (0.1, 0.854), (2.0, 0.585)],
    )
    def test_reference_table(self, p, expected):
        v = visibility(SourceParams.from_p(p), REFERENCE_SETUP, REF5)
        assert v == pytest.approx(expected, abs=5e-4)

    @pytest.mark.parametrize(
        "p, frozen",
        [(0.001, 0.974117), (0.1, 0.853647), (1.0, 0.598352), (2.0, 0.539220)],
    )
    def test_converged_values(self, p, frozen):
        # Frozen from the collapsed sum at tail 1e-9; the direct 8-index sum
        # and the dense oracle agree with it to 1e-15 wherever they are feasible.
        assert visibility(SourceParams.from_p(p), REFERENCE_SETUP) == pytest.approx(frozen, abs=1e-6)

    def test_bad_setup(self):
        with pytest.raises(ValueError):
            SetupParams(1.1, 0.5, 0.5, 0.5, 0.5)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(
        p=st.floats(1e-4, 2.0),
        etas=st.tuples(*[st.floats(0.05, 1.0)] * 4),
        eta_m=st.floats(0.0, 1.0),
    )
    def test_ordering_and_range(self, p, etas, eta_m):
        ea, eb, d1, d2 = etas
        setup = SetupParams(ea, eb, eta_m, d1, d2)
        pair = coincidences(SourceParams.from_p(p), setup)
        # relative slack covers rounding when eta_m = 0 makes both sides equal
        assert 0.0 <= pair.cc_min <= pair.cc_mean * (1 + 1e-9)
        assert pair.cc_mean <= 1.0
        assert -1e-9 <= pair.visibility <= 1.0

    def test_monotone_in_p(self):
        vs = [visibility(SourceParams.from_p(p), REFERENCE_SETUP) for p in NVSV_P_GRID]
        assert np.all(np.diff(vs) < 0)

    def test_monotone_in_eta_m(self):
        source = SourceParams.from_p(0.005)
        vs = [visibility(source, REFERENCE_SETUP.with_eta_m(e)) for e in sorted(NUMERICS_ETA_M)]
        assert np.all(np.diff(vs) > 0)

    @pytest.mark.parametrize("p", [0.001, 0.1, 1.0])
    def test_truncation_stability(self, p):
        # the level visibility() settles on: tail small relative to cc_mean
        tol = 1e-9
        source = SourceParams.from_p(p)
        cc = cc_mean(source, REFERENCE_SETUP)
        n = truncation_level(source.lam, tol * cc / 2)
        v1 = visibility(source, REFERENCE_SETUP, TruncationConfig(n_max=max(n, 1)))
        v2 = visibility(source, REFERENCE_SETUP, TruncationConfig(n_max=2 * max(n, 1)))
        assert abs(v2 - v1) < 10 * tol

    def test_default_tolerance_bound(self):
        source = SourceParams.from_p(0.001)
        v = visibility(source, REFERENCE_SETUP)
        v_deep = visibility(source, REFERENCE_SETUP, TruncationConfig(n_max=20))
        assert abs(v - v_deep) < 1e-9


class TestCurve:
    def test_order_and_limit(self):
        grid = [0.1, 0.0, 0.01]
        points = visibility_curve(grid, REFERENCE_SETUP)
        assert [pt.p for pt in points] == grid
        assert [pt.limit for pt in points] == [False, True, False]
        assert points[1].v == pytest.approx(
            visibility(SourceParams.from_p(P_LIMIT), REFERENCE_SETUP), abs=0
        )

    def test_threads_match_serial(self):
        grid = list(NVSV_P_GRID)[::-1]
        serial = visibility_curve(grid, REFERENCE_SETUP)
        threaded = visibility_curve(grid, REFERENCE_SETUP, workers=4)
        assert [pt.v for pt in serial] == [pt.v for pt in threaded]

    def test_error_names_p(self):
        with pytest.raises(VisibilityCurveError) as info:
            visibility_curve([0.1, -0.5], REFERENCE_SETUP)
        assert info.value.p == -0.5
        assert "-0.5" in str(info.value)

    def test_reference_cutoff_table(self):
        points = visibility_curve([0.0092, 0.092, 0.92], REFERENCE_SETUP, n_max=REFERENCE_N_MAX)
        np.testing.assert_allclose([pt.v for pt in points], [0.961, 0.861, 0.624], atol=5e-3)
