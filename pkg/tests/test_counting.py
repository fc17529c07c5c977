import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spdchom.counting import (
    PeakCounts,
    RateParams,
    calibrate_snr_floor,
    coincidence_rate,
    estimate_p,
    floor_db_from_p,
    snr_db,
    snr_model,
)


class TestCoincidenceRate:
    def test_single_source(self):
        assert coincidence_rate(RateParams(76e6, 0.06, 0.25, 1)) == pytest.approx(285000.0, rel=1e-14)

    def test_two_sources(self):
        assert coincidence_rate(RateParams(76e6, 0.06, 0.25, 2)) == pytest.approx(1068.75, rel=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_vacuum(self, n):
        assert coincidence_rate(RateParams(1e9, 0.0, 0.5, n)) == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [dict(f=0, p=0.1, eta=0.5), dict(f=1, p=-0.1, eta=0.5), dict(f=1, p=0.1, eta=1.2),
         dict(f=1, p=0.1, eta=0.5, n_fold=0), dict(f=1, p=0.1, eta=0.5, n_fold=1.5)],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            RateParams(**kwargs)

    @given(
        f=st.floats(1e3, 1e10), p=st.floats(0, 1), eta=st.floats(0, 1),
        a=st.integers(1, 4), b=st.integers(1, 4),
    )
    def test_multiplicative(self, f, p, eta, a, b):
        whole = coincidence_rate(RateParams(f, p, eta, a + b)) * f
        parts = coincidence_rate(RateParams(f, p, eta, a)) * coincidence_rate(RateParams(f, p, eta, b))
        assert whole == pytest.approx(parts, rel=1e-12, abs=1e-300)


class TestEstimateP:
    def test_high_rep_rate(self):
        assert estimate_p(48e3, 2.5e9, 0.302) == pytest.approx(0.00021, rel=0.05)

    def test_low_rep_rate(self):
        assert estimate_p(56e3, 76e6, 0.305) == pytest.approx(0.0079, rel=0.05)

    def test_identity(self):
        assert estimate_p(76e6 * 0.3**2, 76e6, 0.3) == pytest.approx(1.0, abs=1e-15)

    def test_rejects_zero_eta(self):
        with pytest.raises(ValueError):
            estimate_p(1e3, 1e6, 0.0)

    @given(p=st.floats(0, 2), f=st.floats(1e3, 1e10), eta=st.floats(1e-3, 1))
    def test_round_trip(self, p, f, eta):
        cc = coincidence_rate(RateParams(f, p, eta))
        assert estimate_p(cc, f, eta) == pytest.approx(p, abs=1e-12)


class TestSnr:
    @pytest.mark.parametrize(
        "main, side, expected", [(2.0, 1.0, 0.0), (101.0, 1.0, 20.0), (110.0, 10.0, 10.0)]
    )
    def test_examples(self, main, side, expected):
        assert snr_db(PeakCounts(main, side)) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("main, side", [(1.0, 1.0), (0.5, 1.0), (3.0, 0.0)])
    def test_undefined(self, main, side):
        with pytest.raises(ValueError):
            snr_db(PeakCounts(main, side))

    @given(side=st.floats(1e-3, 1e6), ratio=st.floats(1.01, 1e4), c=st.integers(2, 1000))
    def test_scale_invariance(self, side, ratio, c):
        main = side * ratio
        assert snr_db(PeakCounts(c * main, c * side)) == pytest.approx(
            snr_db(PeakCounts(main, side)), abs=1e-10
        )


class TestSnrModel:
    @given(k=st.floats(1e-6, 1e-2))
    def test_ratio(self, k):
        assert snr_model(2 * k) - snr_model(30 * k) == pytest.approx(10 * math.log10(15), abs=1e-9)

    def test_ratio_value(self):
        assert 10 * math.log10(15) == pytest.approx(11.76, abs=0.005)

    def test_slope(self):
        for p in (1e-4, 1e-3, 1e-2):
            h = 1e-3
            slope = (snr_model(p * 10**h) - snr_model(p * 10**-h)) / (2 * h)
            assert slope == pytest.approx(-10.0, abs=1e-6)

    def test_floor_calibration(self):
        p_high, floor = calibrate_snr_floor(39.0, 42.0, 15)
        assert snr_model(p_high, floor) == pytest.approx(39.0, abs=1e-9)
        assert snr_model(p_high / 15, floor) == pytest.approx(42.0, abs=1e-9)
        # without the floor the lower power would read far higher
        assert snr_model(p_high / 15) > 50.0

    def test_saturation(self):
        assert snr_model(1e-15, 42.0) == pytest.approx(42.0, abs=1e-6)
        assert floor_db_from_p(1e-4) == pytest.approx(40.0)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            snr_model(0.0)
