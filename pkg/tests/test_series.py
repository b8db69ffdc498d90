import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hydroclim.errors import LengthError, ZeroVarianceError
from hydroclim.series import (
    SERIES_LENGTH,
    WindowPolicy,
    aggregate_quarterly,
    find_qualifying_window,
    first_difference,
    standardize,
)

from conftest import make_monthly


def complete_monthly(first_year, n_years, fill=1.0):
    return make_monthly(np.full(n_years * 12, fill), first_year=first_year)


def month_slot(series, year, month):
    return (year - series.first_year) * 12 + month - 1


class TestAggregateQuarterly:
    def test_winter_mean_of_three_months(self):
        series = complete_monthly(1970, 40, fill=0.0)
        series.values[month_slot(series, 1970, 12)] = 3.0
        series.values[month_slot(series, 1971, 1)] = 6.0
        series.values[month_slot(series, 1971, 2)] = 9.0
        q = aggregate_quarterly(series, (1971, 39))
        assert q.values[0] == pytest.approx(6.0)

    def test_constant_record_gives_constant_quarters(self):
        q = aggregate_quarterly(complete_monthly(1970, 40, fill=4.25), (1971, 39))
        assert q.values.shape == (SERIES_LENGTH,)
        assert np.all(q.values == 4.25)

    def test_missing_month_disqualifies(self):
        series = complete_monthly(1970, 40)
        series.values[month_slot(series, 1990, 3)] = np.nan
        assert aggregate_quarterly(series, (1971, 39)) is None

    def test_window_beyond_record_is_not_qualified(self):
        series = complete_monthly(1970, 40)
        assert aggregate_quarterly(series, (1972, 39)) is None  # needs Nov 2010
        assert aggregate_quarterly(series, (1970, 39)) is None  # needs Dec 1969

    def test_invariant_to_months_outside_window(self):
        series = complete_monthly(1970, 41)
        series.values[:11] = 99.0           # before Dec 1970
        series.values[-12:] = -99.0         # after Nov 2009
        q = aggregate_quarterly(series, (1971, 39))
        q_ref = aggregate_quarterly(complete_monthly(1970, 41), (1971, 39))
        assert np.array_equal(q.values, q_ref.values)


class TestFindQualifyingWindow:
    def test_fifty_complete_years_prefers_most_recent(self):
        series = complete_monthly(1960, 50)  # 1960-2009
        assert find_qualifying_window(series) == (1971, 39)

    def test_short_record_has_no_window(self):
        assert find_qualifying_window(complete_monthly(1990, 20)) is None

    def test_gap_pushes_window_before_it(self):
        # 46 years 1960-2005; one missing month in 2005 forces the window to
        # end before the gap; enough complete years exist before it.
        series = complete_monthly(1960, 46)
        series.values[month_slot(series, 2005, 6)] = np.nan
        window = find_qualifying_window(series)
        assert window == (1966, 39)  # fall 2004 is the last clean quarter
        assert aggregate_quarterly(series, window) is not None

    def test_gap_with_too_little_history_means_none(self):
        series = complete_monthly(1970, 45)  # 1970-2014
        series.values[month_slot(series, 2010, 5)] = np.nan
        series.values[month_slot(series, 1975, 5)] = np.nan
        assert find_qualifying_window(series) is None


class TestStandardize:
    def test_one_two_three(self):
        # sample sd of {1,2,3} is exactly 1
        out = standardize(np.array([1.0, 2.0, 3.0]))
        assert np.allclose(out.values, [-1.0, 0.0, 1.0])
        assert out.original_mean == 2.0
        assert out.original_sd == 1.0

    def test_idempotent_on_standardized_input(self):
        rng = np.random.default_rng(3)
        x = standardize(rng.normal(5, 2, 156)).values
        again = standardize(x)
        assert np.allclose(again.values, x, atol=1e-12)

    def test_constant_series_errors(self):
        with pytest.raises(ZeroVarianceError):
            standardize(np.full(156, 3.3))

    def test_moments_within_tolerance(self):
        rng = np.random.default_rng(4)
        out = standardize(rng.normal(100, 17, 156))
        assert abs(out.values.mean()) < 1e-10
        assert abs(out.values.std(ddof=1) - 1.0) < 1e-10

    @given(a=st.floats(0.01, 100), b=st.floats(-100, 100),
           seed=st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_affine_invariance(self, a, b, seed):
        x = np.random.default_rng(seed).normal(0, 1, 60)
        assert np.allclose(standardize(a * x + b).values,
                           standardize(x).values, atol=1e-9)


class TestFirstDifference:
    def test_definition(self):
        assert np.array_equal(first_difference([1.0, 2.0, 4.0]), [1.0, 2.0])

    def test_constant_gives_zeros(self):
        assert np.all(first_difference(np.full(10, 2.5)) == 0.0)

    def test_linear_ramp_gives_constant_slope(self):
        out = first_difference(3.0 * np.arange(20) + 1.0)
        assert np.allclose(out, 3.0)

    def test_too_short_errors(self):
        with pytest.raises(LengthError):
            first_difference([1.0])


def test_window_policy_relaxation_changes_search_only():
    series = complete_monthly(1960, 50)
    series.values[month_slot(series, 2000, 7)] = np.nan
    strict = find_qualifying_window(series, WindowPolicy())
    relaxed = find_qualifying_window(series, WindowPolicy(max_missing_quarters=1))
    assert strict == (1961, 39)
    assert relaxed == (1971, 39)
    assert aggregate_quarterly(series, relaxed) is None  # still incomplete
