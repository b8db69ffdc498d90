import numpy as np
import pandas as pd
import pytest

from hydroclim.errors import HydroclimError, ParameterError
from hydroclim.features import FEATURE_NAMES
from hydroclim.summary import (
    UNCLASSIFIED,
    boxplot_stats,
    feature_correlations,
    group_counts,
    group_summarize,
    histogram,
    ranked_mean_table,
)


def make_table(groups, rng_seed=60):
    """Feature table with one row per (group entry)."""
    rng = np.random.default_rng(rng_seed)
    rows = []
    for i, (code, zone, region) in enumerate(groups):
        row = {
            "station_id": f"S{i:03d}",
            "class_code": code,
            "zone": zone,
            "region": region,
        }
        row.update({f: rng.normal(0, 1) for f in FEATURE_NAMES})
        rows.append(row)
    return pd.DataFrame(rows)


class TestBoxplotStats:
    def test_type7_quartiles_one_to_nine(self):
        s = boxplot_stats(np.arange(1.0, 10.0))
        assert (s.q1, s.median, s.q3) == (3.0, 5.0, 7.0)
        assert s.min_whisker == 1.0 and s.max_whisker == 9.0
        assert s.outliers == [] and s.n == 9 and s.mean == 5.0

    def test_outlier_beyond_tukey_fence(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 100.0])
        s = boxplot_stats(x)
        assert s.outliers == [100.0]
        assert s.max_whisker == 5.0  # largest value inside the fence

    def test_zero_iqr_makes_any_other_value_an_outlier(self):
        s = boxplot_stats([0.0, 0.0, 0.0, 0.0, 100.0])
        assert s.outliers == [100.0]
        assert s.min_whisker == s.max_whisker == 0.0

    def test_whiskers_are_observed_values(self):
        x = np.array([0.0, 10.0, 11.0, 12.0, 13.0, 14.0, 30.0])
        s = boxplot_stats(x)
        assert s.min_whisker in x and s.max_whisker in x

    def test_single_value(self):
        s = boxplot_stats([4.2])
        assert s.q1 == s.median == s.q3 == 4.2
        assert s.min_whisker == s.max_whisker == 4.2

    def test_empty_errors(self):
        with pytest.raises(HydroclimError):
            boxplot_stats([])

    def test_to_dict_round_trips(self):
        d = boxplot_stats([1.0, 2.0, 3.0]).to_dict()
        assert d["median"] == 2.0 and d["n"] == 3


class TestGroupSummarize:
    def test_filter_drops_small_climate_groups(self):
        groups = ([("Cfb", "C", "R1")] * 30 + [("Dfb", "D", "R1")] * 29)
        table = make_table(groups)
        out = group_summarize(table, "climate_class", min_count=30)
        assert set(out) == {"Cfb"}
        out_zone = group_summarize(table, "climate_zone", min_count=30)
        assert set(out_zone) == {"C"}

    def test_region_grouping_is_unfiltered(self):
        groups = [("Cfb", "C", "R1")] * 3 + [("Cfb", "C", "R2")] * 2
        out = group_summarize(make_table(groups), "region", min_count=30)
        assert set(out) == {"R1", "R2"}

    def test_unclassified_rows_are_skipped(self):
        groups = [("Cfb", "C", "R1")] * 5 + [(UNCLASSIFIED, UNCLASSIFIED, None)]
        out = group_summarize(make_table(groups), "region", min_count=1)
        assert set(out) == {"R1"}
        out = group_summarize(make_table(groups), "climate_class", min_count=1)
        assert set(out) == {"Cfb"}

    def test_global_uses_every_row(self):
        groups = [("Cfb", "C", "R1")] * 4 + [(UNCLASSIFIED, UNCLASSIFIED, None)]
        out = group_summarize(make_table(groups), "global")
        assert out["global"][FEATURE_NAMES[0]].n == 5

    def test_every_feature_summarized(self):
        out = group_summarize(make_table([("Cfb", "C", "R1")] * 4), "global")
        assert set(out["global"]) == set(FEATURE_NAMES)

    def test_unknown_grouping(self):
        with pytest.raises(ParameterError):
            group_summarize(make_table([("Cfb", "C", "R1")]), "by_station")


class TestRankedMeanTable:
    def make_simple(self):
        table = make_table([("Af", "A", "R1")] * 3 + [("Cfb", "C", "R1")] * 3
                           + [("Dfb", "D", "R1")] * 3)
        # plant a known ordering in the first feature
        f0 = FEATURE_NAMES[0]
        table.loc[table["class_code"] == "Af", f0] = 10.0
        table.loc[table["class_code"] == "Cfb", f0] = -5.0
        table.loc[table["class_code"] == "Dfb", f0] = 2.0
        return table

    def test_rank_one_is_smallest_mean(self):
        out = ranked_mean_table(self.make_simple(), "climate_class",
                                min_count=1)
        j = out.features.index(FEATURE_NAMES[0])
        by_group = dict(zip(out.groups, out.ranks[:, j]))
        assert by_group == {"Af": 3, "Cfb": 1, "Dfb": 2}

    def test_min_rank_ties(self):
        table = self.make_simple()
        f0 = FEATURE_NAMES[0]
        table.loc[table["class_code"] == "Dfb", f0] = 10.0  # tie with Af
        out = ranked_mean_table(table, "climate_class", min_count=1)
        j = out.features.index(f0)
        by_group = dict(zip(out.groups, out.ranks[:, j]))
        assert by_group == {"Af": 2, "Cfb": 1, "Dfb": 2}

    def test_per_row_ranks_each_group_across_features(self):
        out = ranked_mean_table(self.make_simple(), "climate_class",
                                rank_axis="per_row", min_count=1)
        for i in range(len(out.groups)):
            assert sorted(out.ranks[i, :]) == list(range(1, 9))

    def test_per_column_ranks_are_permutations(self):
        out = ranked_mean_table(self.make_simple(), "climate_class",
                                min_count=1)
        for j in range(len(out.features)):
            assert sorted(out.ranks[:, j]) == [1, 2, 3]

    def test_frame_layout(self):
        out = ranked_mean_table(self.make_simple(), "climate_class",
                                min_count=1)
        frame = out.to_frame()
        assert list(frame.columns) == ["group", "feature", "mean", "rank"]
        assert len(frame) == 3 * 8

    def test_invalid_axis(self):
        with pytest.raises(ParameterError):
            ranked_mean_table(self.make_simple(), "climate_class",
                              rank_axis="diagonal", min_count=1)


class TestHistogram:
    def test_counts_sum_and_edges(self):
        h = histogram(np.arange(10.0), bin_count=5)
        assert h.counts.sum() == 10
        assert h.edges.size == 6
        assert h.edges[0] == 0.0 and h.edges[-1] == 9.0

    def test_last_bin_right_inclusive(self):
        h = histogram(np.array([0.0, 1.0]), bin_count=2)
        assert list(h.counts) == [1, 1]

    def test_shared_range_clamps_and_reports(self):
        h = histogram(np.array([-5.0, 0.1, 0.5, 0.9, 7.0]), bin_count=2,
                      shared_range=(0.0, 1.0))
        assert h.below_range == 1 and h.above_range == 1
        assert h.counts.sum() == 5  # clamped values land in edge bins
        assert list(h.counts) == [2, 3]  # bins [0, 0.5) and [0.5, 1]

    def test_degenerate_all_identical(self):
        h = histogram(np.full(7, 3.0))
        assert h.counts.sum() == 7 and h.counts.size == 1
        assert h.edges[0] < 3.0 < h.edges[1]
        assert (h.edges[1] - h.edges[0]) < 1e-6

    def test_validation(self):
        with pytest.raises(HydroclimError):
            histogram([])
        with pytest.raises(ParameterError):
            histogram([1.0], bin_count=0)
        with pytest.raises(ParameterError):
            histogram([1.0], shared_range=(1.0, 1.0))


class TestCorrelations:
    def test_matches_numpy_corrcoef(self):
        table = make_table([("Cfb", "C", "R1")] * 40)
        out = feature_correlations(table)
        ref = np.corrcoef(table[list(FEATURE_NAMES)].to_numpy(), rowvar=False)
        assert np.allclose(out.to_numpy(), ref, atol=1e-12)
        assert np.allclose(np.diag(out.to_numpy()), 1.0)

    def test_zero_variance_column_gives_nan_not_zero(self):
        table = make_table([("Cfb", "C", "R1")] * 10)
        table[FEATURE_NAMES[2]] = 5.0
        out = feature_correlations(table).to_numpy()
        assert np.isnan(out[2, :]).all() and np.isnan(out[:, 2]).all()
        mask = np.ones(8, dtype=bool)
        mask[2] = False
        assert not np.isnan(out[np.ix_(mask, mask)]).any()

    def test_too_few_rows(self):
        with pytest.raises(HydroclimError):
            feature_correlations(make_table([("Cfb", "C", "R1")] * 2))


class TestGroupCounts:
    def test_counts_with_unclassified_marker(self):
        table = make_table([("Cfb", "C", "R1")] * 3
                           + [(UNCLASSIFIED, UNCLASSIFIED, None)] * 2)
        assert group_counts(table, "climate_class") == {
            "Cfb": 3, UNCLASSIFIED: 2}
        assert group_counts(table, "region") == {"R1": 3, UNCLASSIFIED: 2}
        assert group_counts(table, "global") == {"global": 5}

    def test_sorted_keys(self):
        table = make_table([("Dfb", "D", "R2"), ("Af", "A", "R1")])
        assert list(group_counts(table, "climate_class")) == ["Af", "Dfb"]
