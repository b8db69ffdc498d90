import numpy as np
import pandas as pd
import pytest

from hydroclim.errors import DegenerateProblemError, ParameterError
from hydroclim.features import FEATURE_NAMES
from hydroclim.forest import (
    ClassificationProblem,
    ForestParams,
    build_classification_problems,
    build_problem,
    mean_decrease_accuracy,
    mean_decrease_gini,
    oob_error,
    predict,
    rank_features,
    train,
)

SMALL = ForestParams(n_trees=50)


def separable_problem(n_per_class=60, n_classes=3, noise=0.3, seed=70,
                      informative=0):
    """Eight features; only column ``informative`` carries the class."""
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 1, (n_per_class * n_classes, 8))
    y = np.repeat(np.arange(n_classes), n_per_class)
    X[:, informative] = y * 3.0 + rng.normal(0, noise, y.size)
    return ClassificationProblem(
        "temperature", "zone", X, y,
        [f"c{i}" for i in range(n_classes)])


class TestTrainPredict:
    def test_separable_two_class_oob_below_two_percent(self):
        problem = separable_problem(n_per_class=100, n_classes=2)
        forest = train(problem, SMALL, seed=1)
        assert oob_error(forest, problem) < 0.02

    def test_predict_recovers_training_labels_when_separable(self):
        problem = separable_problem()
        forest = train(problem, SMALL, seed=2)
        assert np.mean(predict(forest, problem.X) == problem.y) > 0.99

    def test_same_seed_is_bit_deterministic(self):
        problem = separable_problem()
        a = train(problem, SMALL, seed=3)
        b = train(problem, SMALL, seed=3)
        assert np.array_equal(a.node_threshold, b.node_threshold)
        assert np.array_equal(a.oob_masks, b.oob_masks)
        assert np.array_equal(predict(a, problem.X), predict(b, problem.X))
        assert np.array_equal(mean_decrease_accuracy(a, problem),
                              mean_decrease_accuracy(b, problem))

    def test_different_seed_changes_forest(self):
        problem = separable_problem()
        a = train(problem, SMALL, seed=4)
        b = train(problem, SMALL, seed=5)
        assert not np.array_equal(a.oob_masks, b.oob_masks)

    def test_permuted_labels_reach_majority_error(self):
        rng = np.random.default_rng(71)
        problem = separable_problem(n_per_class=100, n_classes=2)
        shuffled = ClassificationProblem(
            "temperature", "zone", problem.X,
            rng.permutation(problem.y), problem.label_set)
        forest = train(shuffled, ForestParams(n_trees=100), seed=6)
        majority_error = 0.5
        assert abs(oob_error(forest, shuffled) - majority_error) < 0.1

    def test_too_few_rows(self):
        problem = separable_problem()
        tiny = ClassificationProblem("temperature", "zone",
                                     problem.X[:8], problem.y[:8] % 2,
                                     ["c0", "c1"])
        with pytest.raises(DegenerateProblemError):
            train(tiny, SMALL)

    def test_mtry_validated(self):
        with pytest.raises(ParameterError):
            train(separable_problem(), ForestParams(n_trees=5, mtry=9))

    def test_single_class_rejected_at_construction(self):
        with pytest.raises(DegenerateProblemError):
            ClassificationProblem("temperature", "zone",
                                  np.zeros((20, 8)), np.zeros(20, np.int64),
                                  ["only"])


class TestImportance:
    def test_informative_feature_ranks_first_both_measures(self):
        problem = separable_problem(informative=5)
        forest = train(problem, ForestParams(n_trees=100), seed=7)
        mda = mean_decrease_accuracy(forest, problem)
        mdg = mean_decrease_gini(forest)
        assert int(np.argmax(mda)) == 5
        assert int(np.argmax(mdg)) == 5

    def test_mda_near_zero_for_pure_noise_features(self):
        problem = separable_problem()
        forest = train(problem, ForestParams(n_trees=100), seed=8)
        mda = mean_decrease_accuracy(forest, problem)
        noise_scores = np.delete(mda, 0)
        assert np.all(np.abs(noise_scores) < 1.0)
        assert mda[0] > 2.0

    def test_mda_seed_controls_permutations(self):
        problem = separable_problem()
        forest = train(problem, SMALL, seed=9)
        a = mean_decrease_accuracy(forest, problem, seed=1)
        b = mean_decrease_accuracy(forest, problem, seed=1)
        c = mean_decrease_accuracy(forest, problem, seed=2)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_mda_repeats_reduce_noise_score_spread(self):
        problem = separable_problem(seed=72)
        forest = train(problem, SMALL, seed=10)
        few = [mean_decrease_accuracy(forest, problem, seed=s, n_repeats=1)[3]
               for s in range(15)]
        many = [mean_decrease_accuracy(forest, problem, seed=s, n_repeats=8)[3]
                for s in range(15)]
        assert np.std(many) < np.std(few)

    def test_mdg_nonnegative(self):
        forest = train(separable_problem(), SMALL, seed=11)
        assert np.all(mean_decrease_gini(forest) >= 0.0)

    def test_constant_feature_mda_is_exactly_zero(self):
        problem = separable_problem()
        X = problem.X.copy()
        X[:, 7] = 3.25
        const = ClassificationProblem("temperature", "zone", X, problem.y,
                                      problem.label_set)
        forest = train(const, SMALL, seed=12)
        mda = mean_decrease_accuracy(forest, const)
        # never split on, so permutation changes nothing: sd = 0 and the
        # score falls back to the unnormalized mean, which is exactly 0
        assert mda[7] == 0.0

    def test_duplicated_informative_feature_dilutes_mdg(self):
        problem = separable_problem(seed=74)
        forest = train(problem, ForestParams(n_trees=100), seed=13)
        base = mean_decrease_gini(forest)[0]

        X_dup = np.column_stack([problem.X, problem.X[:, 0]])
        dup_problem = ClassificationProblem(
            "temperature", "zone", X_dup, problem.y, problem.label_set,
            feature_names=tuple(f"f{i}" for i in range(9)))
        dup_forest = train(dup_problem, ForestParams(n_trees=100), seed=13)
        assert mean_decrease_gini(dup_forest)[0] <= base


class TestRankFeatures:
    def test_rank_one_is_largest(self):
        scores = np.array([0.1, 5.0, 0.2, 0.0, -1.0, 0.3, 0.15, 2.0])
        report = rank_features(scores, "temperature", "zone", "mda")
        assert report.ranks[1] == 1 and report.ranks[7] == 2
        assert report.ranks[4] == 8
        assert sorted(report.ranks) == list(range(1, 9))

    def test_ties_break_by_feature_order(self):
        scores = np.array([1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0])
        report = rank_features(scores, "temperature", "zone", "mdg")
        assert report.ranks[7] == 1
        assert report.ranks[0] == 2 and report.ranks[1] == 3

    def test_score_count_validated(self):
        with pytest.raises(ParameterError):
            rank_features(np.zeros(5), "temperature", "zone", "mda")


class TestBuildProblems:
    def make_tables(self):
        rng = np.random.default_rng(73)
        rows, labels = [], []
        for i in range(40):
            sid = f"S{i:03d}"
            row = {"station_id": sid, "variable_kind": "temperature"}
            row.update({f: rng.normal() for f in FEATURE_NAMES})
            rows.append(row)
            labels.append({
                "station_id": sid,
                "zone": "C" if i % 2 else "D",
                "region": "unclassified" if i < 4 else ("T1" if i % 3 else "T2"),
            })
        return pd.DataFrame(rows), pd.DataFrame(labels)

    def test_zone_and_region_problems(self):
        features, labels = self.make_tables()
        problems = build_classification_problems(features, labels)
        assert set(problems) == {("temperature", "zone"),
                                 ("temperature", "region")}
        zone = problems[("temperature", "zone")]
        assert zone.label_set == ["C", "D"]
        assert zone.X.shape == (40, 8)

    def test_unlabeled_rows_excluded_per_target(self):
        features, labels = self.make_tables()
        merged = features.merge(labels, on="station_id", how="left")
        region = build_problem(merged, "temperature", "region")
        assert region.X.shape[0] == 36  # four unclassified rows dropped
        zone = build_problem(merged, "temperature", "zone")
        assert zone.X.shape[0] == 40  # same rows keep their zone label

    def test_single_class_setting_raises(self):
        features, labels = self.make_tables()
        labels["zone"] = "C"
        merged = features.merge(labels, on="station_id", how="left")
        with pytest.raises(DegenerateProblemError):
            build_problem(merged, "temperature", "zone")

    def test_labels_encoded_in_sorted_order(self):
        features, labels = self.make_tables()
        problem = build_classification_problems(features, labels)[
            ("temperature", "zone")]
        decoded = [problem.label_set[c] for c in problem.y[:4]]
        expected = ["D" if i % 2 == 0 else "C" for i in range(4)]
        assert decoded == expected
