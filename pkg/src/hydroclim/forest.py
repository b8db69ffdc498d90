"""Random-forest classification of climate zone or region from the eight
features, with permutation (mean decrease accuracy) and impurity (mean
decrease Gini) variable importance.

Trees are fully grown CART classifiers on bootstrap samples, splitting on
the best of ``mtry`` randomly drawn features per node by Gini impurity.
Everything is deterministic given the master seed: each tree gets derived
seeds for its bootstrap/split draws and for its permutation draws, so
results do not depend on execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from numba import njit

from .errors import DegenerateProblemError, ParameterError
from .features import FEATURE_NAMES

N_TREES_DEFAULT = 500


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = N_TREES_DEFAULT
    mtry: int = 2  # floor(sqrt(8)) for the eight-feature problems
    min_node_size: int = 1


@dataclass
class ClassificationProblem:
    """Feature matrix, encoded labels and the setting they belong to."""

    variable_kind: str
    target: str  # "zone" or "region"
    X: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    label_set: list[str] = field(default_factory=list)
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.size:
            raise ParameterError("X and y shapes disagree")
        if len(self.label_set) < 2:
            raise DegenerateProblemError(
                f"{self.variable_kind}/{self.target}: needs >= 2 classes, "
                f"got {self.label_set}"
            )


@dataclass
class Forest:
    """Trained forest: flat per-tree node arrays plus out-of-bag masks."""

    params: ForestParams
    seed: int
    n_classes: int
    node_feature: np.ndarray = field(repr=False)  # (n_trees, max_nodes)
    node_threshold: np.ndarray = field(repr=False)
    node_left: np.ndarray = field(repr=False)
    node_right: np.ndarray = field(repr=False)
    node_class: np.ndarray = field(repr=False)  # -1 for internal nodes
    oob_masks: np.ndarray = field(repr=False)  # (n_trees, n_rows) bool
    gini_totals: np.ndarray = field(repr=False)  # (n_trees, n_features)


@dataclass
class ImportanceReport:
    """Scores and 1..8 ranks for one {kind, target, measure} setting."""

    variable_kind: str
    target: str
    measure: str  # "mda" or "mdg"
    features: tuple[str, ...]
    scores: np.ndarray = field(repr=False)
    ranks: np.ndarray = field(repr=False)  # 1 = most important
    note: str = "scores are not comparable across settings"


def _tree_seeds(seed: int, n_trees: int) -> np.ndarray:
    state = np.random.SeedSequence(seed).generate_state(2 * n_trees)
    # numba's legacy RNG wants plain non-negative int32-range seeds
    return (state & np.uint32(0x7FFFFFFF)).astype(np.int64)


@njit(cache=True)
def _gini_from_counts(counts, total):
    s = 0.0
    for c in counts:
        s += c * c
    return 1.0 - s / (total * total)


@njit(cache=True)
def _grow_tree(X, y, n_classes, mtry, min_node_size,
               feature, threshold, left, right, leaf_class, inbag, gini_tot):
    """Grow one fully developed CART tree on a fresh bootstrap sample.

    Node arrays are rows of the forest-wide storage; the RNG must be seeded
    by the caller.  Returns the number of nodes used.
    """
    n, p = X.shape
    idx = np.random.randint(0, n, n)
    for i in range(n):
        inbag[idx[i]] = True

    stack_node = np.empty(2 * n + 1, np.int64)
    stack_lo = np.empty(2 * n + 1, np.int64)
    stack_hi = np.empty(2 * n + 1, np.int64)
    n_nodes = 1
    top = 0
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = n

    feat_pool = np.empty(p, np.int64)
    counts = np.empty(n_classes, np.float64)
    left_counts = np.empty(n_classes, np.float64)
    right_counts = np.empty(n_classes, np.float64)

    while top >= 0:
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        top -= 1
        m = hi - lo

        for c in range(n_classes):
            counts[c] = 0.0
        for i in range(lo, hi):
            counts[y[idx[i]]] += 1.0
        best_class = 0
        for c in range(1, n_classes):
            if counts[c] > counts[best_class]:
                best_class = c
        node_gini = _gini_from_counts(counts, m)

        if node_gini <= 0.0 or m < 2 * min_node_size or m < 2:
            leaf_class[node] = best_class
            continue

        # draw mtry features without replacement (partial Fisher-Yates)
        for j in range(p):
            feat_pool[j] = j
        for j in range(mtry):
            k = j + np.random.randint(0, p - j)
            tmp = feat_pool[j]
            feat_pool[j] = feat_pool[k]
            feat_pool[k] = tmp

        best_feat = -1
        best_thr = 0.0
        best_score = np.inf
        for j in range(mtry):
            f = feat_pool[j]
            vals = np.empty(m, np.float64)
            labs = np.empty(m, np.int64)
            for i in range(m):
                vals[i] = X[idx[lo + i], f]
                labs[i] = y[idx[lo + i]]
            order = np.argsort(vals, kind="mergesort")
            for c in range(n_classes):
                left_counts[c] = 0.0
                right_counts[c] = counts[c]
            n_left = 0.0
            n_right = float(m)
            for i in range(m - 1):
                c = labs[order[i]]
                left_counts[c] += 1.0
                right_counts[c] -= 1.0
                n_left += 1.0
                n_right -= 1.0
                if vals[order[i]] == vals[order[i + 1]]:
                    continue
                if n_left < min_node_size or n_right < min_node_size:
                    continue
                score = (n_left * _gini_from_counts(left_counts, n_left)
                         + n_right * _gini_from_counts(right_counts, n_right))
                if score < best_score:
                    best_score = score
                    best_feat = f
                    best_thr = 0.5 * (vals[order[i]] + vals[order[i + 1]])

        if best_feat < 0:
            leaf_class[node] = best_class
            continue

        gini_tot[best_feat] += m * node_gini - best_score

        # partition idx[lo:hi] in place around the threshold
        i = lo
        j = hi - 1
        while i <= j:
            if X[idx[i], best_feat] <= best_thr:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        split = i

        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        top += 1
        stack_node[top] = n_nodes
        stack_lo[top] = lo
        stack_hi[top] = split
        top += 1
        stack_node[top] = n_nodes + 1
        stack_lo[top] = split
        stack_hi[top] = hi
        n_nodes += 2
    return n_nodes


@njit(cache=True)
def _train_all(X, y, n_classes, n_trees, mtry, min_node_size, seeds,
               feature, threshold, left, right, leaf_class, inbag, gini_tot):
    for t in range(n_trees):
        np.random.seed(seeds[t])
        _grow_tree(X, y, n_classes, mtry, min_node_size,
                   feature[t], threshold[t], left[t], right[t],
                   leaf_class[t], inbag[t], gini_tot[t])


@njit(cache=True)
def _predict_rows(feature, threshold, left, right, leaf_class, X, rows, out):
    for i in range(rows.size):
        r = rows[i]
        node = 0
        while leaf_class[node] < 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = leaf_class[node]


@njit(cache=True)
def _oob_votes(feature, threshold, left, right, leaf_class, oob, X, votes):
    n_trees = feature.shape[0]
    n = X.shape[0]
    pred = np.empty(n, np.int64)
    rows = np.empty(n, np.int64)
    for t in range(n_trees):
        k = 0
        for r in range(n):
            if oob[t, r]:
                rows[k] = r
                k += 1
        _predict_rows(feature[t], threshold[t], left[t], right[t],
                      leaf_class[t], X, rows[:k], pred[:k])
        for i in range(k):
            votes[rows[i], pred[i]] += 1


@njit(cache=True)
def _mda_differences(feature, threshold, left, right, leaf_class, oob,
                     X, y, perm_seeds, n_repeats, diffs):
    """Per-tree, per-feature OOB error increase under feature permutation."""
    n_trees = feature.shape[0]
    n, p = X.shape
    rows = np.empty(n, np.int64)
    pred = np.empty(n, np.int64)
    for t in range(n_trees):
        k = 0
        for r in range(n):
            if oob[t, r]:
                rows[k] = r
                k += 1
        if k == 0:
            for f in range(p):
                diffs[t, f] = 0.0
            continue
        _predict_rows(feature[t], threshold[t], left[t], right[t],
                      leaf_class[t], X, rows[:k], pred[:k])
        wrong = 0
        for i in range(k):
            if pred[i] != y[rows[i]]:
                wrong += 1
        base_err = wrong / k

        np.random.seed(perm_seeds[t])
        Xp = np.empty((k, p), np.float64)
        for i in range(k):
            for f in range(p):
                Xp[i, f] = X[rows[i], f]
        local = np.arange(k)
        for f in range(p):
            acc = 0.0
            for _rep in range(n_repeats):
                # Fisher-Yates shuffle of the feature column over OOB rows
                perm = np.empty(k, np.int64)
                for i in range(k):
                    perm[i] = i
                for i in range(k - 1, 0, -1):
                    j = np.random.randint(0, i + 1)
                    tmp = perm[i]
                    perm[i] = perm[j]
                    perm[j] = tmp
                saved = np.empty(k, np.float64)
                for i in range(k):
                    saved[i] = Xp[i, f]
                for i in range(k):
                    Xp[i, f] = saved[perm[i]]
                _predict_rows(feature[t], threshold[t], left[t], right[t],
                              leaf_class[t], Xp, local, pred[:k])
                wrong = 0
                for i in range(k):
                    if pred[i] != y[rows[i]]:
                        wrong += 1
                acc += wrong / k - base_err
                for i in range(k):
                    Xp[i, f] = saved[i]
            diffs[t, f] = acc / n_repeats


def train(problem: ClassificationProblem,
          params: ForestParams = ForestParams(),
          seed: int = 0) -> Forest:
    """Train a forest of fully grown CART trees on bootstrap samples."""
    n, p = problem.X.shape
    if n < 10:
        raise DegenerateProblemError(
            f"{problem.variable_kind}/{problem.target}: needs >= 10 rows, got {n}"
        )
    if not 1 <= params.mtry <= p:
        raise ParameterError(f"mtry must be in [1, {p}], got {params.mtry}")
    n_classes = len(problem.label_set)
    max_nodes = 2 * n + 1
    t = params.n_trees
    feature = np.zeros((t, max_nodes), np.int64)
    threshold = np.zeros((t, max_nodes), np.float64)
    left = np.zeros((t, max_nodes), np.int64)
    right = np.zeros((t, max_nodes), np.int64)
    leaf_class = np.full((t, max_nodes), -1, np.int64)
    inbag = np.zeros((t, n), np.bool_)
    gini_tot = np.zeros((t, p), np.float64)
    seeds = _tree_seeds(seed, t)
    _train_all(problem.X, problem.y, n_classes, t, params.mtry,
               params.min_node_size, seeds[:t],
               feature, threshold, left, right, leaf_class, inbag, gini_tot)
    return Forest(params, seed, n_classes, feature, threshold, left, right,
                  leaf_class, ~inbag, gini_tot)


def predict(forest: Forest, X: np.ndarray) -> np.ndarray:
    """Majority vote over all trees; ties resolve to the smallest class index."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    votes = np.zeros((X.shape[0], forest.n_classes), np.int64)
    rows = np.arange(X.shape[0], dtype=np.int64)
    pred = np.empty(X.shape[0], np.int64)
    for t in range(forest.params.n_trees):
        _predict_rows(forest.node_feature[t], forest.node_threshold[t],
                      forest.node_left[t], forest.node_right[t],
                      forest.node_class[t], X, rows, pred)
        votes[rows, pred] += 1
    return np.argmax(votes, axis=1)


def oob_error(forest: Forest, problem: ClassificationProblem) -> float:
    """OOB misclassification rate over rows that are OOB for >= 1 tree."""
    n = problem.X.shape[0]
    votes = np.zeros((n, forest.n_classes), np.int64)
    _oob_votes(forest.node_feature, forest.node_threshold, forest.node_left,
               forest.node_right, forest.node_class, forest.oob_masks,
               problem.X, votes)
    voted = votes.sum(axis=1) > 0
    if not voted.any():
        return float("nan")
    pred = np.argmax(votes[voted], axis=1)
    return float(np.mean(pred != problem.y[voted]))


def mean_decrease_accuracy(forest: Forest, problem: ClassificationProblem,
                           seed: int | None = None,
                           n_repeats: int = 1) -> np.ndarray:
    """Permutation importance per feature.

    Per tree and feature the OOB error increase under permutation of that
    feature's OOB values (``n_repeats`` permutations averaged); scores are
    the per-tree means divided by the per-tree standard deviation, the
    division being skipped when that standard deviation is exactly zero.
    """
    t = forest.params.n_trees
    perm_seeds = _tree_seeds(forest.seed if seed is None else seed, t)[t:]
    diffs = np.zeros((t, problem.X.shape[1]), np.float64)
    _mda_differences(forest.node_feature, forest.node_threshold,
                     forest.node_left, forest.node_right, forest.node_class,
                     forest.oob_masks, problem.X, problem.y,
                     perm_seeds, max(1, n_repeats), diffs)
    means = diffs.mean(axis=0)
    sds = diffs.std(axis=0, ddof=1)
    scores = means.copy()
    nonzero = sds > 0
    scores[nonzero] = means[nonzero] / sds[nonzero]
    return scores


def mean_decrease_gini(forest: Forest) -> np.ndarray:
    """Total Gini impurity decrease per feature, averaged over trees."""
    return forest.gini_totals.mean(axis=0)


def rank_features(scores: np.ndarray, variable_kind: str, target: str,
                  measure: str,
                  features: tuple[str, ...] = FEATURE_NAMES) -> ImportanceReport:
    """Rank scores, 1 = largest; ties break by the fixed feature order."""
    scores = np.asarray(scores, dtype=float)
    if scores.size != len(features):
        raise ParameterError(
            f"expected {len(features)} scores, got {scores.size}"
        )
    order = np.lexsort((np.arange(scores.size), -scores))
    ranks = np.empty(scores.size, dtype=int)
    ranks[order] = np.arange(1, scores.size + 1)
    return ImportanceReport(variable_kind, target, measure, tuple(features),
                            scores, ranks)


def build_problem(merged: pd.DataFrame, variable_kind: str,
                  target: str) -> ClassificationProblem:
    """One classification problem from a joined feature/label table.

    Rows lacking the target label (NaN or the explicit unclassified marker)
    are excluded; fewer than two remaining classes raise
    DegenerateProblemError.
    """
    frame = merged[merged["variable_kind"] == variable_kind]
    rows = frame[frame[target].notna() & (frame[target] != "unclassified")]
    label_set = sorted(str(v) for v in rows[target].unique())
    if len(label_set) < 2:
        raise DegenerateProblemError(
            f"{variable_kind}/{target}: fewer than two classes "
            f"({label_set}) after filtering"
        )
    code = {lab: i for i, lab in enumerate(label_set)}
    X = rows[list(FEATURE_NAMES)].to_numpy(dtype=np.float64)
    y = np.array([code[str(v)] for v in rows[target]], dtype=np.int64)
    return ClassificationProblem(variable_kind, target, X, y, label_set)


def build_classification_problems(
    feature_table: pd.DataFrame, labels: pd.DataFrame,
) -> dict[tuple[str, str], ClassificationProblem]:
    """The {kind} x {zone, region} problems (six when all kinds are present).

    ``feature_table`` and ``labels`` share station_id.  Degenerate settings
    raise; callers wanting to skip them build per-setting via
    ``build_problem``.
    """
    merged = feature_table.merge(labels, on="station_id", how="left")
    problems = {}
    for kind in sorted(feature_table["variable_kind"].unique()):
        for target in ("zone", "region"):
            problems[(str(kind), target)] = build_problem(merged, str(kind),
                                                          target)
    return problems
