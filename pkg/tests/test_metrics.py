"""Metric suite oracles and invariants.

Non-trivial expected values are either hand-derived (documented inline) or
cross-checked against an independent brute-force implementation written
directly in the test, never against the library's own code path.
"""

import json
import math

import numpy as np
import pytest

from uranus.core import DataError
from uranus.metrics import (
    accuracy,
    classification_report,
    confusion_matrix,
    evaluate,
    kfold_indices,
    mae,
    mse,
    one_vs_rest_counts,
    precision_recall_f1,
    r2,
    regression_report,
    roc,
    roc_auc,
    roc_sweep,
    trapezoid_area,
)


def brute_force_auc(labels, scores) -> float:
    """Pairwise concordance: wins + half-ties over positive*negative pairs."""
    pos = [s for s, t in zip(scores, labels) if t == 1]
    neg = [s for s, t in zip(scores, labels) if t == 0]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


class TestRegression:
    def test_mae_hand_value(self):
        # |1-2| + |2-4| + |3-0| = 6, mean 2
        assert mae([1, 2, 3], [2, 4, 0]) == pytest.approx(2.0)

    def test_mse_hand_value(self):
        # 1 + 4 + 9 = 14, mean 14/3
        assert mse([1, 2, 3], [2, 4, 0]) == pytest.approx(14.0 / 3.0)

    def test_r2_perfect(self):
        assert r2([1.0, 2.0, 4.0], [1.0, 2.0, 4.0]) == pytest.approx(1.0)

    def test_r2_mean_predictor_scores_zero(self):
        y = [1.0, 2.0, 3.0, 6.0]
        mean = sum(y) / len(y)
        assert r2(y, [mean] * 4) == pytest.approx(0.0)

    def test_r2_constant_truth_is_an_error(self):
        with pytest.raises(DataError, match="undefined R"):
            r2([5.0, 5.0, 5.0], [5.0, 5.0, 5.0])

    def test_regression_report_flags_constant_truth(self):
        rep = regression_report([2.0, 2.0], [2.0, 2.5])
        assert rep["r2"] is None
        assert rep["flags"] == ["undefined-r2"]

    def test_regression_report_matches_parts(self):
        rng = np.random.Generator(np.random.PCG64(7))
        t = rng.normal(size=50)
        p = t + rng.normal(scale=0.3, size=50)
        rep = regression_report(t, p)
        assert rep["mae"] == pytest.approx(mae(t, p))
        assert rep["mse"] == pytest.approx(mse(t, p))
        assert rep["r2"] == pytest.approx(r2(t, p))
        assert rep["flags"] == []

    def test_mae_never_exceeds_rmse(self):
        rng = np.random.Generator(np.random.PCG64(3))
        for _ in range(20):
            t = rng.normal(size=30)
            p = rng.normal(size=30)
            assert mae(t, p) <= math.sqrt(mse(t, p)) + 1e-12

    def test_r2_affine_invariance(self):
        # Applying y -> a*y + b to both arrays leaves R2 unchanged.
        rng = np.random.Generator(np.random.PCG64(11))
        t = rng.normal(size=40)
        p = t + rng.normal(scale=0.5, size=40)
        base = r2(t, p)
        for a, b in [(2.0, 3.0), (-1.5, 10.0), (0.25, -7.0)]:
            assert r2(a * t + b, a * p + b) == pytest.approx(base, abs=1e-9)

    def test_length_mismatch_rejected(self):
        with pytest.raises(DataError, match="length mismatch"):
            mae([1.0], [1.0, 2.0])

    def test_empty_rejected(self):
        with pytest.raises(DataError, match="empty"):
            mse([], [])

    def test_nan_rejected(self):
        with pytest.raises(DataError, match="non-finite"):
            r2([1.0, float("nan")], [1.0, 2.0])


class TestClassification:
    def test_confusion_matrix_layout(self):
        m = confusion_matrix(["a", "a", "b", "b"], ["a", "b", "b", "b"], ["a", "b"])
        # rows = true, cols = predicted
        assert m.tolist() == [[1, 1], [0, 2]]

    def test_confusion_unknown_label_rejected(self):
        with pytest.raises(DataError, match="outside declared order"):
            confusion_matrix(["a", "c"], ["a", "a"], ["a", "b"])

    def test_one_vs_rest_counts(self):
        m = np.array([[3, 1], [0, 2]])
        assert one_vs_rest_counts(m, 0) == {"tp": 3, "tn": 2, "fp": 0, "fn": 1}
        assert one_vs_rest_counts(m, 1) == {"tp": 2, "tn": 3, "fp": 1, "fn": 0}

    def test_hand_counts_example(self):
        # tp=3 fp=1 fn=0 tn=2: precision 3/4, recall 1, F1 = 2*(3/4)/(7/4) = 6/7
        p, r, f, flags = precision_recall_f1(3, 1, 0)
        assert p == pytest.approx(0.75)
        assert r == pytest.approx(1.0)
        assert f == pytest.approx(6.0 / 7.0)
        assert flags == []

    def test_zero_division_flags(self):
        p, r, f, flags = precision_recall_f1(0, 0, 4)
        assert (p, r, f) == (0.0, 0.0, 0.0)
        assert "no-positive-predictions" in flags
        assert "undefined-f1" in flags
        p, r, f, flags = precision_recall_f1(0, 2, 0)
        assert "no-actual-positives" in flags

    def test_accuracy_hand_value(self):
        t = ["a", "a", "a", "b", "b", "b"]
        p = ["a", "a", "a", "b", "b", "a"]
        assert accuracy(t, p) == pytest.approx(5.0 / 6.0)

    def test_f1_between_min_and_max(self):
        rng = np.random.Generator(np.random.PCG64(5))
        for _ in range(50):
            tp = int(rng.integers(0, 10))
            fp = int(rng.integers(0, 10))
            fn = int(rng.integers(0, 10))
            p, r, f, _ = precision_recall_f1(tp, fp, fn)
            assert min(p, r) - 1e-12 <= f <= max(p, r) + 1e-12

    def test_report_structure_and_macro(self):
        t = ["a", "a", "b", "b", "c", "c"]
        p = ["a", "b", "b", "b", "c", "a"]
        rep = classification_report(t, p, ["a", "b", "c"])
        assert rep["accuracy"] == pytest.approx(4.0 / 6.0)
        assert set(rep["per_class"]) == {"a", "b", "c"}
        assert rep["per_class"]["a"]["support"] == 2
        macro = np.mean([rep["per_class"][k]["f1"] for k in ["a", "b", "c"]])
        assert rep["macro_f1"] == pytest.approx(float(macro))
        assert rep["confusion"]["labels"] == ["a", "b", "c"]
        assert int(np.sum(rep["confusion"]["matrix"])) == 6

    def test_report_flags_unpredicted_class(self):
        rep = classification_report(["a", "b"], ["a", "a"], ["a", "b"])
        assert "no-positive-predictions" in rep["per_class"]["b"]["flags"]

    def test_confusion_rows_sum_to_support(self):
        rng = np.random.Generator(np.random.PCG64(17))
        labels = ["x", "y", "z"]
        t = [labels[i] for i in rng.integers(0, 3, size=60)]
        p = [labels[i] for i in rng.integers(0, 3, size=60)]
        m = confusion_matrix(t, p, labels)
        for i, lab in enumerate(labels):
            assert int(m[i].sum()) == t.count(lab)
            assert int(m[:, i].sum()) == p.count(lab)


class TestRoc:
    def test_auc_hand_value(self):
        # 2 positives vs 2 negatives, 3 of 4 pairs concordant
        labels = [0, 0, 1, 1]
        scores = [0.1, 0.4, 0.35, 0.8]
        assert roc_auc(labels, scores) == pytest.approx(0.75)

    def test_auc_matches_pairwise_concordance(self):
        rng = np.random.Generator(np.random.PCG64(23))
        for _ in range(10):
            labels = rng.integers(0, 2, size=40)
            if labels.sum() in (0, 40):
                labels[0] = 1 - labels[0]
            scores = np.round(rng.normal(size=40), 1)  # force ties
            assert roc_auc(labels, scores) == pytest.approx(
                brute_force_auc(labels.tolist(), scores.tolist())
            )

    def test_perfect_and_inverted(self):
        assert roc_auc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == pytest.approx(1.0)
        assert roc_auc([0, 0, 1, 1], [0.9, 0.8, 0.2, 0.1]) == pytest.approx(0.0)

    def test_curve_starts_at_origin_with_none_threshold(self):
        curve = roc([0.3, 0.7], [0, 1])
        assert curve.points[0] == (0.0, 0.0, None)
        assert curve.points[-1][0] == pytest.approx(1.0)
        assert curve.points[-1][1] == pytest.approx(1.0)

    def test_monotone_transform_invariance(self):
        rng = np.random.Generator(np.random.PCG64(29))
        labels = rng.integers(0, 2, size=50)
        labels[0], labels[1] = 0, 1
        scores = rng.normal(size=50)
        base = roc_auc(labels, scores)
        for fn in [np.exp, lambda s: 3 * s + 2, lambda s: s**3]:
            assert roc_auc(labels, fn(scores)) == pytest.approx(base, abs=1e-12)

    def test_operating_point_maximizes_j(self):
        labels = [0, 0, 0, 1, 1, 1]
        scores = [0.1, 0.2, 0.6, 0.5, 0.7, 0.9]
        curve = roc(scores, labels)
        best = max(t - f for f, t, _ in curve.points)
        assert curve.operating_point["j"] == pytest.approx(best)
        # tie -> highest threshold (earliest sweep point)
        flat = roc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
        assert flat.operating_point["threshold"] == pytest.approx(0.8)

    def test_single_class_rejected(self):
        with pytest.raises(DataError, match="both classes"):
            roc_sweep([1, 1, 1], [0.1, 0.2, 0.3])

    def test_trapezoid_rejects_decreasing_x(self):
        with pytest.raises(DataError, match="non-decreasing"):
            trapezoid_area([0.0, 1.0, 0.5], [0.0, 0.5, 1.0])

    def test_curve_serializes_to_json(self):
        curve = roc([0.2, 0.8, 0.5], [0, 1, 1])
        blob = json.dumps(curve.to_dict(), allow_nan=False)
        assert json.loads(blob)["auc"] == pytest.approx(curve.auc)


class TestKfold:
    def test_partition_properties(self):
        for n, k in [(10, 5), (11, 3), (7, 7), (100, 4)]:
            folds = kfold_indices(n, k, seed=42)
            assert len(folds) == k
            all_test = np.concatenate([test for _, test in folds])
            assert sorted(all_test.tolist()) == list(range(n))
            sizes = {test.size for _, test in folds}
            assert max(sizes) - min(sizes) <= 1
            for train, test in folds:
                assert set(train) | set(test) == set(range(n))
                assert not set(train) & set(test)

    def test_deterministic_and_seed_sensitive(self):
        a = kfold_indices(20, 4, seed=1)
        b = kfold_indices(20, 4, seed=1)
        c = kfold_indices(20, 4, seed=2)
        for (ta, sa), (tb, sb) in zip(a, b):
            assert np.array_equal(ta, tb) and np.array_equal(sa, sb)
        assert any(not np.array_equal(sa, sc) for (_, sa), (_, sc) in zip(a, c))

    def test_bad_parameters(self):
        with pytest.raises(DataError):
            kfold_indices(5, 1, seed=0)
        with pytest.raises(DataError):
            kfold_indices(3, 4, seed=0)


class _StubRegressor:
    def __init__(self, names, value):
        self.feature_names_ = list(names)
        self._value = value

    def predict(self, x):
        return np.full(x.shape[0], self._value) + x[:, 0] * 0.0


class _StubClassifier:
    def __init__(self, names, classes, label):
        self.feature_names_ = list(names)
        self.classes_ = list(classes)
        self._label = label

    def predict(self, x):
        return np.array([self._label] * x.shape[0], dtype=object)

    def predict_proba(self, x):
        out = np.zeros((x.shape[0], len(self.classes_)))
        out[:, self.classes_.index(self._label)] = 1.0
        return out


class _StubFrame:
    def __init__(self, columns, X, targets):
        self.columns = tuple(columns)
        self.X = X
        self.targets = targets


class TestEvaluate:
    def _frame(self):
        X = np.arange(12, dtype=np.float64).reshape(4, 3)
        targets = {
            "speed": np.array([5.0, 5.0, 7.0, 7.0]),
            "drone_type": ["a", "a", "b", "b"],
        }
        return _StubFrame(["c0", "c1", "c2"], X, targets)

    def test_report_shape_and_json_round_trip(self):
        frame = self._frame()
        models = {
            "speed": _StubRegressor(["c0", "c2"], 6.0),
            "drone_type": _StubClassifier(["c1"], ["a", "b"], "a"),
        }
        rep = evaluate(models, frame)
        assert rep["n_rows"] == 4
        assert rep["regression"]["speed"]["mae"] == pytest.approx(1.0)
        assert rep["classification"]["accuracy"] == pytest.approx(0.5)
        # all-positive scores for one class: sweep still defined on 0/1 labels
        assert set(rep["classification"]["roc"]) == {"a", "b"}
        blob = json.dumps(rep, allow_nan=False, sort_keys=True)
        assert json.loads(blob) == json.loads(json.dumps(rep, allow_nan=False, sort_keys=True))

    def test_feature_mismatch_raises(self):
        frame = self._frame()
        models = {"speed": _StubRegressor(["c0", "missing"], 6.0)}
        with pytest.raises(DataError, match="feature mismatch"):
            evaluate(models, frame)

    def test_frame_without_targets_rejected(self):
        frame = self._frame()
        frame.targets = None
        with pytest.raises(DataError, match="no targets"):
            evaluate({"speed": _StubRegressor(["c0"], 1.0)}, frame)
