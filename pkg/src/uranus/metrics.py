"""Evaluation metrics implemented from first principles.

Regression: MAE, MSE, R2. Classification: confusion matrix with one-vs-rest
counts, accuracy, precision, recall, F1 (zero divisions score 0 and are
flagged, never silently absorbed). Ranking: ROC curves swept over unique
scores with trapezoidal AUC and the Youden operating point. evaluate() runs
the whole suite for a bundle of per-target models against a fused frame.

All computation is float64; inputs are validated, never mutated.
"""

from dataclasses import dataclass

import numpy as np

from .core import DataError


def _pair(y_true, y_pred) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(y_true, dtype=np.float64).ravel()
    p = np.asarray(y_pred, dtype=np.float64).ravel()
    if t.shape != p.shape:
        raise DataError(f"length mismatch: {t.shape[0]} true vs {p.shape[0]} predicted")
    if t.size == 0:
        raise DataError("empty input")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
        raise DataError("non-finite value in metric input")
    return t, p


def mae(y_true, y_pred) -> float:
    """Mean absolute error: mean(|y - yhat|)."""
    t, p = _pair(y_true, y_pred)
    return float(np.mean(np.abs(t - p)))


def mse(y_true, y_pred) -> float:
    """Mean squared error: mean((y - yhat)^2)."""
    t, p = _pair(y_true, y_pred)
    return float(np.mean((t - p) ** 2))


def r2(y_true, y_pred) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot.

    SS_tot is taken around the mean of the observed values. Constant
    observations leave nothing to explain and raise "undefined R^2" rather
    than returning a convention value.
    """
    t, p = _pair(y_true, y_pred)
    ss_res = float(np.sum((t - p) ** 2))
    ss_tot = float(np.sum((t - np.mean(t)) ** 2))
    if ss_tot == 0.0:
        raise DataError("undefined R^2: observed values are constant")
    return 1.0 - ss_res / ss_tot


def regression_report(y_true, y_pred) -> dict:
    """MAE/MSE/R2 in one dict; a constant-observation R2 becomes None + flag."""
    out = {"mae": mae(y_true, y_pred), "mse": mse(y_true, y_pred)}
    try:
        out["r2"] = r2(y_true, y_pred)
        out["flags"] = []
    except DataError:
        out["r2"] = None
        out["flags"] = ["undefined-r2"]
    return out


def confusion_matrix(y_true, y_pred, labels) -> np.ndarray:
    """Counts indexed [true, predicted] in the given label order.

    Labels outside `labels` are a data error, not a silent drop.
    """
    labels = list(labels)
    index = {lab: i for i, lab in enumerate(labels)}
    if len(index) != len(labels):
        raise DataError("duplicate label in label order")
    t = list(y_true)
    p = list(y_pred)
    if len(t) != len(p):
        raise DataError(f"length mismatch: {len(t)} true vs {len(p)} predicted")
    if not t:
        raise DataError("empty input")
    m = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for ti, pi in zip(t, p):
        if ti not in index or pi not in index:
            raise DataError(f"label outside declared order: {ti!r} / {pi!r}")
        m[index[ti], index[pi]] += 1
    return m


def one_vs_rest_counts(matrix: np.ndarray, class_index: int) -> dict[str, int]:
    """TP/TN/FP/FN for one class against all others."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DataError("confusion matrix must be square")
    if not 0 <= class_index < m.shape[0]:
        raise DataError(f"class index {class_index} out of range")
    tp = int(m[class_index, class_index])
    fp = int(m[:, class_index].sum()) - tp
    fn = int(m[class_index, :].sum()) - tp
    tn = int(m.sum()) - tp - fp - fn
    return {"tp": tp, "tn": tn, "fp": fp, "fn": fn}


def accuracy(y_true, y_pred) -> float:
    t = list(y_true)
    p = list(y_pred)
    if len(t) != len(p):
        raise DataError(f"length mismatch: {len(t)} true vs {len(p)} predicted")
    if not t:
        raise DataError("empty input")
    return sum(1 for a, b in zip(t, p) if a == b) / len(t)


def precision_recall_f1(tp: int, fp: int, fn: int) -> tuple[float, float, float, list[str]]:
    """Binary precision/recall/F1 from counts.

    Empty denominators score 0 and add a flag naming the degeneracy instead
    of raising, so batch reports survive classes nobody predicted.
    """
    flags = []
    if tp + fp == 0:
        precision = 0.0
        flags.append("no-positive-predictions")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        flags.append("no-actual-positives")
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0.0:
        f1 = 0.0
        flags.append("undefined-f1")
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1, flags


def classification_report(y_true, y_pred, labels) -> dict:
    """Per-class one-vs-rest scores plus accuracy and macro averages."""
    m = confusion_matrix(y_true, y_pred, labels)
    labels = list(labels)
    per_class: dict = {}
    for i, lab in enumerate(labels):
        counts = one_vs_rest_counts(m, i)
        p, r, f, flags = precision_recall_f1(counts["tp"], counts["fp"], counts["fn"])
        per_class[lab] = {
            "precision": p,
            "recall": r,
            "f1": f,
            "support": counts["tp"] + counts["fn"],
            "counts": counts,
            "flags": flags,
        }
    n = int(m.sum())
    return {
        "accuracy": float(np.trace(m)) / n,
        "per_class": per_class,
        "macro_precision": float(np.mean([per_class[lab]["precision"] for lab in labels])),
        "macro_recall": float(np.mean([per_class[lab]["recall"] for lab in labels])),
        "macro_f1": float(np.mean([per_class[lab]["f1"] for lab in labels])),
        "confusion": {"labels": [str(lab) for lab in labels], "matrix": m.tolist()},
    }


@dataclass(frozen=True)
class RocCurve:
    """One swept curve: (fpr, tpr, threshold) points, area, operating point.

    The first point is (0, 0) with threshold None (nothing classified
    positive); thresholds then descend along unique scores. The operating
    point maximizes Youden's J = TPR - FPR, ties resolving to the highest
    threshold so the choice is deterministic.
    """

    points: list[tuple[float, float, float | None]]
    auc: float
    operating_point: dict

    def to_dict(self) -> dict:
        return {
            "points": [[f, t, th] for f, t, th in self.points],
            "auc": self.auc,
            "operating_point": dict(self.operating_point),
        }


def roc_sweep(y_true, scores) -> tuple[np.ndarray, np.ndarray, list[float | None]]:
    """Raw ROC arrays (fpr, tpr, thresholds); first threshold is None."""
    t = np.asarray(y_true, dtype=np.float64).ravel()
    s = np.asarray(scores, dtype=np.float64).ravel()
    if t.shape != s.shape:
        raise DataError(f"length mismatch: {t.shape[0]} labels vs {s.shape[0]} scores")
    if t.size == 0:
        raise DataError("empty input")
    if not np.all((t == 0.0) | (t == 1.0)):
        raise DataError("labels must be 0 or 1")
    n_pos = float(np.sum(t))
    n_neg = float(t.size - n_pos)
    if n_pos == 0.0 or n_neg == 0.0:
        raise DataError("ROC needs both classes present")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    t_sorted = t[order]
    tps = np.cumsum(t_sorted)
    fps = np.cumsum(1.0 - t_sorted)
    # Collapse runs of equal scores to their last cumulative point.
    last_of_run = np.r_[s_sorted[1:] != s_sorted[:-1], True]
    fpr = np.r_[0.0, fps[last_of_run] / n_neg]
    tpr = np.r_[0.0, tps[last_of_run] / n_pos]
    thresholds: list[float | None] = [None] + [float(v) for v in s_sorted[last_of_run]]
    return fpr, tpr, thresholds


def trapezoid_area(x, y) -> float:
    """Trapezoidal area under monotone (x, y) samples."""
    xa = np.asarray(x, dtype=np.float64).ravel()
    ya = np.asarray(y, dtype=np.float64).ravel()
    if xa.shape != ya.shape or xa.size < 2:
        raise DataError("curve needs matching x/y with at least two points")
    if np.any(np.diff(xa) < 0.0):
        raise DataError("curve x must be non-decreasing")
    return float(np.trapezoid(ya, xa))


def roc(scores, y_true) -> RocCurve:
    """Full ROC analysis of binary labels against larger-is-positive scores."""
    fpr, tpr, thresholds = roc_sweep(y_true, scores)
    j = tpr - fpr
    i = int(np.argmax(j))
    op = {
        "threshold": thresholds[i],
        "tpr": float(tpr[i]),
        "fpr": float(fpr[i]),
        "j": float(j[i]),
    }
    points = [(float(f), float(t), th) for f, t, th in zip(fpr, tpr, thresholds)]
    return RocCurve(points=points, auc=trapezoid_area(fpr, tpr), operating_point=op)


def roc_auc(y_true, scores) -> float:
    return roc(scores, y_true).auc


def kfold_indices(n: int, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Shuffled k-fold split of range(n), reproducible from the seed.

    Fold sizes differ by at most one; every index appears in exactly one
    test fold. Indices inside each split come back sorted.
    """
    if k < 2:
        raise DataError(f"need at least 2 folds, got {k}")
    if n < k:
        raise DataError(f"cannot split {n} rows into {k} folds")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(n)
    sizes = np.full(k, n // k, dtype=np.int64)
    sizes[: n % k] += 1
    folds = []
    start = 0
    for size in sizes:
        folds.append(np.sort(perm[start : start + size]))
        start += size
    out = []
    for i in range(k):
        test = folds[i]
        train = np.sort(np.concatenate([folds[j] for j in range(k) if j != i]))
        out.append((train, test))
    return out


REGRESSION_TARGETS = ("latitude", "longitude", "speed", "altitude")
CLASS_TARGET = "drone_type"


def _model_columns(model, frame) -> np.ndarray:
    positions = []
    for name in model.feature_names_:
        if name not in frame.columns:
            raise DataError(f"feature mismatch: model needs {name!r}, frame lacks it")
        positions.append(list(frame.columns).index(name))
    return frame.X[:, positions]


def evaluate(models, frame) -> dict:
    """Run every applicable metric for per-target models against a frame.

    models maps target name to a fitted model (regressors for the kinematic
    targets, a classifier for the type target); frame must carry targets.
    The report is plain JSON-serializable data: regression metrics per
    target, classification scores with confusion matrix, and one-vs-rest
    ROC per class (a class absent from the truth gets null + flag).
    """
    if frame.targets is None:
        raise DataError("frame has no targets to evaluate against")
    if frame.X.shape[0] == 0:
        raise DataError("empty frame")
    report: dict = {"n_rows": int(frame.X.shape[0]), "regression": {}, "classification": None}
    for target, model in sorted(models.items()):
        if target == CLASS_TARGET:
            continue
        if target not in frame.targets:
            raise DataError(f"frame lacks target {target!r}")
        x = _model_columns(model, frame)
        report["regression"][target] = regression_report(frame.targets[target], model.predict(x))
    if CLASS_TARGET in models:
        model = models[CLASS_TARGET]
        truth = [str(v) for v in frame.targets[CLASS_TARGET]]
        x = _model_columns(model, frame)
        pred = model.predict(x)
        cls_report = classification_report(truth, pred, model.classes_)
        proba = model.predict_proba(x)
        roc_per_class: dict = {}
        for i, cls in enumerate(model.classes_):
            binary = [1.0 if v == cls else 0.0 for v in truth]
            try:
                roc_per_class[cls] = roc(proba[:, i], binary).to_dict()
            except DataError:
                roc_per_class[cls] = {"auc": None, "flags": ["class-absent"]}
        cls_report["roc"] = roc_per_class
        report["classification"] = cls_report
    return report
