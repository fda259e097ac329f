"""Random forests built on CART trees, implemented from first principles.

Trees split on midpoint thresholds between consecutive distinct feature
values, scored by variance reduction (regression) or Gini decrease
(classification), searching a fresh random feature subset at every node.
Bagging draws one bootstrap sample per tree; each tree owns an independent
RNG stream spawned from the forest seed, so fitting is reproducible and
the result is identical whether trees are built serially or in parallel.

Missing feature values never enter a split score. At fit time the rows
whose split feature is NaN follow the child that received more finite
rows; the direction is stored on the node and reused at predict time.

Fitted forests serialize to a small binary container (see save_model);
a load-save round trip is byte-identical.
"""

import concurrent.futures
import json
import math
import struct

import numpy as np

from . import metrics
from .core import DataError, ModelError

MODEL_MAGIC = b"URNS1"
MODEL_VERSION = 1

_TREE_KEYS = ("feature", "threshold", "left", "right", "nan_left", "value")


def _validate_matrix(X) -> np.ndarray:
    a = np.asarray(X, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        raise DataError("expected a non-empty 2D feature matrix")
    if np.any(np.isinf(a)):
        raise DataError("infinite feature value")
    return a


def _best_split_regression(vals, yv, min_leaf):
    # vals sorted ascending, yv aligned. Returns (gain, threshold) or None.
    n = vals.size
    s1 = np.cumsum(yv)
    s2 = np.cumsum(yv * yv)
    total1 = s1[-1]
    total2 = s2[-1]
    k = np.arange(1, n)
    valid = (vals[:-1] < vals[1:]) & (k >= min_leaf) & (n - k >= min_leaf)
    if not np.any(valid):
        return None
    kv = k[valid]
    l1 = s1[kv - 1]
    l2 = s2[kv - 1]
    # SSE = sum(y^2) - sum(y)^2 / n, computed for both sides at every cut.
    sse_l = l2 - l1 * l1 / kv
    sse_r = (total2 - l2) - (total1 - l1) ** 2 / (n - kv)
    parent = total2 - total1 * total1 / n
    gains = parent - (sse_l + sse_r)
    thr = (vals[kv - 1] + vals[kv]) / 2.0
    # A midpoint that rounds up to the right-hand value cannot separate the pair.
    ok = thr < vals[kv]
    if not np.any(ok):
        return None
    gains = gains[ok]
    thr = thr[ok]
    i = int(np.argmax(gains))
    return float(gains[i]), float(thr[i])


def _best_split_gini(vals, y_onehot, min_leaf):
    # y_onehot: rows aligned with sorted vals, one column per class.
    n = vals.size
    cum = np.cumsum(y_onehot, axis=0)
    total = cum[-1]
    k = np.arange(1, n)
    valid = (vals[:-1] < vals[1:]) & (k >= min_leaf) & (n - k >= min_leaf)
    if not np.any(valid):
        return None
    kv = k[valid]
    left = cum[kv - 1]
    right = total[None, :] - left
    nl = kv.astype(np.float64)
    nr = (n - kv).astype(np.float64)
    # Weighted Gini as n - sum(c^2)/n keeps everything in counts.
    w_left = nl - np.sum(left * left, axis=1) / nl
    w_right = nr - np.sum(right * right, axis=1) / nr
    parent = n - float(np.sum(total * total)) / n
    gains = parent - (w_left + w_right)
    thr = (vals[kv - 1] + vals[kv]) / 2.0
    ok = thr < vals[kv]
    if not np.any(ok):
        return None
    gains = gains[ok]
    thr = thr[ok]
    i = int(np.argmax(gains))
    return float(gains[i]), float(thr[i])


def _build_tree(Xb, yb, rng, *, n_classes, max_depth, min_leaf, m_features):
    """Grow one CART tree on an already-bootstrapped sample.

    Nodes are laid out in preorder (node, left subtree, right subtree) by an
    explicit stack, so structure never depends on recursion details. A node
    with feature -1 is a leaf; its value is the mean target (regression) or
    the per-class sample counts (classification).
    """
    n, p = Xb.shape
    is_clf = n_classes is not None
    tree = {key: [] for key in _TREE_KEYS}
    gain_by_feature = np.zeros(p, dtype=np.float64)

    def add_node():
        for key in _TREE_KEYS:
            tree[key].append(None)
        return len(tree["feature"]) - 1

    stack = [(np.arange(n), 0, -1, False)]
    while stack:
        rows, depth, parent, is_left = stack.pop()
        nid = add_node()
        if parent >= 0:
            tree["left" if is_left else "right"][parent] = nid
        y_node = yb[rows]
        if is_clf:
            counts = np.bincount(y_node, minlength=n_classes)
            pure = int(np.max(counts)) == rows.size
        else:
            pure = bool(np.all(y_node == y_node[0]))
        depth_capped = max_depth is not None and depth >= max_depth
        split = None
        if not pure and not depth_capped and rows.size >= 2 * min_leaf:
            if m_features < p:
                subset = np.sort(rng.choice(p, size=m_features, replace=False))
            else:
                subset = np.arange(p)
            best = None
            for j in subset:
                col = Xb[rows, j]
                finite = ~np.isnan(col)
                if int(finite.sum()) < 2 * min_leaf:
                    continue
                fvals = col[finite]
                order = np.argsort(fvals, kind="stable")
                v = fvals[order]
                yf = y_node[finite][order]
                if is_clf:
                    onehot = np.zeros((v.size, n_classes), dtype=np.float64)
                    onehot[np.arange(v.size), yf] = 1.0
                    found = _best_split_gini(v, onehot, min_leaf)
                else:
                    found = _best_split_regression(v, yf, min_leaf)
                # Zero-gain splits stay eligible: an impure node whose best
                # cut leaves both children equally mixed (XOR-style data)
                # must still partition or the pattern is unlearnable.
                if found is not None and found[0] >= 0.0:
                    # Strict > keeps the first (lowest feature index, then
                    # lowest threshold) among exact ties.
                    if best is None or found[0] > best[0]:
                        best = (found[0], int(j), found[1])
            if best is not None:
                split = best
        if split is None:
            tree["feature"][nid] = -1
            tree["threshold"][nid] = 0.0
            tree["nan_left"][nid] = False
            if is_clf:
                tree["value"][nid] = [int(c) for c in counts]
            else:
                tree["value"][nid] = float(np.mean(y_node))
            continue
        gain, j, thr = split
        gain_by_feature[j] += gain
        col = Xb[rows, j]
        finite = ~np.isnan(col)
        go_left = finite & (col <= thr)
        go_right = finite & (col > thr)
        nan_left = int(go_left.sum()) >= int(go_right.sum())
        if nan_left:
            go_left |= ~finite
        else:
            go_right |= ~finite
        tree["feature"][nid] = j
        tree["threshold"][nid] = thr
        tree["nan_left"][nid] = bool(nan_left)
        tree["value"][nid] = None
        # Right pushed first so the left child pops next (preorder).
        stack.append((rows[go_right], depth + 1, nid, False))
        stack.append((rows[go_left], depth + 1, nid, True))
    return tree, gain_by_feature


def _tree_apply_leaf(tree, X) -> np.ndarray:
    """Leaf node index for every row of X."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    feature = tree["feature"]
    threshold = tree["threshold"]
    nan_left = tree["nan_left"]
    stack = [(0, np.arange(n))]
    while stack:
        nid, rows = stack.pop()
        if rows.size == 0:
            continue
        f = feature[nid]
        if f == -1:
            out[rows] = nid
            continue
        col = X[rows, f]
        missing = np.isnan(col)
        left = (col <= threshold[nid]) | (missing if nan_left[nid] else np.zeros_like(missing))
        stack.append((tree["right"][nid], rows[~left]))
        stack.append((tree["left"][nid], rows[left]))
    return out


def _tree_stats(tree) -> dict:
    n_nodes = len(tree["feature"])
    leaves = [i for i in range(n_nodes) if tree["feature"][i] == -1]
    depth = {0: 0}
    max_depth = 0
    for i in range(n_nodes):
        if tree["feature"][i] != -1:
            depth[tree["left"][i]] = depth[i] + 1
            depth[tree["right"][i]] = depth[i] + 1
    if n_nodes > 1:
        max_depth = max(depth[i] for i in leaves)
    return {"n_nodes": n_nodes, "n_leaves": len(leaves), "depth": max_depth}


class _BaseForest:
    _kind = ""

    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int | None = None,
        min_samples_leaf: int | None = None,
        max_features: int | None = None,
        seed: int = 0,
        n_jobs: int = 1,
        bootstrap: bool = True,
        target_name: str = "",
    ):
        if n_trees < 1:
            raise DataError(f"need at least one tree, got {n_trees}")
        if max_depth is not None and max_depth < 1:
            raise DataError(f"max_depth must be positive, got {max_depth}")
        self.n_trees = int(n_trees)
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.seed = int(seed)
        self.n_jobs = int(n_jobs)
        self.bootstrap = bool(bootstrap)
        self.target_name = str(target_name)
        self.trees_: list[dict] = []
        self.feature_names_: list[str] = []
        self.oob_score_: float | None = None
        self.feature_importances_: np.ndarray | None = None

    def _default_min_leaf(self) -> int:
        raise NotImplementedError

    def _default_max_features(self, p: int) -> int:
        raise NotImplementedError

    def _resolved_params(self, p: int) -> tuple[int, int]:
        min_leaf = (
            self.min_samples_leaf if self.min_samples_leaf is not None else self._default_min_leaf()
        )
        if min_leaf < 1:
            raise DataError(f"min_samples_leaf must be positive, got {min_leaf}")
        m = self.max_features if self.max_features is not None else self._default_max_features(p)
        if not 1 <= m <= p:
            raise DataError(f"max_features={m} invalid for {p} features")
        return min_leaf, m

    def _fit_trees(self, X, y_enc, n_classes, feature_names):
        n, p = X.shape
        self.feature_names_ = (
            list(feature_names) if feature_names is not None else [f"f{j}" for j in range(p)]
        )
        if len(self.feature_names_) != p:
            raise DataError(f"{len(self.feature_names_)} feature names for {p} columns")
        min_leaf, m = self._resolved_params(p)
        seeds = np.random.SeedSequence(self.seed).spawn(self.n_trees)

        def build(i):
            rng = np.random.Generator(np.random.PCG64(seeds[i]))
            # bootstrap off -> every tree sees the full sample (no OOB rows).
            boot = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            tree, gains = _build_tree(
                X[boot],
                y_enc[boot],
                rng,
                n_classes=n_classes,
                max_depth=self.max_depth,
                min_leaf=min_leaf,
                m_features=m,
            )
            oob = np.ones(n, dtype=bool)
            oob[boot] = False
            return tree, gains, oob

        if self.n_jobs > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                results = list(pool.map(build, range(self.n_trees)))
        else:
            results = [build(i) for i in range(self.n_trees)]
        self.trees_ = [r[0] for r in results]
        total_gain = np.sum([r[1] for r in results], axis=0)
        s = float(total_gain.sum())
        self.feature_importances_ = total_gain / s if s > 0.0 else total_gain
        return [r[2] for r in results]

    def _check_fitted_matrix(self, X) -> np.ndarray:
        if not self.trees_:
            raise ModelError("forest is not fitted")
        a = _validate_matrix(X)
        if a.shape[1] != len(self.feature_names_):
            raise ModelError(
                f"feature mismatch: model expects {len(self.feature_names_)} features, "
                f"got {a.shape[1]}"
            )
        return a

    def tree_stats(self) -> list[dict]:
        """Per-tree node/leaf/depth counts, in tree index order."""
        if not self.trees_:
            raise ModelError("forest is not fitted")
        return [_tree_stats(t) for t in self.trees_]


class RandomForestRegressor(_BaseForest):
    """Bagged CART regression: forest prediction is the mean of tree means."""

    _kind = "regressor"

    def _default_min_leaf(self) -> int:
        return 5

    def _default_max_features(self, p: int) -> int:
        return max(1, math.ceil(p / 3))

    def fit(self, X, y, feature_names=None) -> "RandomForestRegressor":
        a = _validate_matrix(X)
        t = np.asarray(y, dtype=np.float64).ravel()
        if t.shape[0] != a.shape[0]:
            raise DataError(f"{a.shape[0]} rows vs {t.shape[0]} targets")
        if not np.all(np.isfinite(t)):
            raise DataError("non-finite regression target")
        oob_masks = self._fit_trees(a, t, None, feature_names)
        # OOB: average each row's prediction over the trees that skipped it.
        sums = np.zeros(a.shape[0])
        counts = np.zeros(a.shape[0])
        for tree, mask in zip(self.trees_, oob_masks):
            if not np.any(mask):
                continue
            leaves = _tree_apply_leaf(tree, a[mask])
            vals = np.array([tree["value"][i] for i in leaves])
            sums[mask] += vals
            counts[mask] += 1.0
        covered = counts > 0
        if np.sum(covered) >= 2:
            try:
                self.oob_score_ = metrics.r2(t[covered], sums[covered] / counts[covered])
            except DataError:  # constant target leaves R2 undefined
                self.oob_score_ = None
        else:
            self.oob_score_ = None
        return self

    def predict(self, X) -> np.ndarray:
        a = self._check_fitted_matrix(X)
        acc = np.zeros(a.shape[0])
        for tree in self.trees_:
            leaves = _tree_apply_leaf(tree, a)
            acc += np.array([tree["value"][i] for i in leaves])
        return acc / len(self.trees_)


class RandomForestClassifier(_BaseForest):
    """Bagged CART classification: majority vote over per-tree leaf argmax.

    The class order is fixed at fit (explicitly, or sorted label strings) and
    every tie, vote vector, and probability column follows it.
    """

    _kind = "classifier"

    def __init__(self, *args, class_order=None, **kwargs):
        super().__init__(*args, **kwargs)
        self.class_order = list(class_order) if class_order is not None else None
        self.classes_: list[str] = []

    def _default_min_leaf(self) -> int:
        return 1

    def _default_max_features(self, p: int) -> int:
        return max(1, math.ceil(math.sqrt(p)))

    def fit(self, X, y, feature_names=None) -> "RandomForestClassifier":
        a = _validate_matrix(X)
        labels = [str(v) for v in y]
        if len(labels) != a.shape[0]:
            raise DataError(f"{a.shape[0]} rows vs {len(labels)} labels")
        if self.class_order is not None:
            self.classes_ = [str(c) for c in self.class_order]
            unknown = sorted(set(labels) - set(self.classes_))
            if unknown:
                raise DataError(f"labels outside declared class order: {unknown}")
        else:
            self.classes_ = sorted(set(labels))
        if len(self.classes_) < 2:
            raise DataError("classification needs at least 2 classes")
        index = {c: i for i, c in enumerate(self.classes_)}
        y_enc = np.array([index[v] for v in labels], dtype=np.int64)
        oob_masks = self._fit_trees(a, y_enc, len(self.classes_), feature_names)
        votes = np.zeros((a.shape[0], len(self.classes_)))
        for tree, mask in zip(self.trees_, oob_masks):
            if not np.any(mask):
                continue
            leaves = _tree_apply_leaf(tree, a[mask])
            picks = np.array([int(np.argmax(tree["value"][i])) for i in leaves])
            votes[np.flatnonzero(mask), picks] += 1.0
        covered = votes.sum(axis=1) > 0
        if np.any(covered):
            oob_pred = np.argmax(votes[covered], axis=1)
            self.oob_score_ = metrics.accuracy(
                y_enc[covered].tolist(), oob_pred.tolist()
            )
        else:
            self.oob_score_ = None
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Fraction of trees voting each class, columns in class order."""
        a = self._check_fitted_matrix(X)
        votes = np.zeros((a.shape[0], len(self.classes_)))
        rows = np.arange(a.shape[0])
        for tree in self.trees_:
            leaves = _tree_apply_leaf(tree, a)
            # argmax breaks leaf-count ties toward the lowest class index.
            picks = np.array([int(np.argmax(tree["value"][i])) for i in leaves])
            votes[rows, picks] += 1.0
        return votes / len(self.trees_)

    def predict(self, X) -> list[str]:
        proba = self.predict_proba(X)
        return [self.classes_[int(i)] for i in np.argmax(proba, axis=1)]


def _forest_payload(model: _BaseForest) -> dict:
    trees = []
    for t in model.trees_:
        trees.append({key: list(t[key]) for key in _TREE_KEYS})
    payload = {
        "kind": model._kind,
        "target_name": model.target_name,
        "feature_names": model.feature_names_,
        "params": {
            "n_trees": model.n_trees,
            "max_depth": model.max_depth,
            "min_samples_leaf": model.min_samples_leaf,
            "max_features": model.max_features,
            "seed": model.seed,
            "bootstrap": model.bootstrap,
        },
        "oob_score": model.oob_score_,
        "feature_importances": (
            [float(v) for v in model.feature_importances_]
            if model.feature_importances_ is not None
            else None
        ),
        "trees": trees,
    }
    if isinstance(model, RandomForestClassifier):
        payload["classes"] = model.classes_
    return payload


def canonical_json_bytes(obj) -> bytes:
    """Stable serialization: sorted keys, no whitespace, strict finite floats."""
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), allow_nan=False, ensure_ascii=True
    ).encode("ascii")


def save_model(model: _BaseForest, path) -> None:
    """Write magic, version byte, big-endian payload length, then canonical JSON."""
    if not model.trees_:
        raise ModelError("cannot save an unfitted forest")
    payload = canonical_json_bytes(_forest_payload(model))
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(bytes([MODEL_VERSION]))
        fh.write(struct.pack(">I", len(payload)))
        fh.write(payload)


def load_model(path) -> _BaseForest:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MODEL_MAGIC) + 5 or not blob.startswith(MODEL_MAGIC):
        raise ModelError(f"not a URANUS model: {path}")
    version = blob[len(MODEL_MAGIC)]
    if version != MODEL_VERSION:
        raise ModelError(f"unsupported model version {version}")
    offset = len(MODEL_MAGIC) + 1
    (length,) = struct.unpack(">I", blob[offset : offset + 4])
    body = blob[offset + 4 :]
    if len(body) != length:
        raise ModelError(f"payload length {len(body)} does not match header {length}")
    try:
        payload = json.loads(body.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelError(f"corrupt model payload: {e}") from None
    kind = payload.get("kind")
    params = payload["params"]
    common = dict(
        n_trees=params["n_trees"],
        max_depth=params["max_depth"],
        min_samples_leaf=params["min_samples_leaf"],
        max_features=params["max_features"],
        seed=params["seed"],
        bootstrap=params.get("bootstrap", True),
        target_name=payload.get("target_name", ""),
    )
    if kind == "regressor":
        model: _BaseForest = RandomForestRegressor(**common)
    elif kind == "classifier":
        model = RandomForestClassifier(**common, class_order=payload["classes"])
        model.classes_ = list(payload["classes"])
    else:
        raise ModelError(f"unknown model kind {kind!r}")
    model.feature_names_ = list(payload["feature_names"])
    model.oob_score_ = payload["oob_score"]
    fi = payload.get("feature_importances")
    model.feature_importances_ = np.array(fi) if fi is not None else None
    model.trees_ = [{key: list(t[key]) for key in _TREE_KEYS} for t in payload["trees"]]
    return model


def cross_validate(factory, X, y, k: int, seed: int) -> dict:
    """K-fold evaluation with out-of-fold predictions.

    factory(fold_seed) must return an unfitted forest; each fold trains a
    fresh one on the remaining folds. Returns per-fold reports, their means,
    and the pooled out-of-fold predictions aligned with the input rows.
    Classifier factories should pin class_order so every fold shares one
    label space even when a fold is missing a class.
    """
    a = _validate_matrix(X)
    n = a.shape[0]
    folds = metrics.kfold_indices(n, k, seed)
    fold_seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(k)]
    probe = factory(fold_seeds[0])
    is_clf = isinstance(probe, RandomForestClassifier)
    if is_clf:
        y_arr = np.array([str(v) for v in y], dtype=object)
        oof = np.empty(n, dtype=object)
    else:
        y_arr = np.asarray(y, dtype=np.float64).ravel()
        oof = np.full(n, np.nan)
    if y_arr.shape[0] != n:
        raise DataError(f"{n} rows vs {y_arr.shape[0]} targets")
    reports = []
    for i, (train, test) in enumerate(folds):
        model = factory(fold_seeds[i])
        model.fit(a[train], y_arr[train])
        if is_clf:
            pred = model.predict(a[test])
            for idx, p in zip(test, pred):
                oof[idx] = p
            reports.append(
                metrics.classification_report(y_arr[test].tolist(), pred, model.classes_)
            )
        else:
            pred = model.predict(a[test])
            oof[test] = pred
            reports.append(metrics.regression_report(y_arr[test], pred))
    # Average only keys that are numeric in every fold (a fold with constant
    # truth reports r2 as None and drops it from the mean).
    scalar_keys = [
        k_
        for k_ in reports[0]
        if all(isinstance(r[k_], (int, float)) and not isinstance(r[k_], bool) for r in reports)
    ]
    mean = {k_: float(np.mean([r[k_] for r in reports])) for k_ in scalar_keys}
    return {"folds": reports, "mean": mean, "oof": oof}
