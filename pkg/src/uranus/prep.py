"""Data preparation: missingness analysis, outlier fences, encodings,
clustering, and univariate feature scoring.

Everything here is pure and deterministic. The operations mirror the
cleaning sequence the track predictor trains on: report missing cells,
drop IQR outliers, isolate the moving cluster in surveillance plots,
one-hot categorical columns, then rank features per target with one-way
ANOVA (classic groups form for the categorical target, the univariate
regression equivalent for continuous ones).
"""

import bisect
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import DataError, haversine_m

TAG_MCAR = "MCAR-candidate"
TAG_MAR = "MAR-candidate"
TAG_MNAR = "MNAR-unknown"

# |Pearson r| between a column's missingness indicator and another column's
# observed values above which the gap looks conditioned on observed data.
MAR_CORRELATION_THRESHOLD = 0.5


def _pearson(a: np.ndarray, b: np.ndarray) -> float | None:
    """Correlation of two equal-length vectors; None when either is constant."""
    if a.size < 3:
        return None
    sa = a - a.mean()
    sb = b - b.mean()
    denom = math.sqrt(float(np.sum(sa * sa)) * float(np.sum(sb * sb)))
    if denom == 0.0:
        return None
    return float(np.sum(sa * sb)) / denom


@dataclass(frozen=True)
class MissingReport:
    """Where the gaps are and what they look like.

    mask is True where a cell is missing and has exactly the frame's shape.
    row_histogram[i] counts rows with exactly i missing cells.
    indicator_correlation holds pairwise Pearson r between the 0/1
    missingness indicators (diagonal 1, constant indicators correlate 0).
    Tags are heuristics for reporting only: MAR-candidate when a column's
    indicator tracks some observed column, MCAR-candidate otherwise;
    MNAR-unknown is reserved for human annotation and never auto-assigned.
    """

    columns: tuple[str, ...]
    counts: dict
    percentages: dict
    mask: np.ndarray
    row_histogram: list
    indicator_correlation: np.ndarray
    tags: dict

    def to_dict(self) -> dict:
        return {
            "columns": list(self.columns),
            "counts": dict(self.counts),
            "percentages": dict(self.percentages),
            "mask": [[bool(v) for v in row] for row in self.mask],
            "row_histogram": list(self.row_histogram),
            "indicator_correlation": [[float(v) for v in row] for row in self.indicator_correlation],
            "tags": dict(self.tags),
        }

    def mask_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.mask:
            lines.append(",".join("1" if v else "0" for v in row))
        return "\n".join(lines) + "\n"


def missing_report(frame) -> MissingReport:
    """Audit NaN cells of a fused frame (anything with .columns and .X)."""
    x = np.asarray(frame.X, dtype=np.float64)
    columns = tuple(frame.columns)
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] != len(columns):
        raise DataError("empty or malformed frame")
    mask = np.isnan(x)
    n_rows, n_cols = x.shape
    counts = {c: int(mask[:, j].sum()) for j, c in enumerate(columns)}
    percentages = {c: 100.0 * counts[c] / n_rows for c in columns}
    per_row = mask.sum(axis=1)
    row_histogram = [int(np.sum(per_row == i)) for i in range(n_cols + 1)]
    ind = mask.astype(np.float64)
    corr = np.eye(n_cols)
    for i in range(n_cols):
        for j in range(i + 1, n_cols):
            r = _pearson(ind[:, i], ind[:, j])
            corr[i, j] = corr[j, i] = r if r is not None else 0.0
    tags = {}
    for j, c in enumerate(columns):
        tag = TAG_MCAR
        if 0 < counts[c] < n_rows:
            for d in range(n_cols):
                if d == j:
                    continue
                observed = ~mask[:, d]
                r = _pearson(ind[observed, j], x[observed, d])
                if r is not None and abs(r) > MAR_CORRELATION_THRESHOLD:
                    tag = TAG_MAR
                    break
        tags[c] = tag
    return MissingReport(
        columns=columns,
        counts=counts,
        percentages=percentages,
        mask=mask,
        row_histogram=row_histogram,
        indicator_correlation=corr,
        tags=tags,
    )


def quantile_linear(values: np.ndarray, q: float) -> float:
    """Quantile by linear interpolation between order statistics."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        raise DataError("quantile of empty data")
    pos = q * (v.size - 1)
    lo = int(math.floor(pos))
    hi = int(math.ceil(pos))
    if lo == hi:
        return float(v[lo])
    frac = pos - lo
    return float(v[lo] * (1.0 - frac) + v[hi] * frac)


@dataclass(frozen=True)
class IqrFences:
    q1: float
    q3: float
    iqr: float
    lower: float
    upper: float

    def __post_init__(self):
        if self.q1 > self.q3:
            raise DataError(f"q1 {self.q1} above q3 {self.q3}")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict:
        return {
            "q1": self.q1,
            "q3": self.q3,
            "iqr": self.iqr,
            "lower": self.lower,
            "upper": self.upper,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IqrFences":
        return cls(q1=d["q1"], q3=d["q3"], iqr=d["iqr"], lower=d["lower"], upper=d["upper"])


def fit_fences(values, k: float = 1.5) -> IqrFences:
    """Tukey fences from the finite entries of a column."""
    v = np.asarray(values, dtype=np.float64).ravel()
    finite = v[np.isfinite(v)]
    if finite.size < 4:
        raise DataError(f"insufficient data: need at least 4 finite values, got {finite.size}")
    q1 = quantile_linear(finite, 0.25)
    q3 = quantile_linear(finite, 0.75)
    iqr = q3 - q1
    return IqrFences(q1=q1, q3=q3, iqr=iqr, lower=q1 - k * iqr, upper=q3 + k * iqr)


def iqr_filter(values) -> tuple[IqrFences, np.ndarray, np.ndarray]:
    """Split a column into fences, retained values, and outlier indices.

    Fences always come from the original column. Non-finite entries are
    missing rather than deviant: they appear in neither output, and the
    missingness report is the place that accounts for them.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    fences = fit_fences(v)
    finite = np.isfinite(v)
    inside = finite & (v >= fences.lower) & (v <= fences.upper)
    outlier_indices = np.flatnonzero(finite & ~inside)
    return fences, v[inside], outlier_indices


@dataclass(frozen=True)
class OneHotEncoding:
    """Binary expansion of a categorical column, first-appearance order."""

    categories: tuple

    def column_names(self, base: str) -> list:
        return [f"{base}={c}" for c in self.categories]

    def transform(self, values, warn_unseen: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """(matrix, absent_mask): absent rows and unseen categories are
        all-zeros; unseen additionally warns, absent sets the mask."""
        index = {c: i for i, c in enumerate(self.categories)}
        out = np.zeros((len(values), len(self.categories)), dtype=np.float64)
        absent = np.zeros(len(values), dtype=bool)
        for i, value in enumerate(values):
            if _is_absent(value):
                absent[i] = True
                continue
            key = str(value)
            if key in index:
                out[i, index[key]] = 1.0
            elif warn_unseen:
                warnings.warn(f"unseen category {key!r} encoded as all-zeros", stacklevel=2)
        return out, absent

    def inverse(self, matrix) -> list:
        """Category per row; all-zero rows (absent or unseen) come back None."""
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[1] != len(self.categories):
            raise DataError(f"matrix width {m.shape} does not match {len(self.categories)} categories")
        out = []
        for row in m:
            hot = np.flatnonzero(row == 1.0)
            out.append(self.categories[hot[0]] if hot.size else None)
        return out

    def to_dict(self) -> dict:
        return {"categories": list(self.categories)}

    @classmethod
    def from_dict(cls, d: dict) -> "OneHotEncoding":
        return cls(categories=tuple(d["categories"]))


def _is_absent(value) -> bool:
    if value is None or value == "":
        return True
    return isinstance(value, float) and math.isnan(value)


def one_hot_fit(values) -> OneHotEncoding:
    seen = []
    for value in values:
        if _is_absent(value):
            continue
        key = str(value)
        if key not in seen:
            seen.append(key)
    if not seen:
        raise DataError("no categories present")
    return OneHotEncoding(categories=tuple(seen))


def one_hot(values) -> tuple[OneHotEncoding, np.ndarray, np.ndarray]:
    """Fit-and-transform in one step for a training column."""
    enc = one_hot_fit(values)
    matrix, absent = enc.transform(values)
    return enc, matrix, absent


def _kmeans_once(x: np.ndarray, k: int, rng: np.random.Generator, max_iter: int):
    n = x.shape[0]
    # k-means++: spread the initial centroids by squared-distance sampling.
    centers = np.empty((k, x.shape[1]))
    first = int(rng.integers(0, n))
    centers[0] = x[first]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = float(d2.sum())
        if total == 0.0:
            centers[c] = x[int(rng.integers(0, n))]
        else:
            centers[c] = x[int(rng.choice(n, p=d2 / total))]
        d2 = np.minimum(d2, np.sum((x - centers[c]) ** 2, axis=1))
    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        dists = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(dists, axis=1)
        for c in range(k):
            members = new_labels == c
            if not np.any(members):
                # Revive an empty cluster at the point farthest from its centroid.
                far = int(np.argmax(np.min(dists, axis=1)))
                centers[c] = x[far]
                new_labels[far] = c
                members = new_labels == c
            centers[c] = x[members].mean(axis=0)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    inertia = float(np.sum((x - centers[labels]) ** 2))
    return labels, centers, inertia


def kmeans(points, k: int, seed: int, n_init: int = 1, max_iter: int = 300):
    """Lloyd's algorithm with k-means++ seeding.

    Runs n_init independent starts (seed streams spawned from seed) and
    keeps the lowest inertia, earliest start winning ties. Output labels
    are canonical: clusters are renumbered by lexicographic centroid order,
    so identical inputs give bitwise identical results regardless of which
    start won.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise DataError("expected a non-empty 2D point array")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite coordinate in clustering input")
    if k < 1:
        raise DataError(f"k must be at least 1, got {k}")
    if k > x.shape[0]:
        raise DataError(f"k={k} exceeds {x.shape[0]} points")
    if n_init < 1:
        raise DataError(f"n_init must be at least 1, got {n_init}")
    best = None
    for child in np.random.SeedSequence(seed).spawn(n_init):
        rng = np.random.Generator(np.random.PCG64(child))
        labels, centers, inertia = _kmeans_once(x, k, rng, max_iter)
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia)
    labels, centers, _ = best
    order = np.lexsort(centers.T[::-1])
    remap = np.empty(k, dtype=np.int64)
    remap[order] = np.arange(k)
    return remap[labels], centers[order]


@dataclass(frozen=True)
class SilhouetteResult:
    """Per-point silhouette s = (b - a) / max(a, b) and its mean.

    a is the mean distance to the point's own cluster (0 for singletons,
    which score s = 0 by convention); b is the mean distance to the
    nearest other cluster.
    """

    s: np.ndarray
    a: np.ndarray
    b: np.ndarray
    mean: float


def silhouette(points, assignments) -> SilhouetteResult:
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    labels = np.asarray(assignments, dtype=np.int64)
    if labels.shape[0] != x.shape[0]:
        raise DataError(f"{x.shape[0]} points vs {labels.shape[0]} assignments")
    uniq = np.unique(labels)
    if uniq.size < 2:
        raise DataError("silhouette undefined for a single cluster")
    n = x.shape[0]
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    a = np.zeros(n)
    b = np.zeros(n)
    s = np.zeros(n)
    for i in range(n):
        own = labels == labels[i]
        size = int(own.sum())
        others = []
        for c in uniq:
            if c == labels[i]:
                continue
            others.append(float(dist[i, labels == c].mean()))
        b[i] = min(others)
        if size == 1:
            a[i] = 0.0
            s[i] = 0.0  # singleton convention
            continue
        a[i] = float(dist[i, own].sum()) / (size - 1)
        denom = max(a[i], b[i])
        s[i] = (b[i] - a[i]) / denom if denom > 0.0 else 0.0
    return SilhouetteResult(s=s, a=a, b=b, mean=float(s.mean()))


def select_drone_cluster(
    readings,
    assignments,
    truth=None,
    tolerance_ms: int = 1000,
    radius_m: float = 100.0,
    min_speed_mps: float = 1.0,
) -> int:
    """Pick the cluster of surveillance readings that is the drone.

    With a truth log each cluster is scored by how many of its readings
    have a truth position within the merge tolerance and radius_m; the
    highest count wins. Without truth the moving-target heuristic wins:
    net displacement of each cluster (first to last member position) per
    second of span, highest rate above min_speed_mps. Ties break to the
    lowest cluster id; no qualifying cluster raises "no drone cluster".
    """
    readings = list(readings)
    labels = _checked_labels(readings, assignments)
    uniq = sorted(int(c) for c in np.unique(labels))
    scores: dict[int, float] = {}
    if truth is not None:
        records, times = _truth_index(truth)
        for c in uniq:
            members = [readings[i] for i in np.flatnonzero(labels == c)]
            scores[c] = float(_truth_hits(members, records, times, tolerance_ms, radius_m))
        threshold = 1.0
    else:
        for c in uniq:
            members = [readings[i] for i in np.flatnonzero(labels == c)]
            scores[c] = _net_speed_mps(members)
        threshold = min_speed_mps
    best = max(uniq, key=lambda c: (scores[c], -c))
    if scores[best] < threshold:
        raise DataError("no drone cluster")
    return best


def _checked_labels(readings, assignments) -> np.ndarray:
    labels = np.asarray(assignments, dtype=np.int64)
    if labels.shape[0] != len(readings):
        raise DataError(f"{len(readings)} readings vs {labels.shape[0]} assignments")
    if len(readings) == 0:
        raise DataError("no readings to select from")
    return labels


def _truth_index(truth):
    records = sorted(truth, key=lambda rec: rec.t)
    if not records:
        raise DataError("empty truth log")
    return records, [rec.t for rec in records]


def _truth_hits(members, records, times, tolerance_ms, radius_m) -> int:
    count = 0
    for reading in members:
        if reading.position is None:
            continue
        j = bisect.bisect_left(times, reading.t - tolerance_ms)
        while j < len(records) and times[j] <= reading.t + tolerance_ms:
            if haversine_m(reading.position, records[j].position) <= radius_m:
                count += 1
                break
            j += 1
    return count


def _net_speed_mps(members) -> float:
    members = sorted((m for m in members if m.position is not None), key=lambda r: r.t)
    if len(members) < 2 or members[-1].t == members[0].t:
        return 0.0
    span_s = (members[-1].t - members[0].t) / 1000.0
    return haversine_m(members[0].position, members[-1].position) / span_s


def qualifying_drone_clusters(
    readings,
    assignments,
    truth=None,
    tolerance_ms: int = 1000,
    radius_m: float = 100.0,
    min_speed_mps: float = 1.0,
    min_truth_fraction: float = 0.5,
) -> list[int]:
    """Every cluster that behaves like the drone, not just the best one.

    Removal decisions need this rather than select_drone_cluster: when a
    partition cuts through the middle of a clean flight track, both halves
    qualify and the caller knows to discard nothing. With a truth log a
    cluster qualifies when at least min_truth_fraction of its positioned
    members (and at least one) sit within radius_m of a truth position
    inside the merge tolerance; without truth, when its net displacement
    rate clears min_speed_mps. Returns qualifying ids ascending; empty
    means nothing looks like a drone.
    """
    readings = list(readings)
    labels = _checked_labels(readings, assignments)
    uniq = sorted(int(c) for c in np.unique(labels))
    out = []
    if truth is not None:
        records, times = _truth_index(truth)
        for c in uniq:
            members = [readings[i] for i in np.flatnonzero(labels == c)]
            positioned = sum(1 for m in members if m.position is not None)
            hits = _truth_hits(members, records, times, tolerance_ms, radius_m)
            if hits >= 1 and positioned > 0 and hits / positioned >= min_truth_fraction:
                out.append(c)
    else:
        for c in uniq:
            members = [readings[i] for i in np.flatnonzero(labels == c)]
            if _net_speed_mps(members) >= min_speed_mps:
                out.append(c)
    return out


@dataclass(frozen=True)
class AnovaScore:
    feature: str
    f: float
    df: tuple
    target: str

    def __post_init__(self):
        if not self.f >= 0.0:  # also rejects NaN and -inf
            raise DataError(f"invalid F statistic: {self.f}")

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "f": None if math.isinf(self.f) else self.f,
            "infinite": math.isinf(self.f),
            "df": list(self.df),
            "target": self.target,
        }


def _anova_groups(groups) -> tuple[float, int, int]:
    sizes = [len(g) for g in groups]
    if len(groups) < 2 or any(s < 1 for s in sizes):
        raise DataError("degenerate group sizes: need >= 2 non-empty groups")
    n = sum(sizes)
    g = len(groups)
    if n - g < 1:
        raise DataError("degenerate group sizes: no within-group freedom")
    arrays = [np.asarray(grp, dtype=np.float64) for grp in groups]
    grand = float(np.concatenate(arrays).mean())
    ssb = sum(s * (float(a.mean()) - grand) ** 2 for s, a in zip(sizes, arrays))
    ssw = sum(float(np.sum((a - a.mean()) ** 2)) for a in arrays)
    df_b = g - 1
    df_w = n - g
    if ssw == 0.0:
        return (math.inf if ssb > 0.0 else 0.0), df_b, df_w
    return (ssb / df_b) / (ssw / df_w), df_b, df_w


def anova_f(x, y, feature: str = "", target: str = "") -> AnovaScore:
    """Univariate strength of one feature for one target.

    A string-valued target groups the feature per class and applies the
    classic one-way F; a numeric target uses the regression equivalent
    F = r^2 (n-2) / (1 - r^2). Rows where the feature is NaN are dropped.
    Perfect separation or correlation yields the +inf sentinel; a feature
    or target with no variance scores 0.
    """
    xv = np.asarray(x, dtype=np.float64).ravel()
    yl = list(y)
    if len(yl) != xv.shape[0]:
        raise DataError(f"{xv.shape[0]} feature values vs {len(yl)} targets")
    categorical = any(isinstance(v, str) for v in yl)
    keep = np.isfinite(xv)
    xv = xv[keep]
    yl = [v for v, k in zip(yl, keep) if k]
    if categorical:
        by_class: dict = {}
        for value, label in zip(xv, yl):
            by_class.setdefault(str(label), []).append(float(value))
        f, df_b, df_w = _anova_groups(list(by_class.values()))
        return AnovaScore(feature=feature, f=f, df=(df_b, df_w), target=target)
    yv = np.asarray(yl, dtype=np.float64)
    if not np.all(np.isfinite(yv)):
        raise DataError("non-finite target value")
    n = xv.shape[0]
    if n < 3:
        raise DataError(f"degenerate group sizes: need >= 3 samples, got {n}")
    r = _pearson(xv, yv)
    df = (1, n - 2)
    if r is None:
        return AnovaScore(feature=feature, f=0.0, df=df, target=target)
    r2 = min(r * r, 1.0)
    if r2 >= 1.0:
        return AnovaScore(feature=feature, f=math.inf, df=df, target=target)
    return AnovaScore(feature=feature, f=r2 * (n - 2) / (1.0 - r2), df=df, target=target)


def select_features(scores, k: int = 10) -> list:
    """Top-k feature names by F, ties by name, k clamped to what exists."""
    scores = list(scores)
    if not scores:
        raise DataError("no scores to select from")
    if k < 1:
        raise DataError(f"k must be at least 1, got {k}")
    ranked = sorted(scores, key=lambda sc: (-sc.f, sc.feature))
    return [sc.feature for sc in ranked[: min(k, len(ranked))]]
